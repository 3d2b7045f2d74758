#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "skinft/model.hpp"
#include "skinft/skinfield.hpp"
#include "skinft/spatial.hpp"

namespace skinft {

struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ContactKind { FullWrench, PureForce, ForceNorm, Known };

struct ContactSpec {
    std::string linkName;
    ContactKind kind = ContactKind::FullWrench;
    // Contact frame placement relative to the contact link (link <- contact frame).
    SpatialTransform linkFromContact;
    Vec3 surfaceNormal = Vec3::UnitZ();  // contact frame, unit (ForceNorm only)
    Wrench knownWrench;                  // contact frame (Known only)

    static ContactSpec atLinkOrigin(const std::string& linkName, ContactKind kind);
};

struct ContactProblem {
    Eigen::Matrix<double, 6, Eigen::Dynamic> A;
    Vec6 b = Vec6::Zero();
    struct Entry {
        int contactIndex;
        ContactKind kind;
        int column;  // first column in A
        int width;   // 6, 3, 1 or 0
        // carried along so the solution can be reassembled without the specs
        std::string linkName;
        SpatialTransform linkFromContact;
        Vec3 surfaceNormal;
        Wrench knownWrench;
    };
    std::vector<Entry> layout;
    std::string baseFrame;
};

struct ContactSolution {
    std::vector<Wrench> contactWrenches;  // per contact, link frame
    std::vector<int> contactLinks;        // link index per contact (-1 if unknown name)
    Eigen::VectorXd x;
    Vec6 residual = Vec6::Zero();
    double residualNorm = 0.0;
    bool rankDeficient = false;
};

struct JointTorques {
    std::vector<double> tau;  // indexed as Multibody::joints, N*m
};

// Eq-style single body estimate: f^x = phi - f^s, all in the body frame.
Wrench singleBodyExternalWrench(const SpatialInertia& m, const ProperKinematics& k,
                                const Wrench& sensorWrench);

// Columns contributed by one contact, mapped into the submodel base frame.
// baseFromLink carries the contact link frame into the base frame.
Eigen::Matrix<double, 6, Eigen::Dynamic> contactColumns(const ContactSpec& c,
                                                        const SpatialTransform& baseFromLink);

// Cut measurements are keyed by sensor-cut index, expressed per the cut's
// declared frame and sign convention.
ContactProblem assembleProblem(const Multibody& m, const Submodel& sm, const FrameState& state,
                               const std::map<int, Wrench>& cutMeasurements,
                               const std::vector<ContactSpec>& contacts);

// Minimum-norm least-squares solution via SVD with relative cutoff 1e-10.
ContactSolution solveProblem(const ContactProblem& p);

// Joint torques on the full tree. externalWrenches maps link index to the
// total non-skin external wrench on that link (link frame, about the link
// origin); skinContacts carry the known skin wrenches.
JointTorques jointTorques(const Multibody& m, const FrameState& state,
                          const std::map<int, Wrench>& externalWrenches,
                          const std::vector<SkinContact>& skinContacts);

struct FrameEstimate {
    std::vector<ContactSolution> submodelSolutions;  // indexed as decompose(m)
    JointTorques torques;
};

// Full pipeline for one time step: decompose, assemble and solve per submodel,
// then recover torques from solved plus known wrenches.
FrameEstimate estimateFrame(const Multibody& m, const FrameState& state,
                            const std::map<int, Wrench>& cutMeasurements,
                            const std::vector<SkinContact>& skinContacts,
                            const std::vector<ContactSpec>& unknownContacts);

}  // namespace skinft
