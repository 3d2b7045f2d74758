#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "skinft/skinfield.hpp"
#include "skinft/spatial.hpp"

namespace skinft {

struct Link {
    std::string name;  // doubles as the frame identifier
    SpatialInertia inertia;
};

enum class JointKind { Revolute, Fixed };

struct Joint {
    std::string name;
    std::string parent;
    std::string child;
    JointKind kind = JointKind::Revolute;
    Vec3 axis = Vec3::UnitZ();      // child frame, unit (revolute only)
    SpatialTransform origin;        // parent frame -> child frame at zero position
};

// Measurement convention of an embedded six-axis F/T sensor cut.
enum class CutSign { ParentOnChild, ChildOnParent };

struct SensorCut {
    std::string joint;
    std::string frame;  // link frame the measurement is expressed in (parent or child)
    CutSign sign = CutSign::ParentOnChild;
};

class Multibody {
public:
    std::vector<Link> links;
    std::vector<Joint> joints;
    std::vector<SensorCut> sensorCuts;
    std::vector<SkinPatch> patches;

    // Derived maps, filled by finalize().
    int root = -1;
    std::vector<int> parentJoint;            // per link, joint index to its parent (-1 at root)
    std::vector<std::vector<int>> childJoints;  // per link, outgoing joint indices
    std::vector<int> depth;

    void finalize();  // validates tree structure and builds the maps above

    int linkIndex(const std::string& name) const;
    int jointIndex(const std::string& name) const;
    int cutIndexForJoint(const std::string& jointName) const;  // -1 when uncut
    const SkinPatch* patchForLink(const std::string& linkName) const;
};

struct Submodel {
    int id = 0;
    std::vector<int> memberLinks;  // link indices, sorted
    int baseLink = -1;             // lowest-depth member
    struct CutSide {
        int cutIndex;       // into Multibody::sensorCuts
        int actingLink;     // link outside this submodel (D)
        int receivingLink;  // link inside this submodel (L)
    };
    std::vector<CutSide> cuts;

    bool contains(int link) const;
};

struct LinkState {
    ProperKinematics kin;
    SpatialTransform rootFromLink;  // pose of the link frame in the root frame
};

struct FrameState {
    std::vector<LinkState> links;  // indexed as Multibody::links
};

Multibody loadModel(const nlohmann::json& doc);
Multibody loadModelFile(const std::string& path);

// Connected components of the tree after removing cut joints.
std::vector<Submodel> decompose(const Multibody& m);

// Outward recursion of angular velocity and proper acceleration from the base
// state; q/qd/qdd are indexed as Multibody::joints (fixed-joint entries ignored).
FrameState propagateKinematics(const Multibody& m, const ProperKinematics& baseState,
                               const std::vector<double>& q, const std::vector<double>& qd,
                               const std::vector<double>& qdd);

// phi = M a^g + [0; w] x* M [0; w], in the link frame.
Wrench netWrench(const Link& link, const ProperKinematics& k);

// Wrench transform from `fromLink`'s frame to `toLink`'s frame at the given state.
SpatialTransform relativeTransform(const FrameState& s, int toLink, int fromLink);

}  // namespace skinft
