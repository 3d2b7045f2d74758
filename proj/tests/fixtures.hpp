#pragma once

// Shared generators for randomized model/state test instances.

#include <random>
#include <string>
#include <vector>

#include "skinft/estimator.hpp"
#include "skinft/model.hpp"
#include "skinft/skinfield.hpp"
#include "skinft/spatial.hpp"

namespace fix {

using namespace skinft;

inline Vec3 randVec3(std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> d(-scale, scale);
    return Vec3(d(rng), d(rng), d(rng));
}

inline Vec3 randUnit(std::mt19937_64& rng) {
    Vec3 v;
    do {
        v = randVec3(rng);
    } while (v.norm() < 1e-3);
    return v.normalized();
}

inline Mat3 randRotation(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    return Eigen::AngleAxisd(ang(rng), randUnit(rng)).toRotationMatrix();
}

inline SpatialTransform randTransform(std::mt19937_64& rng, const std::string& from,
                                      const std::string& to, double span = 1.0) {
    return SpatialTransform(randRotation(rng), randVec3(rng, span), from, to);
}

inline SpatialInertia randInertia(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mass(0.3, 3.0);
    std::uniform_real_distribution<double> diag(0.05, 0.4);
    const Mat3 r = randRotation(rng);
    const Mat3 d = Vec3(diag(rng), diag(rng), diag(rng)).asDiagonal();
    return SpatialInertia(mass(rng), randVec3(rng, 0.1), r * d * r.transpose());
}

inline Wrench randWrench(std::mt19937_64& rng, const std::string& frame, double scale = 10.0) {
    return Wrench{randVec3(rng, scale), randVec3(rng, scale), frame};
}

// Serial chain: link0 (root) .. link{n-1}, joints j0 .. j{n-2}, sensor cuts on
// the listed joint indices. Random axes, origins and inertias.
inline Multibody makeChain(std::mt19937_64& rng, int nLinks, const std::vector<int>& cutJoints = {},
                           double span = 0.4) {
    Multibody m;
    for (int i = 0; i < nLinks; ++i)
        m.links.push_back({"link" + std::to_string(i), randInertia(rng)});
    for (int i = 0; i + 1 < nLinks; ++i) {
        Joint j;
        j.name = "j" + std::to_string(i);
        j.parent = "link" + std::to_string(i);
        j.child = "link" + std::to_string(i + 1);
        j.kind = JointKind::Revolute;
        j.axis = randUnit(rng);
        j.origin = randTransform(rng, j.child, j.parent, span);
        m.joints.push_back(std::move(j));
    }
    for (int c : cutJoints) {
        std::uniform_int_distribution<int> coin(0, 1);
        SensorCut cut;
        cut.joint = "j" + std::to_string(c);
        cut.frame = coin(rng) ? m.joints[c].parent : m.joints[c].child;
        cut.sign = coin(rng) ? CutSign::ParentOnChild : CutSign::ChildOnParent;
        m.sensorCuts.push_back(std::move(cut));
    }
    m.finalize();
    return m;
}

struct RandState {
    std::vector<double> q, qd, qdd;
    ProperKinematics base;
};

inline RandState randJointState(std::mt19937_64& rng, const Multibody& m, double motion = 1.0) {
    std::uniform_real_distribution<double> d(-motion, motion);
    RandState s;
    s.q.resize(m.joints.size());
    s.qd.resize(m.joints.size());
    s.qdd.resize(m.joints.size());
    for (size_t i = 0; i < m.joints.size(); ++i) {
        s.q[i] = d(rng);
        s.qd[i] = d(rng);
        s.qdd[i] = d(rng);
    }
    s.base.properAcc << randVec3(rng, 2.0) + Vec3(0, 0, 9.81), randVec3(rng, motion);
    s.base.angVel = randVec3(rng, motion);
    s.base.frame = m.links[m.root].name;
    return s;
}

// Random external wrenches on every link, with the root link's wrench chosen
// so that the whole tree is in global balance: sum X_(root<-L) (phi_L - fx_L) = 0.
inline std::map<int, Wrench> balancedWrenches(std::mt19937_64& rng, const Multibody& m,
                                              const FrameState& state) {
    std::map<int, Wrench> out;
    Vec6 sum = Vec6::Zero();
    for (size_t l = 0; l < m.links.size(); ++l) {
        const Wrench phi = netWrench(m.links[l], state.links[l].kin);
        Vec6 net = phi.vec();
        if (static_cast<int>(l) != m.root) {
            const Wrench fx = randWrench(rng, m.links[l].name);
            out.emplace(static_cast<int>(l), fx);
            net -= fx.vec();
        }
        sum += relativeTransform(state, m.root, static_cast<int>(l)).forceMatrix() * net;
    }
    out.emplace(m.root, Wrench::fromVec(sum, m.links[m.root].name));
    return out;
}

// Flat rectangular taxel grid in the z=0 plane of the link frame, normals +z,
// chart coordinates equal to the in-plane position.
inline SkinPatch makeGridPatch(const std::string& link, int nx, int ny, double spacing,
                               double radius, double u0 = 0.0, double v0 = 0.0,
                               double margin = 0.005) {
    SkinPatch p;
    p.linkName = link;
    p.chartBounds = {u0 - margin, u0 + (nx - 1) * spacing + margin, v0 - margin,
                     v0 + (ny - 1) * spacing + margin};
    int id = 0;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            Taxel t;
            t.id = id++;
            t.u = u0 + i * spacing;
            t.v = v0 + j * spacing;
            t.position = Vec3(t.u, t.v, 0.0);
            t.normal = Vec3::UnitZ();
            t.radius = radius;
            t.area = M_PI * radius * radius;
            p.taxels.push_back(t);
        }
    }
    return p;
}

}  // namespace fix
