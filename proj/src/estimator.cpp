#include "skinft/estimator.hpp"

#include <algorithm>
#include <numeric>

namespace skinft {

ContactSpec ContactSpec::atLinkOrigin(const std::string& linkName, ContactKind kind) {
    ContactSpec c;
    c.linkName = linkName;
    c.kind = kind;
    c.linkFromContact = SpatialTransform::identity(linkName);
    return c;
}

Wrench singleBodyExternalWrench(const SpatialInertia& m, const ProperKinematics& k,
                                const Wrench& sensorWrench) {
    requireFrame(sensorWrench.frame, k.frame, "singleBodyExternalWrench");
    Link body{k.frame, m};
    const Wrench phi = netWrench(body, k);
    Wrench out;
    out.frame = k.frame;
    out.force = phi.force - sensorWrench.force;
    out.moment = phi.moment - sensorWrench.moment;
    return out;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> contactColumns(const ContactSpec& c,
                                                        const SpatialTransform& baseFromLink) {
    const SpatialTransform baseFromContact = composeTransform(baseFromLink, c.linkFromContact);
    switch (c.kind) {
        case ContactKind::FullWrench:
            return baseFromContact.forceMatrix();
        case ContactKind::PureForce: {
            Eigen::Matrix<double, 6, Eigen::Dynamic> a(6, 3);
            a.setZero();
            a.topRows<3>() = baseFromContact.rotation;
            return a;
        }
        case ContactKind::ForceNorm: {
            if (std::abs(c.surfaceNormal.norm() - 1.0) > 1e-10)
                throw EstimationError("ForceNorm contact needs a unit surface normal");
            Vec6 dir = Vec6::Zero();
            dir.head<3>() = c.surfaceNormal;
            return baseFromContact.forceMatrix() * dir;
        }
        case ContactKind::Known:
            return Eigen::Matrix<double, 6, Eigen::Dynamic>(6, 0);
    }
    throw EstimationError("unreachable contact kind");
}

ContactProblem assembleProblem(const Multibody& m, const Submodel& sm, const FrameState& state,
                               const std::map<int, Wrench>& cutMeasurements,
                               const std::vector<ContactSpec>& contacts) {
    ContactProblem p;
    p.baseFrame = m.links[sm.baseLink].name;

    // b = sum of transformed net wrenches ...
    for (int l : sm.memberLinks) {
        const Wrench phi = netWrench(m.links[l], state.links[l].kin);
        const Wrench phiB = transformWrench(relativeTransform(state, sm.baseLink, l), phi);
        p.b += phiB.vec();
    }
    // ... minus the measured cut wrenches acting on this submodel ...
    for (const auto& side : sm.cuts) {
        const auto it = cutMeasurements.find(side.cutIndex);
        if (it == cutMeasurements.end())
            throw EstimationError("missing measurement for sensor cut '" +
                                  m.sensorCuts[side.cutIndex].joint + "'");
        const SensorCut& cut = m.sensorCuts[side.cutIndex];
        const Joint& jt = m.joints[m.jointIndex(cut.joint)];
        requireFrame(it->second.frame, cut.frame, "assembleProblem cut measurement");
        // normalize the reading to the wrench the parent side exerts on the child side
        Vec6 parentOnChild = it->second.vec();
        if (cut.sign == CutSign::ChildOnParent) parentOnChild = -parentOnChild;
        // wrench acting on this submodel across the cut
        Vec6 acting = (side.receivingLink == m.linkIndex(jt.child)) ? parentOnChild
                                                                    : Vec6(-parentOnChild);
        const int measLink = m.linkIndex(cut.frame);
        const Wrench actingW = Wrench::fromVec(acting, cut.frame);
        const Wrench actingB = transformWrench(relativeTransform(state, sm.baseLink, measLink), actingW);
        p.b -= actingB.vec();
    }

    // ... minus known contact wrenches; unknowns contribute columns of A.
    int cols = 0;
    std::vector<Eigen::Matrix<double, 6, Eigen::Dynamic>> blocks;
    for (size_t ci = 0; ci < contacts.size(); ++ci) {
        const ContactSpec& c = contacts[ci];
        const int link = m.linkIndex(c.linkName);
        if (!sm.contains(link))
            throw EstimationError("contact on link '" + c.linkName +
                                  "' which is not a member of the submodel");
        const SpatialTransform baseFromLink = relativeTransform(state, sm.baseLink, link);
        ContactProblem::Entry e;
        e.contactIndex = static_cast<int>(ci);
        e.kind = c.kind;
        e.column = cols;
        e.linkName = c.linkName;
        e.linkFromContact = c.linkFromContact;
        e.surfaceNormal = c.surfaceNormal;
        e.knownWrench = c.knownWrench;
        if (c.kind == ContactKind::Known) {
            e.width = 0;
            requireFrame(c.knownWrench.frame, c.linkFromContact.from, "assembleProblem known wrench");
            const SpatialTransform baseFromContact = composeTransform(baseFromLink, c.linkFromContact);
            p.b -= transformWrench(baseFromContact, c.knownWrench).vec();
        } else {
            const auto block = contactColumns(c, baseFromLink);
            e.width = static_cast<int>(block.cols());
            cols += e.width;
            blocks.push_back(block);
        }
        p.layout.push_back(std::move(e));
    }
    p.A.resize(6, cols);
    int at = 0;
    for (const auto& blk : blocks) {
        p.A.middleCols(at, blk.cols()) = blk;
        at += static_cast<int>(blk.cols());
    }
    return p;
}

ContactSolution solveProblem(const ContactProblem& p) {
    ContactSolution sol;
    if (p.A.cols() > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(p.A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-10);
        sol.x = svd.solve(p.b);
        sol.rankDeficient = svd.rank() < p.A.cols();
        sol.residual = p.A * sol.x - p.b;
    } else {
        sol.x.resize(0);
        sol.residual = -p.b;
    }
    sol.residualNorm = sol.residual.norm();

    sol.contactWrenches.resize(p.layout.size());
    sol.contactLinks.assign(p.layout.size(), -1);
    for (const auto& e : p.layout) {
        Wrench contactW;
        contactW.frame = e.linkFromContact.from;
        switch (e.kind) {
            case ContactKind::FullWrench:
                contactW = Wrench::fromVec(sol.x.segment(e.column, 6), e.linkFromContact.from);
                break;
            case ContactKind::PureForce:
                contactW.force = e.linkFromContact.rotation * sol.x.segment(e.column, 3);
                contactW.frame = e.linkName;
                break;
            case ContactKind::ForceNorm:
                contactW.force = e.surfaceNormal * sol.x[e.column];
                break;
            case ContactKind::Known:
                contactW = e.knownWrench;
                break;
        }
        if (e.kind == ContactKind::PureForce) {
            // A_f carries only the rotation; the reported wrench is the pure
            // force re-expressed in the link frame with zero moment
            sol.contactWrenches[e.contactIndex] = contactW;
        } else {
            sol.contactWrenches[e.contactIndex] = transformWrench(e.linkFromContact, contactW);
        }
    }
    return sol;
}

JointTorques jointTorques(const Multibody& m, const FrameState& state,
                          const std::map<int, Wrench>& externalWrenches,
                          const std::vector<SkinContact>& skinContacts) {
    // W_L = phi_L - f^x_L - sum of known skin wrenches on L
    std::vector<Vec6> w(m.links.size());
    for (size_t l = 0; l < m.links.size(); ++l) {
        const Wrench phi = netWrench(m.links[l], state.links[l].kin);
        w[l] = phi.vec();
    }
    for (const auto& [l, fx] : externalWrenches) {
        requireFrame(fx.frame, m.links[l].name, "jointTorques external wrench");
        w[l] -= fx.vec();
    }
    for (const auto& sc : skinContacts) {
        const int l = m.linkIndex(sc.linkName);
        requireFrame(sc.wrench.frame, m.links[l].name, "jointTorques skin wrench");
        w[l] -= sc.wrench.vec();
    }

    // inward accumulation: F_L = W_L + sum over children of X * F_child
    std::vector<int> order(m.links.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return m.depth[a] > m.depth[b]; });
    std::vector<Vec6> acc = w;
    JointTorques out;
    out.tau.assign(m.joints.size(), 0.0);
    for (int l : order) {
        const int ji = m.parentJoint[l];
        if (ji < 0) continue;
        const Joint& jt = m.joints[ji];
        const int parent = m.linkIndex(jt.parent);
        if (jt.kind == JointKind::Revolute)
            out.tau[ji] = jt.axis.dot(acc[l].tail<3>());
        const Wrench fl = Wrench::fromVec(acc[l], m.links[l].name);
        acc[parent] += transformWrench(relativeTransform(state, parent, l), fl).vec();
    }
    return out;
}

FrameEstimate estimateFrame(const Multibody& m, const FrameState& state,
                            const std::map<int, Wrench>& cutMeasurements,
                            const std::vector<SkinContact>& skinContacts,
                            const std::vector<ContactSpec>& unknownContacts) {
    const auto submodels = decompose(m);
    FrameEstimate out;
    out.submodelSolutions.resize(submodels.size());

    std::map<int, Wrench> externalWrenches;
    auto addExternal = [&](int link, const Wrench& wr) {
        auto [it, inserted] = externalWrenches.try_emplace(link, wr);
        if (!inserted) {
            it->second.force += wr.force;
            it->second.moment += wr.moment;
        }
    };

    for (const auto& sm : submodels) {
        std::vector<ContactSpec> contacts;
        std::vector<char> isSkin;
        for (const auto& c : unknownContacts) {
            if (sm.contains(m.linkIndex(c.linkName))) {
                contacts.push_back(c);
                isSkin.push_back(0);
            }
        }
        for (const auto& sc : skinContacts) {
            if (!sm.contains(m.linkIndex(sc.linkName))) continue;
            ContactSpec spec = ContactSpec::atLinkOrigin(sc.linkName, ContactKind::Known);
            spec.knownWrench = sc.wrench;
            contacts.push_back(std::move(spec));
            isSkin.push_back(1);
        }
        const ContactProblem p = assembleProblem(m, sm, state, cutMeasurements, contacts);
        ContactSolution sol = solveProblem(p);
        for (size_t i = 0; i < contacts.size(); ++i) {
            const int link = m.linkIndex(contacts[i].linkName);
            sol.contactLinks[i] = link;
            if (!isSkin[i]) addExternal(link, sol.contactWrenches[i]);
        }
        out.submodelSolutions[sm.id] = std::move(sol);
    }
    out.torques = jointTorques(m, state, externalWrenches, skinContacts);
    return out;
}

}  // namespace skinft
