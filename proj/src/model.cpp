#include "skinft/model.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace skinft {

using nlohmann::json;

void Multibody::finalize() {
    if (links.empty()) throw ModelError("model has no links");
    std::set<std::string> names;
    for (const auto& l : links)
        if (!names.insert(l.name).second) throw ModelError("duplicate link name '" + l.name + "'");
    if (joints.size() != links.size() - 1)
        throw ModelError("joints must form a spanning tree (n_J = n_L - 1)");

    parentJoint.assign(links.size(), -1);
    childJoints.assign(links.size(), {});
    std::vector<char> isChild(links.size(), 0);
    std::set<std::string> jointNames;
    for (size_t j = 0; j < joints.size(); ++j) {
        const Joint& jt = joints[j];
        if (!jointNames.insert(jt.name).second)
            throw ModelError("duplicate joint name '" + jt.name + "'");
        if (jt.parent == jt.child) throw ModelError("joint '" + jt.name + "' connects a link to itself");
        const int p = linkIndex(jt.parent);
        const int c = linkIndex(jt.child);
        if (jt.kind == JointKind::Revolute && std::abs(jt.axis.norm() - 1.0) > 1e-10)
            throw ModelError("joint '" + jt.name + "' axis is not unit norm");
        if (isChild[c]) throw ModelError("link '" + jt.child + "' has multiple parents");
        isChild[c] = 1;
        parentJoint[c] = static_cast<int>(j);
        childJoints[p].push_back(static_cast<int>(j));
    }
    root = -1;
    for (size_t i = 0; i < links.size(); ++i) {
        if (!isChild[i]) {
            if (root >= 0) throw ModelError("tree is disconnected (multiple roots)");
            root = static_cast<int>(i);
        }
    }
    if (root < 0) throw ModelError("joints contain a cycle");

    depth.assign(links.size(), -1);
    std::deque<int> bfs{root};
    depth[root] = 0;
    size_t seen = 1;
    while (!bfs.empty()) {
        const int l = bfs.front();
        bfs.pop_front();
        for (int j : childJoints[l]) {
            const int c = linkIndex(joints[j].child);
            depth[c] = depth[l] + 1;
            bfs.push_back(c);
            ++seen;
        }
    }
    if (seen != links.size()) throw ModelError("tree is disconnected");

    std::set<std::string> cutJoints;
    for (const auto& cut : sensorCuts) {
        const int j = jointIndex(cut.joint);
        if (!cutJoints.insert(cut.joint).second)
            throw ModelError("duplicate sensor cut on joint '" + cut.joint + "'");
        if (cut.frame != joints[j].parent && cut.frame != joints[j].child)
            throw ModelError("sensor cut frame '" + cut.frame +
                             "' is neither side of joint '" + cut.joint + "'");
    }
    for (const auto& p : patches) linkIndex(p.linkName);
}

int Multibody::linkIndex(const std::string& name) const {
    for (size_t i = 0; i < links.size(); ++i)
        if (links[i].name == name) return static_cast<int>(i);
    throw ModelError("unknown link '" + name + "'");
}

int Multibody::jointIndex(const std::string& name) const {
    for (size_t i = 0; i < joints.size(); ++i)
        if (joints[i].name == name) return static_cast<int>(i);
    throw ModelError("unknown joint '" + name + "'");
}

int Multibody::cutIndexForJoint(const std::string& jointName) const {
    for (size_t i = 0; i < sensorCuts.size(); ++i)
        if (sensorCuts[i].joint == jointName) return static_cast<int>(i);
    return -1;
}

const SkinPatch* Multibody::patchForLink(const std::string& linkName) const {
    for (const auto& p : patches)
        if (p.linkName == linkName) return &p;
    return nullptr;
}

bool Submodel::contains(int link) const {
    return std::binary_search(memberLinks.begin(), memberLinks.end(), link);
}

namespace {

void rejectUnknownKeys(const json& obj, std::initializer_list<const char*> allowed,
                       const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::none_of(allowed.begin(), allowed.end(),
                         [&](const char* k) { return it.key() == k; }))
            throw ModelError("unknown key '" + it.key() + "' in " + where);
    }
}

Vec3 parseVec3(const json& a, const std::string& where) {
    if (!a.is_array() || a.size() != 3) throw ModelError(where + " must be a 3-array");
    return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

Mat3 parseMat3(const json& a, const std::string& where) {
    if (!a.is_array() || a.size() != 9) throw ModelError(where + " must be 9 row-major reals");
    Mat3 m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = a[3 * r + c].get<double>();
    return m;
}

}  // namespace

Multibody loadModel(const json& doc) {
    if (!doc.is_object()) throw ModelError("model document must be a JSON object");
    rejectUnknownKeys(doc, {"links", "joints", "sensor_cuts", "patches"}, "model document");

    Multibody m;
    for (const auto& l : doc.at("links")) {
        rejectUnknownKeys(l, {"name", "mass", "com", "inertia"}, "link");
        Link link;
        link.name = l.at("name").get<std::string>();
        link.inertia = SpatialInertia(l.at("mass").get<double>(),
                                      parseVec3(l.at("com"), "link com"),
                                      parseMat3(l.at("inertia"), "link inertia"));
        m.links.push_back(std::move(link));
    }
    for (const auto& j : doc.value("joints", json::array())) {
        rejectUnknownKeys(j, {"name", "parent", "child", "kind", "axis", "origin"}, "joint");
        Joint joint;
        joint.name = j.at("name").get<std::string>();
        joint.parent = j.at("parent").get<std::string>();
        joint.child = j.at("child").get<std::string>();
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "revolute") joint.kind = JointKind::Revolute;
        else if (kind == "fixed") joint.kind = JointKind::Fixed;
        else throw ModelError("joint kind must be 'revolute' or 'fixed'");
        if (joint.kind == JointKind::Revolute) joint.axis = parseVec3(j.at("axis"), "joint axis");
        Mat3 rot = Mat3::Identity();
        Vec3 trans = Vec3::Zero();
        if (j.contains("origin")) {
            const auto& o = j.at("origin");
            rejectUnknownKeys(o, {"rotation", "translation"}, "joint origin");
            if (o.contains("rotation")) rot = parseMat3(o.at("rotation"), "joint origin rotation");
            if (o.contains("translation")) trans = parseVec3(o.at("translation"), "joint origin translation");
        }
        joint.origin = SpatialTransform(rot, trans, joint.child, joint.parent);
        m.joints.push_back(std::move(joint));
    }
    for (const auto& c : doc.value("sensor_cuts", json::array())) {
        rejectUnknownKeys(c, {"joint", "frame", "sign"}, "sensor cut");
        SensorCut cut;
        cut.joint = c.at("joint").get<std::string>();
        cut.frame = c.at("frame").get<std::string>();
        const auto sign = c.value("sign", std::string("parent_on_child"));
        if (sign == "parent_on_child") cut.sign = CutSign::ParentOnChild;
        else if (sign == "child_on_parent") cut.sign = CutSign::ChildOnParent;
        else throw ModelError("sensor cut sign must be 'parent_on_child' or 'child_on_parent'");
        m.sensorCuts.push_back(std::move(cut));
    }
    for (const auto& p : doc.value("patches", json::array())) {
        rejectUnknownKeys(p, {"link", "bounds", "taxels"}, "patch");
        SkinPatch patch;
        patch.linkName = p.at("link").get<std::string>();
        const auto& b = p.at("bounds");
        if (!b.is_array() || b.size() != 4) throw ModelError("patch bounds must be [u1,u2,v1,v2]");
        for (int i = 0; i < 4; ++i) patch.chartBounds[i] = b[i].get<double>();
        for (const auto& t : p.at("taxels")) {
            rejectUnknownKeys(t, {"id", "u", "v", "px", "py", "pz", "nx", "ny", "nz", "radius", "area"},
                              "taxel");
            Taxel tx;
            tx.id = t.at("id").get<int>();
            tx.u = t.at("u").get<double>();
            tx.v = t.at("v").get<double>();
            tx.position = Vec3(t.at("px").get<double>(), t.at("py").get<double>(), t.at("pz").get<double>());
            tx.normal = Vec3(t.at("nx").get<double>(), t.at("ny").get<double>(), t.at("nz").get<double>());
            tx.radius = t.at("radius").get<double>();
            tx.area = t.at("area").get<double>();
            if (std::abs(tx.normal.norm() - 1.0) > 1e-6) throw ModelError("taxel normal is not unit norm");
            if (tx.radius <= 0.0) throw ModelError("taxel radius must be positive");
            if (tx.area <= 0.0) throw ModelError("taxel area must be positive");
            if (tx.u < patch.chartBounds[0] || tx.u > patch.chartBounds[1] ||
                tx.v < patch.chartBounds[2] || tx.v > patch.chartBounds[3])
                throw ModelError("taxel uv outside chart bounds");
            patch.taxels.push_back(tx);
        }
        if (patch.taxels.size() < 3) throw ModelError("patch needs at least 3 taxels");
        m.patches.push_back(std::move(patch));
    }
    m.finalize();
    return m;
}

Multibody loadModelFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ModelError(std::string("model parse error: ") + e.what());
    }
    return loadModel(doc);
}

std::vector<Submodel> decompose(const Multibody& m) {
    std::vector<char> cutJoint(m.joints.size(), 0);
    for (const auto& cut : m.sensorCuts) cutJoint[m.jointIndex(cut.joint)] = 1;

    std::vector<int> comp(m.links.size(), -1);
    int nComp = 0;
    for (size_t seed = 0; seed < m.links.size(); ++seed) {
        if (comp[seed] >= 0) continue;
        std::deque<int> bfs{static_cast<int>(seed)};
        comp[seed] = nComp;
        while (!bfs.empty()) {
            const int l = bfs.front();
            bfs.pop_front();
            auto visit = [&](int j, int other) {
                if (cutJoint[j] || comp[other] >= 0) return;
                comp[other] = nComp;
                bfs.push_back(other);
            };
            for (int j : m.childJoints[l]) visit(j, m.linkIndex(m.joints[j].child));
            if (m.parentJoint[l] >= 0)
                visit(m.parentJoint[l], m.linkIndex(m.joints[m.parentJoint[l]].parent));
        }
        ++nComp;
    }

    std::vector<Submodel> out(nComp);
    for (int k = 0; k < nComp; ++k) out[k].id = k;
    for (size_t l = 0; l < m.links.size(); ++l) out[comp[l]].memberLinks.push_back(static_cast<int>(l));
    for (auto& sm : out) {
        sm.baseLink = sm.memberLinks.front();
        for (int l : sm.memberLinks)
            if (m.depth[l] < m.depth[sm.baseLink]) sm.baseLink = l;
    }
    for (size_t c = 0; c < m.sensorCuts.size(); ++c) {
        const Joint& jt = m.joints[m.jointIndex(m.sensorCuts[c].joint)];
        const int p = m.linkIndex(jt.parent);
        const int ch = m.linkIndex(jt.child);
        out[comp[ch]].cuts.push_back({static_cast<int>(c), p, ch});
        out[comp[p]].cuts.push_back({static_cast<int>(c), ch, p});
    }
    return out;
}

namespace {

// parent frame -> child frame at joint position q
SpatialTransform jointTransform(const Joint& j, double q) {
    if (j.kind == JointKind::Fixed) return j.origin;
    const Mat3 rot = j.origin.rotation * Eigen::AngleAxisd(q, j.axis).toRotationMatrix();
    return SpatialTransform(rot, j.origin.translation, j.child, j.parent);
}

}  // namespace

FrameState propagateKinematics(const Multibody& m, const ProperKinematics& baseState,
                               const std::vector<double>& q, const std::vector<double>& qd,
                               const std::vector<double>& qdd) {
    if (q.size() != m.joints.size() || qd.size() != m.joints.size() || qdd.size() != m.joints.size())
        throw ModelError("joint state vectors must be sized to the joint count");

    FrameState out;
    out.links.resize(m.links.size());
    LinkState& rootState = out.links[m.root];
    rootState.kin = baseState;
    rootState.kin.frame = m.links[m.root].name;
    rootState.rootFromLink = SpatialTransform::identity(m.links[m.root].name);
    rootState.rootFromLink.to = m.links[m.root].name;

    std::deque<int> bfs{m.root};
    while (!bfs.empty()) {
        const int l = bfs.front();
        bfs.pop_front();
        const LinkState& ps = out.links[l];
        const Vec3 wP = ps.kin.angVel;
        const Vec3 aLinP = ps.kin.properAcc.head<3>();
        const Vec3 aAngP = ps.kin.properAcc.tail<3>();
        for (int ji : m.childJoints[l]) {
            const Joint& jt = m.joints[ji];
            const int c = m.linkIndex(jt.child);
            const double qi = jt.kind == JointKind::Revolute ? q[ji] : 0.0;
            const double qdi = jt.kind == JointKind::Revolute ? qd[ji] : 0.0;
            const double qddi = jt.kind == JointKind::Revolute ? qdd[ji] : 0.0;

            const SpatialTransform pFromC = jointTransform(jt, qi);
            const Mat3 rCP = pFromC.rotation.transpose();
            const Vec3 o = pFromC.translation;  // child origin in parent frame

            LinkState& cs = out.links[c];
            cs.kin.frame = jt.child;
            cs.kin.angVel = rCP * wP + jt.axis * qdi;
            const Vec3 aAngC = rCP * aAngP + jt.axis * qddi + (rCP * wP).cross(jt.axis * qdi);
            const Vec3 aLinC = rCP * (aLinP + aAngP.cross(o) + wP.cross(wP.cross(o)));
            cs.kin.properAcc << aLinC, aAngC;
            cs.rootFromLink = composeTransform(ps.rootFromLink, pFromC);
            bfs.push_back(c);
        }
    }
    return out;
}

Wrench netWrench(const Link& link, const ProperKinematics& k) {
    requireFrame(k.frame, link.name, "netWrench");
    Wrench phi = applyInertia(link.inertia, k.properAcc);
    phi.frame = link.name;
    Vec6 wOnly = Vec6::Zero();
    wOnly.tail<3>() = k.angVel;
    Wrench mw = applyInertia(link.inertia, wOnly);
    mw.frame = link.name;
    Twist zeroLin;
    zeroLin.angular = k.angVel;
    zeroLin.frame = link.name;
    const Wrench gyro = dualCross(zeroLin, mw);
    phi.force += gyro.force;
    phi.moment += gyro.moment;
    return phi;
}

SpatialTransform relativeTransform(const FrameState& s, int toLink, int fromLink) {
    if (toLink == fromLink) {
        return SpatialTransform::identity(s.links[toLink].rootFromLink.from);
    }
    return composeTransform(s.links[toLink].rootFromLink.inverse(), s.links[fromLink].rootFromLink);
}

}  // namespace skinft
