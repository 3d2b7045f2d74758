#include "skinft/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>

#include <nlohmann/json.hpp>

#include "skinft/logio.hpp"

namespace skinft {

using nlohmann::json;

namespace {

Mat6 dualCrossMatrix(const Vec3& w) {
    Mat6 x = Mat6::Zero();
    x.topLeftCorner<3, 3>() = skew(w);
    x.bottomRightCorner<3, 3>() = skew(w);
    return x;
}

std::vector<int> subtreeLinks(const Multibody& m, int rootLink) {
    std::vector<int> out;
    std::deque<int> bfs{rootLink};
    while (!bfs.empty()) {
        const int l = bfs.front();
        bfs.pop_front();
        out.push_back(l);
        for (int j : m.childJoints[l]) bfs.push_back(m.linkIndex(m.joints[j].child));
    }
    return out;
}

}  // namespace

OracleResult inverseDynamicsOracle(const Multibody& m, const FrameState& state,
                                   const std::map<int, Wrench>& externalWrenches) {
    OracleResult out;
    out.phi.resize(m.links.size());

    // net wrenches from the assembled 6x6 inertia
    std::vector<Vec6> phi(m.links.size());
    for (size_t l = 0; l < m.links.size(); ++l) {
        const Mat6 M = m.links[l].inertia.matrix();
        const auto& k = state.links[l].kin;
        Vec6 wOnly = Vec6::Zero();
        wOnly.tail<3>() = k.angVel;
        phi[l] = M * k.properAcc + dualCrossMatrix(k.angVel) * (M * wOnly);
        out.phi[l] = Wrench::fromVec(phi[l], m.links[l].name);
    }

    std::vector<Vec6> net = phi;
    for (const auto& [l, fx] : externalWrenches) {
        requireFrame(fx.frame, m.links[l].name, "inverseDynamicsOracle external wrench");
        net[l] -= fx.vec();
    }

    // per-joint internal wrench by explicit subtree summation
    out.tau.assign(m.joints.size(), 0.0);
    std::vector<Vec6> jointWrench(m.joints.size());  // f_{parent,child} in child frame
    for (size_t j = 0; j < m.joints.size(); ++j) {
        const Joint& jt = m.joints[j];
        const int child = m.linkIndex(jt.child);
        Vec6 f = Vec6::Zero();
        for (int l : subtreeLinks(m, child))
            f += relativeTransform(state, child, l).forceMatrix() * net[l];
        jointWrench[j] = f;
        if (jt.kind == JointKind::Revolute) out.tau[j] = jt.axis.dot(f.tail<3>());
    }

    for (size_t c = 0; c < m.sensorCuts.size(); ++c) {
        const SensorCut& cut = m.sensorCuts[c];
        const int j = m.jointIndex(cut.joint);
        const Joint& jt = m.joints[j];
        const int child = m.linkIndex(jt.child);
        Vec6 w = jointWrench[j];  // parent-on-child, child frame
        std::string frame = jt.child;
        if (cut.frame == jt.parent) {
            const int parent = m.linkIndex(jt.parent);
            w = relativeTransform(state, parent, child).forceMatrix() * w;
            frame = jt.parent;
        }
        if (cut.sign == CutSign::ChildOnParent) w = -w;
        out.cutWrenches.emplace(static_cast<int>(c), Wrench::fromVec(w, frame));
    }
    return out;
}

namespace {

double footprintPressure(const FootprintSpec& fp, double u, double v) {
    const double du = u - fp.centerU;
    const double dv = v - fp.centerV;
    const double d2 = du * du + dv * dv;
    switch (fp.shape) {
        case FootprintSpec::Shape::Disk:
            return d2 <= fp.scale * fp.scale ? fp.peak : 0.0;
        case FootprintSpec::Shape::Gaussian:
            return fp.peak * std::exp(-0.5 * d2 / (fp.scale * fp.scale));
    }
    return 0.0;
}

}  // namespace

SynthesizedPressures synthesizePressures(const SkinPatch& patch, const FootprintSpec& fp,
                                         int truthResolution) {
    const auto& b = patch.chartBounds;
    if (fp.centerU < b[0] || fp.centerU > b[1] || fp.centerV < b[2] || fp.centerV > b[3])
        throw ScenarioError("footprint centre outside the patch chart bounds");
    if (fp.scale <= 0.0) throw ScenarioError("footprint scale must be positive");
    if (fp.peak < 0.0) throw ScenarioError("footprint peak must be non-negative");
    if (fp.angleRad < 0.0 || fp.angleRad >= M_PI)
        throw ScenarioError("footprint incidence angle out of range");

    const double normalFactor = std::sin(fp.angleRad);

    SynthesizedPressures out;
    out.frame.linkName = patch.linkName;
    out.frame.pressure.resize(patch.taxels.size());
    for (size_t i = 0; i < patch.taxels.size(); ++i)
        out.frame.pressure[i] = footprintPressure(fp, patch.taxels[i].u, patch.taxels[i].v) * normalFactor;

    // affine surface model fitted to the taxel layout: r(u,v) = p0 + u*eu + v*ev
    const size_t n = patch.taxels.size();
    Eigen::MatrixXd design(n, 3);
    Eigen::MatrixXd rhs(n, 3);
    Vec3 navg = Vec3::Zero();
    for (size_t i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = patch.taxels[i].u;
        design(i, 2) = patch.taxels[i].v;
        rhs.row(i) = patch.taxels[i].position.transpose();
        navg += patch.taxels[i].normal;
    }
    const Eigen::Matrix<double, 3, 3> coef =
        design.colPivHouseholderQr().solve(rhs);  // rows: p0, eu, ev
    if (navg.norm() < 1e-9) throw ScenarioError("patch normals cancel; no surface orientation");
    const Vec3 nhat = navg.normalized();
    const Vec3 p0 = coef.row(0).transpose();
    const Vec3 eu = coef.row(1).transpose();
    const Vec3 ev = coef.row(2).transpose();

    const int res = std::max(truthResolution, 8);
    const double du = (b[1] - b[0]) / res;
    const double dv = (b[3] - b[2]) / res;
    const double dA = du * dv;
    Vec3 f = Vec3::Zero(), mu = Vec3::Zero();
    for (int j = 0; j < res; ++j) {
        const double v = b[2] + (j + 0.5) * dv;
        for (int i = 0; i < res; ++i) {
            const double u = b[0] + (i + 0.5) * du;
            const double p = footprintPressure(fp, u, v) * normalFactor;
            if (p == 0.0) continue;
            const Vec3 r = p0 + u * eu + v * ev;
            f += p * nhat * dA;
            mu += r.cross(p * nhat) * dA;
        }
    }
    out.trueForce = f;
    out.trueMoment = mu;
    return out;
}

PressureFrame quantizeAndNoise(const PressureFrame& frame, int bits, double ceiling,
                               std::uint64_t seed, double stddev) {
    if (bits < 0 || bits > 16) throw ScenarioError("quantization bits must be in [0,16]");
    if (ceiling <= 0.0) throw ScenarioError("quantization ceiling must be positive");
    PressureFrame out = frame;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, stddev);
    const double levels = bits > 0 ? static_cast<double>((1u << bits) - 1) : 0.0;
    const double step = bits > 0 ? ceiling / levels : 0.0;
    for (auto& p : out.pressure) {
        if (stddev > 0.0) p += noise(rng);
        p = std::max(p, 0.0);
        if (bits > 0) p = std::clamp(std::round(p / step), 0.0, levels) * step;
    }
    return out;
}

Scenario loadScenario(const json& doc, const std::string& baseDir) {
    if (!doc.is_object()) throw ScenarioError("scenario must be a JSON object");
    Scenario s;
    try {
        std::filesystem::path mp = doc.at("model").get<std::string>();
        if (mp.is_relative() && !baseDir.empty()) mp = std::filesystem::path(baseDir) / mp;
        s.modelPath = mp.string();
        s.model = loadModelFile(s.modelPath);
        if (doc.contains("gravity")) {
            const auto g = doc.at("gravity").get<std::vector<double>>();
            if (g.size() != 3) throw ScenarioError("gravity must be a 3-array");
            s.gravity = Vec3(g[0], g[1], g[2]);
        }
        s.seed = doc.value("seed", 0ull);
        if (doc.contains("noise")) {
            const auto& nj = doc.at("noise");
            s.noise.bits = nj.value("bits", 0);
            s.noise.ceiling = nj.value("ceiling", 180e3);
            s.noise.stddev = nj.value("stddev", 0.0);
        }
        double lastT = -std::numeric_limits<double>::infinity();
        for (const auto& tj : doc.value("trajectory", json::array())) {
            TrajectoryPoint tp;
            tp.t = tj.at("t").get<double>();
            if (tp.t <= lastT) throw ScenarioError("trajectory times must be strictly increasing");
            lastT = tp.t;
            tp.q.assign(s.model.joints.size(), 0.0);
            tp.qd.assign(s.model.joints.size(), 0.0);
            tp.qdd.assign(s.model.joints.size(), 0.0);
            auto fill = [&](const char* key, std::vector<double>& dst) {
                if (!tj.contains(key)) return;
                for (const auto& [name, val] : tj.at(key).items())
                    dst[s.model.jointIndex(name)] = val.get<double>();
            };
            fill("q", tp.q);
            fill("qd", tp.qd);
            fill("qdd", tp.qdd);
            if (tj.contains("base")) {
                const auto pa = tj.at("base").at("proper_acc").get<std::vector<double>>();
                const auto av = tj.at("base").value("ang_vel", std::vector<double>{0, 0, 0});
                if (pa.size() != 6 || av.size() != 3)
                    throw ScenarioError("base kinematics must be 6+3 reals");
                for (int i = 0; i < 6; ++i) tp.base.properAcc[i] = pa[i];
                for (int i = 0; i < 3; ++i) tp.base.angVel[i] = av[i];
            } else {
                tp.base.properAcc.head<3>() = -s.gravity;  // static base
            }
            s.trajectory.push_back(std::move(tp));
        }
        for (const auto& cj : doc.value("contacts", json::array())) {
            InjectedContact c;
            c.t0 = cj.value("t0", -std::numeric_limits<double>::infinity());
            c.t1 = cj.value("t1", std::numeric_limits<double>::infinity());
            c.linkName = cj.at("link").get<std::string>();
            s.model.linkIndex(c.linkName);  // validates
            if (cj.contains("wrench")) {
                const auto w = cj.at("wrench").get<std::vector<double>>();
                if (w.size() != 6) throw ScenarioError("contact wrench must be 6 reals");
                Vec6 v;
                for (int i = 0; i < 6; ++i) v[i] = w[i];
                if (cj.contains("point")) {
                    const auto pt = cj.at("point").get<std::vector<double>>();
                    if (pt.size() != 3) throw ScenarioError("contact point must be a 3-array");
                    v.tail<3>() += Vec3(pt[0], pt[1], pt[2]).cross(Vec3(v[0], v[1], v[2]));
                }
                c.wrench = v;
            }
            if (cj.contains("footprint")) {
                const auto& fj = cj.at("footprint");
                FootprintSpec fp;
                const auto shape = fj.value("shape", std::string("disk"));
                if (shape == "disk") fp.shape = FootprintSpec::Shape::Disk;
                else if (shape == "gaussian") fp.shape = FootprintSpec::Shape::Gaussian;
                else throw ScenarioError("footprint shape must be 'disk' or 'gaussian'");
                const auto ctr = fj.at("center").get<std::vector<double>>();
                if (ctr.size() != 2) throw ScenarioError("footprint center must be [u,v]");
                fp.centerU = ctr[0];
                fp.centerV = ctr[1];
                fp.scale = fj.at("scale").get<double>();
                fp.peak = fj.at("peak").get<double>();
                fp.angleRad = fj.value("angle_deg", 90.0) * M_PI / 180.0;
                if (!s.model.patchForLink(c.linkName))
                    throw ScenarioError("footprint contact on link '" + c.linkName +
                                        "' which has no skin patch");
                c.footprint = fp;
            }
            if (!c.wrench && !c.footprint)
                throw ScenarioError("contact needs either a wrench or a footprint");
            s.contacts.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario parse error: ") + e.what());
    }
    return s;
}

Scenario loadScenarioFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("scenario parse error: ") + e.what());
    }
    return loadScenario(doc, std::filesystem::path(path).parent_path().string());
}

void generateLog(const Scenario& s, std::ostream& log, std::ostream& sidecar) {
    const Multibody& m = s.model;
    for (size_t step = 0; step < s.trajectory.size(); ++step) {
        const TrajectoryPoint& tp = s.trajectory[step];
        ProperKinematics base = tp.base;
        base.frame = m.links[m.root].name;
        const FrameState state = propagateKinematics(m, base, tp.q, tp.qd, tp.qdd);

        std::map<int, Wrench> external;
        std::map<std::string, std::vector<double>> pressures;
        for (const auto& p : m.patches) pressures[p.linkName].assign(p.taxels.size(), 0.0);

        auto addWrench = [&](int link, const Vec3& f, const Vec3& mu) {
            auto [it, fresh] = external.try_emplace(link, Wrench{f, mu, m.links[link].name});
            if (!fresh) {
                it->second.force += f;
                it->second.moment += mu;
            }
        };

        for (const auto& c : s.contacts) {
            if (tp.t < c.t0 || tp.t > c.t1) continue;
            const int link = m.linkIndex(c.linkName);
            if (c.wrench) addWrench(link, c.wrench->head<3>(), c.wrench->tail<3>());
            if (c.footprint) {
                const SkinPatch* patch = m.patchForLink(c.linkName);
                const auto synth = synthesizePressures(*patch, *c.footprint);
                addWrench(link, synth.trueForce, synth.trueMoment);
                auto& acc = pressures[c.linkName];
                for (size_t i = 0; i < acc.size(); ++i) acc[i] += synth.frame.pressure[i];
            }
        }

        const OracleResult oracle = inverseDynamicsOracle(m, state, external);

        SensorLogFrame f;
        f.t = tp.t;
        for (size_t j = 0; j < m.joints.size(); ++j) {
            if (m.joints[j].kind != JointKind::Revolute) continue;
            f.q[m.joints[j].name] = tp.q[j];
            f.qd[m.joints[j].name] = tp.qd[j];
            f.qdd[m.joints[j].name] = tp.qdd[j];
        }
        f.base = base;
        for (const auto& [cutIdx, w] : oracle.cutWrenches) f.cuts[m.sensorCuts[cutIdx].joint] = w.vec();
        for (auto& [name, vals] : pressures) {
            PressureFrame pf{name, vals, tp.t};
            if (s.noise.bits > 0 || s.noise.stddev > 0.0) {
                const std::uint64_t stepSeed = s.seed * 0x9e3779b97f4a7c15ull + step + 1;
                pf = quantizeAndNoise(pf, s.noise.bits, s.noise.ceiling, stepSeed, s.noise.stddev);
            }
            f.pressures[name] = pf.pressure;
        }
        log << toJson(f).dump() << '\n';

        json truth;
        truth["t"] = tp.t;
        json contacts = json::array();
        for (const auto& [link, w] : external) {
            json cw;
            cw["link"] = m.links[link].name;
            const Vec6 v = w.vec();
            cw["wrench"] = std::vector<double>(v.data(), v.data() + 6);
            contacts.push_back(cw);
        }
        truth["contacts"] = contacts;
        json torques = json::object();
        for (size_t j = 0; j < m.joints.size(); ++j)
            if (m.joints[j].kind == JointKind::Revolute) torques[m.joints[j].name] = oracle.tau[j];
        truth["torques"] = torques;
        sidecar << truth.dump() << '\n';
    }
}

}  // namespace skinft
