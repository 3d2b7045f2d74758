#include "skinft/logio.hpp"

#include <nlohmann/json.hpp>

namespace skinft {

using nlohmann::json;

json toJson(const SensorLogFrame& f) {
    json j;
    j["t"] = f.t;
    j["q"] = f.q;
    j["qd"] = f.qd;
    j["qdd"] = f.qdd;
    j["base"] = {{"proper_acc", std::vector<double>(f.base.properAcc.data(), f.base.properAcc.data() + 6)},
                 {"ang_vel", std::vector<double>(f.base.angVel.data(), f.base.angVel.data() + 3)}};
    json cuts = json::object();
    for (const auto& [name, w] : f.cuts) cuts[name] = std::vector<double>(w.data(), w.data() + 6);
    j["cuts"] = cuts;
    j["pressures"] = f.pressures;
    return j;
}

SensorLogFrame sensorLogFrameFromJson(const json& j) {
    SensorLogFrame f;
    try {
        f.t = j.at("t").get<double>();
        for (const char* key : {"q", "qd", "qdd"}) {
            auto& dst = key == std::string("q") ? f.q : key == std::string("qd") ? f.qd : f.qdd;
            if (j.contains(key)) dst = j.at(key).get<std::map<std::string, double>>();
        }
        if (j.contains("base")) {
            const auto& b = j.at("base");
            const auto pa = b.at("proper_acc").get<std::vector<double>>();
            const auto av = b.at("ang_vel").get<std::vector<double>>();
            if (pa.size() != 6 || av.size() != 3) throw LogError("base kinematics must be 6+3 reals");
            for (int i = 0; i < 6; ++i) f.base.properAcc[i] = pa[i];
            for (int i = 0; i < 3; ++i) f.base.angVel[i] = av[i];
        }
        if (j.contains("cuts")) {
            for (const auto& [name, arr] : j.at("cuts").items()) {
                const auto v = arr.get<std::vector<double>>();
                if (v.size() != 6) throw LogError("cut wrench must be 6 reals");
                Vec6 w;
                for (int i = 0; i < 6; ++i) w[i] = v[i];
                f.cuts[name] = w;
            }
        }
        if (j.contains("pressures"))
            f.pressures = j.at("pressures").get<std::map<std::string, std::vector<double>>>();
    } catch (const json::exception& e) {
        throw LogError(std::string("malformed log frame: ") + e.what());
    }
    return f;
}

AlignedLogFrame alignFrame(const Multibody& m, const SensorLogFrame& f) {
    AlignedLogFrame out;
    out.t = f.t;
    out.base = f.base;
    out.base.frame = m.links[m.root].name;
    out.q.assign(m.joints.size(), 0.0);
    out.qd.assign(m.joints.size(), 0.0);
    out.qdd.assign(m.joints.size(), 0.0);
    auto fill = [&](const std::map<std::string, double>& src, std::vector<double>& dst) {
        for (const auto& [name, val] : src) {
            try {
                dst[m.jointIndex(name)] = val;
            } catch (const ModelError&) {
                throw LogError("log references unknown joint '" + name + "'");
            }
        }
    };
    fill(f.q, out.q);
    fill(f.qd, out.qd);
    fill(f.qdd, out.qdd);
    for (const auto& [name, w] : f.cuts) {
        int cut = -1;
        try {
            cut = m.cutIndexForJoint(name);
        } catch (const ModelError&) {
            cut = -1;
        }
        if (cut < 0) throw LogError("log references unknown sensor cut '" + name + "'");
        out.cutMeasurements[cut] = Wrench::fromVec(w, m.sensorCuts[cut].frame);
    }
    for (const auto& [name, values] : f.pressures) {
        const SkinPatch* patch = m.patchForLink(name);
        if (!patch) throw LogError("log references unknown patch '" + name + "'");
        if (values.size() != patch->taxels.size())
            throw LogError("pressure array for patch '" + name + "' has wrong size");
        out.pressures[name] = values;
    }
    return out;
}

}  // namespace skinft
