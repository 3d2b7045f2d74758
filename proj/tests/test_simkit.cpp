#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "skinft/estimator.hpp"
#include "skinft/logio.hpp"
#include "skinft/simkit.hpp"

using namespace skinft;
using nlohmann::json;

TEST_CASE("quantization rounds to the sensor step") {
    PressureFrame f{"shin", {90e3, 0.0, 180e3, 250e3}, 0.0};
    const PressureFrame q = quantizeAndNoise(f, 8, 180e3, 0);
    const double step = 180e3 / 255.0;  // ~705.9 Pa per count at 8 bits
    CHECK(std::abs(q.pressure[0] - 90e3) <= step);
    CHECK(std::fmod(q.pressure[0] / step + 1e-9, 1.0) < 1e-6);
    CHECK(q.pressure[1] == 0.0);
    CHECK(q.pressure[2] == doctest::Approx(180e3));
    CHECK(q.pressure[3] == doctest::Approx(180e3));  // clamped at the ceiling

    // bits = 0 disables quantization entirely
    const PressureFrame same = quantizeAndNoise(f, 0, 180e3, 0);
    CHECK(same.pressure == f.pressure);

    CHECK_THROWS_AS(quantizeAndNoise(f, 32, 180e3, 0), ScenarioError);
    CHECK_THROWS_AS(quantizeAndNoise(f, 8, -1.0, 0), ScenarioError);
}

TEST_CASE("noise is deterministic per seed and never negative") {
    PressureFrame f{"shin", std::vector<double>(64, 500.0), 0.0};
    const auto a = quantizeAndNoise(f, 0, 180e3, 7, 200.0);
    const auto b = quantizeAndNoise(f, 0, 180e3, 7, 200.0);
    const auto c = quantizeAndNoise(f, 0, 180e3, 8, 200.0);
    CHECK(a.pressure == b.pressure);
    CHECK(a.pressure != c.pressure);
    for (double p : a.pressure) CHECK(p >= 0.0);
}

TEST_CASE("disk footprint truth matches the analytic integral") {
    const SkinPatch patch = fix::makeGridPatch("shin", 12, 12, 0.01, 0.002);
    FootprintSpec fp;
    fp.shape = FootprintSpec::Shape::Disk;
    fp.centerU = 0.055;
    fp.centerV = 0.055;
    fp.scale = 0.02;
    fp.peak = 10e3;
    const auto synth = synthesizePressures(patch, fp);
    const double expect = 10e3 * M_PI * 0.02 * 0.02;  // 12.566 N along +z
    CHECK(synth.trueForce.z() == doctest::Approx(expect).epsilon(0.005));
    CHECK(std::abs(synth.trueForce.x()) < 1e-12);
    // torque about the origin: force at the centre of the disk
    const Vec3 centre(0.055, 0.055, 0.0);
    CHECK((synth.trueMoment - centre.cross(synth.trueForce)).norm() < 0.01 * synth.trueMoment.norm());
    // taxels inside the disk read the plateau pressure
    for (size_t i = 0; i < patch.taxels.size(); ++i) {
        const double d = std::hypot(patch.taxels[i].u - fp.centerU, patch.taxels[i].v - fp.centerV);
        if (d < fp.scale - 1e-9) CHECK(synth.frame.pressure[i] == doctest::Approx(10e3));
        if (d > fp.scale + 1e-9) CHECK(synth.frame.pressure[i] == 0.0);
    }
}

TEST_CASE("footprint truth is resolution-converged") {
    const SkinPatch patch = fix::makeGridPatch("shin", 10, 10, 0.01, 0.002);
    FootprintSpec fp;
    fp.shape = FootprintSpec::Shape::Gaussian;
    fp.centerU = 0.05;
    fp.centerV = 0.04;
    fp.scale = 0.012;
    fp.peak = 20e3;
    const auto coarse = synthesizePressures(patch, fp, 1600);
    const auto fine = synthesizePressures(patch, fp, 6400);
    CHECK((coarse.trueForce - fine.trueForce).norm() < 1e-3 * fine.trueForce.norm());
    CHECK((coarse.trueMoment - fine.trueMoment).norm() < 1e-3 * fine.trueMoment.norm());
}

TEST_CASE("incidence angle scales observed pressure by sin(theta)") {
    const SkinPatch patch = fix::makeGridPatch("shin", 6, 6, 0.01, 0.002);
    FootprintSpec fp;
    fp.shape = FootprintSpec::Shape::Gaussian;
    fp.centerU = 0.025;
    fp.centerV = 0.025;
    fp.scale = 0.01;
    fp.peak = 10e3;
    const auto normal = synthesizePressures(patch, fp);
    fp.angleRad = 75.0 * M_PI / 180.0;
    const auto oblique = synthesizePressures(patch, fp);
    for (size_t i = 0; i < patch.taxels.size(); ++i)
        CHECK(oblique.frame.pressure[i] ==
              doctest::Approx(normal.frame.pressure[i] * std::sin(fp.angleRad)).epsilon(1e-12));
    CHECK(oblique.trueForce.norm() ==
          doctest::Approx(normal.trueForce.norm() * std::sin(fp.angleRad)).epsilon(1e-12));
}

TEST_CASE("footprint validation") {
    const SkinPatch patch = fix::makeGridPatch("shin", 4, 4, 0.01, 0.002);
    FootprintSpec fp;
    fp.centerU = 10.0;  // outside the chart
    fp.centerV = 0.0;
    fp.scale = 0.01;
    fp.peak = 1e3;
    CHECK_THROWS_AS(synthesizePressures(patch, fp), ScenarioError);
    fp.centerU = 0.01;
    fp.scale = -1.0;
    CHECK_THROWS_AS(synthesizePressures(patch, fp), ScenarioError);
}

TEST_CASE("oracle and estimator torque recursions agree") {
    std::mt19937_64 rng(51);
    for (int iter = 0; iter < 30; ++iter) {
        const Multibody m = fix::makeChain(rng, 4);
        const auto st = fix::randJointState(rng, m);
        const FrameState s = propagateKinematics(m, st.base, st.q, st.qd, st.qdd);
        std::map<int, Wrench> external{{2, fix::randWrench(rng, "link2")}};
        const auto oracle = inverseDynamicsOracle(m, s, external);
        const auto tq = jointTorques(m, s, external, {});
        for (size_t j = 0; j < m.joints.size(); ++j)
            CHECK(std::abs(oracle.tau[j] - tq.tau[j]) <
                  1e-10 * std::max(1.0, std::abs(oracle.tau[j])));
    }
}

TEST_CASE("oracle cut wrenches respect the declared frame and sign") {
    std::mt19937_64 rng(52);
    const Multibody m = fix::makeChain(rng, 4, {1});
    const auto st = fix::randJointState(rng, m);
    const FrameState s = propagateKinematics(m, st.base, st.q, st.qd, st.qdd);
    const auto oracle = inverseDynamicsOracle(m, s, {});

    // recompute parent-on-child in the child frame by brute force
    const Joint& jt = m.joints[1];
    const int child = m.linkIndex(jt.child);
    Vec6 expect = Vec6::Zero();
    for (int l = child; l < 4; ++l)
        expect += relativeTransform(s, child, l).forceMatrix() *
                  netWrench(m.links[l], s.links[l].kin).vec();

    Vec6 got = oracle.cutWrenches.at(0).vec();
    if (m.sensorCuts[0].sign == CutSign::ChildOnParent) got = -got;
    if (m.sensorCuts[0].frame == jt.parent) {
        const Wrench w = Wrench::fromVec(got, jt.parent);
        got = transformWrench(relativeTransform(s, child, m.linkIndex(jt.parent)), w).vec();
    }
    CHECK((got - expect).norm() < 1e-10 * std::max(1.0, expect.norm()));
}

namespace {

// minimal two-link scenario written to a temp directory
std::string writeScenarioFixture(const std::string& dir, const json& extra = {}) {
    json model;
    model["links"] = {{{"name", "base"},
                       {"mass", 1.0},
                       {"com", {0, 0, 0}},
                       {"inertia", {0.01, 0, 0, 0, 0.01, 0, 0, 0, 0.01}}},
                      {{"name", "shin"},
                       {"mass", 1.0},
                       {"com", {0.15, 0, 0}},
                       {"inertia", {0.02, 0, 0, 0, 0.02, 0, 0, 0, 0.02}}}};
    model["joints"] = {{{"name", "knee"},
                        {"parent", "base"},
                        {"child", "shin"},
                        {"kind", "revolute"},
                        {"axis", {0, 1, 0}}}};
    model["sensor_cuts"] = {{{"joint", "knee"}, {"frame", "shin"}, {"sign", "parent_on_child"}}};
    json taxels = json::array();
    int id = 0;
    for (int j = 0; j < 9; ++j)
        for (int i = 0; i < 9; ++i)
            taxels.push_back({{"id", id++},
                              {"u", 0.08 + i * 0.01},
                              {"v", -0.04 + j * 0.01},
                              {"px", 0.08 + i * 0.01},
                              {"py", -0.04 + j * 0.01},
                              {"pz", 0.0},
                              {"nx", 0.0},
                              {"ny", 0.0},
                              {"nz", 1.0},
                              {"radius", 0.002},
                              {"area", 1.2566e-5}});
    model["patches"] = {
        {{"link", "shin"}, {"bounds", {0.075, 0.165, -0.045, 0.045}}, {"taxels", taxels}}};
    std::ofstream(dir + "/model.json") << model.dump();

    json sc;
    sc["model"] = "model.json";
    sc["seed"] = 42;
    sc["trajectory"] = {{{"t", 0.0}}, {{"t", 1.0}}};
    sc["contacts"] = {{{"t0", 0.5},
                       {"t1", 1.5},
                       {"link", "shin"},
                       {"footprint",
                        {{"shape", "gaussian"},
                         {"center", {0.125, 0.0}},
                         {"scale", 0.012},
                         {"peak", 15000.0}}}}};
    for (auto it = extra.begin(); it != extra.end(); ++it) sc[it.key()] = it.value();
    const std::string path = dir + "/scenario.json";
    std::ofstream(path) << sc.dump();
    return path;
}

}  // namespace

TEST_CASE("scenario loading and log generation") {
    const std::string dir = std::filesystem::temp_directory_path().string() + "/skinft_simkit";
    std::filesystem::create_directories(dir);
    const std::string path = writeScenarioFixture(dir);
    const Scenario s = loadScenarioFile(path);
    CHECK(s.model.links.size() == 2);
    CHECK(s.trajectory.size() == 2);
    CHECK(s.seed == 42);

    std::ostringstream log1, truth1, log2, truth2;
    generateLog(s, log1, truth1);
    generateLog(s, log2, truth2);
    CHECK(log1.str() == log2.str());  // deterministic
    CHECK(truth1.str() == truth2.str());

    // two lines per stream, one per trajectory point
    std::istringstream logIn(log1.str());
    std::string line;
    int n = 0;
    while (std::getline(logIn, line)) {
        const auto f = sensorLogFrameFromJson(json::parse(line));
        const auto aligned = alignFrame(s.model, f);
        CHECK(aligned.cutMeasurements.count(0) == 1);
        ++n;
    }
    CHECK(n == 2);

    // truth sidecar: contact present only in the second frame
    std::istringstream truthIn(truth1.str());
    std::getline(truthIn, line);
    CHECK(json::parse(line)["contacts"].empty());
    std::getline(truthIn, line);
    const auto truthFrame = json::parse(line);
    REQUIRE(truthFrame["contacts"].size() == 1);
    CHECK(truthFrame["contacts"][0]["link"] == "shin");
}

TEST_CASE("scenario validation errors") {
    const std::string dir = std::filesystem::temp_directory_path().string() + "/skinft_simkit2";
    std::filesystem::create_directories(dir);
    writeScenarioFixture(dir);

    json bad;
    bad["model"] = "model.json";
    bad["trajectory"] = {{{"t", 1.0}}, {{"t", 1.0}}};  // not strictly increasing
    CHECK_THROWS_AS(loadScenario(bad, dir), ScenarioError);

    bad["trajectory"] = {{{"t", 0.0}}};
    bad["contacts"] = {{{"link", "shin"}}};  // neither wrench nor footprint
    CHECK_THROWS_AS(loadScenario(bad, dir), ScenarioError);

    bad["contacts"] = {{{"link", "base"},
                        {"footprint",
                         {{"shape", "disk"}, {"center", {0, 0}}, {"scale", 0.01}, {"peak", 1e3}}}}};
    CHECK_THROWS_AS(loadScenario(bad, dir), ScenarioError);  // no patch on base

    CHECK_THROWS_AS(loadScenarioFile(dir + "/missing.json"), ScenarioError);
}

TEST_CASE("generated log round-trips through the estimator") {
    const std::string dir = std::filesystem::temp_directory_path().string() + "/skinft_simkit3";
    std::filesystem::create_directories(dir);
    const Scenario s = loadScenarioFile(writeScenarioFixture(dir));
    std::ostringstream log, truth;
    generateLog(s, log, truth);

    std::istringstream logIn(log.str()), truthIn(truth.str());
    std::string logLine, truthLine;
    while (std::getline(logIn, logLine) && std::getline(truthIn, truthLine)) {
        const auto f = alignFrame(s.model, sensorLogFrameFromJson(json::parse(logLine)));
        const FrameState state = propagateKinematics(s.model, f.base, f.q, f.qd, f.qdd);

        std::vector<SkinContact> skin;
        const auto& patch = s.model.patches.front();
        PressureFrame pf{patch.linkName, f.pressures.at(patch.linkName), f.t};
        bool any = false;
        for (double p : pf.pressure) any = any || p > 10.0;
        if (any) {
            const auto fields = buildFields(sampleTaxelDisks(patch, pf));
            skin = detectContacts(patch, pf, fields, 10.0, {200, false});
        }
        const auto est = estimateFrame(s.model, state, f.cutMeasurements, skin, {});

        const auto truthFrame = json::parse(truthLine);
        for (size_t j = 0; j < s.model.joints.size(); ++j) {
            const double expect = truthFrame["torques"][s.model.joints[j].name].get<double>();
            CHECK(est.torques.tau[j] == doctest::Approx(expect).epsilon(0.02).scale(1.0));
        }
    }
}
