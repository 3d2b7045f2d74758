#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "skinft/model.hpp"
#include "skinft/skinfield.hpp"
#include "skinft/spatial.hpp"

namespace skinft {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Synthetic continuous pressure footprint. The incidence angle is measured
// between the force line and the surface plane: 90 deg = normal incidence,
// the taxels observe |F| * sin(theta).
struct FootprintSpec {
    enum class Shape { Disk, Gaussian };
    Shape shape = Shape::Disk;
    double centerU = 0.0, centerV = 0.0;
    double scale = 0.01;   // disk radius or gaussian sigma, metres
    double peak = 0.0;     // Pa
    double angleRad = M_PI / 2.0;
};

struct NoiseSpec {
    int bits = 0;           // 0 disables quantization
    double ceiling = 180e3;  // Pa
    double stddev = 0.0;     // additive gaussian noise, Pa
};

struct InjectedContact {
    double t0 = 0.0, t1 = 0.0;
    std::string linkName;
    std::optional<Vec6> wrench;  // direct true wrench, link frame
    std::optional<FootprintSpec> footprint;
};

struct TrajectoryPoint {
    double t = 0.0;
    std::vector<double> q, qd, qdd;  // indexed as Multibody::joints
    ProperKinematics base;
};

struct Scenario {
    std::string modelPath;
    Multibody model;
    Vec3 gravity = Vec3(0.0, 0.0, -9.81);
    std::uint64_t seed = 0;
    NoiseSpec noise;
    std::vector<TrajectoryPoint> trajectory;
    std::vector<InjectedContact> contacts;
};

struct OracleResult {
    std::map<int, Wrench> cutWrenches;  // keyed by sensor-cut index, declared frame and sign
    std::vector<double> tau;            // per joint
    std::vector<Wrench> phi;            // per link
};

// Independent inward RNEA sweep; shares no wrench-accumulation code with the
// estimator. externalWrenches maps link index to the wrench acting on it.
OracleResult inverseDynamicsOracle(const Multibody& m, const FrameState& state,
                                   const std::map<int, Wrench>& externalWrenches);

struct SynthesizedPressures {
    PressureFrame frame;
    Vec3 trueForce = Vec3::Zero();   // link frame, normal component only
    Vec3 trueMoment = Vec3::Zero();  // link frame, about the link origin
};

// Per-taxel centre samples of the continuous footprint, plus dense-quadrature
// ground truth of the normal-projected force and moment. `truthResolution`
// controls the truth integration grid.
SynthesizedPressures synthesizePressures(const SkinPatch& patch, const FootprintSpec& fp,
                                         int truthResolution = 1600);

// Uniform quantization of [0, ceiling] into 2^bits levels plus optional
// additive gaussian noise; deterministic per seed.
PressureFrame quantizeAndNoise(const PressureFrame& frame, int bits, double ceiling,
                               std::uint64_t seed, double stddev = 0.0);

Scenario loadScenario(const nlohmann::json& doc, const std::string& baseDir = "");
Scenario loadScenarioFile(const std::string& path);

// Writes the sensor log (JSON lines) and the ground-truth sidecar.
void generateLog(const Scenario& s, std::ostream& log, std::ostream& sidecar);

}  // namespace skinft
