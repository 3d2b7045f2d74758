#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "skinft/model.hpp"
#include "skinft/spatial.hpp"

namespace skinft {

struct LogError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One time step of the sensor log (JSON lines wire format).
struct SensorLogFrame {
    double t = 0.0;
    std::map<std::string, double> q, qd, qdd;       // per joint name
    ProperKinematics base;                           // root link frame
    std::map<std::string, Vec6> cuts;                // per cut joint name
    std::map<std::string, std::vector<double>> pressures;  // per patch link name
};

nlohmann::json toJson(const SensorLogFrame& f);
SensorLogFrame sensorLogFrameFromJson(const nlohmann::json& j);

// Joint state vectors aligned to the model's joint order; throws LogError on
// joints/cuts/patches that do not exist in the model.
struct AlignedLogFrame {
    double t = 0.0;
    std::vector<double> q, qd, qdd;
    ProperKinematics base;
    std::map<int, Wrench> cutMeasurements;                 // by sensor-cut index
    std::map<std::string, std::vector<double>> pressures;  // by patch link name
};

AlignedLogFrame alignFrame(const Multibody& m, const SensorLogFrame& f);

}  // namespace skinft
