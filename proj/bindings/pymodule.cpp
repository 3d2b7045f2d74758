#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skinft/estimator.hpp"
#include "skinft/logio.hpp"
#include "skinft/model.hpp"
#include "skinft/simkit.hpp"
#include "skinft/skinfield.hpp"
#include "skinft/spatial.hpp"

namespace py = pybind11;
using namespace skinft;

PYBIND11_MODULE(skinft, m) {
    m.doc() = "Contact wrench and joint torque estimation from distributed tactile sensors";

    py::register_exception<FrameMismatch>(m, "FrameMismatch");
    py::register_exception<ModelError>(m, "ModelError");
    py::register_exception<SkinError>(m, "SkinError");
    py::register_exception<TriangulationError>(m, "TriangulationError");
    py::register_exception<EstimationError>(m, "EstimationError");
    py::register_exception<ScenarioError>(m, "ScenarioError");

    py::class_<Wrench>(m, "Wrench")
        .def(py::init([](const Vec3& f, const Vec3& mu, const std::string& frame) {
                 return Wrench{f, mu, frame};
             }),
             py::arg("force"), py::arg("moment"), py::arg("frame"))
        .def_readwrite("force", &Wrench::force)
        .def_readwrite("moment", &Wrench::moment)
        .def_readwrite("frame", &Wrench::frame);

    py::class_<Twist>(m, "Twist")
        .def(py::init([](const Vec3& lin, const Vec3& ang, const std::string& frame) {
                 return Twist{lin, ang, frame};
             }),
             py::arg("linear"), py::arg("angular"), py::arg("frame"))
        .def_readwrite("linear", &Twist::linear)
        .def_readwrite("angular", &Twist::angular)
        .def_readwrite("frame", &Twist::frame);

    py::class_<SpatialTransform>(m, "SpatialTransform")
        .def(py::init<const Mat3&, const Vec3&, std::string, std::string>(), py::arg("rotation"),
             py::arg("translation"), py::arg("from_frame"), py::arg("to_frame"))
        .def_static("identity", &SpatialTransform::identity)
        .def("inverse", &SpatialTransform::inverse)
        .def("force_matrix", &SpatialTransform::forceMatrix)
        .def_readonly("rotation", &SpatialTransform::rotation)
        .def_readonly("translation", &SpatialTransform::translation)
        .def_readonly("from_frame", &SpatialTransform::from)
        .def_readonly("to_frame", &SpatialTransform::to);

    py::class_<SpatialInertia>(m, "SpatialInertia")
        .def(py::init<double, const Vec3&, const Mat3&>(), py::arg("mass"), py::arg("com"),
             py::arg("inertia"))
        .def("matrix", &SpatialInertia::matrix)
        .def_readonly("mass", &SpatialInertia::mass)
        .def_readonly("com", &SpatialInertia::com)
        .def_readonly("inertia", &SpatialInertia::inertia);

    py::class_<ProperKinematics>(m, "ProperKinematics")
        .def(py::init([](const Vec6& acc, const Vec3& w, const std::string& frame) {
                 return ProperKinematics{acc, w, frame};
             }),
             py::arg("proper_acc"), py::arg("ang_vel"), py::arg("frame") = std::string())
        .def_readwrite("proper_acc", &ProperKinematics::properAcc)
        .def_readwrite("ang_vel", &ProperKinematics::angVel)
        .def_readwrite("frame", &ProperKinematics::frame);

    m.def("skew", &skew, py::arg("u"));
    m.def("transform_wrench", &transformWrench);
    m.def("transform_twist", &transformTwist);
    m.def("compose_transform", &composeTransform);
    m.def("dual_cross", &dualCross);
    m.def("apply_inertia", &applyInertia);
    m.def("power_pairing", &powerPairing);

    py::class_<Multibody>(m, "Multibody")
        .def_property_readonly("link_names",
                               [](const Multibody& mb) {
                                   std::vector<std::string> names;
                                   for (const auto& l : mb.links) names.push_back(l.name);
                                   return names;
                               })
        .def_property_readonly("joint_names",
                               [](const Multibody& mb) {
                                   std::vector<std::string> names;
                                   for (const auto& j : mb.joints) names.push_back(j.name);
                                   return names;
                               })
        .def_property_readonly("n_links", [](const Multibody& mb) { return mb.links.size(); })
        .def_property_readonly("n_joints", [](const Multibody& mb) { return mb.joints.size(); })
        .def_property_readonly("n_cuts", [](const Multibody& mb) { return mb.sensorCuts.size(); });

    py::class_<Submodel>(m, "Submodel")
        .def_readonly("id", &Submodel::id)
        .def_readonly("member_links", &Submodel::memberLinks)
        .def_readonly("base_link", &Submodel::baseLink);

    py::class_<FrameState>(m, "FrameState");

    m.def("load_model_file", &loadModelFile, py::arg("path"));
    m.def(
        "load_model",
        [](const std::string& text) { return loadModel(nlohmann::json::parse(text)); },
        py::arg("json_text"));
    m.def("decompose", &decompose);
    m.def("propagate_kinematics", &propagateKinematics, py::arg("model"), py::arg("base"),
          py::arg("q"), py::arg("qd"), py::arg("qdd"));
    m.def(
        "net_wrench",
        [](const Multibody& mb, const std::string& link, const ProperKinematics& k) {
            return netWrench(mb.links[mb.linkIndex(link)], k);
        },
        py::arg("model"), py::arg("link"), py::arg("kinematics"));

    py::class_<Taxel>(m, "Taxel")
        .def(py::init([](int id, double u, double v, const Vec3& pos, const Vec3& n, double radius,
                         double area) {
                 return Taxel{id, u, v, pos, n, radius, area};
             }),
             py::arg("id"), py::arg("u"), py::arg("v"), py::arg("position"), py::arg("normal"),
             py::arg("radius"), py::arg("area"));

    py::class_<SkinPatch>(m, "SkinPatch")
        .def(py::init([](const std::string& link, std::vector<Taxel> taxels,
                         const std::array<double, 4>& bounds) {
                 return SkinPatch{link, std::move(taxels), bounds};
             }),
             py::arg("link"), py::arg("taxels"), py::arg("bounds"))
        .def_readonly("link", &SkinPatch::linkName)
        .def_property_readonly("n_taxels", [](const SkinPatch& p) { return p.taxels.size(); });

    py::class_<PressureFrame>(m, "PressureFrame")
        .def(py::init([](const std::string& link, std::vector<double> pressure, double t) {
                 return PressureFrame{link, std::move(pressure), t};
             }),
             py::arg("link"), py::arg("pressure"), py::arg("timestamp") = 0.0)
        .def_readonly("pressure", &PressureFrame::pressure);

    py::class_<SkinContact>(m, "SkinContact")
        .def_readonly("link", &SkinContact::linkName)
        .def_readonly("location", &SkinContact::location)
        .def_readonly("wrench", &SkinContact::wrench)
        .def_readonly("activated_taxels", &SkinContact::activatedTaxels);

    py::class_<InterpolatedFields>(m, "InterpolatedFields")
        .def("pressure_at", &InterpolatedFields::pressureAt)
        .def("position_at", &InterpolatedFields::positionAt)
        .def("normal_at", &InterpolatedFields::normalAt)
        .def("inside_hull", &InterpolatedFields::insideHull)
        .def("hull_area", &InterpolatedFields::hullArea);

    m.def(
        "build_fields",
        [](const SkinPatch& patch, const PressureFrame& frame) {
            return buildFields(sampleTaxelDisks(patch, frame));
        },
        py::arg("patch"), py::arg("frame"));
    m.def(
        "integrate_force",
        [](const InterpolatedFields& f, const std::array<double, 4>& bounds, int resolution,
           bool metricFactor) {
            return integrateForce(f, bounds, {resolution, metricFactor});
        },
        py::arg("fields"), py::arg("bounds"), py::arg("resolution") = 200,
        py::arg("metric_factor") = false);
    m.def(
        "integrate_torque",
        [](const InterpolatedFields& f, const std::array<double, 4>& bounds, int resolution,
           bool metricFactor) {
            return integrateTorque(f, bounds, {resolution, metricFactor});
        },
        py::arg("fields"), py::arg("bounds"), py::arg("resolution") = 200,
        py::arg("metric_factor") = false);
    m.def("simplified_force", &simplifiedForce, py::arg("patch"), py::arg("frame"));
    m.def(
        "detect_contacts",
        [](const SkinPatch& patch, const PressureFrame& frame, const InterpolatedFields& fields,
           double threshold, int resolution) {
            return detectContacts(patch, frame, fields, threshold, {resolution, false});
        },
        py::arg("patch"), py::arg("frame"), py::arg("fields"), py::arg("threshold"),
        py::arg("resolution") = 200);

    py::enum_<ContactKind>(m, "ContactKind")
        .value("FullWrench", ContactKind::FullWrench)
        .value("PureForce", ContactKind::PureForce)
        .value("ForceNorm", ContactKind::ForceNorm)
        .value("Known", ContactKind::Known);

    py::class_<ContactSpec>(m, "ContactSpec")
        .def_static("at_link_origin", &ContactSpec::atLinkOrigin, py::arg("link"), py::arg("kind"))
        .def_readwrite("link", &ContactSpec::linkName)
        .def_readwrite("kind", &ContactSpec::kind)
        .def_readwrite("link_from_contact", &ContactSpec::linkFromContact)
        .def_readwrite("surface_normal", &ContactSpec::surfaceNormal)
        .def_readwrite("known_wrench", &ContactSpec::knownWrench);

    py::class_<ContactSolution>(m, "ContactSolution")
        .def_readonly("contact_wrenches", &ContactSolution::contactWrenches)
        .def_readonly("x", &ContactSolution::x)
        .def_readonly("residual", &ContactSolution::residual)
        .def_readonly("residual_norm", &ContactSolution::residualNorm)
        .def_readonly("rank_deficient", &ContactSolution::rankDeficient);

    py::class_<JointTorques>(m, "JointTorques").def_readonly("tau", &JointTorques::tau);

    py::class_<FrameEstimate>(m, "FrameEstimate")
        .def_readonly("submodel_solutions", &FrameEstimate::submodelSolutions)
        .def_readonly("torques", &FrameEstimate::torques);

    m.def("single_body_external_wrench", &singleBodyExternalWrench, py::arg("inertia"),
          py::arg("kinematics"), py::arg("sensor_wrench"));
    m.def("estimate_frame", &estimateFrame, py::arg("model"), py::arg("state"),
          py::arg("cut_measurements"), py::arg("skin_contacts"), py::arg("unknown_contacts"));

    py::class_<OracleResult>(m, "OracleResult")
        .def_readonly("tau", &OracleResult::tau)
        .def_readonly("cut_wrenches", &OracleResult::cutWrenches);

    m.def("inverse_dynamics_oracle", &inverseDynamicsOracle, py::arg("model"), py::arg("state"),
          py::arg("external_wrenches"));
    m.def(
        "simulate_scenario",
        [](const std::string& scenarioPath, const std::string& outPath,
           const std::string& truthPath) {
            const Scenario s = loadScenarioFile(scenarioPath);
            std::ofstream log(outPath), truth(truthPath);
            if (!log || !truth) throw ScenarioError("cannot open output files");
            generateLog(s, log, truth);
        },
        py::arg("scenario_path"), py::arg("log_path"), py::arg("truth_path"));
    m.def(
        "quantize_pressures",
        [](const PressureFrame& f, int bits, double ceiling, std::uint64_t seed, double stddev) {
            return quantizeAndNoise(f, bits, ceiling, seed, stddev);
        },
        py::arg("frame"), py::arg("bits"), py::arg("ceiling"), py::arg("seed") = 0,
        py::arg("stddev") = 0.0);
}
