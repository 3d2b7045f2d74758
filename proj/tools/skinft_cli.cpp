#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "skinft/estimator.hpp"
#include "skinft/logio.hpp"
#include "skinft/model.hpp"
#include "skinft/simkit.hpp"
#include "skinft/skinfield.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitDegenerate = 2;
constexpr int kExitMismatch = 3;

constexpr double kSaturationCeiling = 50e3;  // Pa, calibration ceiling

struct InterpArgs {
    std::string model, log, out, patch;
    std::string grid = "200x200";
};

struct EstimateArgs {
    std::string model, log, out;
    bool useSkin = false;
    double skinThreshold = 1000.0;  // Pa
    int resolution = 200;
    bool metricFactor = false;
};

struct SimulateArgs {
    std::string scenario, out;
    std::uint64_t seed = 0;
    bool seedSet = false;
};

std::pair<int, int> parseGrid(const std::string& spec) {
    const auto x = spec.find('x');
    if (x == std::string::npos) throw std::runtime_error("grid must be WxH");
    const int w = std::stoi(spec.substr(0, x));
    const int h = std::stoi(spec.substr(x + 1));
    if (w < 2 || h < 2) throw std::runtime_error("grid must be at least 2x2");
    return {w, h};
}

int runInterp(const InterpArgs& args) {
    skinft::Multibody model;
    try {
        model = skinft::loadModelFile(args.model);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }

    const skinft::SkinPatch* patch = nullptr;
    if (!args.patch.empty()) {
        patch = model.patchForLink(args.patch);
        if (!patch) {
            std::cerr << "error: no skin patch on link '" << args.patch << "'\n";
            return kExitMismatch;
        }
    } else if (model.patches.size() == 1) {
        patch = &model.patches.front();
    } else {
        std::cerr << "error: model has " << model.patches.size()
                  << " patches; select one with --patch\n";
        return kExitMismatch;
    }

    std::ifstream in(args.log);
    if (!in) {
        std::cerr << "error: cannot open log file '" << args.log << "'\n";
        return kExitParse;
    }
    std::string line;
    skinft::PressureFrame frame{patch->linkName, std::vector<double>(patch->taxels.size(), 0.0), 0.0};
    if (std::getline(in, line)) {
        try {
            const auto f = skinft::sensorLogFrameFromJson(nlohmann::json::parse(line));
            const auto aligned = skinft::alignFrame(model, f);
            const auto it = aligned.pressures.find(patch->linkName);
            if (it != aligned.pressures.end()) frame.pressure = it->second;
            frame.timestamp = f.t;
        } catch (const skinft::LogError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitMismatch;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitParse;
        }
    } else {
        std::cerr << "error: log file is empty\n";
        return kExitParse;
    }

    try {
        const auto fields = skinft::buildFields(skinft::sampleTaxelDisks(*patch, frame));
        const auto [w, h] = parseGrid(args.grid);
        std::ofstream out(args.out);
        if (!out) {
            std::cerr << "error: cannot open output file '" << args.out << "'\n";
            return kExitParse;
        }
        out << "u,v,p,x,y,z,nx,ny,nz\n";
        const auto& b = patch->chartBounds;
        for (int j = 0; j < h; ++j) {
            const double v = b[2] + (j + 0.5) * (b[3] - b[2]) / h;
            for (int i = 0; i < w; ++i) {
                const double u = b[0] + (i + 0.5) * (b[1] - b[0]) / w;
                const auto s = fields.sampleAt(u, v, 0);
                skinft::Vec3 n = skinft::Vec3::Zero();
                if (s.inside && s.rawNormal.norm() > 1e-8) n = s.rawNormal.normalized();
                out << u << ',' << v << ',' << (s.inside ? s.p : 0.0) << ',' << s.position.x()
                    << ',' << s.position.y() << ',' << s.position.z() << ',' << n.x() << ','
                    << n.y() << ',' << n.z() << '\n';
            }
        }
    } catch (const skinft::TriangulationError& e) {
        std::cerr << "error: degenerate triangulation: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    return kExitOk;
}

int runEstimate(const EstimateArgs& args) {
    skinft::Multibody model;
    try {
        model = skinft::loadModelFile(args.model);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }

    std::ifstream in(args.log);
    if (!in) {
        std::cerr << "error: cannot open log file '" << args.log << "'\n";
        return kExitParse;
    }
    std::ofstream out(args.out);
    if (!out) {
        std::cerr << "error: cannot open output file '" << args.out << "'\n";
        return kExitParse;
    }

    skinft::QuadratureOptions quad;
    quad.resolution = args.resolution;
    quad.metricFactor = args.metricFactor;

    std::string line;
    size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        try {
            const auto raw = skinft::sensorLogFrameFromJson(nlohmann::json::parse(line));
            const auto frame = skinft::alignFrame(model, raw);
            const auto state =
                skinft::propagateKinematics(model, frame.base, frame.q, frame.qd, frame.qdd);

            bool saturated = false;
            bool degenerateNormal = false;
            std::vector<skinft::SkinContact> skinContacts;
            for (const auto& [linkName, pressures] : frame.pressures) {
                const skinft::SkinPatch* patch = model.patchForLink(linkName);
                skinft::PressureFrame pf{linkName, pressures, frame.t};
                for (double p : pressures) saturated = saturated || p > kSaturationCeiling;
                bool any = false;
                for (double p : pressures) any = any || p > args.skinThreshold;
                if (!any) continue;
                const auto fields = skinft::buildFields(skinft::sampleTaxelDisks(*patch, pf));
                std::vector<skinft::SkinContact> detected;
                try {
                    detected = skinft::detectContacts(*patch, pf, fields, args.skinThreshold, quad);
                } catch (const skinft::SkinError&) {
                    degenerateNormal = true;
                    continue;
                }
                skinContacts.insert(skinContacts.end(), detected.begin(), detected.end());
            }

            std::vector<skinft::ContactSpec> unknowns;
            std::vector<skinft::SkinContact> knownContacts;
            if (args.useSkin) {
                knownContacts = skinContacts;
            } else {
                // baseline scheme: skin gives location only, force stays an
                // unknown normal-force magnitude
                for (const auto& sc : skinContacts) {
                    if (sc.wrench.force.norm() < 1e-12) continue;
                    auto spec = skinft::ContactSpec::atLinkOrigin(sc.linkName,
                                                                  skinft::ContactKind::ForceNorm);
                    spec.linkFromContact = skinft::SpatialTransform(
                        skinft::Mat3::Identity(), sc.location, sc.linkName, sc.linkName);
                    spec.surfaceNormal = sc.wrench.force.normalized();
                    unknowns.push_back(std::move(spec));
                }
            }

            const auto est = skinft::estimateFrame(model, state, frame.cutMeasurements,
                                                   knownContacts, unknowns);

            nlohmann::json rj;
            rj["t"] = frame.t;
            nlohmann::json subs = nlohmann::json::array();
            for (const auto& sol : est.submodelSolutions) {
                nlohmann::json sj;
                sj["residual_norm"] = sol.residualNorm;
                sj["rank_deficient"] = sol.rankDeficient;
                nlohmann::json cjs = nlohmann::json::array();
                for (size_t i = 0; i < sol.contactWrenches.size(); ++i) {
                    nlohmann::json cj;
                    cj["link"] = sol.contactWrenches[i].frame;
                    const skinft::Vec6 v = sol.contactWrenches[i].vec();
                    cj["wrench"] = std::vector<double>(v.data(), v.data() + 6);
                    cjs.push_back(cj);
                }
                sj["contacts"] = cjs;
                subs.push_back(sj);
            }
            rj["submodels"] = subs;
            nlohmann::json tj = nlohmann::json::object();
            for (size_t j = 0; j < model.joints.size(); ++j)
                if (model.joints[j].kind == skinft::JointKind::Revolute)
                    tj[model.joints[j].name] = est.torques.tau[j];
            rj["torques"] = tj;
            rj["flags"] = {{"saturation", saturated},
                           {"degenerate_normals", degenerateNormal},
                           {"rank_deficiency",
                            std::any_of(est.submodelSolutions.begin(), est.submodelSolutions.end(),
                                        [](const auto& s) { return s.rankDeficient; })}};
            out << rj.dump() << '\n';
        } catch (const skinft::LogError& e) {
            std::cerr << "error at line " << lineNo << ": " << e.what() << "\n";
            return kExitMismatch;
        } catch (const skinft::TriangulationError& e) {
            std::cerr << "error at line " << lineNo << ": " << e.what() << "\n";
            return kExitDegenerate;
        } catch (const nlohmann::json::exception& e) {
            std::cerr << "error at line " << lineNo << ": " << e.what() << "\n";
            return kExitParse;
        } catch (const std::exception& e) {
            std::cerr << "error at line " << lineNo << ": " << e.what() << "\n";
            return kExitMismatch;
        }
    }
    return kExitOk;
}

int runSimulate(const SimulateArgs& args) {
    skinft::Scenario scenario;
    try {
        scenario = skinft::loadScenarioFile(args.scenario);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    if (args.seedSet) scenario.seed = args.seed;

    std::filesystem::path outPath(args.out);
    std::filesystem::path truthPath = outPath;
    if (truthPath.extension() == ".jsonl")
        truthPath.replace_extension(".truth.jsonl");
    else
        truthPath += ".truth.jsonl";

    std::ofstream log(outPath);
    std::ofstream truth(truthPath);
    if (!log || !truth) {
        std::cerr << "error: cannot open output files\n";
        return kExitParse;
    }
    try {
        skinft::generateLog(scenario, log, truth);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tactile-skin contact wrench and joint torque estimation"};
    app.require_subcommand(1);

    InterpArgs interp;
    auto* interpCmd = app.add_subcommand("interp", "Sample an interpolated skin pressure field to CSV");
    interpCmd->add_option("--model", interp.model, "Model JSON file")->required();
    interpCmd->add_option("--log", interp.log, "Sensor log (first frame is used)")->required();
    interpCmd->add_option("--out", interp.out, "Output CSV path")->required();
    interpCmd->add_option("--grid", interp.grid, "Sampling grid WxH (default 200x200)");
    interpCmd->add_option("--patch", interp.patch, "Patch link name (defaults to the only patch)");

    EstimateArgs est;
    auto* estCmd = app.add_subcommand("estimate", "Estimate contact wrenches and joint torques");
    estCmd->add_option("--model", est.model, "Model JSON file")->required();
    estCmd->add_option("--log", est.log, "Sensor log (JSON lines)")->required();
    estCmd->add_option("--out", est.out, "Result stream (JSON lines)")->required();
    estCmd->add_flag("--use-skin", est.useSkin, "Feed skin wrenches as known contacts");
    estCmd->add_option("--skin-threshold", est.skinThreshold, "Taxel activation threshold, Pa");
    estCmd->add_option("--resolution", est.resolution, "Quadrature grid resolution per axis");
    estCmd->add_flag("--metric-factor", est.metricFactor, "Apply the |dr/du x dr/dv| metric factor");

    SimulateArgs sim;
    auto* simCmd = app.add_subcommand("simulate", "Generate a synthetic sensor log with ground truth");
    simCmd->add_option("--scenario", sim.scenario, "Scenario JSON file")->required();
    simCmd->add_option("--out", sim.out, "Output log path (JSON lines)")->required();
    auto* seedOpt = simCmd->add_option("--seed", sim.seed, "Override the scenario seed");

    CLI11_PARSE(app, argc, argv);

    if (interpCmd->parsed()) return runInterp(interp);
    if (estCmd->parsed()) {
        return runEstimate(est);
    }
    sim.seedSet = seedOpt->count() > 0;
    return runSimulate(sim);
}
