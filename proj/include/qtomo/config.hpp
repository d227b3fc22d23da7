// config.hpp — JSON experiment configuration: parsing, validation (unknown
// keys rejected) and defaults.

#pragma once

#include "qtomo/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <vector>

namespace qtomo {

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
        }
    }
}

inline double get_number(const nlohmann::json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError("\"" + key + "\" must be a number");
    const double v = obj[key].get<double>();
    if (!std::isfinite(v)) throw ConfigError("\"" + key + "\" must be finite");
    return v;
}

inline long get_integer(const nlohmann::json& obj, const std::string& key, long fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) throw ConfigError("\"" + key + "\" must be an integer");
    return obj[key].get<long>();
}

inline HamiltonianModel parse_model(const nlohmann::json& j, const HamiltonianModel& fallback) {
    if (!j.is_object()) throw ConfigError("\"model\" must be an object");
    reject_unknown_keys(j, {"type", "omega", "omega0", "omega1", "delta_excited", "gamma",
                            "chirp_rate", "envelope"},
                        "\"model\"");
    if (!j.contains("type") || !j["type"].is_string()) {
        throw ConfigError("\"model.type\" is required and must be a string");
    }
    const std::string type = j["type"].get<std::string>();

    auto forbid = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys) {
            if (j.contains(k)) {
                throw ConfigError("\"model." + std::string(k) + "\" does not apply to type \"" +
                                  type + "\"");
            }
        }
    };

    if (type == "ideal" || type == "detuned_rotation") {
        forbid({"omega0", "omega1", "delta_excited", "gamma", "chirp_rate", "envelope"});
        const double omega = get_number(j, "omega", 1.0);
        if (!(omega > 0.0)) throw ConfigError("\"model.omega\" must be positive");
        return type == "ideal" ? HamiltonianModel::ideal(omega)
                               : HamiltonianModel::detuned_rotation(omega);
    }
    if (type == "three_level_lambda") {
        forbid({"omega"});
        const double omega0 = get_number(j, "omega0", 1.0 / std::numbers::sqrt2);
        const double omega1 = get_number(j, "omega1", 1.0 / std::numbers::sqrt2);
        const double delta_excited = get_number(j, "delta_excited", 0.1);
        const double gamma = get_number(j, "gamma", 0.0);
        const double chirp = get_number(j, "chirp_rate", 0.0);
        PulseEnvelope env = PulseEnvelope::Square;
        if (j.contains("envelope")) {
            const std::string e = j["envelope"].is_string() ? j["envelope"].get<std::string>() : "";
            if (e == "square") {
                env = PulseEnvelope::Square;
            } else if (e == "chirped_square") {
                env = PulseEnvelope::ChirpedSquare;
            } else {
                throw ConfigError("\"model.envelope\" must be \"square\" or \"chirped_square\"");
            }
        }
        if (!(omega0 > 0.0) || !(omega1 > 0.0)) {
            throw ConfigError("\"model.omega0\"/\"omega1\" must be positive");
        }
        if (gamma < 0.0) throw ConfigError("\"model.gamma\" must be >= 0");
        return HamiltonianModel::three_level_lambda(omega0, omega1, delta_excited, gamma, chirp,
                                                    env);
    }
    throw ConfigError("\"model.type\" must be one of ideal, detuned_rotation, three_level_lambda");
    (void)fallback;
}

inline Distribution::Kind parse_distribution(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("\"distribution\" must be an object");
    reject_unknown_keys(j, {"type", "points"}, "\"distribution\"");
    if (!j.contains("type") || !j["type"].is_string()) {
        throw ConfigError("\"distribution.type\" is required and must be a string");
    }
    const std::string type = j["type"].get<std::string>();
    if (type == "lorentzian") return Distribution::Kind::Lorentzian;
    if (type == "gaussian") return Distribution::Kind::Gaussian;
    if (type == "dirac_delta") return Distribution::Kind::DiracDelta;
    if (type == "discrete") return Distribution::Kind::Discrete;
    throw ConfigError(
        "\"distribution.type\" must be one of lorentzian, gaussian, dirac_delta, discrete");
}

inline RotationSpec parse_angle_pair(const nlohmann::json& item, const std::string& where) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number()) {
        throw ConfigError(where + " must be [theta, phi] pairs of numbers");
    }
    const double th = item[0].get<double>(), ph = item[1].get<double>();
    if (!std::isfinite(th) || !std::isfinite(ph)) throw ConfigError(where + " must be finite");
    return {th, ph};
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    detail::reject_unknown_keys(
        j,
        {"scenario", "model", "distribution", "width_grid", "angle_sets", "prep_angles", "samples",
         "truncation", "shots", "seed", "steps_per_cycle"},
        "config");

    if (!j.contains("scenario") || !j["scenario"].is_string()) {
        throw ConfigError("\"scenario\" is required and must be a string");
    }
    const std::string name = j["scenario"].get<std::string>();
    Scenario scenario;
    if (name == "single_qubit_scan") {
        scenario = Scenario::SingleQubitScan;
    } else if (name == "two_qubit_scan") {
        scenario = Scenario::TwoQubitScan;
    } else if (name == "correlated_demo") {
        scenario = Scenario::CorrelatedDemo;
    } else {
        throw ConfigError("\"scenario\" must be one of single_qubit_scan, two_qubit_scan, "
                          "correlated_demo");
    }

    ExperimentConfig cfg = default_config(scenario);

    if (j.contains("model")) cfg.base_model = detail::parse_model(j["model"], cfg.base_model);
    if (j.contains("distribution")) cfg.dist_kind = detail::parse_distribution(j["distribution"]);
    if (cfg.dist_kind == Distribution::Kind::Discrete) {
        throw ConfigError("scan scenarios sweep a width parameter; a discrete distribution "
                          "has none (use lorentzian, gaussian or dirac_delta)");
    }

    if (j.contains("width_grid")) {
        if (!j["width_grid"].is_array() || j["width_grid"].empty()) {
            throw ConfigError("\"width_grid\" must be a nonempty array");
        }
        cfg.width_grid.clear();
        for (const auto& item : j["width_grid"]) {
            if (!item.is_number()) throw ConfigError("\"width_grid\" entries must be numbers");
            const double w = item.get<double>();
            if (!std::isfinite(w) || w < 0.0) {
                throw ConfigError("\"width_grid\" entries must be finite and >= 0");
            }
            cfg.width_grid.push_back(w);
        }
    }
    std::sort(cfg.width_grid.begin(), cfg.width_grid.end());

    if (j.contains("angle_sets")) {
        const auto& sets = j["angle_sets"];
        if (!sets.is_array() || sets.empty()) {
            throw ConfigError("\"angle_sets\" must be a nonempty array");
        }
        if (scenario == Scenario::TwoQubitScan) {
            cfg.pair_angles.clear();
            for (const auto& item : sets) {
                if (!item.is_array() || item.size() != 4) {
                    throw ConfigError(
                        "two-qubit \"angle_sets\" entries must be [theta1, phi1, theta2, phi2]");
                }
                nlohmann::json first{item[0], item[1]}, second{item[2], item[3]};
                cfg.pair_angles.push_back({detail::parse_angle_pair(first, "\"angle_sets\""),
                                           detail::parse_angle_pair(second, "\"angle_sets\"")});
            }
        } else {
            cfg.single_angles.clear();
            for (const auto& item : sets) {
                cfg.single_angles.push_back(detail::parse_angle_pair(item, "\"angle_sets\""));
            }
        }
    }
    if (scenario == Scenario::TwoQubitScan && cfg.pair_angles.size() < 4) {
        throw ConfigError("two-qubit reconstruction needs at least four angle sets");
    }

    if (j.contains("prep_angles")) {
        if (scenario != Scenario::CorrelatedDemo) {
            throw ConfigError("\"prep_angles\" only applies to the correlated demo");
        }
        cfg.prep_angles = detail::parse_angle_pair(j["prep_angles"], "\"prep_angles\"");
    }

    const long samples = detail::get_integer(j, "samples", cfg.samples);
    if (samples < 1) throw ConfigError("\"samples\" must be >= 1");
    cfg.samples = static_cast<int>(samples);

    cfg.truncation = detail::get_number(j, "truncation", cfg.truncation);
    if (!(cfg.truncation > 0.0)) throw ConfigError("\"truncation\" must be positive");

    cfg.shots = detail::get_integer(j, "shots", cfg.shots);
    if (cfg.shots < 0) throw ConfigError("\"shots\" must be >= 0");

    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
            throw ConfigError("\"seed\" must be an unsigned integer");
        }
        if (j["seed"].is_number_integer() && j["seed"].get<long long>() < 0) {
            throw ConfigError("\"seed\" must be >= 0");
        }
        cfg.seed = j["seed"].get<std::uint64_t>();
    }

    const long spc = detail::get_integer(j, "steps_per_cycle", cfg.steps_per_cycle);
    if (spc < 1) throw ConfigError("\"steps_per_cycle\" must be >= 1");
    cfg.steps_per_cycle = static_cast<int>(spc);

    // surface angle/model binding problems at validation time
    try {
        if (scenario == Scenario::TwoQubitScan) {
            for (const auto& [s1, s2] : cfg.pair_angles) {
                make_pair_setting(s1, s2, cfg.base_model, cfg.base_model, cfg.steps_per_cycle);
            }
        } else {
            for (const auto& s : cfg.single_angles) {
                make_single_setting(s, cfg.base_model, cfg.steps_per_cycle);
            }
            if (scenario == Scenario::CorrelatedDemo) {
                bind_rotation(cfg.base_model, cfg.prep_angles);
            }
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("angle set incompatible with the model: ") + e.what());
    }

    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace qtomo
