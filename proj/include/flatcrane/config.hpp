#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "flatcrane/beam_model.hpp"
#include "flatcrane/planner.hpp"

namespace flatcrane {

/// Tolerances a config file may override.
struct Tolerances {
    double affinity = 1e-9;    ///< extract_ltv certificate
    double rank_ratio = 1e-10; ///< singular-value ratio for rank decisions
    double open_loop = 1e-8;   ///< reported open-loop reproduction bound
    double rest_goal = 1e-6;   ///< simulate: final state vs goal rest
};

/// Fully resolved experiment description: physical parameters, plan request,
/// output location, Coriolis variant and tolerances.
struct ExperimentConfig {
    PhysicalParams params;
    PlanSpec plan;
    CoriolisVariant variant = CoriolisVariant::Lagrange;
    std::filesystem::path out_dir = "out";
    Tolerances tolerances;

    static ExperimentConfig defaults() {
        ExperimentConfig c;
        c.params = PhysicalParams::defaults();
        c.plan.q3_min = 0.05 * c.params.L;
        c.plan.q3_max = 0.95 * c.params.L;
        return c;
    }
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                                const std::string& path) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError("config: unknown field \"" + (path.empty() ? item.key() : path + "." + item.key()) + "\"");
        }
    }
}

inline double require_number(const json& obj, const char* key, const std::string& path,
                             double fallback, bool has_fallback) {
    if (!obj.contains(key)) {
        if (has_fallback) return fallback;
        throw ConfigError("config: missing required field \"" + path + "." + key + "\"");
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
        throw ConfigError("config: field \"" + path + "." + key + "\" must be a number");
    }
    return v.get<double>();
}

inline RestPosition parse_rest(const json& obj, const std::string& path) {
    if (!obj.is_object()) {
        throw ConfigError("config: \"" + path + "\" must be an object");
    }
    reject_unknown_keys(obj, {"q1", "q3"}, path);
    RestPosition r;
    r.q1 = require_number(obj, "q1", path, 0.0, false);
    r.q3 = require_number(obj, "q3", path, 0.0, false);
    return r;
}

} // namespace detail

/// Parses a config JSON document; unknown fields are rejected, omitted
/// optional fields fall back to the defaults. Throws ConfigError.
inline ExperimentConfig parse_config(const nlohmann::json& root) {
    using detail::reject_unknown_keys;
    using detail::require_number;

    if (!root.is_object()) {
        throw ConfigError("config: top level must be a JSON object");
    }
    reject_unknown_keys(root, {"params", "plan", "variant", "output", "tolerances"}, "");

    ExperimentConfig cfg = ExperimentConfig::defaults();

    bool custom_ansatz = false;
    if (root.contains("params")) {
        const auto& p = root.at("params");
        if (!p.is_object()) throw ConfigError("config: \"params\" must be an object");
        reject_unknown_keys(p, {"m_w", "m_h", "rhoA", "EI", "L", "g", "T_s", "ansatz"}, "params");
        cfg.params.m_w = require_number(p, "m_w", "params", cfg.params.m_w, true);
        cfg.params.m_h = require_number(p, "m_h", "params", cfg.params.m_h, true);
        cfg.params.rhoA = require_number(p, "rhoA", "params", cfg.params.rhoA, true);
        cfg.params.EI = require_number(p, "EI", "params", cfg.params.EI, true);
        cfg.params.L = require_number(p, "L", "params", cfg.params.L, true);
        cfg.params.g = require_number(p, "g", "params", cfg.params.g, true);
        cfg.params.T_s = require_number(p, "T_s", "params", cfg.params.T_s, true);
        if (p.contains("ansatz")) {
            const auto& a = p.at("ansatz");
            if (!a.is_object()) throw ConfigError("config: \"params.ansatz\" must be an object");
            reject_unknown_keys(a, {"coeffs"}, "params.ansatz");
            if (!a.contains("coeffs") || !a.at("coeffs").is_array()) {
                throw ConfigError("config: \"params.ansatz.coeffs\" must be an array of numbers");
            }
            std::vector<double> coeffs;
            for (const auto& v : a.at("coeffs")) {
                if (!v.is_number()) {
                    throw ConfigError("config: \"params.ansatz.coeffs\" must contain numbers only");
                }
                coeffs.push_back(v.get<double>());
            }
            cfg.params.ansatz = AnsatzShape::from_coefficients(coeffs, cfg.params.L);
            custom_ansatz = true;
        }
    }
    if (!custom_ansatz) {
        // rebuild for a possibly overridden length
        cfg.params.ansatz = AnsatzShape::default_cubic(cfg.params.L);
    }
    cfg.params.validate();

    // plan bounds default relative to the configured mast length
    cfg.plan.q3_min = 0.05 * cfg.params.L;
    cfg.plan.q3_max = 0.95 * cfg.params.L;

    if (!root.contains("plan")) {
        throw ConfigError("config: missing required field \"plan\"");
    }
    const auto& plan = root.at("plan");
    if (!plan.is_object()) throw ConfigError("config: \"plan\" must be an object");
    reject_unknown_keys(
        plan, {"start", "goal", "N", "head_len", "tail_len", "blend_degree", "q3_min", "q3_max"},
        "plan");
    if (!plan.contains("start") || !plan.contains("goal")) {
        throw ConfigError("config: \"plan\" requires \"start\" and \"goal\" rest positions");
    }
    cfg.plan.start = detail::parse_rest(plan.at("start"), "plan.start");
    cfg.plan.goal = detail::parse_rest(plan.at("goal"), "plan.goal");
    cfg.plan.N = static_cast<long>(
        require_number(plan, "N", "plan", static_cast<double>(cfg.plan.N), true));
    cfg.plan.head_len = static_cast<long>(
        require_number(plan, "head_len", "plan", static_cast<double>(cfg.plan.head_len), true));
    cfg.plan.tail_len = static_cast<long>(
        require_number(plan, "tail_len", "plan", static_cast<double>(cfg.plan.tail_len), true));
    cfg.plan.blend_degree = static_cast<int>(require_number(
        plan, "blend_degree", "plan", static_cast<double>(cfg.plan.blend_degree), true));
    cfg.plan.q3_min = require_number(plan, "q3_min", "plan", cfg.plan.q3_min, true);
    cfg.plan.q3_max = require_number(plan, "q3_max", "plan", cfg.plan.q3_max, true);
    cfg.plan.validate(cfg.params);

    if (root.contains("variant")) {
        const auto& v = root.at("variant");
        if (!v.is_string()) throw ConfigError("config: \"variant\" must be a string");
        const std::string name = v.get<std::string>();
        if (name == "printed") {
            cfg.variant = CoriolisVariant::Printed;
        } else if (name == "lagrange") {
            cfg.variant = CoriolisVariant::Lagrange;
        } else {
            throw ConfigError("config: \"variant\" must be \"printed\" or \"lagrange\"");
        }
    }

    if (root.contains("output")) {
        const auto& o = root.at("output");
        if (!o.is_object()) throw ConfigError("config: \"output\" must be an object");
        reject_unknown_keys(o, {"dir"}, "output");
        if (o.contains("dir")) {
            if (!o.at("dir").is_string()) {
                throw ConfigError("config: \"output.dir\" must be a string");
            }
            cfg.out_dir = o.at("dir").get<std::string>();
        }
    }

    if (root.contains("tolerances")) {
        const auto& t = root.at("tolerances");
        if (!t.is_object()) throw ConfigError("config: \"tolerances\" must be an object");
        reject_unknown_keys(t, {"affinity", "rank_ratio", "open_loop", "rest_goal"}, "tolerances");
        cfg.tolerances.affinity =
            require_number(t, "affinity", "tolerances", cfg.tolerances.affinity, true);
        cfg.tolerances.rank_ratio =
            require_number(t, "rank_ratio", "tolerances", cfg.tolerances.rank_ratio, true);
        cfg.tolerances.open_loop =
            require_number(t, "open_loop", "tolerances", cfg.tolerances.open_loop, true);
        cfg.tolerances.rest_goal =
            require_number(t, "rest_goal", "tolerances", cfg.tolerances.rest_goal, true);
        for (const auto& [value, name] :
             {std::pair{cfg.tolerances.affinity, "affinity"},
              std::pair{cfg.tolerances.rank_ratio, "rank_ratio"},
              std::pair{cfg.tolerances.open_loop, "open_loop"},
              std::pair{cfg.tolerances.rest_goal, "rest_goal"}}) {
            if (!(value > 0.0)) {
                throw ConfigError(std::string("config: \"tolerances.") + name +
                                  "\" must be positive");
            }
        }
    }
    return cfg;
}

/// Loads and validates a config file. Parse errors carry line/column.
inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open file " + path.string());
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // convert the byte offset into line/column
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config: JSON parse error at line " + std::to_string(line) +
                          ", column " + std::to_string(col) + ": " + e.what());
    }
    return parse_config(root);
}

/// Effective configuration as JSON, with every default resolved.
inline nlohmann::json config_echo(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["params"] = {
        {"m_w", cfg.params.m_w}, {"m_h", cfg.params.m_h},   {"rhoA", cfg.params.rhoA},
        {"EI", cfg.params.EI},   {"L", cfg.params.L},       {"g", cfg.params.g},
        {"T_s", cfg.params.T_s}, {"ansatz", {{"coeffs", cfg.params.ansatz.coefficients()}}},
    };
    j["plan"] = {
        {"start", {{"q1", cfg.plan.start.q1}, {"q3", cfg.plan.start.q3}}},
        {"goal", {{"q1", cfg.plan.goal.q1}, {"q3", cfg.plan.goal.q3}}},
        {"N", cfg.plan.N},
        {"head_len", cfg.plan.head_len},
        {"tail_len", cfg.plan.tail_len},
        {"blend_degree", cfg.plan.blend_degree},
        {"q3_min", cfg.plan.q3_min},
        {"q3_max", cfg.plan.q3_max},
    };
    j["variant"] = to_string(cfg.variant);
    j["output"] = {{"dir", cfg.out_dir.string()}};
    j["tolerances"] = {
        {"affinity", cfg.tolerances.affinity},
        {"rank_ratio", cfg.tolerances.rank_ratio},
        {"open_loop", cfg.tolerances.open_loop},
        {"rest_goal", cfg.tolerances.rest_goal},
    };
    return j;
}

} // namespace flatcrane
