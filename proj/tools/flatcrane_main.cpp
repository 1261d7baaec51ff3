// flatcrane: batch interface for planning rest-to-rest crane trajectories,
// generating feedforward controls and verifying them in open loop.
//
// Subcommands: plan | ff | simulate | check | export-plot
// Exit codes:  0 success, 2 config error, 3 numerical failure, 4 I/O error.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>

#include "flatcrane/flatcrane.hpp"

namespace {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
    const char* env = std::getenv("FLATCRANE_LOG");
    if (env == nullptr) return LogLevel::Error;
    const std::string v(env);
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    if (v != "error" && !v.empty()) {
        std::cerr << "flatcrane: ignoring unknown FLATCRANE_LOG value \"" << v << "\"\n";
    }
    return LogLevel::Error;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) {
        std::cerr << "[info] " << msg << '\n';
    }
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug) {
        std::cerr << "[debug] " << msg << '\n';
    }
}

void emit_error_json(const std::string& type, const std::string& message, long index = -1) {
    nlohmann::json j;
    j["error"]["type"] = type;
    j["error"]["message"] = message;
    if (index >= 0) {
        j["error"]["step"] = index;
    }
    std::cerr << j.dump() << '\n';
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw flatcrane::IoError("cannot open output file " + path.string());
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw flatcrane::IoError("failed writing " + path.string());
    }
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string variant;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--variant", args.variant, "Coriolis variant: printed|lagrange")
        ->check(CLI::IsMember({"printed", "lagrange"}));
}

flatcrane::ExperimentConfig resolve_config(const CommonArgs& args) {
    flatcrane::ExperimentConfig cfg = flatcrane::load_config(args.config_path);
    if (!args.out_dir.empty()) {
        cfg.out_dir = args.out_dir;
    }
    if (args.variant == "printed") {
        cfg.variant = flatcrane::CoriolisVariant::Printed;
    } else if (args.variant == "lagrange") {
        cfg.variant = flatcrane::CoriolisVariant::Lagrange;
    }
    return cfg;
}

int run_plan(const flatcrane::ExperimentConfig& cfg) {
    const flatcrane::CraneModel model(cfg.params, cfg.variant);
    const flatcrane::FlatReference ref = flatcrane::plan_reference(model, cfg.plan);
    const auto path = cfg.out_dir / "reference.csv";
    flatcrane::write_reference_csv(path, ref);
    log_info("wrote " + path.string());
    return 0;
}

int run_ff(const flatcrane::ExperimentConfig& cfg) {
    const flatcrane::CraneModel model(cfg.params, cfg.variant);
    const flatcrane::FlatReference ref = flatcrane::plan_reference(model, cfg.plan);
    log_debug("planned reference with N = " + std::to_string(ref.horizon()));
    const flatcrane::FeedforwardResult ff =
        flatcrane::feedforward(model, ref, cfg.tolerances.affinity);

    flatcrane::write_trajectory_csv(cfg.out_dir / "trajectory.csv", ff, cfg.params.T_s);
    nlohmann::json diag;
    diag["max_open_loop_dev"] = ff.diagnostics.max_open_loop_dev;
    diag["min_sv_Mk"] = ff.diagnostics.min_sv_Mk;
    diag["rank_failures"] = ff.diagnostics.rank_failures;
    diag["config_echo"] = flatcrane::config_echo(cfg);
    write_json(cfg.out_dir / "diagnostics.json", diag);
    log_info("max open-loop deviation " +
             flatcrane::format_double(ff.diagnostics.max_open_loop_dev));
    if (ff.diagnostics.max_open_loop_dev > cfg.tolerances.open_loop) {
        std::cerr << "flatcrane: warning: open-loop deviation exceeds the configured bound\n";
    }
    return 0;
}

int run_simulate(const flatcrane::ExperimentConfig& cfg, const std::string& traj_path) {
    const flatcrane::CraneModel model(cfg.params, cfg.variant);
    const std::filesystem::path input =
        traj_path.empty() ? cfg.out_dir / "trajectory.csv" : std::filesystem::path(traj_path);
    const flatcrane::TrajectoryCsv traj = flatcrane::read_trajectory_csv(input);
    log_debug("read " + std::to_string(traj.states.size()) + " rows from " + input.string());

    // the final row carries the hold input; rollout consumes rows 0..N-1
    const std::span<const flatcrane::ForceInput> u(traj.inputs.data(), traj.inputs.size() - 1);
    const std::vector<flatcrane::CraneState> sim =
        flatcrane::rollout(model, traj.states.front(), u);
    flatcrane::write_states_csv(cfg.out_dir / "simulated.csv", sim, cfg.params.T_s);

    double max_dev = 0.0;
    double max_norm = 0.0;
    for (std::size_t k = 0; k < sim.size(); ++k) {
        max_dev = std::max(max_dev,
                           (sim[k] - traj.states[k]).lpNorm<Eigen::Infinity>());
        max_norm = std::max(max_norm, traj.states[k].lpNorm<Eigen::Infinity>());
    }
    const flatcrane::CraneState goal = cfg.plan.goal.state();
    const double goal_dev = (sim.back() - goal).lpNorm<Eigen::Infinity>();

    nlohmann::json report;
    report["final_state"] = std::vector<double>(sim.back().data(), sim.back().data() + 6);
    report["final_goal_dev"] = goal_dev;
    report["max_dev_vs_input"] = max_dev / (1.0 + max_norm);
    report["goal_within_tolerance"] = goal_dev <= cfg.tolerances.rest_goal;
    write_json(cfg.out_dir / "simulate_report.json", report);
    log_info("final goal deviation " + flatcrane::format_double(goal_dev));
    return 0;
}

int run_check(const flatcrane::ExperimentConfig& cfg) {
    const flatcrane::CraneModel model(cfg.params, cfg.variant);
    const flatcrane::FlatReference ref = flatcrane::plan_reference(model, cfg.plan);
    const flatcrane::FlatParameterizer param(model, ref, cfg.tolerances.affinity);
    const long N = param.horizon();

    const flatcrane::RegularityReport reg =
        flatcrane::check_regularity(param.provider(), 4, N + 8, cfg.tolerances.rank_ratio);

    int min_rank = 6;
    double min_sigma_ratio = std::numeric_limits<double>::infinity();
    const long stride = std::max<long>(1, N / 50);
    long samples = 0;
    for (long k = 0; k <= N; k += stride) {
        const flatcrane::ParamPoint p = param.at(k);
        const flatcrane::SubmersivityReport s =
            flatcrane::check_submersivity(model, p.x, p.u);
        min_rank = std::min(min_rank, s.rank);
        min_sigma_ratio = std::min(min_sigma_ratio, s.sigma_ratio);
        ++samples;
    }

    nlohmann::json report;
    report["all_full_rank"] = reg.all_full_rank;
    report["min_sv_Mk"] = reg.min_sigma;
    report["min_sv_ratio_Mk"] = reg.min_ratio;
    report["rank_failures"] = reg.rank_failures;
    report["submersivity"] = {{"min_rank", min_rank},
                              {"min_sigma_ratio", min_sigma_ratio},
                              {"samples", samples},
                              {"full_row_rank", min_rank == 6}};
    report["config_echo"] = flatcrane::config_echo(cfg);
    write_json(cfg.out_dir / "check_report.json", report);
    log_info("regularity " + std::string(reg.all_full_rank ? "ok" : "FAILED") +
             ", min sv " + flatcrane::format_double(reg.min_sigma));
    return reg.all_full_rank && min_rank == 6 ? 0 : 3;
}

int run_export_plot(const flatcrane::ExperimentConfig& cfg) {
    const flatcrane::CraneModel model(cfg.params, cfg.variant);
    const flatcrane::FlatReference ref = flatcrane::plan_reference(model, cfg.plan);
    const flatcrane::FeedforwardResult ff =
        flatcrane::feedforward(model, ref, cfg.tolerances.affinity);
    const auto path = cfg.out_dir / "plot.csv";
    flatcrane::write_plot_csv(path, ref, ff, cfg.params.T_s);
    log_info("wrote " + path.string());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sampled-data stacker-crane trajectory planning and feedforward control"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string traj_path;

    CLI::App* plan = app.add_subcommand("plan", "plan a flat-output reference, write reference.csv");
    add_common(plan, args);
    CLI::App* ff = app.add_subcommand(
        "ff", "plan + parameterize: write trajectory.csv and diagnostics.json");
    add_common(ff, args);
    CLI::App* simulate = app.add_subcommand(
        "simulate", "open-loop rollout of a trajectory.csv input sequence");
    add_common(simulate, args);
    simulate->add_option("--traj", traj_path, "trajectory CSV (default <out>/trajectory.csv)");
    CLI::App* check =
        app.add_subcommand("check", "regularity and submersivity report over a plan");
    add_common(check, args);
    CLI::App* export_plot =
        app.add_subcommand("export-plot", "tidy long-format CSV for plotting");
    add_common(export_plot, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help
        }
        app.exit(e);
        emit_error_json("usage", e.what());
        return 2;
    }

    try {
        const flatcrane::ExperimentConfig cfg = resolve_config(args);
        if (plan->parsed()) return run_plan(cfg);
        if (ff->parsed()) return run_ff(cfg);
        if (simulate->parsed()) return run_simulate(cfg, traj_path);
        if (check->parsed()) return run_check(cfg);
        if (export_plot->parsed()) return run_export_plot(cfg);
        return 2;
    } catch (const flatcrane::ConfigError& e) {
        emit_error_json("config", e.what());
        return 2;
    } catch (const flatcrane::DomainError& e) {
        emit_error_json("domain", e.what(), e.index);
        return 3;
    } catch (const flatcrane::SingularMatrixError& e) {
        emit_error_json("singular", e.what(), e.index);
        return 3;
    } catch (const flatcrane::WindowError& e) {
        emit_error_json("window", e.what(), e.index);
        return 3;
    } catch (const flatcrane::DecouplingError& e) {
        emit_error_json("decoupling", e.what());
        return 3;
    } catch (const flatcrane::IoError& e) {
        emit_error_json("io", e.what());
        return 4;
    } catch (const std::exception& e) {
        emit_error_json("internal", e.what());
        return 3;
    }
}
