// weaksep: run, validate and inspect experiments.
//
//   weaksep run fig2 --seed 7 --out results/fig2
//   weaksep run --config my_fig5.json --trials 2000
//   weaksep validate tsvf-report --config bad.json
//   weaksep defaults fig4
//   weaksep list

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "weaksep/experiment.hpp"
#include "weaksep/weak_walk.hpp"

namespace {

using nlohmann::json;

std::atomic<bool> g_cancel{false};

extern "C" void on_sigint(int) { g_cancel.store(true); }

constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitCancelled = 130;

struct SpecFlags {
    std::string experiment;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<long long> trials;
    std::string out;
    bool dump_trajectories = false;
    unsigned threads = 1;
};

void add_spec_flags(CLI::App* cmd, SpecFlags& f) {
    cmd->add_option("experiment", f.experiment, "fig2 | fig3 | fig4 | fig5 | fig6 | tsvf-report | tsvf-separation | "
                                                "helstrom-table (may come from --config instead)");
    cmd->add_option("--config", f.config, "JSON spec {experiment, parameters, master_seed, output_dir}");
    cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
    cmd->add_option("--trials", f.trials, "trial count (overrides parameters.trials)");
    cmd->add_option("--out", f.out, "output directory (overrides the config)");
    cmd->add_flag("--dump-trajectories", f.dump_trajectories, "write per-step trajectories (fig2, fig3)");
    cmd->add_option("--threads", f.threads, "worker threads")->check(CLI::Range(1u, 1024u));
}

void emit_errors(const std::vector<std::string>& errors) {
    std::cerr << json{{"error", "invalid_spec"}, {"messages", errors}}.dump() << '\n';
}

/// Merges the config file and flags into one spec; problems go to `errors`.
std::optional<weaksep::ExperimentSpec> build_spec(const SpecFlags& f, std::vector<std::string>& errors) {
    json doc = json::object();
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) {
            errors.push_back("config: cannot open '" + f.config + "'");
            return std::nullopt;
        }
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            errors.push_back(std::string("config: ") + e.what());
            return std::nullopt;
        }
        if (!doc.is_object()) {
            errors.emplace_back("config: top level must be a JSON object");
            return std::nullopt;
        }
    }
    if (!f.experiment.empty()) {
        if (doc.contains("experiment") && doc["experiment"] != f.experiment) {
            errors.push_back("experiment: command line says '" + f.experiment + "' but the config says " +
                             doc["experiment"].dump());
            return std::nullopt;
        }
        doc["experiment"] = f.experiment;
    }
    if (!doc.contains("experiment")) {
        errors.emplace_back("experiment: name one on the command line or in the config");
        return std::nullopt;
    }
    auto spec = weaksep::spec_from_json(doc, errors);
    if (!spec) return std::nullopt;
    if (f.seed) spec->master_seed = *f.seed;
    if (f.trials) spec->parameters["trials"] = *f.trials;
    if (!f.out.empty()) spec->output_dir = f.out;
    spec->dump_trajectories = f.dump_trajectories;
    spec->workers = f.threads;
    return spec;
}

int cmd_run(const SpecFlags& f) {
    std::vector<std::string> errors;
    auto spec = build_spec(f, errors);
    if (spec) {
        auto more = weaksep::validate(*spec);
        errors.insert(errors.end(), more.begin(), more.end());
    }
    if (!errors.empty()) {
        emit_errors(errors);
        return kExitInvalid;
    }
    std::signal(SIGINT, on_sigint);
    try {
        const json summary = weaksep::run(*spec, &g_cancel);
        std::cout << summary.dump(2) << '\n';
        return 0;
    } catch (const weaksep::Cancelled&) {
        std::cerr << json{{"error", "cancelled"}}.dump() << '\n';
        return kExitCancelled;
    } catch (const weaksep::InvalidSpec& e) {
        emit_errors(e.errors());
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "run_failed"}, {"message", e.what()}}.dump() << '\n';
        return kExitFailure;
    }
}

int cmd_validate(const SpecFlags& f) {
    std::vector<std::string> errors;
    auto spec = build_spec(f, errors);
    if (spec) {
        auto more = weaksep::validate(*spec);
        errors.insert(errors.end(), more.begin(), more.end());
    }
    if (!errors.empty()) {
        emit_errors(errors);
        return kExitInvalid;
    }
    std::cout << json{{"ok", true}, {"parameters", weaksep::resolved_parameters(*spec)}}.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weak-measurement state separation experiments"};
    app.set_version_flag("--version", std::string(weaksep::kVersion));
    app.require_subcommand(1);

    SpecFlags run_flags;
    auto* run = app.add_subcommand("run", "run an experiment and write CSVs plus summary.json");
    add_spec_flags(run, run_flags);

    SpecFlags validate_flags;
    auto* validate = app.add_subcommand("validate", "check a spec without running it");
    add_spec_flags(validate, validate_flags);

    std::string defaults_name;
    auto* defaults = app.add_subcommand("defaults", "print the default parameters of an experiment");
    defaults->add_option("experiment", defaults_name)->required();

    auto* list = app.add_subcommand("list", "list experiment names");

    CLI11_PARSE(app, argc, argv);

    if (*run) return cmd_run(run_flags);
    if (*validate) return cmd_validate(validate_flags);
    if (*defaults) {
        const auto kind = weaksep::parse_experiment(defaults_name);
        if (!kind) {
            emit_errors({"experiment: unknown experiment '" + defaults_name + "'"});
            return kExitInvalid;
        }
        std::cout << weaksep::default_parameters(*kind).dump(2) << '\n';
        return 0;
    }
    if (*list) {
        for (auto k : weaksep::all_experiments()) std::cout << weaksep::to_string(k) << '\n';
        return 0;
    }
    return kExitFailure;
}
