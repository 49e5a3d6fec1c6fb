// Declarative experiment runs: a JSON spec in, plot-ready CSVs and a
// summary.json out.

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace weaksep {

inline constexpr std::string_view kVersion = "0.1.0";

enum class ExperimentKind { Fig2, Fig3, Fig4, Fig5, Fig6, TsvfReport, TsvfSeparation, HelstromTable };

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment(std::string_view name);
const std::vector<ExperimentKind>& all_experiments();

/// Parameters every run of `kind` starts from; user parameters override keys.
nlohmann::json default_parameters(ExperimentKind kind);

struct ExperimentSpec {
    ExperimentKind experiment = ExperimentKind::HelstromTable;
    nlohmann::json parameters = nlohmann::json::object();  ///< overrides only; defaults fill the rest
    std::uint64_t master_seed = 1;
    std::filesystem::path output_dir = "out";
    bool dump_trajectories = false;
    unsigned workers = 1;
};

/// Reads {experiment, parameters, master_seed, output_dir}. Structural problems
/// (missing experiment, wrong JSON types) are appended to `errors`.
std::optional<ExperimentSpec> spec_from_json(const nlohmann::json& doc, std::vector<std::string>& errors);

/// Defaults merged with the experiment's parameter overrides.
nlohmann::json resolved_parameters(const ExperimentSpec& spec);

/// Every problem with the experiment setup, without running anything. Empty means valid.
std::vector<std::string> validate(const ExperimentSpec& spec);

class InvalidSpec : public std::runtime_error {
public:
    explicit InvalidSpec(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

/// Runs the experiment and writes its CSVs plus summary.json into
/// spec.output_dir. Files are staged in a hidden subdirectory and moved into
/// place only on success, so a failed or cancelled run leaves no partial CSVs.
/// Returns the summary document. Throws InvalidSpec, Cancelled or the
/// underlying error.
nlohmann::json run(const ExperimentSpec& spec, const std::atomic<bool>* cancel = nullptr);

/// Shortest round-trip decimal form, as written to every CSV.
std::string format_number(double x);

}  // namespace weaksep
