#include "weaksep/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <type_traits>

#include "weaksep/discriminate.hpp"
#include "weaksep/qubit.hpp"
#include "weaksep/rng.hpp"
#include "weaksep/stats.hpp"
#include "weaksep/tsvf.hpp"
#include "weaksep/weak_walk.hpp"

namespace weaksep {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct KindName {
    ExperimentKind kind;
    std::string_view name;
};

constexpr KindName kKindNames[] = {
    {ExperimentKind::Fig2, "fig2"},
    {ExperimentKind::Fig3, "fig3"},
    {ExperimentKind::Fig4, "fig4"},
    {ExperimentKind::Fig5, "fig5"},
    {ExperimentKind::Fig6, "fig6"},
    {ExperimentKind::TsvfReport, "tsvf-report"},
    {ExperimentKind::TsvfSeparation, "tsvf-separation"},
    {ExperimentKind::HelstromTable, "helstrom-table"},
};

}  // namespace

std::string_view to_string(ExperimentKind kind) {
    for (const auto& k : kKindNames) {
        if (k.kind == kind) return k.name;
    }
    return "unknown";
}

std::optional<ExperimentKind> parse_experiment(std::string_view name) {
    for (const auto& k : kKindNames) {
        if (k.name == name) return k.kind;
    }
    return std::nullopt;
}

const std::vector<ExperimentKind>& all_experiments() {
    static const std::vector<ExperimentKind> kinds = [] {
        std::vector<ExperimentKind> v;
        for (const auto& k : kKindNames) v.push_back(k.kind);
        return v;
    }();
    return kinds;
}

json default_parameters(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Fig2:
            return {{"sigma", 20.0}, {"boundaries", {10.0, 80.0}}, {"start_deg", 45.0},
                    {"trials", 10000}, {"max_steps", nullptr}};
        case ExperimentKind::Fig3:
            return {{"sigmas", {5.0, 10.0, 15.0, 20.0, 25.0}}, {"boundaries", {10.0, 80.0}}, {"start_deg", 45.0},
                    {"trials", 10000}, {"max_steps", nullptr}};
        case ExperimentKind::Fig4:
            return {{"theta_grid", {30.0, 40.0, 50.0, 60.0, 70.0, 80.0}}, {"boundaries", {1.0, 89.0}},
                    {"sigma", 5.0}, {"trials", 1000}, {"max_steps", nullptr}};
        case ExperimentKind::Fig5:
            return {{"theta_grid", {10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0}},
                    {"m_values", {5, 10, 20}}, {"sigma", 3.0}, {"trials", 5000}};
        case ExperimentKind::Fig6:
            return {{"theta", 50.0}, {"truth", "psi2"}, {"sigma", 3.0}, {"m_values", {5, 10, 20}}, {"trials", 5000}};
        case ExperimentKind::TsvfReport:
            return {{"etas", {0.05, 0.2, std::numbers::pi / 4.0, std::numbers::pi / 2.0, 2.5}},
                    {"gs", {0.01, 0.05, 0.1, 0.5}}, {"sigmas", {1.0, 2.0, 5.0}}};
        case ExperimentKind::TsvfSeparation:
            return {{"g", 0.05}, {"sigma", 2.0}, {"eta1", nullptr}, {"eta2", 2.0}};
        case ExperimentKind::HelstromTable:
            return {{"theta_grid", {0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0}}};
    }
    return json::object();
}

std::optional<ExperimentSpec> spec_from_json(const json& doc, std::vector<std::string>& errors) {
    if (!doc.is_object()) {
        errors.emplace_back("config: top level must be a JSON object");
        return std::nullopt;
    }
    static const std::set<std::string> known{"experiment", "parameters", "master_seed", "output_dir"};
    for (const auto& [key, _] : doc.items()) {
        if (!known.contains(key)) errors.push_back("config: unknown field '" + key + "'");
    }
    ExperimentSpec spec;
    const auto exp = doc.find("experiment");
    if (exp == doc.end() || !exp->is_string()) {
        errors.emplace_back("config: 'experiment' must be a string");
        return std::nullopt;
    }
    const auto kind = parse_experiment(exp->get<std::string>());
    if (!kind) {
        errors.push_back("config: unknown experiment '" + exp->get<std::string>() + "'");
        return std::nullopt;
    }
    spec.experiment = *kind;
    if (const auto p = doc.find("parameters"); p != doc.end()) {
        if (!p->is_object()) {
            errors.emplace_back("config: 'parameters' must be an object");
        } else {
            spec.parameters = *p;
        }
    }
    if (const auto s = doc.find("master_seed"); s != doc.end()) {
        if (!s->is_number_integer() || (!s->is_number_unsigned() && s->get<std::int64_t>() < 0)) {
            errors.emplace_back("config: 'master_seed' must be a nonnegative 64-bit integer");
        } else {
            spec.master_seed = s->get<std::uint64_t>();
        }
    }
    if (const auto o = doc.find("output_dir"); o != doc.end()) {
        if (!o->is_string()) {
            errors.emplace_back("config: 'output_dir' must be a string");
        } else {
            spec.output_dir = o->get<std::string>();
        }
    }
    return spec;
}

json resolved_parameters(const ExperimentSpec& spec) {
    json params = default_parameters(spec.experiment);
    if (spec.parameters.is_object()) {
        for (const auto& [key, value] : spec.parameters.items()) params[key] = value;
    }
    return params;
}

InvalidSpec::InvalidSpec(std::vector<std::string> errors)
    : std::runtime_error("invalid experiment spec"), errors_(std::move(errors)) {}

std::string format_number(double x) {
    if (x == 0.0) return "0";  // folds -0
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

// ---------------------------------------------------------------------------
// Parameter parsing with error collection

class ParamReader {
public:
    ParamReader(const json& params, std::vector<std::string>& errors) : params_(params), errors_(errors) {}

    double number(const std::string& key, const std::function<bool(double)>& ok, const std::string& requirement) {
        const json& v = params_.at(key);
        if (!v.is_number()) {
            fail(key, "must be a number");
            return 1.0;
        }
        const double x = v.get<double>();
        if (!std::isfinite(x) || !ok(x)) {
            fail(key, requirement + ", got " + format_number(x));
            return 1.0;
        }
        return x;
    }

    std::optional<double> optional_number(const std::string& key, const std::function<bool(double)>& ok,
                                          const std::string& requirement) {
        if (params_.at(key).is_null()) return std::nullopt;
        return number(key, ok, requirement);
    }

    std::size_t count(const std::string& key, std::size_t minimum) {
        const json& v = params_.at(key);
        if (!v.is_number_integer() || v.get<std::int64_t>() < static_cast<std::int64_t>(minimum)) {
            fail(key, "must be an integer >= " + std::to_string(minimum));
            return minimum;
        }
        return v.get<std::size_t>();
    }

    std::optional<std::size_t> optional_count(const std::string& key, std::size_t minimum) {
        if (params_.at(key).is_null()) return std::nullopt;
        return count(key, minimum);
    }

    std::vector<double> numbers(const std::string& key, const std::function<bool(double)>& ok,
                                const std::string& requirement) {
        const json& v = params_.at(key);
        if (!v.is_array() || v.empty()) {
            fail(key, "must be a nonempty array of numbers");
            return {1.0};
        }
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number() || !std::isfinite(e.get<double>()) || !ok(e.get<double>())) {
                fail(key, "every entry " + requirement);
                return {1.0};
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<std::size_t> counts(const std::string& key, std::size_t minimum) {
        const json& v = params_.at(key);
        if (!v.is_array() || v.empty()) {
            fail(key, "must be a nonempty array of integers");
            return {minimum};
        }
        std::vector<std::size_t> out;
        for (const auto& e : v) {
            if (!e.is_number_integer() || e.get<std::int64_t>() < static_cast<std::int64_t>(minimum)) {
                fail(key, "every entry must be an integer >= " + std::to_string(minimum));
                return {minimum};
            }
            out.push_back(e.get<std::size_t>());
        }
        return out;
    }

    /// [zero_side, one_side] in degrees with 0 <= zero_side < one_side <= 90.
    WalkBoundaries boundaries(const std::string& key) {
        const json& v = params_.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            fail(key, "must be a pair [zero_side_deg, one_side_deg]");
            return {Degrees{10.0}, Degrees{80.0}};
        }
        const double lo = v[0].get<double>();
        const double hi = v[1].get<double>();
        if (!(lo >= 0.0 && lo < hi && hi <= 90.0)) {
            fail(key, "need 0 <= zero_side < one_side <= 90 (got [" + format_number(lo) + ", " + format_number(hi) +
                          "]; reversed boundaries are rejected)");
            return {Degrees{10.0}, Degrees{80.0}};
        }
        return {Degrees{lo}, Degrees{hi}};
    }

    std::string choice(const std::string& key, const std::vector<std::string>& allowed) {
        const json& v = params_.at(key);
        if (v.is_string() && std::find(allowed.begin(), allowed.end(), v.get<std::string>()) != allowed.end()) {
            return v.get<std::string>();
        }
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(key, "must be one of {" + list + "}");
        return allowed.front();
    }

private:
    void fail(const std::string& key, const std::string& what) { errors_.push_back(key + ": " + what); }

    const json& params_;
    std::vector<std::string>& errors_;
};

const auto positive = [](double x) { return x > 0.0; };
const auto nonnegative = [](double x) { return x >= 0.0; };
const auto walk_angle = [](double x) { return x >= 0.0 && x <= 90.0; };
const auto pair_angle = [](double x) { return x > 0.0 && x <= 90.0; };
const auto eta_range = [](double x) { return x > 0.0 && x <= std::numbers::pi; };

struct Fig2Params {
    PointerModel pointer;
    WalkBoundaries boundaries;
    double start_deg;
    std::size_t trials;
    std::size_t max_steps;
};

Fig2Params parse_fig2(ParamReader& r) {
    const double sigma = r.number("sigma", positive, "must be > 0");
    const WalkBoundaries wb = r.boundaries("boundaries");
    const double start = r.number("start_deg", walk_angle, "must lie in [0, 90]");
    const std::size_t trials = r.count("trials", 1);
    const PointerModel pm(sigma);
    const std::size_t max_steps = r.optional_count("max_steps", 1).value_or(default_max_steps(pm));
    return {pm, wb, start, trials, max_steps};
}

struct Fig3Params {
    std::vector<double> sigmas;
    WalkBoundaries boundaries;
    double start_deg;
    std::size_t trials;
    std::optional<std::size_t> max_steps;
};

Fig3Params parse_fig3(ParamReader& r, std::vector<std::string>& errors) {
    auto sigmas = r.numbers("sigmas", positive, "must be > 0");
    std::vector<double> sorted = sigmas;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() < 4 || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        errors.emplace_back("sigmas: need at least 4 distinct values for the scaling fit");
    }
    const WalkBoundaries wb = r.boundaries("boundaries");
    const double start = r.number("start_deg", walk_angle, "must lie in [0, 90]");
    const std::size_t trials = r.count("trials", 1);
    const auto max_steps = r.optional_count("max_steps", 1);
    return {std::move(sigmas), wb, start, trials, max_steps};
}

struct Fig4Params {
    std::vector<double> theta_grid;
    WalkBoundaries boundaries;
    PointerModel pointer;
    std::size_t trials;
    std::size_t max_steps;
};

Fig4Params parse_fig4(ParamReader& r) {
    auto grid = r.numbers("theta_grid", pair_angle, "must lie in (0, 90]");
    const WalkBoundaries wb = r.boundaries("boundaries");
    const PointerModel pm(r.number("sigma", positive, "must be > 0"));
    const std::size_t trials = r.count("trials", 1);
    const std::size_t max_steps = r.optional_count("max_steps", 1).value_or(default_max_steps(pm));
    return {std::move(grid), wb, pm, trials, max_steps};
}

struct Fig5Params {
    std::vector<double> theta_grid;
    std::vector<std::size_t> m_values;
    PointerModel pointer;
    std::size_t trials;
};

Fig5Params parse_fig5(ParamReader& r) {
    auto grid = r.numbers("theta_grid", pair_angle, "must lie in (0, 90]");
    auto ms = r.counts("m_values", 1);
    const PointerModel pm(r.number("sigma", positive, "must be > 0"));
    const std::size_t trials = r.count("trials", 100);
    return {std::move(grid), std::move(ms), pm, trials};
}

struct Fig6Params {
    double theta;
    Hypothesis truth;
    PointerModel pointer;
    std::vector<std::size_t> m_values;
    std::size_t trials;
};

Fig6Params parse_fig6(ParamReader& r) {
    const double theta = r.number("theta", pair_angle, "must lie in (0, 90]");
    const Hypothesis truth = r.choice("truth", {"psi1", "psi2"}) == "psi1" ? Hypothesis::Psi1 : Hypothesis::Psi2;
    const PointerModel pm(r.number("sigma", positive, "must be > 0"));
    auto ms = r.counts("m_values", 1);
    const std::size_t trials = r.count("trials", 1000);
    return {theta, truth, pm, std::move(ms), trials};
}

struct TsvfReportParams {
    std::vector<double> etas;
    std::vector<double> gs;
    std::vector<double> sigmas;
};

TsvfReportParams parse_tsvf_report(ParamReader& r) {
    auto etas = r.numbers("etas", eta_range, "must lie in (0, pi] (eta = 0 has zero post-selection probability)");
    auto gs = r.numbers("gs", nonnegative, "must be >= 0");
    auto sigmas = r.numbers("sigmas", positive, "must be > 0");
    return {std::move(etas), std::move(gs), std::move(sigmas)};
}

struct SeparationParams {
    double g;
    double sigma;
    double eta1;
    double eta2;
    bool eta1_optimal;
};

SeparationParams parse_separation(ParamReader& r, std::vector<std::string>& errors) {
    const double g = r.number("g", nonnegative, "must be >= 0");
    const double sigma = r.number("sigma", positive, "must be > 0");
    const auto eta1 = r.optional_number("eta1", eta_range, "must lie in (0, pi] or be null for the optimum");
    const double eta2 = r.number("eta2", eta_range, "must lie in (0, pi]");
    if (!eta1 && !(g * sigma > 0.0)) errors.emplace_back("eta1: the optimal eta needs g * sigma > 0");
    const double e1 = eta1.value_or(g * sigma > 0.0 ? optimal_eta(g, sigma).eta_star : 1.0);
    return {g, sigma, e1, eta2, !eta1.has_value()};
}

std::vector<double> parse_helstrom(ParamReader& r) {
    return r.numbers("theta_grid", walk_angle, "must lie in [0, 90]");
}

bool has_trajectory_output(ExperimentKind k) { return k == ExperimentKind::Fig2 || k == ExperimentKind::Fig3; }

/// Runs the parser matching spec.experiment; used by validate() and run().
void parse_all(const ExperimentSpec& spec, const json& params, std::vector<std::string>& errors,
               const std::function<void(ParamReader&)>& on_parsed = {}) {
    const json defaults = default_parameters(spec.experiment);
    for (const auto& [key, _] : params.items()) {
        if (!defaults.contains(key)) {
            errors.push_back(key + ": not a parameter of " + std::string(to_string(spec.experiment)));
        }
    }
    ParamReader reader(params, errors);
    if (on_parsed) {
        on_parsed(reader);
        return;
    }
    switch (spec.experiment) {
        case ExperimentKind::Fig2: parse_fig2(reader); break;
        case ExperimentKind::Fig3: parse_fig3(reader, errors); break;
        case ExperimentKind::Fig4: parse_fig4(reader); break;
        case ExperimentKind::Fig5: parse_fig5(reader); break;
        case ExperimentKind::Fig6: parse_fig6(reader); break;
        case ExperimentKind::TsvfReport: parse_tsvf_report(reader); break;
        case ExperimentKind::TsvfSeparation: parse_separation(reader, errors); break;
        case ExperimentKind::HelstromTable: parse_helstrom(reader); break;
    }
}

// ---------------------------------------------------------------------------
// Output staging

template <typename T>
std::string cell(const T& v) {
    if constexpr (std::is_floating_point_v<T>) {
        return format_number(static_cast<double>(v));
    } else if constexpr (std::is_integral_v<T>) {
        return std::to_string(v);
    } else {
        return std::string(v);
    }
}

template <typename... Ts>
std::string csv_row(const Ts&... values) {
    std::string line;
    ((line += cell(values), line += ','), ...);
    line.back() = '\n';
    return line;
}

/// Collects output files in a hidden staging directory and moves them into the
/// output directory on commit(); anything uncommitted is deleted.
class Staging {
public:
    explicit Staging(fs::path out) : out_(std::move(out)), dir_(out_ / ".weaksep-staging") {
        fs::create_directories(out_);
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    Staging(const Staging&) = delete;
    Staging& operator=(const Staging&) = delete;
    ~Staging() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }

    std::ofstream open(const std::string& name) {
        std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
        names_.push_back(name);
        return f;
    }

    void write(const std::string& name, const std::string& content) {
        auto f = open(name);
        f << content;
        if (!f) throw std::runtime_error("write failed for " + name);
    }

    void commit() {
        for (const auto& name : names_) fs::rename(dir_ / name, out_ / name);
        names_.clear();
    }

    const std::vector<std::string>& files() const { return names_; }

private:
    fs::path out_;
    fs::path dir_;
    std::vector<std::string> names_;
};

struct RunContext {
    const ExperimentSpec& spec;
    Staging& staging;
    EnsembleOptions options;
    json headline = json::object();
};

void write_trajectory(std::ofstream& f, std::size_t trial, const std::vector<TrajectoryPoint>& path) {
    for (std::size_t k = 0; k < path.size(); ++k) {
        f << csv_row(trial, k + 1, path[k].reading, path[k].alpha, path[k].beta);
    }
}

std::vector<double> step_counts(const std::vector<WalkSummary>& walks) {
    std::vector<double> steps;
    steps.reserve(walks.size());
    for (const auto& w : walks) steps.push_back(static_cast<double>(w.steps));
    return steps;
}

std::size_t count_label(const std::vector<WalkSummary>& walks, CollapseLabel label) {
    return static_cast<std::size_t>(
        std::count_if(walks.begin(), walks.end(), [label](const WalkSummary& w) { return w.label == label; }));
}

// ---------------------------------------------------------------------------
// Experiments

void run_fig2(RunContext& ctx, const Fig2Params& p) {
    const EnsembleSpec es{state_from_angle(Degrees{p.start_deg}), p.pointer, p.boundaries, p.max_steps};
    EnsembleOptions opts = ctx.options;
    std::ofstream traj;
    if (ctx.spec.dump_trajectories) {
        traj = ctx.staging.open("trajectories.csv");
        traj << "trial,step,reading,alpha,beta\n";
        opts.trajectory_sink = [&traj](std::size_t t, const std::vector<TrajectoryPoint>& path) {
            write_trajectory(traj, t, path);
        };
    }
    const auto walks = run_ensemble(es, p.trials, ctx.spec.master_seed, opts);

    std::string steps_csv = "trial,steps,label\n";
    for (const auto& w : walks) steps_csv += csv_row(w.trial, w.steps, to_string(w.label));
    ctx.staging.write("steps.csv", steps_csv);

    // Walks that start outside the boundaries take 0 steps; the fit needs positive counts.
    std::vector<double> positive_steps;
    for (double s : step_counts(walks)) {
        if (s > 0.0) positive_steps.push_back(s);
    }
    const EmpiricalCdf cdf(step_counts(walks));
    ctx.headline["median_steps"] = cdf.median();
    double mean = 0.0;
    for (double s : cdf.sorted()) mean += s;
    ctx.headline["mean_steps"] = mean / static_cast<double>(cdf.size());
    ctx.headline["collapsed_zero"] = count_label(walks, CollapseLabel::Zero);
    ctx.headline["collapsed_one"] = count_label(walks, CollapseLabel::One);
    ctx.headline["maxed_out"] = count_label(walks, CollapseLabel::MaxedOut);
    ctx.headline["notes"] = {
        "start state 45 degrees and boundaries (10, 80) are inferred defaults for the collapse-time histogram",
        "log-normal fit is maximum likelihood on log step counts; R^2 compares the normalized histogram with "
        "the fitted pdf at bin centers"};

    if (positive_steps.size() < 30) {
        ctx.headline["lognormal"] = nullptr;
        ctx.staging.write("histogram.csv", "bin_lo,bin_hi,density,lognormal_pdf\n");
        return;
    }
    const LogNormalFit fit = fit_lognormal(positive_steps, BinRule::Sturges);
    json sensitivity = json::object();
    for (BinRule rule : {BinRule::Sturges, BinRule::Sqrt, BinRule::FreedmanDiaconis}) {
        const LogNormalFit f = fit_lognormal(positive_steps, rule);
        sensitivity[std::string(to_string(rule))] = f.degenerate ? json(nullptr) : json(f.r_squared);
    }
    ctx.headline["lognormal"] = {{"mu_tilde", fit.mu_tilde},
                                 {"sigma_tilde", fit.sigma_tilde},
                                 {"r_squared", fit.degenerate ? json(nullptr) : json(fit.r_squared)},
                                 {"median", fit.median()},
                                 {"degenerate", fit.degenerate},
                                 {"r_squared_by_bin_rule", sensitivity}};

    const Histogram h = density_histogram(positive_steps, BinRule::Sturges);
    std::string hist_csv = "bin_lo,bin_hi,density,lognormal_pdf\n";
    for (std::size_t i = 0; i < h.bins(); ++i) {
        const double lo = h.lo + static_cast<double>(i) * h.width;
        const double pdf = fit.degenerate ? 0.0 : lognormal_pdf(h.center(i), fit.mu_tilde, fit.sigma_tilde);
        hist_csv += csv_row(lo, lo + h.width, h.density[i], pdf);
    }
    ctx.staging.write("histogram.csv", hist_csv);
}

void run_fig3(RunContext& ctx, const Fig3Params& p) {
    std::vector<double> medians;
    std::vector<double> means;
    json per_sigma = json::array();
    for (double sigma : p.sigmas) {
        const PointerModel pm(sigma);
        const EnsembleSpec es{state_from_angle(Degrees{p.start_deg}), pm, p.boundaries,
                              p.max_steps.value_or(default_max_steps(pm))};
        EnsembleOptions opts = ctx.options;
        std::ofstream traj;
        if (ctx.spec.dump_trajectories) {
            traj = ctx.staging.open("trajectories_sigma" + format_number(sigma) + ".csv");
            traj << "trial,step,reading,alpha,beta\n";
            opts.trajectory_sink = [&traj](std::size_t t, const std::vector<TrajectoryPoint>& path) {
                write_trajectory(traj, t, path);
            };
        }
        const auto walks = run_ensemble(es, p.trials, ctx.spec.master_seed, opts);
        const EmpiricalCdf cdf(step_counts(walks));
        double mean = 0.0;
        for (double s : cdf.sorted()) mean += s;
        mean /= static_cast<double>(cdf.size());
        medians.push_back(cdf.median());
        means.push_back(mean);
        per_sigma.push_back({{"sigma", sigma},
                             {"median_steps", cdf.median()},
                             {"mean_steps", mean},
                             {"maxed_out", count_label(walks, CollapseLabel::MaxedOut)}});
    }
    const ScalingFit median_fit = quadratic_scaling_fit(p.sigmas, medians);
    const ScalingFit mean_fit = quadratic_scaling_fit(p.sigmas, means);

    std::string csv = "sigma,median_steps,mean_steps,fitted_median\n";
    for (std::size_t i = 0; i < p.sigmas.size(); ++i) {
        csv += csv_row(p.sigmas[i], medians[i], means[i], median_fit.coefficient * p.sigmas[i] * p.sigmas[i]);
    }
    ctx.staging.write("scaling.csv", csv);
    ctx.headline["median_fit"] = {{"coefficient", median_fit.coefficient}, {"r_squared", median_fit.r_squared}};
    ctx.headline["mean_fit"] = {{"coefficient", mean_fit.coefficient}, {"r_squared", mean_fit.r_squared}};
    ctx.headline["per_sigma"] = per_sigma;
    ctx.headline["notes"] = {"median = c * sigma^2 fitted through the origin; the constant c is measured, not assumed",
                             "means are emitted alongside medians; the scaling law uses medians"};
}

std::string curve_csv(const SuccessCurve& c) {
    std::string csv = "theta_deg,success,stderr,helstrom\n";
    for (std::size_t i = 0; i < c.theta_deg.size(); ++i) {
        csv += csv_row(c.theta_deg[i], c.success[i], c.standard_error[i], c.helstrom[i]);
    }
    return csv;
}

json curve_extrema(const SuccessCurve& c) {
    double min_gap = INFINITY;
    double max_gap = -INFINITY;
    for (std::size_t i = 0; i < c.success.size(); ++i) {
        min_gap = std::min(min_gap, c.success[i] - c.helstrom[i]);
        max_gap = std::max(max_gap, c.success[i] - c.helstrom[i]);
    }
    return {{"min_success", *std::min_element(c.success.begin(), c.success.end())},
            {"max_success", *std::max_element(c.success.begin(), c.success.end())},
            {"min_gap_to_helstrom", min_gap},
            {"max_gap_to_helstrom", max_gap}};
}

void run_fig4(RunContext& ctx, const Fig4Params& p) {
    const std::uint64_t seed = ctx.spec.master_seed;
    const SuccessCurve weak = weak_process_curve(p.theta_grid, p.boundaries, p.pointer, p.trials, seed, p.max_steps,
                                                 ctx.options);
    ctx.staging.write("success.csv", curve_csv(weak));
    const SuccessCurve protocol = iterative_success_curve(p.theta_grid, p.boundaries, p.pointer, p.trials,
                                                          splitmix64(seed ^ 0x464947345052ULL), p.max_steps,
                                                          ctx.options);
    ctx.staging.write("protocol_success.csv", curve_csv(protocol));

    std::string csv =
        "theta_deg,weak_to_zero,weak_to_one,weak_maxed,strong_zero_tilde_error,strong_one_tilde_error,error,success,"
        "error_stderr\n";
    for (std::size_t c = 0; c < p.theta_grid.size(); ++c) {
        const StatePair pair = make_discrimination_pair(Degrees{p.theta_grid[c]});
        const ErrorDecomposition d = error_decomposition(pair.psi1, Hypothesis::Psi1, p.boundaries, p.pointer,
                                                         p.trials, derive_stream_seed(seed, c), p.max_steps,
                                                         ctx.options);
        csv += csv_row(p.theta_grid[c], d.weak_to_zero, d.weak_to_one, d.weak_maxed, d.strong_zero_tilde_error,
                       d.strong_one_tilde_error, d.error, d.success, d.error_stderr);
    }
    ctx.staging.write("error_decomposition.csv", csv);
    ctx.headline["weak_process"] = curve_extrema(weak);
    ctx.headline["protocol"] = curve_extrema(protocol);
    ctx.headline["notes"] = {"success.csv is P^w(psi1 -> |1~>), the weak process alone without the strong measurement"};
}

void run_fig5(RunContext& ctx, const Fig5Params& p) {
    json per_m = json::object();
    for (std::size_t m : p.m_values) {
        const SuccessCurve c = hypothesis_success_curve(p.theta_grid, m, p.pointer, p.trials, ctx.spec.master_seed,
                                                        ctx.options);
        ctx.staging.write("success_m" + std::to_string(m) + ".csv", curve_csv(c));
        per_m[std::to_string(m)] = curve_extrema(c);
    }
    ctx.headline["per_m"] = per_m;
    ctx.headline["notes"] = {"decision threshold fixed at 0; exactly m readings per trial, no collapse boundaries"};
}

void run_fig6(RunContext& ctx, const Fig6Params& p) {
    const StatePair pair = make_discrimination_pair(Degrees{p.theta});
    const QubitState& start = state_of(pair, p.truth);
    json per_m = json::object();
    for (std::size_t m : p.m_values) {
        const EmpiricalCdf cdf = average_cdf(start, m, p.pointer, p.trials, ctx.spec.master_seed, ctx.options);
        std::string csv = "mean_reading,cdf\n";
        for (std::size_t i = 0; i < cdf.size(); ++i) csv += csv_row(cdf.sorted()[i], cdf.level(i));
        ctx.staging.write("cdf_m" + std::to_string(m) + ".csv", csv);
        per_m[std::to_string(m)] = {{"median", cdf.median()}, {"median_stderr", cdf.median_stderr()}};
    }
    ctx.headline["per_m"] = per_m;
}

void run_tsvf_report(RunContext& ctx, const TsvfReportParams& p) {
    std::string csv =
        "eta,g,sigma,mean_analytic,mean_quadrature,second_moment_analytic,second_moment_quadrature,postselect_prob\n";
    double worst_mean = 0.0;
    double worst_second = 0.0;
    for (double eta : p.etas) {
        for (double g : p.gs) {
            for (double sigma : p.sigmas) {
                if (ctx.options.cancel && ctx.options.cancel->load()) throw Cancelled();
                const TsvfSetup s(eta, g, sigma);
                const MomentReport a = analytic_moments(s);
                const MomentReport q = quadrature_moments(s);
                const auto rel = [](double x, double ref) {
                    return ref == 0.0 ? std::abs(x) : std::abs(x - ref) / std::abs(ref);
                };
                worst_mean = std::max(worst_mean, rel(q.mean, a.mean));
                worst_second = std::max(worst_second, rel(q.second_moment, a.second_moment));
                csv += csv_row(eta, g, sigma, a.mean, q.mean, a.second_moment, q.second_moment, a.postselect_prob);
            }
        }
    }
    ctx.staging.write("tsvf_report.csv", csv);
    ctx.headline["max_relative_error_mean"] = worst_mean;
    ctx.headline["max_relative_error_second_moment"] = worst_second;
}

json moments_json(const MomentReport& m) {
    return {{"mean", m.mean},
            {"second_moment", m.second_moment},
            {"variance", m.variance},
            {"postselect_prob", m.postselect_prob},
            {"acceptance_prob", m.acceptance_prob}};
}

void run_tsvf_separation(RunContext& ctx, const SeparationParams& p) {
    const SeparationReport r = separation_report(p.eta1, p.eta2, p.g, p.sigma);
    std::string csv =
        "setup,eta,mean_analytic,mean_quadrature,second_moment_analytic,second_moment_quadrature,variance_analytic,"
        "postselect_prob,acceptance_prob\n";
    csv += csv_row(std::string("eta1"), r.first.eta(), r.analytic_first.mean, r.quadrature_first.mean,
                   r.analytic_first.second_moment, r.quadrature_first.second_moment, r.analytic_first.variance,
                   r.analytic_first.postselect_prob, r.analytic_first.acceptance_prob);
    csv += csv_row(std::string("eta2"), r.second.eta(), r.analytic_second.mean, r.quadrature_second.mean,
                   r.analytic_second.second_moment, r.quadrature_second.second_moment, r.analytic_second.variance,
                   r.analytic_second.postselect_prob, r.analytic_second.acceptance_prob);
    ctx.staging.write("separation.csv", csv);
    ctx.headline = {{"eta1", r.first.eta()},
                    {"eta1_is_optimal", p.eta1_optimal},
                    {"eta2", r.second.eta()},
                    {"g_sigma", p.g * p.sigma},
                    {"mean_gap", r.mean_gap},
                    {"mean_gap_over_sigma", r.mean_gap / p.sigma},
                    {"first", moments_json(r.analytic_first)},
                    {"second", moments_json(r.analytic_second)},
                    {"bayes_error_single_sample", r.bayes_error},
                    {"bayes_error_total_variation_route", r.bayes_error_tv},
                    {"bhattacharyya", r.bhattacharyya},
                    {"notes",
                     {"variances are the exact post-selected values; near eta1 = arccos(e^{-2(g sigma)^2}) the "
                      "second moment approaches 2 sigma^2, so the variance stays near sigma^2 rather than 0"}}};
}

void run_helstrom_table(RunContext& ctx, const std::vector<double>& grid) {
    std::string csv = "theta_deg,helstrom\n";
    for (double t : grid) csv += csv_row(t, helstrom_bound(Degrees{t}));
    ctx.staging.write("helstrom.csv", csv);
    ctx.headline["points"] = grid.size();
}

}  // namespace

std::vector<std::string> validate(const ExperimentSpec& spec) {
    std::vector<std::string> errors;
    if (spec.parameters.is_object()) {
        parse_all(spec, resolved_parameters(spec), errors);
    } else {
        errors.emplace_back("parameters: must be an object");
    }
    if (spec.dump_trajectories && !has_trajectory_output(spec.experiment)) {
        errors.emplace_back("dump_trajectories: only fig2 and fig3 record trajectories");
    }
    if (spec.output_dir.empty()) errors.emplace_back("output_dir: must not be empty");
    if (spec.workers < 1) errors.emplace_back("workers: must be >= 1");
    return errors;
}

json run(const ExperimentSpec& spec, const std::atomic<bool>* cancel) {
    if (auto errors = validate(spec); !errors.empty()) throw InvalidSpec(std::move(errors));
    const json params = resolved_parameters(spec);
    const auto started = std::chrono::steady_clock::now();

    Staging staging(spec.output_dir);
    RunContext ctx{spec, staging, EnsembleOptions{spec.workers, cancel, {}}};
    std::vector<std::string> errors;
    parse_all(spec, params, errors, [&](ParamReader& r) {
        switch (spec.experiment) {
            case ExperimentKind::Fig2: run_fig2(ctx, parse_fig2(r)); break;
            case ExperimentKind::Fig3: run_fig3(ctx, parse_fig3(r, errors)); break;
            case ExperimentKind::Fig4: run_fig4(ctx, parse_fig4(r)); break;
            case ExperimentKind::Fig5: run_fig5(ctx, parse_fig5(r)); break;
            case ExperimentKind::Fig6: run_fig6(ctx, parse_fig6(r)); break;
            case ExperimentKind::TsvfReport: run_tsvf_report(ctx, parse_tsvf_report(r)); break;
            case ExperimentKind::TsvfSeparation: run_tsvf_separation(ctx, parse_separation(r, errors)); break;
            case ExperimentKind::HelstromTable: run_helstrom_table(ctx, parse_helstrom(r)); break;
        }
    });

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json summary = {{"experiment", std::string(to_string(spec.experiment))},
                    {"parameters", params},
                    {"master_seed", spec.master_seed},
                    {"prng", std::string(kPrngAlgorithm)},
                    {"headline", ctx.headline},
                    {"version", std::string(kVersion)},
                    {"wall_seconds", wall}};
    if (cancel && cancel->load()) throw Cancelled();
    staging.write("summary.json", summary.dump(2) + "\n");
    staging.commit();
    return summary;
}

}  // namespace weaksep
