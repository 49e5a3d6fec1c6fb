// Sequential weak measurements of S_z with a Gaussian needle.
//
// One step: the needle reading x is drawn from the mixture
//   alpha^2 N(+g, sigma^2) + beta^2 N(-g, sigma^2),
// then the state is biased by the collapsed needle,
//   alpha' ~ exp(-(x - g)^2 / 4 sigma^2) alpha,  beta' ~ exp(-(x + g)^2 / 4 sigma^2) beta,
// so that (alpha'/beta')^2 = (alpha/beta)^2 exp(2 g x / sigma^2). Repeating this
// gives a random walk on the first quadrant of the circle that stops at the
// collapse boundaries.

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "weaksep/qubit.hpp"
#include "weaksep/rng.hpp"

namespace weaksep {

/// Gaussian needle with spread sigma, displaced by +g for |0> and -g for |1>.
class PointerModel {
public:
    explicit PointerModel(double sigma, double g = 1.0);

    double sigma() const { return sigma_; }
    double g() const { return g_; }
    double shift_zero() const { return g_; }
    double shift_one() const { return -g_; }

private:
    double sigma_;
    double g_;
};

/// Collapse thresholds: a walk state at or below `zero_side` counts as |0~>,
/// at or above `one_side` as |1~>. Requires 0 <= zero_side < one_side <= 90.
class WalkBoundaries {
public:
    WalkBoundaries(Degrees zero_side, Degrees one_side);

    Degrees zero_side() const { return zero_side_; }
    Degrees one_side() const { return one_side_; }

private:
    Degrees zero_side_;
    Degrees one_side_;
};

enum class CollapseLabel { Zero, One, MaxedOut };

std::string_view to_string(CollapseLabel label);

struct WalkOutcome {
    std::size_t steps = 0;
    std::vector<double> readings;
    QubitState final_state = QubitState::zero();
    CollapseLabel label = CollapseLabel::MaxedOut;
};

/// Consumes two uniforms: one picks the mixture branch, one the Gaussian offset.
double sample_reading(const QubitState& s, const PointerModel& pm, RngStream& rng);

QubitState bias_update(const QubitState& s, double reading, const PointerModel& pm);

/// Probability that the next reading comes from the |0> branch after readings
/// summing to `reading_sum`, starting from s0:
///   1 / (1 + (beta0^2 / alpha0^2) exp(-2 g S / sigma^2)).
/// Depends on the readings only through their sum.
double posterior_weight(double reading_sum, const QubitState& s0, const PointerModel& pm);

struct StepResult {
    QubitState state;
    double reading;
};

StepResult step(const QubitState& s, const PointerModel& pm, RngStream& rng);

/// Zero / One when the state has crossed a boundary, nullopt in between.
std::optional<CollapseLabel> classify(const QubitState& s, const WalkBoundaries& wb);

/// Called once per step with the 1-based step index, the reading and the
/// updated state.
using StepObserver = std::function<void(std::size_t, double, const QubitState&)>;

/// Walks until the first boundary crossing or max_steps (label MaxedOut).
/// The reading that causes the crossing is recorded. A start state already
/// outside the boundaries returns immediately with 0 steps.
WalkOutcome run_walk(const QubitState& s0, const PointerModel& pm, const WalkBoundaries& wb, std::size_t max_steps,
                     RngStream& rng, bool record_readings = true, const StepObserver& observer = {});

/// ceil(200 sigma^2), at least 1.
std::size_t default_max_steps(const PointerModel& pm);

/// Strong S_z measurement: Zero with probability alpha^2.
CollapseLabel strong_measure(const QubitState& s, RngStream& rng);

struct EnsembleSpec {
    QubitState start;
    PointerModel pointer;
    WalkBoundaries boundaries;
    std::size_t max_steps;
};

struct WalkSummary {
    std::size_t trial = 0;
    std::size_t steps = 0;
    CollapseLabel label = CollapseLabel::MaxedOut;
    QubitState final_state = QubitState::zero();
};

struct TrajectoryPoint {
    double reading;
    double alpha;
    double beta;
};

/// Receives finished trials in trial order.
using TrajectorySink = std::function<void(std::size_t trial, const std::vector<TrajectoryPoint>&)>;

struct EnsembleOptions {
    unsigned workers = 1;
    const std::atomic<bool>* cancel = nullptr;
    TrajectorySink trajectory_sink;
};

class TrialError : public std::runtime_error {
public:
    TrialError(std::size_t trial, const std::string& what)
        : std::runtime_error("trial " + std::to_string(trial) + ": " + what), trial_(trial) {}

    std::size_t trial() const { return trial_; }

private:
    std::size_t trial_;
};

class Cancelled : public std::runtime_error {
public:
    Cancelled() : std::runtime_error("cancelled") {}
};

/// Runs `trials` independent walks. Trial i uses RngStream(master_seed, i), so
/// the result does not depend on worker count or scheduling.
std::vector<WalkSummary> run_ensemble(const EnsembleSpec& spec, std::size_t trials, std::uint64_t master_seed,
                                      const EnsembleOptions& options = {});

/// Applies fn(i) for i in [0, n) on up to `workers` threads. Exceptions are
/// rethrown as TrialError carrying the lowest failing index.
void parallel_for_trials(std::size_t n, unsigned workers, const std::atomic<bool>* cancel,
                         const std::function<void(std::size_t)>& fn);

}  // namespace weaksep
