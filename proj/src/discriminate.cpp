#include "weaksep/discriminate.hpp"

#include <cmath>
#include <stdexcept>

namespace weaksep {

std::string_view to_string(Hypothesis h) { return h == Hypothesis::Psi1 ? "psi1" : "psi2"; }

const QubitState& state_of(const StatePair& pair, Hypothesis h) {
    return h == Hypothesis::Psi1 ? pair.psi1 : pair.psi2;
}

namespace {

bool on_wrong_side(const QubitState& s, Hypothesis truth) {
    const double a = s.angle().value;
    return truth == Hypothesis::Psi1 ? a < 45.0 : a > 45.0;
}

Hypothesis alternating_truth(std::size_t trial) { return trial % 2 == 0 ? Hypothesis::Psi1 : Hypothesis::Psi2; }

void require_trials(std::size_t trials, std::size_t minimum, const char* who) {
    if (trials < minimum) {
        throw std::invalid_argument(std::string(who) + ": need at least " + std::to_string(minimum) + " trials");
    }
}

}  // namespace

ProtocolResult iterative_trial(Hypothesis truth, const StatePair& pair, const WalkBoundaries& wb,
                               const PointerModel& pm, std::size_t max_steps, RngStream& rng) {
    const WalkOutcome walk = run_walk(state_of(pair, truth), pm, wb, max_steps, rng, false);
    ProtocolResult r;
    r.truth = truth;
    r.steps = walk.steps;
    r.maxed_out = walk.label == CollapseLabel::MaxedOut;
    r.guess = strong_measure(walk.final_state, rng) == CollapseLabel::One ? Hypothesis::Psi1 : Hypothesis::Psi2;
    r.drifted_wrong_side = (truth == Hypothesis::Psi1 && walk.label == CollapseLabel::Zero) ||
                           (truth == Hypothesis::Psi2 && walk.label == CollapseLabel::One);
    return r;
}

ErrorDecomposition error_decomposition(const QubitState& truth_state, Hypothesis truth, const WalkBoundaries& wb,
                                       const PointerModel& pm, std::size_t trials, std::uint64_t master_seed,
                                       std::size_t max_steps, const EnsembleOptions& options) {
    require_trials(trials, 1, "error_decomposition");
    const auto walks = run_ensemble({truth_state, pm, wb, max_steps}, trials, master_seed, options);

    // Wrong strong outcome is |0> for psi1 and |1> for psi2.
    const auto wrong_weight = [truth](const QubitState& s) {
        const BornProbabilities p = born_probabilities(s);
        return truth == Hypothesis::Psi1 ? p.p0 : p.p1;
    };

    ErrorDecomposition d;
    d.truth = truth;
    d.trials = trials;
    d.strong_zero_tilde_error = wrong_weight(state_from_angle(wb.zero_side()));
    d.strong_one_tilde_error = wrong_weight(state_from_angle(wb.one_side()));

    std::size_t n_zero = 0;
    std::size_t n_one = 0;
    double maxed_sum = 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& w : walks) {
        double e = 0.0;
        switch (w.label) {
            case CollapseLabel::Zero:
                ++n_zero;
                e = d.strong_zero_tilde_error;
                break;
            case CollapseLabel::One:
                ++n_one;
                e = d.strong_one_tilde_error;
                break;
            case CollapseLabel::MaxedOut:
                e = wrong_weight(w.final_state);
                maxed_sum += e;
                break;
        }
        sum += e;
        sum_sq += e * e;
    }
    const auto n = static_cast<double>(trials);
    d.weak_to_zero = static_cast<double>(n_zero) / n;
    d.weak_to_one = static_cast<double>(n_one) / n;
    d.weak_maxed = static_cast<double>(trials - n_zero - n_one) / n;
    d.maxed_error = maxed_sum / n;

    const double success_zero = 1.0 - d.strong_zero_tilde_error;
    const double success_one = 1.0 - d.strong_one_tilde_error;
    d.error = d.weak_to_zero * d.strong_zero_tilde_error + d.weak_to_one * d.strong_one_tilde_error + d.maxed_error;
    d.success = d.weak_to_zero * success_zero + d.weak_to_one * success_one + (d.weak_maxed - d.maxed_error);

    const double mean = sum / n;
    const double var = trials > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
    d.error_stderr = std::sqrt(var / n);
    return d;
}

MeanReading mean_reading(const QubitState& start, std::size_t m, const PointerModel& pm, RngStream& rng) {
    if (m < 1) throw std::invalid_argument("mean_reading: m must be >= 1");
    QubitState s = start;
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto [next, x] = step(s, pm, rng);
        s = next;
        sum += x;
    }
    return {sum / static_cast<double>(m), s};
}

ProtocolResult hypothesis_trial(Hypothesis truth, const StatePair& pair, std::size_t m, const PointerModel& pm,
                                RngStream& rng) {
    const MeanReading mr = mean_reading(state_of(pair, truth), m, pm, rng);
    ProtocolResult r;
    r.truth = truth;
    r.steps = m;
    r.statistic = mr.mean;
    if (mr.mean < 0.0) {
        r.guess = Hypothesis::Psi1;
    } else if (mr.mean > 0.0) {
        r.guess = Hypothesis::Psi2;
    } else {
        r.guess = rng.uniform() < 0.5 ? Hypothesis::Psi1 : Hypothesis::Psi2;
    }
    r.drifted_wrong_side = on_wrong_side(mr.final_state, truth);
    return r;
}

namespace {

template <typename Trial>
SuccessCurve success_curve(std::span<const double> theta_grid_deg, std::size_t trials, std::uint64_t master_seed,
                           const EnsembleOptions& options, Trial&& trial) {
    SuccessCurve curve;
    for (std::size_t c = 0; c < theta_grid_deg.size(); ++c) {
        const Degrees theta{theta_grid_deg[c]};
        const StatePair pair = make_discrimination_pair(theta);
        std::vector<unsigned char> ok(trials, 0);
        parallel_for_trials(trials, options.workers, options.cancel, [&](std::size_t t) {
            RngStream rng(master_seed, grid_stream_index(c, t));
            ok[t] = trial(pair, t, rng) ? 1 : 0;
        });
        std::size_t successes = 0;
        for (unsigned char v : ok) successes += v;
        curve.theta_deg.push_back(theta.value);
        curve.success.push_back(static_cast<double>(successes) / static_cast<double>(trials));
        curve.standard_error.push_back(binomial_stderr(successes, trials));
        curve.helstrom.push_back(helstrom_bound(theta));
    }
    return curve;
}

}  // namespace

SuccessCurve hypothesis_success_curve(std::span<const double> theta_grid_deg, std::size_t m, const PointerModel& pm,
                                      std::size_t trials, std::uint64_t master_seed, const EnsembleOptions& options) {
    require_trials(trials, 100, "hypothesis_success_curve");
    return success_curve(theta_grid_deg, trials, master_seed, options,
                         [&](const StatePair& pair, std::size_t t, RngStream& rng) {
                             return hypothesis_trial(alternating_truth(t), pair, m, pm, rng).success();
                         });
}

SuccessCurve weak_process_curve(std::span<const double> theta_grid_deg, const WalkBoundaries& wb,
                                const PointerModel& pm, std::size_t trials, std::uint64_t master_seed,
                                std::size_t max_steps, const EnsembleOptions& options) {
    require_trials(trials, 1, "weak_process_curve");
    return success_curve(theta_grid_deg, trials, master_seed, options,
                         [&](const StatePair& pair, std::size_t, RngStream& rng) {
                             return run_walk(pair.psi1, pm, wb, max_steps, rng, false).label == CollapseLabel::One;
                         });
}

SuccessCurve iterative_success_curve(std::span<const double> theta_grid_deg, const WalkBoundaries& wb,
                                     const PointerModel& pm, std::size_t trials, std::uint64_t master_seed,
                                     std::size_t max_steps, const EnsembleOptions& options) {
    require_trials(trials, 1, "iterative_success_curve");
    return success_curve(theta_grid_deg, trials, master_seed, options,
                         [&](const StatePair& pair, std::size_t t, RngStream& rng) {
                             return iterative_trial(alternating_truth(t), pair, wb, pm, max_steps, rng).success();
                         });
}

EmpiricalCdf average_cdf(const QubitState& truth_state, std::size_t m, const PointerModel& pm, std::size_t trials,
                         std::uint64_t master_seed, const EnsembleOptions& options) {
    require_trials(trials, 1000, "average_cdf");
    std::vector<double> means(trials);
    parallel_for_trials(trials, options.workers, options.cancel, [&](std::size_t t) {
        RngStream rng(master_seed, t);
        means[t] = mean_reading(truth_state, m, pm, rng).mean;
    });
    return EmpiricalCdf(std::move(means));
}

}  // namespace weaksep
