// The two decision protocols built on the weak walk: walk-to-collapse followed
// by one strong measurement, and sign testing of the mean of a few readings.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "weaksep/qubit.hpp"
#include "weaksep/rng.hpp"
#include "weaksep/stats.hpp"
#include "weaksep/weak_walk.hpp"

namespace weaksep {

enum class Hypothesis { Psi1, Psi2 };

std::string_view to_string(Hypothesis h);

const QubitState& state_of(const StatePair& pair, Hypothesis h);

struct ProtocolResult {
    Hypothesis guess = Hypothesis::Psi1;
    Hypothesis truth = Hypothesis::Psi1;
    std::optional<double> statistic;  ///< mean reading; hypothesis testing only
    std::size_t steps = 0;
    bool maxed_out = false;           ///< walk hit max_steps; decided by the strong measurement anyway
    bool drifted_wrong_side = false;  ///< final state on the far side of 45 degrees (or walk collapsed wrongly)

    bool success() const { return guess == truth; }
};

/// Walk until collapse, measure S_z strongly, guess psi1 iff the result is |1>.
ProtocolResult iterative_trial(Hypothesis truth, const StatePair& pair, const WalkBoundaries& wb,
                               const PointerModel& pm, std::size_t max_steps, RngStream& rng);

/// Error of the walk-then-measure protocol split into weak-process and
/// strong-measurement factors. For truth psi1 the error outcome is |0>:
///   Err = P^w(->|0~>) cos^2(a0~) + P^w(->|1~>) cos^2(a1~) + P^w(maxed) <alpha_final^2>.
/// For psi2 the roles of |0> and |1> swap. Err + success == 1 exactly up to rounding.
struct ErrorDecomposition {
    Hypothesis truth = Hypothesis::Psi1;
    std::size_t trials = 0;
    double weak_to_zero = 0.0;         ///< P^w(psi -> |0~>)
    double weak_to_one = 0.0;          ///< P^w(psi -> |1~>)
    double weak_maxed = 0.0;           ///< fraction of walks that hit max_steps
    double strong_zero_tilde_error = 0.0;  ///< P^s(|0~> -> wrong outcome)
    double strong_one_tilde_error = 0.0;   ///< P^s(|1~> -> wrong outcome)
    double maxed_error = 0.0;          ///< mean wrong-outcome Born weight over maxed walks, times weak_maxed
    double error = 0.0;
    double success = 0.0;
    double error_stderr = 0.0;
};

ErrorDecomposition error_decomposition(const QubitState& truth_state, Hypothesis truth, const WalkBoundaries& wb,
                                       const PointerModel& pm, std::size_t trials, std::uint64_t master_seed,
                                       std::size_t max_steps, const EnsembleOptions& options = {});

/// Mean of exactly m readings from m sequential weak measurements (no boundaries).
struct MeanReading {
    double mean;
    QubitState final_state;
};

MeanReading mean_reading(const QubitState& start, std::size_t m, const PointerModel& pm, RngStream& rng);

/// Sign test on the mean of m readings: psi1 iff mean < 0. An exact zero is
/// settled by one extra fair coin from rng.
ProtocolResult hypothesis_trial(Hypothesis truth, const StatePair& pair, std::size_t m, const PointerModel& pm,
                                RngStream& rng);

struct SuccessCurve {
    std::vector<double> theta_deg;
    std::vector<double> success;
    std::vector<double> standard_error;
    std::vector<double> helstrom;
};

/// Fig. 5 style curve. Truth alternates psi1 / psi2 by trial parity (equal
/// priors); trial t at grid index c draws from RngStream(seed, grid_stream_index(c, t)).
SuccessCurve hypothesis_success_curve(std::span<const double> theta_grid_deg, std::size_t m, const PointerModel& pm,
                                      std::size_t trials, std::uint64_t master_seed,
                                      const EnsembleOptions& options = {});

/// Weak-process success P^w(psi1 -> |1~>) per theta: fraction of psi1 walks
/// collapsing on the |1~> side. No strong measurement.
SuccessCurve weak_process_curve(std::span<const double> theta_grid_deg, const WalkBoundaries& wb,
                                const PointerModel& pm, std::size_t trials, std::uint64_t master_seed,
                                std::size_t max_steps, const EnsembleOptions& options = {});

/// Full iterative protocol success (walk + strong measurement), truth alternating.
SuccessCurve iterative_success_curve(std::span<const double> theta_grid_deg, const WalkBoundaries& wb,
                                     const PointerModel& pm, std::size_t trials, std::uint64_t master_seed,
                                     std::size_t max_steps, const EnsembleOptions& options = {});

/// Empirical CDF of the mean of m readings starting from truth_state.
EmpiricalCdf average_cdf(const QubitState& truth_state, std::size_t m, const PointerModel& pm, std::size_t trials,
                         std::uint64_t master_seed, const EnsembleOptions& options = {});

}  // namespace weaksep
