#include "weaksep/discriminate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace weaksep {
namespace {

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double cos_sq_deg(double a) { return std::pow(std::cos(a * M_PI / 180.0), 2); }

double frequency(std::size_t hits, std::size_t n) { return static_cast<double>(hits) / static_cast<double>(n); }

double se(double p, std::size_t n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

TEST(StateOf, PicksPairMember) {
    const StatePair p = make_discrimination_pair(Degrees{40});
    EXPECT_EQ(state_of(p, Hypothesis::Psi1), p.psi1);
    EXPECT_EQ(state_of(p, Hypothesis::Psi2), p.psi2);
    EXPECT_EQ(to_string(Hypothesis::Psi1), "psi1");
}

TEST(IterativeTrial, OrthogonalPairNearlyAlwaysSucceeds) {
    const StatePair pair = make_discrimination_pair(Degrees{90});
    const WalkBoundaries wb(Degrees{0.1}, Degrees{89.9});
    const PointerModel pm(5.0);
    const std::size_t n = 10000;
    std::size_t ok = 0;
    for (std::size_t t = 0; t < n; ++t) {
        RngStream r(1, t);
        ok += iterative_trial(t % 2 ? Hypothesis::Psi1 : Hypothesis::Psi2, pair, wb, pm, 1000, r).success();
    }
    EXPECT_GE(frequency(ok, n), 0.99);
}

TEST(IterativeTrial, IndistinguishablePairIsCoinFlip) {
    const StatePair pair = make_discrimination_pair(Degrees{0.01});
    const WalkBoundaries wb(Degrees{10}, Degrees{80});
    const PointerModel pm(3.0);
    const std::size_t n = 10000;
    std::size_t ok = 0;
    for (std::size_t t = 0; t < n; ++t) {
        RngStream r(2, t);
        ok += iterative_trial(t % 2 ? Hypothesis::Psi1 : Hypothesis::Psi2, pair, wb, pm, 100000, r).success();
    }
    EXPECT_NEAR(frequency(ok, n), 0.5, 3.0 * se(0.5, n));
}

TEST(IterativeTrial, MaxedOutIsFlaggedAndStillDecided) {
    const StatePair pair = make_discrimination_pair(Degrees{50});
    RngStream r(3, 0);
    const ProtocolResult res = iterative_trial(Hypothesis::Psi1, pair, WalkBoundaries(Degrees{1}, Degrees{89}),
                                               PointerModel(50.0), 2, r);
    EXPECT_TRUE(res.maxed_out);
    EXPECT_EQ(res.steps, 2u);
    EXPECT_FALSE(res.statistic.has_value());
}

TEST(WeakProcessCurve, ExceedsHelstromWithWideBoundaries) {
    // Without overshoot the Born-weight martingale gives
    // P(-> |1~>) = (sin^2 phi - sin^2 a0) / (sin^2 a1 - sin^2 a0) > sin^2 phi = Helstrom.
    const std::vector<double> grid{50.0};
    const PointerModel pm(5.0);
    const std::size_t n = 10000;
    const SuccessCurve c =
        weak_process_curve(grid, WalkBoundaries(Degrees{10}, Degrees{80}), pm, n, 4, default_max_steps(pm));
    const double h = helstrom_bound(Degrees{50});
    EXPECT_EQ(c.helstrom[0], h);
    EXPECT_GT(c.success[0], h + 3.0 * c.standard_error[0]);
    const double s0 = 1.0 - cos_sq_deg(10.0);
    const double s1 = 1.0 - cos_sq_deg(80.0);
    EXPECT_NEAR(c.success[0], (h - s0) / (s1 - s0), 4.0 * c.standard_error[0] + 0.005);
}

TEST(WeakProcessCurve, NotBelowHelstromAtTightBoundaries) {
    const std::vector<double> grid{50.0};
    const PointerModel pm(5.0);
    const std::size_t n = 10000;
    const SuccessCurve c =
        weak_process_curve(grid, WalkBoundaries(Degrees{1}, Degrees{89}), pm, n, 5, default_max_steps(pm));
    EXPECT_GE(c.success[0], c.helstrom[0] - 3.0 * c.standard_error[0]);
    EXPECT_NEAR(c.helstrom[0], 0.8830, 5e-5);
}

TEST(ErrorDecomposition, AxisBoundariesMakeStrongFactorsExact) {
    const StatePair pair = make_discrimination_pair(Degrees{50});
    const PointerModel pm(2.0);
    const ErrorDecomposition d =
        error_decomposition(pair.psi1, Hypothesis::Psi1, WalkBoundaries(Degrees{0}, Degrees{90}), pm, 500, 6, 50);
    EXPECT_EQ(d.strong_zero_tilde_error, 1.0);
    EXPECT_EQ(d.strong_one_tilde_error, 0.0);
    EXPECT_NEAR(d.error, d.weak_to_zero + d.maxed_error, 1e-12);
}

TEST(ErrorDecomposition, TightBoundaryFactors) {
    const StatePair pair = make_discrimination_pair(Degrees{50});
    const PointerModel pm(5.0);
    const ErrorDecomposition d = error_decomposition(pair.psi1, Hypothesis::Psi1,
                                                     WalkBoundaries(Degrees{1}, Degrees{89}), pm, 2000, 7,
                                                     default_max_steps(pm));
    EXPECT_NEAR(d.strong_one_tilde_error, cos_sq_deg(89.0), 1e-15);
    EXPECT_NEAR(d.strong_one_tilde_error, 3.05e-4, 5e-7);
    EXPECT_NEAR(d.strong_zero_tilde_error, cos_sq_deg(1.0), 1e-15);
    EXPECT_NEAR(d.error + d.success, 1.0, 1e-12);
    EXPECT_NEAR(d.weak_to_zero + d.weak_to_one + d.weak_maxed, 1.0, 1e-12);
    const double composed = d.weak_to_zero * d.strong_zero_tilde_error +
                            d.weak_to_one * d.strong_one_tilde_error + d.maxed_error;
    EXPECT_NEAR(d.error, composed, 1e-12);
    EXPECT_GT(d.error_stderr, 0.0);
    EXPECT_EQ(d.trials, 2000u);
}

TEST(ErrorDecomposition, Psi2SwapsRoles) {
    const StatePair pair = make_discrimination_pair(Degrees{50});
    const PointerModel pm(5.0);
    const WalkBoundaries wb(Degrees{1}, Degrees{89});
    const ErrorDecomposition d = error_decomposition(pair.psi2, Hypothesis::Psi2, wb, pm, 500, 8, 5000);
    EXPECT_NEAR(d.strong_zero_tilde_error, 1.0 - cos_sq_deg(1.0), 1e-15);
    EXPECT_NEAR(d.strong_one_tilde_error, 1.0 - cos_sq_deg(89.0), 1e-15);
    EXPECT_NEAR(d.error + d.success, 1.0, 1e-12);
    EXPECT_THROW(error_decomposition(pair.psi2, Hypothesis::Psi2, wb, pm, 0, 8, 5000), std::invalid_argument);
}

TEST(HypothesisTrial, SingleReadingOnOneState) {
    // theta = 90: psi1 is |1>, readings ~ N(-1, sigma^2), success = Phi(1 / sigma).
    const StatePair pair = make_discrimination_pair(Degrees{90});
    const PointerModel pm(3.0);
    const std::size_t n = 100000;
    std::size_t ok = 0;
    for (std::size_t t = 0; t < n; ++t) {
        RngStream r(9, t);
        const ProtocolResult res = hypothesis_trial(Hypothesis::Psi1, pair, 1, pm, r);
        ASSERT_TRUE(res.statistic.has_value());
        ASSERT_EQ(res.steps, 1u);
        ok += res.success();
    }
    const double p = phi(1.0 / 3.0);
    EXPECT_NEAR(p, 0.6306, 5e-5);
    EXPECT_NEAR(frequency(ok, n), p, 3.0 * se(p, n));
}

TEST(HypothesisTrial, GuessFollowsSignOfMean) {
    const StatePair pair = make_discrimination_pair(Degrees{40});
    const PointerModel pm(3.0);
    for (std::size_t t = 0; t < 200; ++t) {
        RngStream r(10, t);
        const ProtocolResult res = hypothesis_trial(Hypothesis::Psi2, pair, 5, pm, r);
        ASSERT_EQ(res.guess == Hypothesis::Psi1, *res.statistic < 0.0);
    }
    EXPECT_THROW(
        [&] {
            RngStream r(1, 1);
            hypothesis_trial(Hypothesis::Psi1, pair, 0, pm, r);
        }(),
        std::invalid_argument);
}

TEST(HypothesisTrial, MeanReadingMatchesReplayedSteps) {
    const PointerModel pm(3.0);
    RngStream a(11, 0);
    RngStream b(11, 0);
    const MeanReading m = mean_reading(state_from_angle(Degrees{30}), 7, pm, a);
    QubitState s = state_from_angle(Degrees{30});
    double sum = 0.0;
    for (int k = 0; k < 7; ++k) {
        const StepResult st = step(s, pm, b);
        sum += st.reading;
        s = st.state;
    }
    EXPECT_NEAR(m.mean, sum / 7.0, 1e-15);
    EXPECT_EQ(m.final_state, s);
}

TEST(HypothesisTrial, DriftFlagMatchesFinalSide) {
    const StatePair pair = make_discrimination_pair(Degrees{20});
    const PointerModel pm(1.0);
    std::size_t flagged = 0;
    for (std::size_t t = 0; t < 500; ++t) {
        RngStream r(12, t);
        flagged += hypothesis_trial(Hypothesis::Psi1, pair, 20, pm, r).drifted_wrong_side;
    }
    // psi1 sits at 55 degrees; strong-ish readings drive a sizable share across 45.
    EXPECT_GT(flagged, 0u);
    EXPECT_LT(flagged, 500u);
}

TEST(HypothesisCurve, ShapeAndBounds) {
    std::vector<double> grid;
    for (double t = 10; t <= 90; t += 10) grid.push_back(t);
    const PointerModel pm(3.0);
    const SuccessCurve c5 = hypothesis_success_curve(grid, 5, pm, 5000, 13);
    const SuccessCurve c20 = hypothesis_success_curve(grid, 20, pm, 5000, 13);
    ASSERT_EQ(c5.success.size(), grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_LE(c5.success[i], c5.helstrom[i] + 3.0 * c5.standard_error[i]);
        EXPECT_LE(c20.success[i], c20.helstrom[i] + 3.0 * c20.standard_error[i]);
        if (i > 0) {
            const double slack = 3.0 * std::hypot(c5.standard_error[i], c5.standard_error[i - 1]);
            EXPECT_GE(c5.success[i], c5.success[i - 1] - slack) << grid[i];
        }
    }
    // theta = 50 sits at index 4.
    EXPECT_GT(c20.success[4], c5.success[4]);
    EXPECT_THROW(hypothesis_success_curve(grid, 5, pm, 99, 13), std::invalid_argument);
}

TEST(HypothesisCurve, OrthogonalPairLargeMApproachesOne) {
    const std::vector<double> grid{90.0};
    const SuccessCurve c = hypothesis_success_curve(grid, 200, PointerModel(3.0), 2000, 14);
    EXPECT_GT(c.success[0], 0.99);
    EXPECT_LE(c.success[0], 1.0);
}

TEST(HypothesisCurve, IndistinguishableIsCoinFlip) {
    const std::vector<double> grid{0.01};
    const SuccessCurve c = hypothesis_success_curve(grid, 10, PointerModel(3.0), 10000, 15);
    EXPECT_NEAR(c.success[0], 0.5, 3.0 * se(0.5, 10000));
}

TEST(ProtocolSymmetry, MirroredConfigurationHasIdenticalOutcomes) {
    const StatePair pair = make_discrimination_pair(Degrees{50});
    const PointerModel pm(3.0);
    const WalkBoundaries wb(Degrees{10}, Degrees{80});
    std::size_t ok1 = 0;
    std::size_t ok2 = 0;
    for (std::size_t t = 0; t < 2000; ++t) {
        RngStream r(16, t);
        RngStream m = RngStream(16, t).mirrored();
        const ProtocolResult a = hypothesis_trial(Hypothesis::Psi1, pair, 10, pm, r);
        const ProtocolResult b = hypothesis_trial(Hypothesis::Psi2, pair, 10, pm, m);
        ASSERT_EQ(*a.statistic, -*b.statistic);
        ASSERT_EQ(a.success(), b.success());
        ok1 += a.success();
        ok2 += b.success();

        RngStream r2(17, t);
        RngStream m2 = RngStream(17, t).mirrored();
        const ProtocolResult c = iterative_trial(Hypothesis::Psi1, pair, wb, pm, 10000, r2);
        const ProtocolResult d = iterative_trial(Hypothesis::Psi2, pair, wb, pm, 10000, m2);
        ASSERT_EQ(c.steps, d.steps);
        ASSERT_EQ(c.success(), d.success());
    }
    EXPECT_EQ(ok1, ok2);
}

TEST(AverageCdf, EigenstateGivesShiftedNormal) {
    const double sigma = 3.0;
    const std::size_t m = 10;
    const EmpiricalCdf c = average_cdf(QubitState::zero(), m, PointerModel(sigma), 20000, 18);
    const double sd = sigma / std::sqrt(static_cast<double>(m));
    const double d = ks_statistic(c, [sd](double x) { return phi((x - 1.0) / sd); });
    EXPECT_LT(d, ks_critical_value_1pct(c.size()));
    for (std::size_t i = 1; i < c.size(); ++i) ASSERT_LE(c.sorted()[i - 1], c.sorted()[i]);
    EXPECT_EQ(c.level(c.size() - 1), 1.0);
    EXPECT_THROW(average_cdf(QubitState::zero(), m, PointerModel(sigma), 999, 18), std::invalid_argument);
}

TEST(IterativeCurve, DeterministicAndWorkerIndependent) {
    const std::vector<double> grid{30.0, 60.0};
    const PointerModel pm(3.0);
    const WalkBoundaries wb(Degrees{5}, Degrees{85});
    const SuccessCurve a = iterative_success_curve(grid, wb, pm, 400, 19, 10000);
    const SuccessCurve b = iterative_success_curve(grid, wb, pm, 400, 19, 10000, EnsembleOptions{3, nullptr, {}});
    EXPECT_EQ(a.success, b.success);
    EXPECT_EQ(a.standard_error, b.standard_error);
}

}  // namespace
}  // namespace weaksep
