#include "weaksep/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "weaksep/rng.hpp"

namespace weaksep {
namespace {

std::vector<double> lognormal_sample(double mu, double sd, std::size_t n, std::uint64_t seed) {
    RngStream r(seed, 0);
    std::vector<double> xs(n);
    for (auto& x : xs) x = std::exp(gaussian(r, mu, sd));
    return xs;
}

TEST(FitLognormal, RecoversSyntheticParameters) {
    const auto xs = lognormal_sample(2.8, 0.71, 100000, 17);
    const LogNormalFit fit = fit_lognormal(xs);
    EXPECT_NEAR(fit.mu_tilde, 2.8, 0.02);
    EXPECT_NEAR(fit.sigma_tilde, 0.71, 0.02);
    EXPECT_LE(fit.r_squared, 1.0);
    EXPECT_FALSE(fit.degenerate);
    EXPECT_NEAR(fit.median(), std::exp(fit.mu_tilde), 1e-12);
    EXPECT_EQ(fit.n, xs.size());
}

TEST(FitLognormal, MatchesDirectLogMoments) {
    const auto xs = lognormal_sample(1.0, 0.4, 500, 3);
    double s = 0.0;
    for (double x : xs) s += std::log(x);
    const double mu = s / xs.size();
    double ss = 0.0;
    for (double x : xs) ss += (std::log(x) - mu) * (std::log(x) - mu);
    const LogNormalFit fit = fit_lognormal(xs);
    EXPECT_NEAR(fit.mu_tilde, mu, 1e-12);
    EXPECT_NEAR(fit.sigma_tilde, std::sqrt(ss / xs.size()), 1e-12);
}

TEST(FitLognormal, ScaleEquivariant) {
    auto xs = lognormal_sample(0.5, 0.3, 1000, 5);
    const LogNormalFit a = fit_lognormal(xs);
    const double k = 7.25;
    for (auto& x : xs) x *= k;
    const LogNormalFit b = fit_lognormal(xs);
    EXPECT_NEAR(b.mu_tilde - a.mu_tilde, std::log(k), 1e-12);
    EXPECT_NEAR(b.sigma_tilde, a.sigma_tilde, 1e-12);
}

TEST(FitLognormal, ConstantSamplesFlaggedDegenerate) {
    const std::vector<double> xs(50, 12.0);
    const LogNormalFit fit = fit_lognormal(xs);
    EXPECT_TRUE(fit.degenerate);
    EXPECT_EQ(fit.sigma_tilde, 0.0);
    EXPECT_NEAR(fit.mu_tilde, std::log(12.0), 1e-12);
}

TEST(FitLognormal, RejectsBadInput) {
    std::vector<double> xs(40, 1.0);
    xs[3] = 0.0;
    EXPECT_THROW(fit_lognormal(xs), std::invalid_argument);
    xs[3] = -2.0;
    EXPECT_THROW(fit_lognormal(xs), std::invalid_argument);
    EXPECT_THROW(fit_lognormal(std::vector<double>(29, 1.0)), std::invalid_argument);
}

TEST(FitLognormal, BinRulesAllGiveHighRSquared) {
    const auto xs = lognormal_sample(2.0, 0.5, 20000, 8);
    for (BinRule r : {BinRule::Sturges, BinRule::Sqrt, BinRule::FreedmanDiaconis}) {
        EXPECT_GT(fit_lognormal(xs, r).r_squared, 0.95) << to_string(r);
    }
}

TEST(DensityHistogram, IntegratesToOne) {
    const auto xs = lognormal_sample(0.0, 1.0, 5000, 9);
    for (BinRule r : {BinRule::Sturges, BinRule::Sqrt, BinRule::FreedmanDiaconis}) {
        const Histogram h = density_histogram(xs, r);
        double total = 0.0;
        for (double d : h.density) total += d * h.width;
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
    // Sturges: ceil(log2 n) + 1 bins.
    EXPECT_EQ(density_histogram(xs, BinRule::Sturges).bins(), 14u);
    EXPECT_THROW(density_histogram(std::vector<double>{}, BinRule::Sturges), std::invalid_argument);
}

TEST(LognormalPdf, MatchesClosedForm) {
    const double x = 3.0;
    const double mu = 0.7;
    const double s = 0.4;
    const double z = (std::log(x) - mu) / s;
    EXPECT_NEAR(lognormal_pdf(x, mu, s), std::exp(-0.5 * z * z) / (x * s * std::sqrt(2.0 * M_PI)), 1e-15);
    EXPECT_EQ(lognormal_pdf(0.0, mu, s), 0.0);
    EXPECT_EQ(lognormal_pdf(-1.0, mu, s), 0.0);
}

TEST(QuadraticScaling, ExactQuadraticData) {
    const std::vector<double> sigmas{5, 10, 15, 20, 25};
    std::vector<double> medians;
    for (double s : sigmas) medians.push_back(1.37 * s * s);
    const ScalingFit fit = quadratic_scaling_fit(sigmas, medians);
    EXPECT_NEAR(fit.coefficient, 1.37, 1e-12);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(QuadraticScaling, LinearDataIsWorseFit) {
    const std::vector<double> sigmas{5, 10, 15, 20, 25};
    const ScalingFit fit = quadratic_scaling_fit(sigmas, sigmas);
    EXPECT_LT(fit.r_squared, 0.95);
    EXPECT_GT(fit.coefficient, 0.0);
}

TEST(QuadraticScaling, MatchesNormalEquations) {
    const std::vector<double> sigmas{1, 2, 3, 4};
    const std::vector<double> medians{1.1, 3.9, 9.4, 15.8};
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        num += sigmas[i] * sigmas[i] * medians[i];
        den += std::pow(sigmas[i], 4);
    }
    const double c = num / den;
    double mean = 0.0;
    for (double m : medians) mean += m / 4.0;
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        ss_res += std::pow(medians[i] - c * sigmas[i] * sigmas[i], 2);
        ss_tot += std::pow(medians[i] - mean, 2);
    }
    const ScalingFit fit = quadratic_scaling_fit(sigmas, medians);
    EXPECT_NEAR(fit.coefficient, c, 1e-12);
    EXPECT_NEAR(fit.r_squared, 1.0 - ss_res / ss_tot, 1e-12);
}

TEST(QuadraticScaling, RejectsDegenerateInput) {
    EXPECT_THROW(quadratic_scaling_fit(std::vector<double>{1, 2, 3}, std::vector<double>{1, 4, 9}),
                 std::invalid_argument);
    EXPECT_THROW(quadratic_scaling_fit(std::vector<double>{1, 2, 2, 3}, std::vector<double>{1, 4, 4, 9}),
                 std::invalid_argument);
    EXPECT_THROW(quadratic_scaling_fit(std::vector<double>{1, 2, 3, 4}, std::vector<double>{5, 5, 5, 5}),
                 std::invalid_argument);
    EXPECT_THROW(quadratic_scaling_fit(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 2, 3}),
                 std::invalid_argument);
}

TEST(EmpiricalCdf, SmallSamples) {
    const EmpiricalCdf c({3.0, 1.0, 2.0});
    EXPECT_EQ(c.median(), 2.0);
    EXPECT_EQ(c(0.5), 0.0);
    EXPECT_NEAR(c(1.0), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(c(2.5), 2.0 / 3.0, 1e-15);
    EXPECT_EQ(c(3.0), 1.0);
    EXPECT_NEAR(c.level(0), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(c.level(2), 1.0);

    const EmpiricalCdf one({4.0});
    EXPECT_EQ(one(3.999), 0.0);
    EXPECT_EQ(one(4.0), 1.0);
    EXPECT_EQ(one.median(), 4.0);
    EXPECT_THROW(EmpiricalCdf(std::vector<double>{}), std::invalid_argument);
}

TEST(EmpiricalCdf, QuantileInterpolates) {
    const EmpiricalCdf c({1.0, 2.0, 3.0, 4.0});
    EXPECT_EQ(c.median(), 2.5);
    EXPECT_EQ(c.quantile(0.0), 1.0);
    EXPECT_EQ(c.quantile(1.0), 4.0);
}

TEST(EmpiricalCdf, MonotoneLevels) {
    const auto xs = lognormal_sample(0.0, 1.0, 1000, 2);
    const EmpiricalCdf c(xs);
    for (std::size_t i = 1; i < c.size(); ++i) {
        ASSERT_LE(c.sorted()[i - 1], c.sorted()[i]);
        ASSERT_LT(c.level(i - 1), c.level(i));
    }
}

TEST(EmpiricalCdf, StandardNormalPassesKs) {
    RngStream r(99, 0);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = gaussian(r, 0.0, 1.0);
    const EmpiricalCdf c(xs);
    const double d = ks_statistic(c, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
    EXPECT_LT(d, ks_critical_value_1pct(xs.size()));
    // Median of N(0,1) with n = 1e5: s.e. ~ 1.2533 / sqrt(n).
    EXPECT_NEAR(c.median_stderr(), 1.2533 / std::sqrt(1e5), 1e-3 / std::sqrt(1e5) * 200);
}

TEST(Ks, DetectsWrongReference) {
    RngStream r(99, 1);
    std::vector<double> xs(10000);
    for (auto& x : xs) x = gaussian(r, 0.3, 1.0);
    const EmpiricalCdf c(xs);
    const double d = ks_statistic(c, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
    EXPECT_GT(d, ks_critical_value_1pct(xs.size()));
}

TEST(Ks, SpanOverloadAgreesWithFunctionOverload) {
    const EmpiricalCdf c({-1.0, 0.2, 0.5, 2.0});
    std::vector<double> ref;
    const auto f = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    for (double x : c.sorted()) ref.push_back(f(x));
    EXPECT_EQ(ks_statistic(c, ref), ks_statistic(c, f));
    EXPECT_NEAR(ks_critical_value_1pct(100), 0.162762, 1e-6);
}

TEST(BinomialStderr, Examples) {
    EXPECT_EQ(binomial_stderr(0, 10), 0.0);
    EXPECT_EQ(binomial_stderr(10, 10), 0.0);
    EXPECT_NEAR(binomial_stderr(50, 100), 0.05, 1e-15);
    EXPECT_THROW(binomial_stderr(11, 10), std::invalid_argument);
    EXPECT_THROW(binomial_stderr(0, 0), std::invalid_argument);
}

TEST(SampleMoments, SmallSample) {
    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    const SampleMoments m = sample_moments(xs);
    EXPECT_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.variance, 5.0 / 3.0, 1e-15);
    EXPECT_NEAR(m.mean_stderr(), std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
    EXPECT_EQ(m.n, 4u);
}

}  // namespace
}  // namespace weaksep
