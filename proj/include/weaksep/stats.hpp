// Estimators used by the experiments: log-normal fitting, the median ~ c*sigma^2
// scaling law, empirical CDFs, Kolmogorov-Smirnov distances and binomial errors.
// Everything here is a pure function of its arguments.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace weaksep {

enum class BinRule { Sturges, Sqrt, FreedmanDiaconis };

std::string_view to_string(BinRule rule);

/// Equal-width histogram normalized to a probability density.
struct Histogram {
    double lo = 0.0;
    double width = 0.0;
    std::vector<double> density;

    double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * width; }
    std::size_t bins() const { return density.size(); }
};

/// Bins span [min, max] of the samples. Throws on empty input.
Histogram density_histogram(std::span<const double> samples, BinRule rule);

double lognormal_pdf(double x, double mu_tilde, double sigma_tilde);

struct LogNormalFit {
    double mu_tilde = 0.0;     ///< mean of log-samples
    double sigma_tilde = 0.0;  ///< MLE standard deviation of log-samples
    double r_squared = 0.0;    ///< histogram density vs fitted pdf at bin centers
    bool degenerate = false;   ///< all samples equal; sigma_tilde is 0 and r_squared meaningless
    std::size_t n = 0;

    double median() const;
};

/// Maximum-likelihood log-normal fit. Requires n >= 30 positive samples;
/// throws std::invalid_argument otherwise.
LogNormalFit fit_lognormal(std::span<const double> samples, BinRule rule = BinRule::Sturges);

struct ScalingFit {
    double coefficient = 0.0;
    double r_squared = 0.0;
};

/// Least-squares fit of medians = c * sigma^2 through the origin.
/// R^2 is 1 - SS_res / SS_tot with SS_tot about the mean median.
ScalingFit quadratic_scaling_fit(std::span<const double> sigmas, std::span<const double> medians);

/// Right-continuous step CDF of a sample.
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(std::vector<double> samples);

    std::size_t size() const { return sorted_.size(); }
    const std::vector<double>& sorted() const { return sorted_; }

    /// Level after the i-th sorted value, (i + 1) / n.
    double level(std::size_t i) const;
    /// F(x) = #{samples <= x} / n.
    double operator()(double x) const;

    /// Linear interpolation between order statistics at position p * (n - 1).
    double quantile(double p) const;
    double median() const { return quantile(0.5); }

    /// Distribution-free standard error of the median from the order statistics
    /// at ranks n/2 -+ 1.96 sqrt(n)/2.
    double median_stderr() const;

private:
    std::vector<double> sorted_;
};

/// sup |F_n - F| for a reference CDF; `reference` is evaluated at each sorted sample.
double ks_statistic(const EmpiricalCdf& ecdf, const std::function<double(double)>& reference);

/// Same, with the reference CDF already evaluated at ecdf.sorted()[i].
double ks_statistic(const EmpiricalCdf& ecdf, std::span<const double> reference_at_sorted);

/// Asymptotic 1% critical value of the one-sample KS statistic, 1.62762 / sqrt(n).
double ks_critical_value_1pct(std::size_t n);

double binomial_stderr(std::size_t successes, std::size_t trials);

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;         ///< unbiased
    double fourth_central = 0.0;   ///< biased m4, for the variance standard error
    std::size_t n = 0;

    double mean_stderr() const;
    double variance_stderr() const;
};

SampleMoments sample_moments(std::span<const double> xs);

}  // namespace weaksep
