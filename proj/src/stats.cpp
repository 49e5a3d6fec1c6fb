#include "weaksep/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace weaksep {

std::string_view to_string(BinRule rule) {
    switch (rule) {
        case BinRule::Sturges: return "sturges";
        case BinRule::Sqrt: return "sqrt";
        case BinRule::FreedmanDiaconis: return "freedman-diaconis";
    }
    return "unknown";
}

namespace {

std::size_t bin_count(std::span<const double> samples, BinRule rule, double range) {
    const auto n = static_cast<double>(samples.size());
    switch (rule) {
        case BinRule::Sturges: return static_cast<std::size_t>(std::ceil(std::log2(n))) + 1;
        case BinRule::Sqrt: return static_cast<std::size_t>(std::ceil(std::sqrt(n)));
        case BinRule::FreedmanDiaconis: {
            EmpiricalCdf cdf(std::vector<double>(samples.begin(), samples.end()));
            const double iqr = cdf.quantile(0.75) - cdf.quantile(0.25);
            if (iqr <= 0.0 || range <= 0.0) return 1;
            const double h = 2.0 * iqr / std::cbrt(n);
            return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(range / h)));
        }
    }
    return 1;
}

}  // namespace

Histogram density_histogram(std::span<const double> samples, BinRule rule) {
    if (samples.empty()) throw std::invalid_argument("density_histogram: no samples");
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    const double range = *mx - *mn;
    Histogram h;
    h.lo = *mn;
    const std::size_t k = range > 0.0 ? bin_count(samples, rule, range) : 1;
    h.width = range > 0.0 ? range / static_cast<double>(k) : 1.0;
    h.density.assign(k, 0.0);
    for (double x : samples) {
        auto i = static_cast<std::size_t>((x - h.lo) / h.width);
        if (i >= k) i = k - 1;  // max lands on the closed right edge
        h.density[i] += 1.0;
    }
    const double scale = 1.0 / (static_cast<double>(samples.size()) * h.width);
    for (double& d : h.density) d *= scale;
    return h;
}

double lognormal_pdf(double x, double mu_tilde, double sigma_tilde) {
    if (x <= 0.0) return 0.0;
    const double z = (std::log(x) - mu_tilde) / sigma_tilde;
    return std::exp(-0.5 * z * z) / (x * sigma_tilde * std::sqrt(2.0 * std::numbers::pi));
}

double LogNormalFit::median() const { return std::exp(mu_tilde); }

LogNormalFit fit_lognormal(std::span<const double> samples, BinRule rule) {
    if (samples.size() < 30) throw std::invalid_argument("fit_lognormal: need at least 30 samples");
    std::vector<double> logs;
    logs.reserve(samples.size());
    for (double x : samples) {
        if (!(x > 0.0)) throw std::invalid_argument("fit_lognormal: samples must be positive");
        logs.push_back(std::log(x));
    }
    const auto n = static_cast<double>(logs.size());
    LogNormalFit fit;
    fit.n = logs.size();
    fit.mu_tilde = std::accumulate(logs.begin(), logs.end(), 0.0) / n;
    double ss = 0.0;
    for (double l : logs) ss += (l - fit.mu_tilde) * (l - fit.mu_tilde);
    fit.sigma_tilde = std::sqrt(ss / n);
    if (std::all_of(samples.begin(), samples.end(), [&](double x) { return x == samples.front(); })) {
        fit.mu_tilde = std::log(samples.front());
        fit.sigma_tilde = 0.0;
        fit.degenerate = true;
        return fit;
    }

    const Histogram h = density_histogram(samples, rule);
    double mean_density = 0.0;
    for (double d : h.density) mean_density += d;
    mean_density /= static_cast<double>(h.bins());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < h.bins(); ++i) {
        const double model = lognormal_pdf(h.center(i), fit.mu_tilde, fit.sigma_tilde);
        ss_res += (h.density[i] - model) * (h.density[i] - model);
        ss_tot += (h.density[i] - mean_density) * (h.density[i] - mean_density);
    }
    if (ss_tot == 0.0) {
        fit.degenerate = true;
        return fit;
    }
    fit.r_squared = 1.0 - ss_res / ss_tot;
    return fit;
}

ScalingFit quadratic_scaling_fit(std::span<const double> sigmas, std::span<const double> medians) {
    if (sigmas.size() != medians.size()) {
        throw std::invalid_argument("quadratic_scaling_fit: sigmas and medians differ in length");
    }
    if (sigmas.size() < 4) throw std::invalid_argument("quadratic_scaling_fit: need at least 4 points");
    std::vector<double> sorted(sigmas.begin(), sigmas.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("quadratic_scaling_fit: sigmas must be distinct");
    }
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        const double x = sigmas[i] * sigmas[i];
        sxy += x * medians[i];
        sxx += x * x;
    }
    if (sxx == 0.0) throw std::invalid_argument("quadratic_scaling_fit: all sigmas are zero");
    ScalingFit fit;
    fit.coefficient = sxy / sxx;
    const double mean = std::accumulate(medians.begin(), medians.end(), 0.0) / static_cast<double>(medians.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        const double r = medians[i] - fit.coefficient * sigmas[i] * sigmas[i];
        ss_res += r * r;
        ss_tot += (medians[i] - mean) * (medians[i] - mean);
    }
    if (ss_tot == 0.0) throw std::invalid_argument("quadratic_scaling_fit: medians are constant");
    if (!(fit.coefficient > 0.0)) throw std::invalid_argument("quadratic_scaling_fit: nonpositive coefficient");
    fit.r_squared = 1.0 - ss_res / ss_tot;
    return fit;
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw std::invalid_argument("EmpiricalCdf: need at least one sample");
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::level(std::size_t i) const {
    return static_cast<double>(i + 1) / static_cast<double>(sorted_.size());
}

double EmpiricalCdf::operator()(double x) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double EmpiricalCdf::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("EmpiricalCdf::quantile: p outside [0, 1]");
    const double pos = p * static_cast<double>(sorted_.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= sorted_.size()) return sorted_.back();
    const double frac = pos - static_cast<double>(i);
    return sorted_[i] + frac * (sorted_[i + 1] - sorted_[i]);
}

double EmpiricalCdf::median_stderr() const {
    const auto n = static_cast<double>(sorted_.size());
    const double half_width = 1.96 * std::sqrt(n) / 2.0;
    const auto clamp_rank = [&](double r) {
        return static_cast<std::size_t>(std::clamp(r, 0.0, n - 1.0));
    };
    const std::size_t lo = clamp_rank(std::floor(n / 2.0 - half_width));
    const std::size_t hi = clamp_rank(std::ceil(n / 2.0 + half_width));
    return (sorted_[hi] - sorted_[lo]) / (2.0 * 1.96);
}

double ks_statistic(const EmpiricalCdf& ecdf, std::span<const double> reference_at_sorted) {
    const auto& xs = ecdf.sorted();
    if (reference_at_sorted.size() != xs.size()) {
        throw std::invalid_argument("ks_statistic: reference size mismatch");
    }
    const auto n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = reference_at_sorted[i];
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_statistic(const EmpiricalCdf& ecdf, const std::function<double(double)>& reference) {
    std::vector<double> ref;
    ref.reserve(ecdf.size());
    for (double x : ecdf.sorted()) ref.push_back(reference(x));
    return ks_statistic(ecdf, ref);
}

double ks_critical_value_1pct(std::size_t n) { return 1.62762 / std::sqrt(static_cast<double>(n)); }

double binomial_stderr(std::size_t successes, std::size_t trials) {
    if (trials == 0 || successes > trials) {
        throw std::invalid_argument("binomial_stderr: need 0 <= successes <= trials and trials >= 1");
    }
    const double p = static_cast<double>(successes) / static_cast<double>(trials);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

double SampleMoments::mean_stderr() const { return std::sqrt(variance / static_cast<double>(n)); }

double SampleMoments::variance_stderr() const {
    const double v = variance * static_cast<double>(n - 1) / static_cast<double>(n);
    return std::sqrt(std::max(0.0, fourth_central - v * v) / static_cast<double>(n));
}

SampleMoments sample_moments(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("sample_moments: need at least 2 samples");
    SampleMoments m;
    m.n = xs.size();
    const auto n = static_cast<double>(xs.size());
    m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double s2 = 0.0;
    double s4 = 0.0;
    for (double x : xs) {
        const double d = x - m.mean;
        s2 += d * d;
        s4 += d * d * d * d;
    }
    m.variance = s2 / (n - 1.0);
    m.fourth_central = s4 / n;
    return m;
}

}  // namespace weaksep
