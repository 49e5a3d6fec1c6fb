#include "weaksep/tsvf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "weaksep/quadrature.hpp"

namespace weaksep {

namespace {

constexpr double kHalfWidthSigmas = 12.0;
constexpr double kOperatorTolerance = 1e-10;

double gaussian_pdf(double x, double sigma) {
    const double z = x / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// e^{-2(g sigma)^2}
double damping(double g, double sigma) { return std::exp(-2.0 * g * g * sigma * sigma); }

double sin_half_sq(double eta) {
    const double s = std::sin(0.5 * eta);
    return s * s;
}

}  // namespace

TsvfSetup::TsvfSetup(double eta, double g, double sigma) : eta_(eta), g_(g), sigma_(sigma) {
    if (!(eta > 0.0 && eta <= std::numbers::pi)) {
        throw std::invalid_argument("TsvfSetup: eta must lie in (0, pi]; eta = 0 has zero post-selection probability");
    }
    if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("TsvfSetup: g must be >= 0");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("TsvfSetup: sigma must be > 0");
}

double TsvfSetup::b() const { return std::cos(0.5 * eta_) / std::sin(0.5 * eta_); }
double TsvfSetup::a_plus() const { return 0.5 * (1.0 + b() * b()); }
double TsvfSetup::a_minus() const { return 0.5 * (1.0 - b() * b()); }

InvolutoryObservable::InvolutoryObservable(const Matrix2& m) : m_(m) {
    const bool hermitian = std::abs(m[0].imag()) <= kOperatorTolerance && std::abs(m[3].imag()) <= kOperatorTolerance &&
                           std::abs(m[1] - std::conj(m[2])) <= kOperatorTolerance;
    if (!hermitian) throw std::invalid_argument("InvolutoryObservable: matrix is not Hermitian");
    const Matrix2 sq{m[0] * m[0] + m[1] * m[2], m[0] * m[1] + m[1] * m[3], m[2] * m[0] + m[3] * m[2],
                     m[2] * m[1] + m[3] * m[3]};
    const bool involutory = std::abs(sq[0] - 1.0) <= kOperatorTolerance && std::abs(sq[1]) <= kOperatorTolerance &&
                            std::abs(sq[2]) <= kOperatorTolerance && std::abs(sq[3] - 1.0) <= kOperatorTolerance;
    if (!involutory) throw std::invalid_argument("InvolutoryObservable: A^2 != 1");
}

InvolutoryObservable InvolutoryObservable::sigma_y() {
    using namespace std::complex_literals;
    return InvolutoryObservable(Matrix2{0.0, -1.0i, 1.0i, 0.0});
}

InvolutoryObservable InvolutoryObservable::sigma_z() { return InvolutoryObservable(Matrix2{1.0, 0.0, 0.0, -1.0}); }

WeakValue weak_value(const QubitState& psi_in, const QubitState& psi_fin, const InvolutoryObservable& a) {
    const double den = overlap(psi_fin, psi_in);
    if (std::abs(den) <= 1e-12) {
        throw std::domain_error("weak_value: pre- and post-selected states are orthogonal");
    }
    const Matrix2& m = a.matrix();
    const std::complex<double> a_in0 = m[0] * psi_in.alpha() + m[1] * psi_in.beta();
    const std::complex<double> a_in1 = m[2] * psi_in.alpha() + m[3] * psi_in.beta();
    const std::complex<double> w = (psi_fin.alpha() * a_in0 + psi_fin.beta() * a_in1) / den;
    return {w.real(), w.imag()};
}

QubitState postselected_state() { return QubitState(1.0, 1.0); }

QubitState input_state_for_eta(double eta) {
    const double c = std::cos(0.5 * eta);
    const double s = std::sin(0.5 * eta);
    const double alpha = (c + s) / std::numbers::sqrt2;
    const double beta = (c - s) / std::numbers::sqrt2;
    return QubitState(alpha, -beta);
}

TsvfSetup setup_from_states(const QubitState& psi_in, const QubitState& psi_fin, const InvolutoryObservable& a,
                            double g, double sigma) {
    const WeakValue w = weak_value(psi_in, psi_fin, a);
    if (std::abs(w.re) > 1e-10 * std::max(1.0, std::abs(w.im))) {
        throw std::invalid_argument("setup_from_states: weak value is not purely imaginary");
    }
    if (w.im < 0.0) throw std::invalid_argument("setup_from_states: negative imaginary weak value maps outside (0, pi]");
    return TsvfSetup(2.0 * std::atan2(1.0, w.im), g, sigma);
}

double postselect_probability(const TsvfSetup& s) { return sin_half_sq(s.eta()); }

double acceptance_probability(const TsvfSetup& s) {
    return 0.5 * (1.0 - std::cos(s.eta()) * damping(s.g(), s.sigma()));
}

double mean_fin(const TsvfSetup& s) {
    const double gs2 = s.g_sigma() * s.g_sigma();
    // e^{2(g sigma)^2} - cos(eta), written without cancellation.
    const double den = std::expm1(2.0 * gs2) + 2.0 * sin_half_sq(s.eta());
    return std::sin(s.eta()) * 2.0 * s.g() * s.sigma() * s.sigma() / den;
}

double mean_fin_mixture_form(double b, double g, double sigma) {
    const double e = damping(g, sigma);
    const double a_plus = 0.5 * (1.0 + b * b);
    const double a_minus = 0.5 * (1.0 - b * b);
    const double x_sin = 2.0 * g * sigma * sigma * e;  // <X sin 2gX>_in
    return b * x_sin / (a_plus + a_minus * e);
}

double second_moment_fin(const TsvfSetup& s) {
    const double gs2 = s.g_sigma() * s.g_sigma();
    const double e = damping(s.g(), s.sigma());
    const double cos_e = std::cos(s.eta()) * e;
    // 1 - cos(eta) E, without cancellation.
    const double den = -std::expm1(-2.0 * gs2) + e * 2.0 * sin_half_sq(s.eta());
    return s.sigma() * s.sigma() * (den + cos_e * 4.0 * gs2) / den;
}

double second_moment_mixture_form(double b, double g, double sigma) {
    const double e = damping(g, sigma);
    const double a_plus = 0.5 * (1.0 + b * b);
    const double a_minus = 0.5 * (1.0 - b * b);
    const double gs2 = g * g * sigma * sigma;
    return sigma * sigma * (a_plus + a_minus * e * (1.0 - 4.0 * gs2)) / (a_plus + a_minus * e);
}

OptimalEta optimal_eta(double g, double sigma) {
    if (!(g * sigma > 0.0)) throw std::invalid_argument("optimal_eta: g * sigma must be > 0");
    const double gs2 = g * sigma * g * sigma;
    // cos(eta*) = e^{-2 gs2}  <=>  sin^2(eta*/2) = (1 - e^{-2 gs2}) / 2
    const double eta_star = 2.0 * std::asin(std::sqrt(-0.5 * std::expm1(-2.0 * gs2)));
    const double mean_max = 2.0 * g * sigma * sigma / std::sqrt(std::expm1(4.0 * gs2));
    return {eta_star, mean_max};
}

double needle_density(double x, const TsvfSetup& s) {
    const double amp = std::cos(s.g() * x) + s.b() * std::sin(s.g() * x);
    return amp * amp * gaussian_pdf(x, s.sigma());
}

MomentReport analytic_moments(const TsvfSetup& s) {
    MomentReport r;
    r.mean = mean_fin(s);
    r.second_moment = second_moment_fin(s);
    r.variance = r.second_moment - r.mean * r.mean;
    r.postselect_prob = postselect_probability(s);
    r.acceptance_prob = acceptance_probability(s);
    r.normalization = s.a_plus() + s.a_minus() * damping(s.g(), s.sigma());
    return r;
}

MomentReport quadrature_moments(const TsvfSetup& s, double tolerance) {
    const double lim = kHalfWidthSigmas * s.sigma();
    const auto p = [&s](double x) { return needle_density(x, s); };
    const double z = integrate(p, -lim, lim, tolerance).value;
    const double m1 = integrate([&](double x) { return x * p(x); }, -lim, lim, tolerance).value;
    const double m2 = integrate([&](double x) { return x * x * p(x); }, -lim, lim, tolerance).value;
    MomentReport r;
    r.normalization = z;
    r.mean = m1 / z;
    r.second_moment = m2 / z;
    r.variance = r.second_moment - r.mean * r.mean;
    r.postselect_prob = postselect_probability(s);
    r.acceptance_prob = postselect_probability(s) * z;
    return r;
}

std::vector<double> needle_cdf_at_sorted(const TsvfSetup& s, std::span<const double> sorted_points) {
    if (!std::is_sorted(sorted_points.begin(), sorted_points.end())) {
        throw std::invalid_argument("needle_cdf_at_sorted: points must be nondecreasing");
    }
    const double lim = kHalfWidthSigmas * s.sigma();
    const auto p = [&s](double x) { return needle_density(x, s); };
    const double z = integrate(p, -lim, lim, 1e-12).value;
    std::vector<double> cdf;
    cdf.reserve(sorted_points.size());
    double acc = 0.0;
    double prev = -lim;
    for (double x : sorted_points) {
        const double hi = std::min(x, lim);
        if (hi > prev) {
            // Short pieces carry little mass; their error only needs to be small next to z.
            acc += integrate(p, prev, hi, 1e-12, 4096, 1e-14 * z).value;
            prev = hi;
        }
        cdf.push_back(x <= -lim ? 0.0 : std::min(1.0, acc / z));
    }
    return cdf;
}

std::optional<double> rejection_sample_run(const TsvfSetup& s, RngStream& rng) {
    const double x = gaussian(rng, 0.0, s.sigma());
    const double amp = std::cos(s.g() * x) + s.b() * std::sin(s.g() * x);
    const double accept = postselect_probability(s) * amp * amp;
    if (rng.uniform() < accept) return x;
    return std::nullopt;
}

SeparationReport separation_report(double eta1, double eta2, double g, double sigma) {
    const TsvfSetup first(eta1, g, sigma);
    const TsvfSetup second(eta2, g, sigma);
    SeparationReport r{first, second, analytic_moments(first), analytic_moments(second),
                       quadrature_moments(first), quadrature_moments(second)};

    const QubitState fin = postselected_state();
    const double o1 = overlap(fin, input_state_for_eta(eta1));
    const double o2 = overlap(fin, input_state_for_eta(eta2));
    r.overlap_sq_first = o1 * o1;
    r.overlap_sq_second = o2 * o2;
    r.mean_gap = r.analytic_first.mean - r.analytic_second.mean;

    const double lim = kHalfWidthSigmas * sigma;
    const double z1 = r.quadrature_first.normalization;
    const double z2 = r.quadrature_second.normalization;
    const auto p1 = [&](double x) { return needle_density(x, first) / z1; };
    const auto p2 = [&](double x) { return needle_density(x, second) / z2; };
    r.bayes_error = 0.5 * integrate([&](double x) { return std::min(p1(x), p2(x)); }, -lim, lim).value;
    r.bayes_error_tv = 0.5 - 0.25 * integrate([&](double x) { return std::abs(p1(x) - p2(x)); }, -lim, lim).value;
    r.bhattacharyya = integrate([&](double x) { return std::sqrt(p1(x) * p2(x)); }, -lim, lim).value;
    return r;
}

}  // namespace weaksep
