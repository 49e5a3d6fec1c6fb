// Pre- and post-selected weak measurement with an imaginary weak value ib.
//
// The needle (Gaussian, spread sigma) couples through exp(-i g A X) with A^2 = 1.
// After post-selection on psi_fin the needle amplitude is proportional to
// cos(g x) + b sin(g x) times the Gaussian, where b = cot(eta / 2). This header
// has the closed forms for the post-selected moments, the exact density they
// come from, a quadrature oracle over that density and a rejection sampler of
// the full pre-select / couple / post-select run.

#pragma once

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "weaksep/qubit.hpp"
#include "weaksep/rng.hpp"

namespace weaksep {

/// (eta, g, sigma). eta in (0, pi], g >= 0, sigma > 0; throws std::invalid_argument otherwise.
class TsvfSetup {
public:
    TsvfSetup(double eta, double g, double sigma);

    double eta() const { return eta_; }
    double g() const { return g_; }
    double sigma() const { return sigma_; }
    double g_sigma() const { return g_ * sigma_; }

    /// Imaginary part of the weak value, cot(eta / 2).
    double b() const;
    double a_plus() const;
    double a_minus() const;

private:
    double eta_;
    double g_;
    double sigma_;
};

struct WeakValue {
    double re = 0.0;
    double im = 0.0;
};

/// Row-major 2x2 complex matrix.
using Matrix2 = std::array<std::complex<double>, 4>;

/// Hermitian 2x2 operator with A^2 = 1, both checked to 1e-10 on construction.
class InvolutoryObservable {
public:
    explicit InvolutoryObservable(const Matrix2& m);

    /// [[0, -i], [i, 0]].
    static InvolutoryObservable sigma_y();
    static InvolutoryObservable sigma_z();

    const Matrix2& matrix() const { return m_; }

private:
    Matrix2 m_;
};

/// <psi_fin|A|psi_in> / <psi_fin|psi_in>. Throws std::domain_error when
/// |<psi_fin|psi_in>| <= 1e-12.
WeakValue weak_value(const QubitState& psi_in, const QubitState& psi_fin, const InvolutoryObservable& a);

/// (|0> + |1>) / sqrt(2).
QubitState postselected_state();

/// alpha|0> - beta|1> with alpha = (cos(eta/2) + sin(eta/2)) / sqrt(2) and
/// beta = (cos(eta/2) - sin(eta/2)) / sqrt(2); the returned state stores -beta.
/// Its weak value of sigma_y against postselected_state() is i cot(eta/2).
QubitState input_state_for_eta(double eta);

/// Recovers eta from the weak value of `a`; requires a purely imaginary weak
/// value with nonnegative imaginary part.
TsvfSetup setup_from_states(const QubitState& psi_in, const QubitState& psi_fin, const InvolutoryObservable& a,
                            double g, double sigma);

/// Pre-coupling overlap |<psi_fin|psi_in>|^2 = sin^2(eta / 2).
double postselect_probability(const TsvfSetup& s);

/// Post-coupling acceptance rate sin^2(eta/2) (a+ + a- e^{-2(g sigma)^2})
/// = (1 - cos(eta) e^{-2(g sigma)^2}) / 2.
double acceptance_probability(const TsvfSetup& s);

/// <X>_fin = sin(eta) 2 g sigma^2 / (e^{2(g sigma)^2} - cos eta).
double mean_fin(const TsvfSetup& s);

/// Same quantity through the weak-value mixture: b <X sin 2gX> / (a+ + a- <cos 2gX>).
double mean_fin_mixture_form(double b, double g, double sigma);

/// <X^2>_fin = sigma^2 [1 - cos(eta) E (1 - 4 g^2 sigma^2)] / [1 - cos(eta) E], E = e^{-2(g sigma)^2}.
double second_moment_fin(const TsvfSetup& s);

double second_moment_mixture_form(double b, double g, double sigma);

struct OptimalEta {
    double eta_star;  ///< arccos(e^{-2(g sigma)^2})
    double mean_max;  ///< 2 g sigma^2 / sqrt(e^{4(g sigma)^2} - 1)
};

/// Throws std::invalid_argument when g * sigma <= 0.
OptimalEta optimal_eta(double g, double sigma);

/// Unnormalized post-selected needle density (cos gx + b sin gx)^2 N(x; 0, sigma^2).
/// Integrates to a+ + a- e^{-2(g sigma)^2}.
double needle_density(double x, const TsvfSetup& s);

struct MomentReport {
    double mean = 0.0;
    double second_moment = 0.0;
    double variance = 0.0;
    double postselect_prob = 0.0;   ///< sin^2(eta/2)
    double acceptance_prob = 0.0;   ///< including the coupling
    double normalization = 0.0;     ///< integral of needle_density
};

MomentReport analytic_moments(const TsvfSetup& s);

/// Moments by adaptive quadrature of needle_density over [-12 sigma, 12 sigma]
/// at L1-relative tolerance `tolerance`. Throws QuadratureError on non-convergence.
MomentReport quadrature_moments(const TsvfSetup& s, double tolerance = 1e-10);

/// Normalized CDF of the post-selected needle at increasing points, by
/// integrating the density between consecutive points.
std::vector<double> needle_cdf_at_sorted(const TsvfSetup& s, std::span<const double> sorted_points);

/// One full run: x ~ N(0, sigma^2), then post-selection succeeds with
/// probability sin^2(eta/2) (cos gx + b sin gx)^2 <= 1. Empty on failure.
std::optional<double> rejection_sample_run(const TsvfSetup& s, RngStream& rng);

struct SeparationReport {
    TsvfSetup first;
    TsvfSetup second;
    MomentReport analytic_first;
    MomentReport analytic_second;
    MomentReport quadrature_first;
    MomentReport quadrature_second;
    double overlap_sq_first = 0.0;   ///< |<psi_fin|psi_in>|^2 from the constructed states
    double overlap_sq_second = 0.0;
    double mean_gap = 0.0;           ///< analytic <X>_fin(first) - <X>_fin(second)
    double bayes_error = 0.0;        ///< 1/2 integral min(p1, p2), equal priors, one sample
    double bayes_error_tv = 0.0;     ///< 1/2 - 1/4 integral |p1 - p2|, an independent route
    double bhattacharyya = 0.0;      ///< integral sqrt(p1 p2)
};

/// Both setups share (g, sigma). eta1 = 0 is rejected like any TsvfSetup.
SeparationReport separation_report(double eta1, double eta2, double g, double sigma);

}  // namespace weaksep
