// Globally adaptive Gauss-Kronrod integration. Panels use Boost.Math's
// 61-point Kronrod rule; the panel with the largest error estimate is bisected
// until the summed error estimate drops below tolerance * (integral of |f|).
// The L1-relative stopping rule keeps odd integrands with a zero integral
// (first moments of symmetric densities) from refining forever.

#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace weaksep {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    double l1_norm = 0.0;
    std::size_t panels = 0;
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved_relative_error)
        : std::runtime_error(what), achieved_(achieved_relative_error) {}

    double achieved_relative_error() const { return achieved_; }

private:
    double achieved_;
};

/// Integrates f over [a, b]. Throws QuadratureError when the error estimate
/// cannot be brought under max(tolerance * l1_norm, absolute_tolerance) within
/// max_panels panels.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double tolerance = 1e-10,
                           std::size_t max_panels = 4096, double absolute_tolerance = 0.0);

}  // namespace weaksep
