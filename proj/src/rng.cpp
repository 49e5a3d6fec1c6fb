#include "weaksep/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

namespace weaksep {

double standard_normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw std::domain_error("standard_normal_quantile: u must lie in (0, 1)");
    }
    // Evaluate on the lower tail only so the result is antisymmetric bit for bit.
    if (u > 0.5) return -standard_normal_quantile(1.0 - u);
    if (u == 0.5) return 0.0;
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double gaussian(RngStream& rng, double mean, double sd) {
    if (!(sd >= 0.0)) throw std::domain_error("gaussian: sd must be nonnegative");
    return mean + sd * standard_normal_quantile(rng.uniform());
}

}  // namespace weaksep
