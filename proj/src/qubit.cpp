#include "weaksep/qubit.hpp"

#include <stdexcept>
#include <string>

namespace weaksep {

QubitState::QubitState(double alpha, double beta) {
    if (!std::isfinite(alpha) || !std::isfinite(beta)) {
        throw std::invalid_argument("QubitState: amplitudes must be finite");
    }
    const double norm = std::hypot(alpha, beta);
    if (norm == 0.0) {
        throw std::invalid_argument("QubitState: zero vector has no direction");
    }
    alpha_ = alpha / norm;
    beta_ = beta / norm;
}

Degrees QubitState::angle() const { return Degrees::from_radians(std::atan2(beta_, alpha_)); }

QubitState state_from_angle(Degrees a) {
    // Exact values on the axes; cos(pi/2) is not zero in floating point.
    if (a.value == 0.0) return QubitState::zero();
    if (a.value == 90.0) return QubitState::one();
    const double r = a.radians();
    return QubitState(std::cos(r), std::sin(r));
}

StatePair make_discrimination_pair(Degrees theta) {
    if (!(theta.value > 0.0 && theta.value <= 90.0)) {
        throw std::invalid_argument("make_discrimination_pair: theta must lie in (0, 90] degrees, got " +
                                    std::to_string(theta.value));
    }
    const double half = theta.value / 2.0;
    return {state_from_angle(Degrees{45.0 + half}), state_from_angle(Degrees{45.0 - half})};
}

double overlap(const QubitState& a, const QubitState& b) { return a.alpha() * b.alpha() + a.beta() * b.beta(); }

double helstrom_bound(Degrees theta) {
    if (!(theta.value >= 0.0 && theta.value <= 90.0)) {
        throw std::invalid_argument("helstrom_bound: theta must lie in [0, 90] degrees");
    }
    return 0.5 * (1.0 + std::sin(theta.radians()));
}

BornProbabilities born_probabilities(const QubitState& s) {
    return {s.alpha() * s.alpha(), s.beta() * s.beta()};
}

}  // namespace weaksep
