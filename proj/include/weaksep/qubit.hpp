// Real-amplitude qubit states, the symmetric discrimination pair and the
// Helstrom optimum for two equiprobable pure states.

#pragma once

#include <cmath>
#include <numbers>

namespace weaksep {

/// Angle in degrees. Public APIs take and return degrees; radians stay internal.
struct Degrees {
    double value = 0.0;

    constexpr Degrees() = default;
    constexpr explicit Degrees(double v) : value(v) {}

    constexpr double radians() const { return value * std::numbers::pi / 180.0; }
    static constexpr Degrees from_radians(double r) { return Degrees{r * 180.0 / std::numbers::pi}; }

    friend constexpr auto operator<=>(Degrees, Degrees) = default;
};

/// State alpha|0> + beta|1> with real amplitudes. Always normalized.
///
/// The second amplitude is signed, so states such as alpha|0> - beta|1> are
/// stored with beta() < 0.
class QubitState {
public:
    /// Normalizes (alpha, beta). Throws std::invalid_argument for the zero
    /// vector or non-finite input.
    QubitState(double alpha, double beta);

    static QubitState zero() { return QubitState(1.0, 0.0); }
    static QubitState one() { return QubitState(0.0, 1.0); }

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }

    /// atan2(beta, alpha); lies in [0, 90] for first-quadrant states.
    Degrees angle() const;

    friend bool operator==(const QubitState&, const QubitState&) = default;

private:
    double alpha_;
    double beta_;
};

QubitState state_from_angle(Degrees a);

/// psi1 sits at 45 + theta/2 degrees, psi2 at 45 - theta/2 degrees. psi1
/// leans towards |1>, so a walk from psi1 should end near |1>.
struct StatePair {
    QubitState psi1;
    QubitState psi2;
};

/// Throws std::invalid_argument unless 0 < theta <= 90.
StatePair make_discrimination_pair(Degrees theta);

double overlap(const QubitState& a, const QubitState& b);

/// (1 + sin theta) / 2 with equal priors. Requires 0 <= theta <= 90.
double helstrom_bound(Degrees theta);

struct BornProbabilities {
    double p0;
    double p1;
};

BornProbabilities born_probabilities(const QubitState& s);

}  // namespace weaksep
