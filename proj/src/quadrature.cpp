#include "weaksep/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace weaksep {

namespace {

using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;

struct Panel {
    double a;
    double b;
    double value;
    double error;
    double l1;

    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel evaluate(const std::function<double(double)>& f, double a, double b) {
    Panel p{a, b, 0.0, 0.0, 0.0};
    // max_depth = 0: a single Kronrod panel with its Gauss-embedded error estimate.
    p.value = Rule::integrate(f, a, b, 0, 0.0, &p.error, &p.l1);
    return p;
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double tolerance,
                           std::size_t max_panels, double absolute_tolerance) {
    if (!(a < b)) throw std::invalid_argument("integrate: need a < b");
    std::priority_queue<Panel> panels;
    panels.push(evaluate(f, a, b));
    double value = panels.top().value;
    double error = panels.top().error;
    double l1 = panels.top().l1;

    const auto target = [&](double l1_norm) { return std::max(tolerance * l1_norm, absolute_tolerance); };
    while (error > target(l1) && panels.size() < max_panels) {
        const Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(worst.a < mid && mid < worst.b)) break;  // panel at floating-point resolution
        const Panel left = evaluate(f, worst.a, mid);
        const Panel right = evaluate(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        l1 += left.l1 + right.l1 - worst.l1;
        panels.push(left);
        panels.push(right);
    }

    // Re-sum to drop the cancellation noise of the running updates.
    QuadratureResult r;
    r.panels = panels.size();
    while (!panels.empty()) {
        r.value += panels.top().value;
        r.error_estimate += panels.top().error;
        r.l1_norm += panels.top().l1;
        panels.pop();
    }
    if (!std::isfinite(r.value)) {
        throw QuadratureError("integrate: non-finite result", std::numeric_limits<double>::infinity());
    }
    if (r.l1_norm > 0.0 && r.error_estimate > target(r.l1_norm)) {
        const double achieved = r.error_estimate / r.l1_norm;
        throw QuadratureError("integrate: no convergence on [" + std::to_string(a) + ", " + std::to_string(b) +
                                  "] after " + std::to_string(r.panels) + " panels, achieved relative error " +
                                  std::to_string(achieved),
                              achieved);
    }
    return r;
}

}  // namespace weaksep
