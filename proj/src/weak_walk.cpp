#include "weaksep/weak_walk.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace weaksep {

PointerModel::PointerModel(double sigma, double g) : sigma_(sigma), g_(g) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("PointerModel: sigma must be > 0");
    if (!std::isfinite(g)) throw std::invalid_argument("PointerModel: g must be finite");
}

WalkBoundaries::WalkBoundaries(Degrees zero_side, Degrees one_side) : zero_side_(zero_side), one_side_(one_side) {
    if (!(zero_side.value >= 0.0 && zero_side.value < one_side.value && one_side.value <= 90.0)) {
        throw std::invalid_argument("WalkBoundaries: need 0 <= zero_side < one_side <= 90 degrees");
    }
}

std::string_view to_string(CollapseLabel label) {
    switch (label) {
        case CollapseLabel::Zero: return "zero";
        case CollapseLabel::One: return "one";
        case CollapseLabel::MaxedOut: return "maxed_out";
    }
    return "unknown";
}

double sample_reading(const QubitState& s, const PointerModel& pm, RngStream& rng) {
    const double p0 = s.alpha() * s.alpha();
    const double shift = rng.uniform() < p0 ? pm.shift_zero() : pm.shift_one();
    return gaussian(rng, shift, pm.sigma());
}

QubitState bias_update(const QubitState& s, double reading, const PointerModel& pm) {
    const double var = pm.sigma() * pm.sigma();
    if (s.alpha() == 0.0 || s.beta() == 0.0) return s;

    if (std::abs(reading) > 40.0 * var) {
        // Ratio law in log space: log|alpha'/beta'| = log|alpha/beta| + g x / sigma^2.
        const double r = std::log(std::abs(s.alpha())) - std::log(std::abs(s.beta())) + pm.g() * reading / var;
        const double small = std::exp(-std::abs(r));
        const double a = r >= 0.0 ? 1.0 : small;
        const double b = r >= 0.0 ? small : 1.0;
        return QubitState(std::copysign(a, s.alpha()), std::copysign(b, s.beta()));
    }

    const double e0 = -(reading - pm.shift_zero()) * (reading - pm.shift_zero()) / (4.0 * var);
    const double e1 = -(reading - pm.shift_one()) * (reading - pm.shift_one()) / (4.0 * var);
    const double top = std::max(e0, e1);
    return QubitState(s.alpha() * std::exp(e0 - top), s.beta() * std::exp(e1 - top));
}

double posterior_weight(double reading_sum, const QubitState& s0, const PointerModel& pm) {
    if (s0.beta() == 0.0) return 1.0;
    if (s0.alpha() == 0.0) return 0.0;
    const double log_odds = 2.0 * (std::log(std::abs(s0.alpha())) - std::log(std::abs(s0.beta()))) +
                            2.0 * pm.g() * reading_sum / (pm.sigma() * pm.sigma());
    if (log_odds >= 0.0) return 1.0 / (1.0 + std::exp(-log_odds));
    const double e = std::exp(log_odds);
    return e / (1.0 + e);
}

StepResult step(const QubitState& s, const PointerModel& pm, RngStream& rng) {
    const double x = sample_reading(s, pm, rng);
    return {bias_update(s, x, pm), x};
}

std::optional<CollapseLabel> classify(const QubitState& s, const WalkBoundaries& wb) {
    const Degrees a = s.angle();
    if (a <= wb.zero_side()) return CollapseLabel::Zero;
    if (a >= wb.one_side()) return CollapseLabel::One;
    return std::nullopt;
}

WalkOutcome run_walk(const QubitState& s0, const PointerModel& pm, const WalkBoundaries& wb, std::size_t max_steps,
                     RngStream& rng, bool record_readings, const StepObserver& observer) {
    if (max_steps < 1) throw std::invalid_argument("run_walk: max_steps must be >= 1");
    WalkOutcome out;
    out.final_state = s0;
    if (auto crossed = classify(s0, wb)) {
        out.label = *crossed;
        return out;
    }
    QubitState s = s0;
    while (out.steps < max_steps) {
        const auto [next, x] = step(s, pm, rng);
        s = next;
        ++out.steps;
        if (record_readings) out.readings.push_back(x);
        if (observer) observer(out.steps, x, s);
        if (auto crossed = classify(s, wb)) {
            out.label = *crossed;
            out.final_state = s;
            return out;
        }
    }
    out.label = CollapseLabel::MaxedOut;
    out.final_state = s;
    return out;
}

std::size_t default_max_steps(const PointerModel& pm) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(200.0 * pm.sigma() * pm.sigma())));
}

CollapseLabel strong_measure(const QubitState& s, RngStream& rng) {
    return rng.uniform() < s.alpha() * s.alpha() ? CollapseLabel::Zero : CollapseLabel::One;
}

void parallel_for_trials(std::size_t n, unsigned workers, const std::atomic<bool>* cancel,
                         const std::function<void(std::size_t)>& fn) {
    const auto cancelled = [cancel] { return cancel != nullptr && cancel->load(std::memory_order_relaxed); };
    const auto run_one = [&fn](std::size_t i) {
        try {
            fn(i);
        } catch (const Cancelled&) {
            throw;
        } catch (const TrialError&) {
            throw;
        } catch (const std::exception& e) {
            throw TrialError(i, e.what());
        }
    };

    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            if (cancelled()) throw Cancelled();
            run_one(i);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr failure;
    std::size_t failed_index = n;
    bool was_cancelled = false;
    {
        std::vector<std::jthread> pool;
        const unsigned count = static_cast<unsigned>(std::min<std::size_t>(workers, n));
        for (unsigned w = 0; w < count; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n) return;
                    if (cancelled()) {
                        std::lock_guard lock(mu);
                        was_cancelled = true;
                        return;
                    }
                    try {
                        run_one(i);
                    } catch (...) {
                        std::lock_guard lock(mu);
                        if (i < failed_index) {
                            failed_index = i;
                            failure = std::current_exception();
                        }
                        next.store(n);
                        return;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    if (was_cancelled) throw Cancelled();
}

std::vector<WalkSummary> run_ensemble(const EnsembleSpec& spec, std::size_t trials, std::uint64_t master_seed,
                                      const EnsembleOptions& options) {
    if (trials < 1) throw std::invalid_argument("run_ensemble: trials must be >= 1");
    std::vector<WalkSummary> out(trials);

    if (!options.trajectory_sink) {
        parallel_for_trials(trials, options.workers, options.cancel, [&](std::size_t i) {
            RngStream rng(master_seed, i);
            const WalkOutcome w = run_walk(spec.start, spec.pointer, spec.boundaries, spec.max_steps, rng, false);
            out[i] = {i, w.steps, w.label, w.final_state};
        });
        return out;
    }

    // Trajectories are buffered per chunk and handed to the sink in trial order.
    const std::size_t chunk = 64 * std::max(1u, options.workers);
    std::vector<std::vector<TrajectoryPoint>> paths(std::min(chunk, trials));
    for (std::size_t begin = 0; begin < trials; begin += chunk) {
        const std::size_t len = std::min(chunk, trials - begin);
        parallel_for_trials(len, options.workers, options.cancel, [&](std::size_t k) {
            const std::size_t i = begin + k;
            auto& path = paths[k];
            path.clear();
            RngStream rng(master_seed, i);
            try {
                const WalkOutcome w =
                    run_walk(spec.start, spec.pointer, spec.boundaries, spec.max_steps, rng, false,
                             [&path](std::size_t, double x, const QubitState& s) {
                                 path.push_back({x, s.alpha(), s.beta()});
                             });
                out[i] = {i, w.steps, w.label, w.final_state};
            } catch (const std::exception& e) {
                throw TrialError(i, e.what());
            }
        });
        for (std::size_t k = 0; k < len; ++k) options.trajectory_sink(begin + k, paths[k]);
    }
    return out;
}

}  // namespace weaksep
