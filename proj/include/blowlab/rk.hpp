#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "blowlab/common.hpp"

namespace blowlab {

// Embedded Dormand-Prince 5(4) pair with PI step-size control.
//
// The blow-up and Lotka-Volterra integrations need two things a stock
// stepper does not expose cleanly:
//   * a state-dependent step cap (near the pole the step must stay well
//     inside the remaining time to the singularity),
//   * rejection of steps whose *result* violates a structural property
//     (positivity, absolute monotonicity), retried with a smaller step.
// Both are injected through RKCallbacks.

using Field = std::function<void(double t, const std::vector<double>& y,
                                 std::vector<double>& dydt)>;

struct RKOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    long max_steps = 2'000'000;
    double h_init = 0.0;  // 0 -> choose automatically
    double h_max = std::numeric_limits<double>::infinity();
};

struct RKCallbacks {
    // Cap on the next attempted step, evaluated at the current state.
    std::function<double(double t, const std::vector<double>& y)> max_step;
    // Veto on the proposed end state; a vetoed step is retried at h/2.
    std::function<bool(double t, const std::vector<double>& y)> admissible;
    // Checked after each accepted step; true terminates the run.
    std::function<bool(double t, const std::vector<double>& y)> stop;
};

// Called after every accepted step (and once with the initial state).
using Observer = std::function<void(double t, const std::vector<double>& y)>;

namespace detail {

// Dormand-Prince coefficients
inline constexpr double A21 = 1.0 / 5;
inline constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
inline constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
inline constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187,
                        A53 = 64448.0 / 6561, A54 = -212.0 / 729;
inline constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33,
                        A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                        A65 = -5103.0 / 18656;
inline constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                        B5 = -2187.0 / 6784, B6 = 11.0 / 84;
inline constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920,
                        E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40;
inline constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;

}  // namespace detail

// Integrates y' = f(t, y) from t0 until callbacks.stop fires or max_steps
// accepted steps were taken. Returns the number of accepted steps.
inline long integrate_adaptive(const Field& f, double t0, std::vector<double>& y,
                               const RKOptions& opt, const RKCallbacks& cb,
                               const Observer& observe)
{
    using namespace detail;
    const std::size_t n = y.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
    std::vector<double> ytmp(n), ynew(n), yerr(n);

    double t = t0;
    f(t, y, k1);
    if (observe) observe(t, y);

    // initial step: crude scale-based guess, the controller fixes it fast
    double h = opt.h_init;
    if (h <= 0.0) {
        double ynorm = 0.0, fnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ynorm = std::max(ynorm, std::fabs(y[i]));
            fnorm = std::max(fnorm, std::fabs(k1[i]));
        }
        h = 0.01 * (ynorm + 1.0) / (fnorm + 1.0);
    }
    h = std::min(h, opt.h_max);

    double err_prev = 1.0;
    long accepted = 0;
    bool last_reject_invariant = false;

    while (accepted < opt.max_steps) {
        if (cb.max_step) h = std::min(h, cb.max_step(t, y));
        h = std::min(h, opt.h_max);
        if (!(h > 0.0) || t + h == t) {
            throw StepUnderflowError(
                last_reject_invariant
                    ? "step size underflow while enforcing state invariants"
                    : "step size underflow: tolerance/precision exhausted at t=" +
                          fmt17(t));
        }

        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * A21 * k1[i];
        f(t + C2 * h, ytmp, k2);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        f(t + C3 * h, ytmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        f(t + C4 * h, ytmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        f(t + C5 * h, ytmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] +
                                  A64 * k4[i] + A65 * k5[i]);
        f(t + h, ytmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] +
                                  B5 * k5[i] + B6 * k6[i]);
        f(t + h, ynew, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] +
                                  E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            const double scale =
                opt.abs_tol +
                opt.rel_tol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            err += (e / scale) * (e / scale);
        }
        err = std::sqrt(err / static_cast<double>(n));

        if (err > 1.0) {
            h *= std::max(0.1, 0.9 * std::pow(err, -0.2));
            last_reject_invariant = false;
            continue;
        }
        if (cb.admissible && !cb.admissible(t + h, ynew)) {
            h *= 0.5;
            last_reject_invariant = true;
            continue;
        }
        last_reject_invariant = false;

        t += h;
        y.swap(ynew);
        k1.swap(k7);  // FSAL
        ++accepted;
        if (observe) observe(t, y);
        if (cb.stop && cb.stop(t, y)) break;

        // PI controller (Gustafsson)
        const double fac = 0.9 * std::pow(std::max(err, 1e-12), -0.7 / 5.0) *
                           std::pow(std::max(err_prev, 1e-12), 0.4 / 5.0);
        err_prev = std::max(err, 1e-12);
        h *= std::min(5.0, std::max(0.2, fac));
    }
    return accepted;
}

}  // namespace blowlab
