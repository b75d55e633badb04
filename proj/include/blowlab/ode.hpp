#pragma once

#include <span>
#include <string>
#include <vector>

#include "blowlab/common.hpp"

namespace blowlab {

// State of the blow-up equation y^(d+1) = y * y^(d) at one time point:
// jet[i] = y^(i)(t) for i in [0, d], plus the running integral x(t) of y,
// which is carried as an extra integrated state (so exp(-x) style
// quantities are step-accurate, not post-hoc quadrature).
struct DerivativeJet {
    double t = 0.0;
    std::vector<double> jet;
    double x = 0.0;
};

enum class BlowupMethod { ShootingExtrapolation, SeriesRadius };

struct BlowupEstimate {
    double T = 0.0;
    BlowupMethod method = BlowupMethod::ShootingExtrapolation;
    double uncertainty = 0.0;  // half-width of the agreement interval
    int d = 0;
};

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double y_max = 1e8;  // stop once y reaches this
    long max_steps = 2'000'000;

    void validate() const;
};

// Right-hand side of the companion first-order system:
// (y, y', ..., y^(d)) -> (y', ..., y^(d), y * y^(d)).
std::vector<double> cauchy_field(std::span<const double> jet, int d);

// Integrates from the flat initial condition (0, ..., 0, 1) with adaptive
// steps until y >= y_max or max_steps, enforcing absolute monotonicity at
// every accepted step. Throws StepUnderflowError when the pole approach
// exhausts double precision before y_max is reached.
std::vector<DerivativeJet> integrate(int d, const IntegratorConfig& config = {});

// Closed-form solution for d = 1 on [0, pi/sqrt(2)); the test oracle.
DerivativeJet analytic_d1(double t);

inline constexpr double kBlowupTimeD1 = 2.2214414690791831;  // pi/sqrt(2)

// Blow-up time from the tail of an integrated trajectory: the model
// T(t) = t + (d+1)/y(t) evaluated over the last decade of y, refined by
// Aitken extrapolation in 1/y. Gated to d <= 10 where the underlying
// rate asymptotics are established.
BlowupEstimate estimate_blowup_shooting(int d, const IntegratorConfig& config = {});

// Same, but reusing an already-integrated trajectory.
BlowupEstimate estimate_blowup_shooting(const std::vector<DerivativeJet>& traj, int d);

// --- trajectory queries -----------------------------------------------------
// Cubic Hermite interpolation; derivative of component i is component i+1,
// the derivative of y^(d) is y*y^(d) and the derivative of x is y.

double interp_jet(const std::vector<DerivativeJet>& traj, int i, double t);
double interp_x(const std::vector<DerivativeJet>& traj, double t);

// Inverse of the (strictly increasing) map t -> y^(i)(t) on the sampled range.
double time_at_jet_value(const std::vector<DerivativeJet>& traj, int i, double value);

// Hermite-corrected trapezoid of (t-s)^d/d! * y^(d)(s) over [0, t].
double convolution_quadrature(const std::vector<DerivativeJet>& traj, int d, double t);

void export_trajectory_csv(const std::vector<DerivativeJet>& traj, const std::string& path);

}  // namespace blowlab
