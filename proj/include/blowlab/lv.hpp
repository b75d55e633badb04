#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blowlab/rng.hpp"

namespace blowlab {

// The Lotka-Volterra system reached by the time-change cascade:
//   w_i' = w_i (w_{i+1} - w_1 - w_i),  i < d
//   w_d' = w_d (1  - w_1 - w_d)
// i.e. w' = diag(w)(b - A w) with the bidiagonal-plus-first-column matrix A
// and b = e_d. The interior stationary point is w* = (1, ..., d)/(d+1).
struct LVModel {
    int d = 1;

    std::vector<std::vector<double>> A() const;
    std::vector<double> b() const;
    std::vector<double> w_star() const;
};

std::vector<double> lv_field(std::span<const double> w, const LVModel& model);

// Exact statement A w* = b, checked in rational arithmetic.
bool stationary_point_exact(int d);

struct LVOptions {
    double t_end = 500.0;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double h_max = 0.0;                       // 0 -> unconstrained
    long max_steps = 50'000'000;
    std::size_t max_samples = 200'000;        // stored samples are decimated to this
    std::vector<double> checkpoints = {};     // exact landing times for averages
};

struct LVCheckpoint {
    double t = 0.0;
    std::vector<double> avg;   // (1/t) int_0^t w
    std::vector<double> eps;   // (1/t) ln(w_i(t)/w_i(0))
    double quad_err = 0.0;     // Richardson estimate of the average's quadrature error
};

struct LVTrajectory {
    int d = 0;
    double t_end = 0.0;
    std::vector<double> w0;
    std::vector<double> t;
    std::vector<std::vector<double>> w;   // decimated samples
    std::vector<double> w_final;
    LVCheckpoint final_avg;
    std::vector<LVCheckpoint> checkpoints;
    bool max_monotone = true;             // max(w_1..w_d, 1) non-increasing
    double min_coord = 0.0;               // over all accepted steps
    double min_coord_after_1 = 0.0;       // over accepted steps with t >= 1
};

// Positivity is enforced by step rejection, never by clipping.
LVTrajectory simulate(const LVModel& model, const std::vector<double>& w0,
                      const LVOptions& opt = {});

// Max defect of A wbar(t_end) - (b - eps(t_end)).
double time_average_check(const LVTrajectory& traj, const LVModel& model);

std::vector<std::pair<double, double>> distance_to_star(const LVTrajectory& traj);

// min_i min_{t >= 1} w_i(t); strictly positive by permanence.
double permanence_floor(const LVTrajectory& traj);

struct DescentReport {
    double min_V = 0.0;             // over samples
    bool V_nonincreasing = true;
    double fd_identity_max_err = 0.0;  // |dV/dt - quadratic form| consistency
};

// V(w) = sum lambda_i (w_i - w_i* - w_i* ln(w_i/w_i*)); along solutions
// dV/dt = -<w - w*, (DA + (DA)^T)/2 (w - w*)>.
DescentReport lyapunov_descent_check(const LVTrajectory& traj,
                                     const std::vector<double>& lambda,
                                     const LVModel& model);

// Every stationary point with w_1 > 0 is w* (exact rational cascade), so all
// boundary stationary points have w_1 = 0 where Psi(w) = 1 - (d+1) w_1 = 1.
// Randomized part: damped Newton from random boundary faces; every converged
// stationary point must satisfy Psi = 1.
struct BoundaryPsiReport {
    bool cascade_gives_w_star = false;
    int stationary_points_enumerated = 0;  // suffix family + origin, exact check
    int newton_converged = 0;
    bool all_boundary_psi_one = false;
};
BoundaryPsiReport boundary_psi_check(const LVModel& model, int random_trials = 64,
                                     std::uint64_t seed = 0);

std::vector<double> random_w0(int d, SplitMix64& rng);  // log-uniform [0.05, 2]^d

void export_lv_csv(const LVTrajectory& traj, const std::string& path);
void export_distance_csv(const LVTrajectory& traj, const std::string& path);
void export_averages_csv(const LVTrajectory& traj, const std::string& path);

}  // namespace blowlab
