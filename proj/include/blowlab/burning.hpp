#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blowlab/exec.hpp"
#include "blowlab/ode.hpp"
#include "blowlab/rng.hpp"

namespace blowlab {

// Poissonian burning: ignition events (x, s) arrive with intensity
// dx (x) y^(d)(s) ds; each fire grows as a 1-norm ball of radius (t-s)/2.
// A point z is burned by time t iff some atom has s + 2||x - z||_1 <= t.
// The unburned probability is spatially constant and equals
// exp(-x(t)) = 1/y^(d)(t).

struct PoissonAtom {
    std::vector<double> x;
    double s = 0.0;
};

// Flat storage; kernels iterate millions of atoms.
struct PoissonAtoms {
    int d = 0;
    std::vector<double> xs;  // size() * d, row-major
    std::vector<double> s;

    std::size_t size() const { return s.size(); }
    std::span<const double> position(std::size_t i) const
    {
        return {xs.data() + i * d, static_cast<std::size_t>(d)};
    }
    PoissonAtom atom(std::size_t i) const
    {
        return {std::vector<double>(xs.begin() + i * d, xs.begin() + (i + 1) * d), s[i]};
    }
};

struct BurnWindow {
    int d = 1;
    double half_width = 1.0;  // observation window [-R, R]^d
    double t_max = 0.0;
    double dilation = -1.0;   // sampling margin; defaults to t_max/2

    double margin() const { return dilation >= 0.0 ? dilation : 0.5 * t_max; }
    // Atoms are sampled on the dilated box so no fire that could reach the
    // observation window by t_max is missed.
    double sample_half_width() const { return half_width + margin(); }
    void validate() const;
};

// N ~ Poisson(vol * y^(d-1)(t_max)) since int_0^t y^(d) = y^(d-1); times by
// monotone inverse-CDF on the trajectory, positions uniform on the box.
PoissonAtoms sample_atoms(const BurnWindow& window,
                          const std::vector<DerivativeJet>& traj, std::uint64_t seed);

double expected_atom_count(const BurnWindow& window,
                           const std::vector<DerivativeJet>& traj);

// min over atoms of s + 2 ||x - z||_1 (infinity if no atoms).
double first_burn_time(std::span<const double> z, const PoissonAtoms& atoms);

bool is_burned(std::span<const double> z, double t, const PoissonAtoms& atoms);

double unburned_probability_analytic(double t, const std::vector<DerivativeJet>& traj);

// The convolution route exp(-int (t-s)^d/d! y^(d)); agrees with the
// analytic route by successive integration by parts.
double unburned_probability_quadrature(double t, const std::vector<DerivativeJet>& traj);

struct MCResult {
    double estimate = 0.0;
    double stderr_ = 0.0;
    long trials = 0;
};

// Probe-point Monte Carlo at z = 0 over independent configurations.
MCResult mc_unburned_fraction(const BurnWindow& window,
                              const std::vector<DerivativeJet>& traj, double t,
                              long trials, std::uint64_t seed,
                              Exec exec = Exec::OpenMP);

struct BurnRaster {
    int d = 1;
    int cols = 0, rows = 0;
    double half_width = 0.0, t_max = 0.0;
    std::vector<std::int32_t> first_burner;  // per column (d=1) / pixel (d=2); -1 unburned
    std::vector<double> first_time;

    // pixel (row r, col c) covers z = -R + (c+0.5) 2R/cols, t = (r+0.5) t_max/rows
    double pixel_z(int c) const { return -half_width + (c + 0.5) * 2.0 * half_width / cols; }
    double pixel_t(int r) const { return (r + 0.5) * t_max / rows; }
    bool burned(int r, int c) const;
};

// d = 1: space-time raster (cols = space, rows = time); d = 2: snapshot at t_max.
BurnRaster render_field(const BurnWindow& window, const PoissonAtoms& atoms,
                        int resolution, Exec exec = Exec::OpenMP);

void write_ppm(const BurnRaster& raster, const std::string& path);
void write_legend_csv(const PoissonAtoms& atoms, const std::string& path);

struct CoverageRow {
    double eps = 0.0;
    double analytic_exponent = 0.0;  // x(T - eps) / ln(1/eps); tends to d+1
    double mc_estimate = 0.0;
    double stderr_ = 0.0;
    long trials = 0;
};

std::vector<CoverageRow> coverage_rate_check(const std::vector<DerivativeJet>& traj,
                                             double T, double window_half_width,
                                             const std::vector<double>& eps_list,
                                             long trials, std::uint64_t seed,
                                             Exec exec = Exec::OpenMP);

// Drops atoms outside the box of the given half-width (edge-effect checks).
PoissonAtoms filter_to_box(const PoissonAtoms& atoms, double half_width);

}  // namespace blowlab
