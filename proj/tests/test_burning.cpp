#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "blowlab/burning.hpp"

using namespace blowlab;

namespace {

std::vector<DerivativeJet> traj_for(int d, double y_max = 1e6)
{
    IntegratorConfig cfg;
    cfg.y_max = y_max;
    return integrate(d, cfg);
}

}  // namespace

TEST_SUITE_BEGIN("burning");

TEST_CASE("expected atom count matches the sample mean within 3 sigma")
{
    const auto traj = traj_for(1);
    BurnWindow w{.d = 1, .half_width = 2.0,
                 .t_max = time_at_jet_value(traj, 0, 8.0)};  // y(t_max) = 8
    const double mean = expected_atom_count(w, traj);
    CHECK(mean == doctest::Approx(2.0 * w.sample_half_width() * 8.0).epsilon(1e-9));

    const int seeds = 1000;
    double total = 0.0;
    for (int s = 0; s < seeds; ++s) total += double(sample_atoms(w, traj, s).size());
    const double sample_mean = total / seeds;
    const double sigma = std::sqrt(mean / seeds);
    CHECK(std::fabs(sample_mean - mean) <= 3.0 * sigma);
}

TEST_CASE("vanishing time window yields no atoms")
{
    const auto traj = traj_for(1);
    BurnWindow w{.d = 1, .half_width = 2.0, .t_max = 0.0};
    CHECK(sample_atoms(w, traj, 1).size() == 0);
    CHECK(expected_atom_count(w, traj) == 0.0);
}

TEST_CASE("ignition times follow the y^(d) density (chi-square at 1%)")
{
    const auto traj = traj_for(1);
    const double y_end = 50.0;
    const double t_max = time_at_jet_value(traj, 0, y_end);
    BurnWindow w{.d = 1, .half_width = 5.0, .t_max = t_max};
    const auto atoms = sample_atoms(w, traj, 2718);
    REQUIRE(atoms.size() > 400);

    // equal-probability bins from the closed-form inverse CDF
    // (y = sqrt(2) tan(s/sqrt 2), CDF = y(s)/y_end)
    const int bins = 16;
    std::vector<double> edges(bins + 1, 0.0);
    for (int k = 1; k < bins; ++k)
        edges[k] = std::sqrt(2.0) * std::atan(k * y_end / bins / std::sqrt(2.0));
    edges[bins] = t_max + 1e-12;

    std::vector<int> counts(bins, 0);
    for (double s : atoms.s) {
        const int bin =
            int(std::upper_bound(edges.begin(), edges.end(), s) - edges.begin()) - 1;
        REQUIRE(bin >= 0);
        REQUIRE(bin < bins);
        ++counts[bin];
    }
    const double expect = double(atoms.size()) / bins;
    double chi2 = 0.0;
    for (int k = 0; k < bins; ++k)
        chi2 += (counts[k] - expect) * (counts[k] - expect) / expect;
    CHECK(chi2 < 30.578);  // 0.99 quantile, 15 dof
}

TEST_CASE("burn predicate geometry")
{
    PoissonAtoms atoms;
    atoms.d = 1;
    atoms.xs = {0.0};
    atoms.s = {0.0};
    const std::vector<double> z0 = {0.0}, z1 = {1.0};
    CHECK(is_burned(z0, 0.0, atoms));   // the atom itself burns at s
    CHECK(!is_burned(z1, 1.9, atoms));  // speed 1/2: |1| = (t-0)/2 at t = 2
    CHECK(is_burned(z1, 2.0, atoms));
}

TEST_CASE("min-formula equals the exists-form brute force on random configurations")
{
    const auto traj = traj_for(2);
    const double t_max = time_at_jet_value(traj, 2, 30.0);
    BurnWindow w{.d = 2, .half_width = 1.0, .t_max = t_max};
    for (int seed = 0; seed < 50; ++seed) {
        const auto atoms = sample_atoms(w, traj, seed);
        SplitMix64 rng = SplitMix64::stream(999, seed);
        const std::vector<double> z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const double t = rng.uniform(0.0, t_max);
        bool exists = false;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            const auto a = atoms.atom(i);
            const double dist = std::fabs(a.x[0] - z[0]) + std::fabs(a.x[1] - z[1]);
            if (a.s <= t && dist <= 0.5 * (t - a.s)) exists = true;
        }
        CHECK(exists == is_burned(z, t, atoms));
    }
}

TEST_CASE("unburned probability: closed form, carried state, quadrature")
{
    const auto traj1 = traj_for(1);
    CHECK(unburned_probability_analytic(0.0, traj1) == 1.0);
    const double t = 1.3;
    const double u = t / std::sqrt(2.0);
    CHECK(unburned_probability_analytic(t, traj1) ==
          doctest::Approx(std::cos(u) * std::cos(u)).epsilon(1e-9));

    for (int d : {1, 2, 3}) {
        const auto traj = traj_for(d);
        for (double target : {2.0, 10.0}) {
            const double tp = time_at_jet_value(traj, d, target);
            const double pa = unburned_probability_analytic(tp, traj);
            const double pq = unburned_probability_quadrature(tp, traj);
            CHECK(std::fabs(pa - pq) <= 1e-8 * pa);
        }
    }
}

TEST_CASE("Monte Carlo unburned fraction against the analytic value")
{
    const auto traj = traj_for(1);
    const double t = time_at_jet_value(traj, 1, 2.0);  // unburned prob 1/2
    BurnWindow w{.d = 1, .half_width = 1.0, .t_max = t};

    CHECK(mc_unburned_fraction(w, traj, 0.0, 100, 4).estimate == 1.0);

    const auto mc = mc_unburned_fraction(w, traj, t, 10'000, 4);
    CHECK(std::fabs(mc.estimate - 0.5) <= 3.0 * mc.stderr_);

    const auto mc2 = mc_unburned_fraction(w, traj, t, 40'000, 4);
    const double shrink = mc.stderr_ / mc2.stderr_;
    CHECK(shrink > 1.6);
    CHECK(shrink < 2.4);
}

TEST_CASE("dilation smaller than t/2 is rejected")
{
    const auto traj = traj_for(1);
    const double t = time_at_jet_value(traj, 1, 2.0);
    BurnWindow w{.d = 1, .half_width = 1.0, .t_max = t, .dilation = 0.1 * t};
    CHECK_THROWS_AS((void)mc_unburned_fraction(w, traj, t, 10, 0),
                    std::invalid_argument);
}

TEST_CASE("3-sigma interval covers the analytic value in >= 99 of 100 experiments")
{
    const auto traj = traj_for(1);
    const double t = time_at_jet_value(traj, 1, 2.0);
    BurnWindow w{.d = 1, .half_width = 1.0, .t_max = t};
    int covered = 0;
    for (int e = 0; e < 100; ++e) {
        const auto mc = mc_unburned_fraction(w, traj, t, 500, 1000 + e);
        if (std::fabs(mc.estimate - 0.5) <= 3.0 * mc.stderr_) ++covered;
    }
    CHECK(covered >= 99);
}

TEST_CASE("raster: empty process, single-atom cone, monotone rows")
{
    const auto traj = traj_for(1);
    BurnWindow w{.d = 1, .half_width = 2.0, .t_max = 2.0};

    PoissonAtoms none;
    none.d = 1;
    const auto empty = render_field(w, none, 64);
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c) CHECK(!empty.burned(r, c));

    PoissonAtoms one;
    one.d = 1;
    one.xs = {0.25};
    one.s = {0.4};
    const auto cone = render_field(w, one, 64);
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c) {
            const bool expect = one.s[0] + 2.0 * std::fabs(cone.pixel_z(c) - 0.25) <=
                                cone.pixel_t(r);
            CHECK(cone.burned(r, c) == expect);
        }

    const auto atoms = sample_atoms(w, traj, 12);
    const auto raster = render_field(w, atoms, 128);
    int prev = -1;
    for (int r = 0; r < raster.rows; ++r) {
        int burned = 0;
        for (int c = 0; c < raster.cols; ++c) burned += raster.burned(r, c);
        CHECK(burned >= prev);
        prev = burned;
    }
    write_ppm(raster, "burn_test.ppm");
    write_legend_csv(atoms, "burn_test_legend.csv");
    std::ifstream ppm("burn_test.ppm", std::ios::binary);
    std::string magic;
    ppm >> magic;
    CHECK(magic == "P6");
}

TEST_CASE("unsupported raster dimension")
{
    BurnWindow w{.d = 3, .half_width = 1.0, .t_max = 1.0};
    PoissonAtoms none;
    none.d = 3;
    CHECK_THROWS_AS((void)render_field(w, none, 16), std::invalid_argument);
}

TEST_CASE("enlarging the dilation does not change verdicts inside the window")
{
    const auto traj = traj_for(1);
    const double t = time_at_jet_value(traj, 1, 4.0);
    BurnWindow generous{.d = 1, .half_width = 1.0, .t_max = t, .dilation = 0.5 * t + 1.0};
    for (int seed = 0; seed < 20; ++seed) {
        const auto atoms = sample_atoms(generous, traj, seed);
        const auto minimal = filter_to_box(atoms, 1.0 + 0.5 * t);
        for (int k = 0; k <= 10; ++k) {
            const std::vector<double> z = {-1.0 + 0.2 * k};
            CHECK(is_burned(z, t, atoms) == is_burned(z, t, minimal));
        }
    }
}

TEST_CASE("coverage exponent approaches d+1 from above for d = 1")
{
    const auto traj = integrate(1);
    const double T = estimate_blowup_shooting(traj, 1).T;
    const auto rows = coverage_rate_check(traj, T, 0.5, {1e-2, 1e-3, 1e-4}, 200, 6);
    REQUIRE(rows.size() == 3);
    double prev_gap = 1e300;
    for (const auto& row : rows) {
        const double gap = std::fabs(row.analytic_exponent - 2.0);
        CHECK(gap < prev_gap);
        prev_gap = gap;
        // MC, where it can resolve anything, must sit within 3 sigma
        if (row.mc_estimate > 0.0)
            CHECK(std::fabs(row.mc_estimate - std::exp(-interp_x(traj, T - row.eps))) <=
                  3.0 * row.stderr_ + 1e-12);
    }
    CHECK(std::fabs(rows.back().analytic_exponent - 2.0) <= 0.2);
    CHECK_THROWS_AS(
        (void)coverage_rate_check(traj, T, 0.5, {1e-12}, 0, 0),
        std::domain_error);
}

TEST_SUITE_END();
