#include <doctest.h>

#include <cmath>
#include <numeric>

#include "blowlab/burning.hpp"
#include "blowlab/exec.hpp"
#include "blowlab/lyapunov.hpp"
#include "blowlab/rng.hpp"

using namespace blowlab;

TEST_SUITE_BEGIN("parallel");

TEST_CASE("stream derivation is deterministic and order-free")
{
    SplitMix64 a = SplitMix64::stream(42, 7);
    SplitMix64 b = SplitMix64::stream(42, 7);
    for (int i = 0; i < 16; ++i) CHECK(a() == b());

    // distinct streams differ
    SplitMix64 c = SplitMix64::stream(42, 8);
    CHECK(SplitMix64::stream(42, 7)() != c());
}

TEST_CASE("uniform lies in [0,1); log-uniform in range")
{
    SplitMix64 rng(1);
    for (int i = 0; i < 10'000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double lu = rng.log_uniform(0.05, 2.0);
        CHECK(lu >= 0.05);
        CHECK(lu <= 2.0);
    }
}

TEST_CASE("poisson sampler moments across both regimes")
{
    for (double mean : {0.5, 4.0, 50.0, 400.0}) {
        SplitMix64 rng(9);
        const int n = 20'000;
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double k = double(poisson(rng, mean));
            sum += k;
            sum2 += k * k;
        }
        const double m = sum / n;
        const double var = sum2 / n - m * m;
        CHECK(std::fabs(m - mean) <= 5.0 * std::sqrt(mean / n));
        CHECK(std::fabs(var - mean) <= 0.1 * mean + 5.0 * mean * std::sqrt(2.0 / n));
    }
}

TEST_CASE("parallel_for matches the serial loop on an order-free reduction")
{
    std::vector<double> a(1000), b(1000);
    parallel_for(1000, Exec::Serial, [&](std::int64_t i) { a[i] = std::sin(i * 0.1); });
    parallel_for(1000, Exec::OpenMP, [&](std::int64_t i) { b[i] = std::sin(i * 0.1); });
    CHECK(a == b);
}

TEST_CASE("MC kernel is bitwise identical serial vs OpenMP")
{
    IntegratorConfig cfg;
    cfg.y_max = 1e5;
    const auto traj = integrate(1, cfg);
    const double t = time_at_jet_value(traj, 1, 2.0);
    BurnWindow w{.d = 1, .half_width = 1.0, .t_max = t};
    const auto s = mc_unburned_fraction(w, traj, t, 4000, 21, Exec::Serial);
    const auto p = mc_unburned_fraction(w, traj, t, 4000, 21, Exec::OpenMP);
    CHECK(s.estimate == p.estimate);
    CHECK(s.stderr_ == p.stderr_);
}

TEST_CASE("raster kernel is bitwise identical serial vs OpenMP")
{
    IntegratorConfig cfg;
    cfg.y_max = 1e5;
    const auto traj = integrate(2, cfg);
    BurnWindow w{.d = 2, .half_width = 1.0, .t_max = time_at_jet_value(traj, 2, 20.0)};
    const auto atoms = sample_atoms(w, traj, 5);
    const auto s = render_field(w, atoms, 96, Exec::Serial);
    const auto p = render_field(w, atoms, 96, Exec::OpenMP);
    CHECK(s.first_time == p.first_time);
    CHECK(s.first_burner == p.first_burner);
}

TEST_CASE("search restarts are bitwise identical serial vs OpenMP")
{
    SearchOptions a;
    a.restarts = 6;
    a.iters = 400;
    a.seed = 13;
    a.exec = Exec::Serial;
    SearchOptions b = a;
    b.exec = Exec::OpenMP;
    const auto ra = search_lambda(7, a);
    const auto rb = search_lambda(7, b);
    CHECK(ra.min_eig == rb.min_eig);
    CHECK(ra.lambda == rb.lambda);
}

TEST_SUITE_END();
