#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "blowlab/ode.hpp"
#include "blowlab/series.hpp"

using namespace blowlab;

TEST_SUITE_BEGIN("series");

TEST_CASE("initial coefficients and nonnegativity")
{
    for (int d : {1, 2, 3, 7}) {
        const auto c = taylor_coefficients(d, 256);
        for (int n = 0; n <= d; ++n) CHECK(c.a(n) == 0.0);
        double fact = 1.0;
        for (int i = 2; i <= d + 1; ++i) fact *= i;
        CHECK(c.a(d + 1) == doctest::Approx(1.0 / fact).epsilon(1e-14));
        CHECK(c.b(0) == 1.0);
        for (int n = 0; n < c.size(); ++n) {
            CHECK(c.a_scaled[n] >= 0.0);
            CHECK(c.b_scaled[n] >= 0.0);
        }
    }
}

TEST_CASE("d=1 coefficients match the expansion of -2 ln cos(t/sqrt 2)")
{
    const auto c = taylor_coefficients(1, 64);
    CHECK(c.a(2) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(c.a(3) == 0.0);
    CHECK(c.a(4) == doctest::Approx(1.0 / 24).epsilon(1e-13));
    CHECK(c.a(5) == 0.0);
    CHECK(c.a(6) == doctest::Approx(1.0 / 180).epsilon(1e-13));
}

TEST_CASE("partial sums agree with the integrated trajectory for d=2")
{
    const auto c = taylor_coefficients(2, 256);
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    cfg.y_max = 1e4;
    const auto traj = integrate(2, cfg);
    CHECK(eval_series(c, 0.5) == doctest::Approx(interp_x(traj, 0.5)).epsilon(1e-10));
}

TEST_CASE("rescaling keeps long series finite")
{
    const auto c = taylor_coefficients(1, 4096);
    for (double v : c.a_scaled) CHECK(std::isfinite(v));
    CHECK(c.rho > 1.0);  // raw coefficients decay like T^-n, so rho moved up
    const auto est = estimate_blowup_series(c);
    CHECK(std::fabs(est.T - kBlowupTimeD1) < 1e-8);
}

TEST_CASE("radius extrapolation: d=1 within 1e-6 of pi/sqrt(2) at N=256")
{
    const auto est = estimate_blowup_series(taylor_coefficients(1, 256));
    CHECK(std::fabs(est.T - kBlowupTimeD1) < 1e-6);
    CHECK(est.uncertainty > 0.0);
}

TEST_CASE("uncertainty shrinks with more coefficients")
{
    const auto small = estimate_blowup_series(taylor_coefficients(1, 64));
    const auto big = estimate_blowup_series(taylor_coefficients(1, 256));
    CHECK(big.uncertainty < small.uncertainty);
    CHECK(std::fabs(big.T - kBlowupTimeD1) < std::fabs(small.T - kBlowupTimeD1));
}

TEST_CASE("cross-method agreement for d in {2, 3}")
{
    for (int d : {2, 3}) {
        const auto shoot = estimate_blowup_shooting(d);
        const auto series = estimate_blowup_series(taylor_coefficients(d, 1024));
        CHECK(std::fabs(shoot.T - series.T) < 1e-4);
    }
}

TEST_CASE("series estimator still reports for d = 11 with honest uncertainty")
{
    const auto est = estimate_blowup_series(taylor_coefficients(11, 2048));
    CHECK(est.T > 4.0);
    CHECK(est.T < 20.0);
    CHECK(est.uncertainty > 0.0);
}

TEST_CASE("rejects too-short series")
{
    CHECK_THROWS_AS((void)taylor_coefficients(1, 2), std::invalid_argument);
    CHECK_THROWS_AS((void)estimate_blowup_series(taylor_coefficients(1, 48)),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)estimate_blowup_series(taylor_coefficients(5, 64)),
                    std::invalid_argument);
}

TEST_SUITE_END();
