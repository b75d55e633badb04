#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "blowlab/ode.hpp"
#include "blowlab/timechange.hpp"

using namespace blowlab;

namespace {

std::vector<DerivativeJet> oracle_d1(std::size_t n, double t_lo, double t_hi)
{
    std::vector<DerivativeJet> traj(n);
    for (std::size_t k = 0; k < n; ++k)
        traj[k] = analytic_d1(t_lo + (t_hi - t_lo) * double(k) / double(n - 1));
    return traj;
}

const BlowupEstimate kT1{kBlowupTimeD1, BlowupMethod::ShootingExtrapolation, 1e-12, 1};

}  // namespace

TEST_SUITE_BEGIN("timechange");

TEST_CASE("u components at T/2 from the closed form")
{
    const double T = kBlowupTimeD1;
    const auto u = build_u(oracle_d1(1001, T / 4, T / 2), kT1);
    // last sample sits exactly at T/2 where y = sqrt(2), y' = 2
    CHECK(u.t.back() == doctest::Approx(T / 2).epsilon(1e-15));
    CHECK(u.u.back()[0] == doctest::Approx(1.0 / ((T / 2) * std::sqrt(2.0))).epsilon(1e-13));
    CHECK(u.u.back()[1] == doctest::Approx(2.0 / 2.0).epsilon(1e-13));
    for (const auto& row : u.u)
        for (double v : row) CHECK(v > 0.0);
    CHECK(u.bound < 4.0);  // run-reported bound (u1 grows toward t = 0)
    CHECK(u.u0_dT_sensitivity > 0.0);
}

TEST_CASE("u limits (1 v i)/(d+1) near the pole for d = 2")
{
    const int d = 2;
    const auto traj = integrate(d);
    const auto T = estimate_blowup_shooting(traj, d);
    const auto u = build_u(traj, T);
    for (int i = 0; i <= d; ++i) {
        const double limit = double(std::max(1, i)) / (d + 1);
        CHECK(u.u.back()[i] == doctest::Approx(limit).epsilon(1e-4));
    }
}

TEST_CASE("inconsistent blow-up estimate is rejected")
{
    auto traj = oracle_d1(64, 0.5, 2.0);
    BlowupEstimate bad{1.5, BlowupMethod::ShootingExtrapolation, 1e-12, 1};
    CHECK_THROWS_AS((void)build_u(traj, bad), InvariantViolationError);
}

TEST_CASE("u-system residuals vanish on the oracle trajectory")
{
    const auto u = build_u(oracle_d1(10'000, kBlowupTimeD1 / 2, kBlowupTimeD1 - 3e-3), kT1);
    for (double r : residual_system_u(u, kBlowupTimeD1)) CHECK(r < 1e-6);
}

TEST_CASE("constant u0 = u1 makes the first residual exactly zero")
{
    UTrajectory u;
    u.d = 1;
    u.T = 2.0;
    for (int k = 0; k < 32; ++k) {
        u.t.push_back(0.5 + k / 128.0);  // dyadic grid: exact spacing
        u.u.push_back({0.7, 0.7});
    }
    const auto res = residual_system_u(u, 2.0);
    CHECK(res[0] == 0.0);
}

TEST_CASE("residuals drop at least 2x under sample refinement")
{
    auto resid = [](std::size_t n) {
        const auto u = build_u(oracle_d1(n, kBlowupTimeD1 / 4, kBlowupTimeD1 - 1e-3), kT1);
        const auto r = residual_system_u(u, kBlowupTimeD1);
        return *std::max_element(r.begin(), r.end());
    };
    CHECK(resid(4000) / resid(8000) >= 2.0);
}

TEST_CASE("constant v1 reproduces v0 through the integral identity")
{
    VTrajectory v;
    v.d = 1;
    v.T = kBlowupTimeD1;
    v.t0 = 0.0;
    const double c = 0.37;
    for (int k = 0; k <= 8000; ++k) {
        v.s.push_back(8.0 * k / 8000.0);
        v.v.push_back({c, c});
    }
    const auto defect = v0_identity_defect(v, TailMode::LastSample);
    CHECK(defect.identity < 1e-6);
    CHECK(defect.tail == 0.0);
}

TEST_CASE("v-trajectory from the oracle: identity defect and limit")
{
    const auto u = build_u(oracle_d1(20'000, kBlowupTimeD1 / 4, kBlowupTimeD1 - 1e-3), kT1);
    const auto v = build_v(u, kBlowupTimeD1);
    CHECK(v.t0 == doctest::Approx((1 - std::exp(-1.0)) * kBlowupTimeD1));
    CHECK(v0_identity_defect(v).identity < 1e-4);
    // v0 -> 1/(d+1) = 1/2
    CHECK(v.v.back()[0] == doctest::Approx(0.5).epsilon(1e-3));
    for (double r : residual_system_v(v)) CHECK(r < 1e-4);
}

TEST_CASE("insufficient coverage of [t0, T) is rejected")
{
    const auto u = build_u(oracle_d1(256, 0.1, 0.5), kT1);
    CHECK_THROWS_AS((void)build_v(u, kBlowupTimeD1), InsufficientDataError);
}

TEST_CASE("w-trajectory: monotone inverse, slope limit, round trip")
{
    const auto traj = oracle_d1(20'000, kBlowupTimeD1 / 4, kBlowupTimeD1 - 1e-3);
    const auto u = build_u(traj, kT1);
    const auto v = build_v(u, kBlowupTimeD1);
    const auto w = build_w(v);

    for (std::size_t k = 1; k < w.tau.size(); ++k) CHECK(w.tau[k] > w.tau[k - 1]);
    CHECK(w.tau.front() == 0.0);
    CHECK(w.psi.front() == 0.0);

    // psi(tau)/tau -> 1/(d+1) = 1/2
    CHECK(psi_slope_at_end(w) * 2.0 == doctest::Approx(1.0).epsilon(0.05));

    // tau = int dr/v0 equals the carried integral of y between the mapped times
    CHECK(psi_roundtrip_defect(w, v, traj) < 1e-4);

    for (double r : residual_system_w(w)) CHECK(r < 1e-4);
}

TEST_CASE("vanishing v0 is rejected when building w")
{
    VTrajectory v;
    v.d = 1;
    v.T = 2.0;
    v.t0 = 0.0;
    for (int k = 0; k < 16; ++k) {
        v.s.push_back(0.1 * k);
        v.v.push_back({k == 8 ? 0.0 : 0.5, 0.5});
    }
    CHECK_THROWS_AS((void)build_w(v), InvariantViolationError);
}

TEST_CASE("mean growth of w1: (1/t) int w1 -> 1/(d+1)")
{
    const auto traj = oracle_d1(20'000, kBlowupTimeD1 / 4, kBlowupTimeD1 - 1e-4);
    const auto v = build_v(build_u(traj, kT1), kBlowupTimeD1);
    const auto w = build_w(v);
    double acc = 0.0;
    for (std::size_t k = 1; k < w.tau.size(); ++k)
        acc += 0.5 * (w.tau[k] - w.tau[k - 1]) * (w.w[k][0] + w.w[k - 1][0]);
    CHECK(acc / w.tau.back() * 2.0 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_SUITE_END();
