#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "blowlab/lv.hpp"

using namespace blowlab;

TEST_SUITE_BEGIN("lv");

TEST_CASE("field vanishes at w* and matches hand values")
{
    for (int d : {1, 2, 3, 7, 12}) {
        LVModel model{d};
        const auto F = lv_field(model.w_star(), model);
        for (double v : F) CHECK(std::fabs(v) < 1e-15);
    }
    CHECK(lv_field(std::vector<double>{1.0}, LVModel{1}) == std::vector<double>{-1.0});
    const auto F2 = lv_field(std::vector<double>{1.0 / 3, 2.0 / 3}, LVModel{2});
    CHECK(std::fabs(F2[0]) < 1e-16);
    CHECK(std::fabs(F2[1]) < 1e-16);
}

TEST_CASE("A w* = b holds exactly in rational arithmetic up to d = 64")
{
    for (int d = 1; d <= 64; ++d) CHECK(stationary_point_exact(d));
}

TEST_CASE("d=1 is the scalar logistic: w -> 1/2")
{
    LVOptions opt;
    opt.t_end = 50.0;
    const auto traj = simulate(LVModel{1}, {0.1}, opt);
    CHECK(traj.w_final[0] == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(traj.max_monotone);
}

TEST_CASE("interior convergence for a mid-range dimension")
{
    const int d = 5;
    LVModel model{d};
    SplitMix64 rng = SplitMix64::stream(123, 0);
    const auto traj = simulate(model, random_w0(d, rng), LVOptions{});
    const auto ws = model.w_star();
    for (int i = 0; i < d; ++i)
        CHECK(std::fabs(traj.w_final[i] - ws[i]) < 1e-6);
    CHECK(traj.max_monotone);
    CHECK(traj.min_coord > 0.0);
}

TEST_CASE("positivity precondition")
{
    CHECK_THROWS_AS((void)simulate(LVModel{2}, {0.5, 0.0}, LVOptions{}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)simulate(LVModel{2}, {0.5}, LVOptions{}),
                    std::invalid_argument);
}

TEST_CASE("stationary start stays put: averages exact, eps zero")
{
    LVModel model{4};
    LVOptions opt;
    opt.t_end = 20.0;
    const auto traj = simulate(model, model.w_star(), opt);
    const auto ws = model.w_star();
    for (int i = 0; i < 4; ++i) {
        CHECK(traj.final_avg.avg[i] == doctest::Approx(ws[i]).epsilon(1e-12));
        CHECK(std::fabs(traj.final_avg.eps[i]) < 1e-12);
    }
    CHECK(time_average_check(traj, model) < 1e-12);
    for (auto [t, dist] : distance_to_star(traj)) CHECK(dist < 1e-12);
    CHECK(permanence_floor(traj) == doctest::Approx(ws[0]).epsilon(1e-12));
}

TEST_CASE("time-average identity within quadrature tolerance on a generic run")
{
    LVModel model{3};
    SplitMix64 rng = SplitMix64::stream(5, 1);
    LVOptions opt;
    opt.t_end = 200.0;
    const auto traj = simulate(model, random_w0(3, rng), opt);
    const double defect = time_average_check(traj, model);
    CHECK(defect <= std::max(10.0 * traj.final_avg.quad_err, 1e-9 * 3));
}

TEST_CASE("permanence floor is stable under horizon extension at d = 11")
{
    LVModel model{11};
    SplitMix64 rng = SplitMix64::stream(31, 0);
    const auto w0 = random_w0(11, rng);
    LVOptions opt;
    opt.t_end = 1000.0;
    opt.max_samples = 4096;
    const auto a = simulate(model, w0, opt);
    opt.t_end = 10'000.0;
    const auto b = simulate(model, w0, opt);
    CHECK(permanence_floor(a) > 0.0);
    CHECK(permanence_floor(b) > 0.0);
    CHECK(std::fabs(permanence_floor(a) - permanence_floor(b)) <
          0.1 * permanence_floor(a));
}

TEST_CASE("Lyapunov descent for d = 2 with unit weights")
{
    LVModel model{2};
    SplitMix64 rng = SplitMix64::stream(17, 3);
    LVOptions opt;
    opt.t_end = 60.0;
    const auto traj = simulate(model, random_w0(2, rng), opt);
    const auto rep = lyapunov_descent_check(traj, {1.0, 1.0}, model);
    CHECK(rep.min_V >= -1e-14);
    CHECK(rep.V_nonincreasing);

    // V(w*) = 0 exactly
    const auto at_star = simulate(model, model.w_star(), opt);
    const auto rep_star = lyapunov_descent_check(at_star, {1.0, 1.0}, model);
    CHECK(std::fabs(rep_star.min_V) < 1e-14);
}

TEST_CASE("descent identity error halves with the step cap")
{
    LVModel model{2};
    SplitMix64 rng = SplitMix64::stream(17, 4);
    const auto w0 = random_w0(2, rng);
    auto err_at = [&](double h) {
        LVOptions opt;
        opt.t_end = 30.0;
        opt.h_max = h;
        opt.rel_tol = 1e-8;  // keep the step cap binding
        const auto traj = simulate(model, w0, opt);
        return lyapunov_descent_check(traj, {1.0, 1.0}, model).fd_identity_max_err;
    };
    CHECK(err_at(0.02) / err_at(0.01) >= 2.0);
}

TEST_CASE("boundary stationary points all have Psi = 1")
{
    for (int d : {1, 2, 5, 11}) {
        const auto rep = boundary_psi_check(LVModel{d}, 64, 99);
        CHECK(rep.cascade_gives_w_star);
        CHECK(rep.stationary_points_enumerated == d);
        CHECK(rep.all_boundary_psi_one);
        if (d > 2) CHECK(rep.newton_converged > 0);
    }
}

TEST_CASE("CSV exports carry the expected headers")
{
    LVModel model{2};
    LVOptions opt;
    opt.t_end = 5.0;
    opt.checkpoints = {1.0, 2.0};
    const auto traj = simulate(model, {0.3, 0.4}, opt);
    export_lv_csv(traj, "lv_test.csv");
    export_distance_csv(traj, "lv_dist_test.csv");
    export_averages_csv(traj, "lv_avg_test.csv");
    auto first_line = [](const char* path) {
        std::ifstream in(path);
        std::string line;
        std::getline(in, line);
        return line;
    };
    CHECK(first_line("lv_test.csv") == "t,w1,w2");
    CHECK(first_line("lv_dist_test.csv") == "t,dist");
    CHECK(first_line("lv_avg_test.csv") == "t,avg1,avg2");
}

TEST_SUITE_END();
