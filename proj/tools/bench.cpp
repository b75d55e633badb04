#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "blowlab/burning.hpp"
#include "blowlab/exec.hpp"
#include "blowlab/lv.hpp"
#include "blowlab/lyapunov.hpp"
#include "blowlab/ode.hpp"

// Times the serial reference path against the OpenMP path for each
// data-parallel kernel and checks that the results match exactly.

using namespace blowlab;

namespace {

double ms(std::function<void()> fn)
{
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     t0)
        .count();
}

void report(const char* name, double serial_ms, double omp_ms, bool match)
{
    std::printf("%-28s %10.1f ms %10.1f ms %8.2fx   %s\n", name, serial_ms, omp_ms,
                serial_ms / omp_ms, match ? "identical" : "MISMATCH");
}

}  // namespace

int main()
{
    std::printf("%-28s %13s %13s %9s   %s\n", "kernel", "serial", "openmp", "speedup",
                "results");

    {
        IntegratorConfig cfg;
        cfg.y_max = 1e6;
        const auto traj = integrate(2, cfg);
        const double t = time_at_jet_value(traj, 2, 10.0);
        BurnWindow w{.d = 2, .half_width = 1.0, .t_max = t};
        MCResult a, b;
        const double ts = ms([&] { a = mc_unburned_fraction(w, traj, t, 20'000, 9, Exec::Serial); });
        const double tp = ms([&] { b = mc_unburned_fraction(w, traj, t, 20'000, 9, Exec::OpenMP); });
        report("mc_unburned_fraction d=2", ts, tp, a.estimate == b.estimate);
    }
    {
        IntegratorConfig cfg;
        cfg.y_max = 1e6;
        const auto traj = integrate(2, cfg);
        BurnWindow w{.d = 2, .half_width = 2.0, .t_max = time_at_jet_value(traj, 2, 40.0)};
        const auto atoms = sample_atoms(w, traj, 3);
        BurnRaster ra, rb;
        const double ts = ms([&] { ra = render_field(w, atoms, 384, Exec::Serial); });
        const double tp = ms([&] { rb = render_field(w, atoms, 384, Exec::OpenMP); });
        report("render_field d=2 384px", ts, tp,
               ra.first_time == rb.first_time && ra.first_burner == rb.first_burner);
    }
    {
        SearchOptions sa;
        sa.restarts = 8;
        sa.iters = 1500;
        sa.seed = 5;
        LyapunovCandidate a, b;
        sa.exec = Exec::Serial;
        const double ts = ms([&] { a = search_lambda(8, sa); });
        sa.exec = Exec::OpenMP;
        const double tp = ms([&] { b = search_lambda(8, sa); });
        report("search_lambda d=8 x8", ts, tp,
               a.min_eig == b.min_eig && a.lambda == b.lambda);
    }
    {
        // batch of independent LV runs
        LVModel model{6};
        auto batch = [&](Exec exec, std::vector<double>& out) {
            out.assign(24, 0.0);
            parallel_for(24, exec, [&](std::int64_t k) {
                SplitMix64 rng = SplitMix64::stream(77, k);
                LVOptions opt;
                opt.t_end = 200.0;
                opt.max_samples = 64;
                const auto traj = simulate(model, random_w0(6, rng), opt);
                out[k] = traj.w_final[0];
            });
        };
        std::vector<double> a, b;
        const double ts = ms([&] { batch(Exec::Serial, a); });
        const double tp = ms([&] { batch(Exec::OpenMP, b); });
        report("lv batch d=6 x24", ts, tp, a == b);
    }
    return 0;
}
