#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "blowlab/acceptance.hpp"
#include "blowlab/burning.hpp"
#include "blowlab/common.hpp"
#include "blowlab/lv.hpp"
#include "blowlab/lyapunov.hpp"
#include "blowlab/ode.hpp"
#include "blowlab/series.hpp"
#include "blowlab/timechange.hpp"

using namespace blowlab;

namespace {

void write_manifest(const std::string& out_path,
                    const std::vector<std::pair<std::string, std::string>>& kv)
{
    std::ofstream m(out_path);
    for (const auto& [k, v] : kv) m << k << " = " << v << "\n";
}

int cmd_integrate(int d, const IntegratorConfig& cfg, const std::string& out)
{
    auto traj = integrate(d, cfg);
    export_trajectory_csv(traj, out);
    write_manifest(out + ".manifest", {{"subcommand", "integrate"},
                                       {"d", std::to_string(d)},
                                       {"rel_tol", fmt17(cfg.rel_tol)},
                                       {"abs_tol", fmt17(cfg.abs_tol)},
                                       {"y_max", fmt17(cfg.y_max)},
                                       {"samples", std::to_string(traj.size())}});
    std::cout << "wrote " << traj.size() << " samples to " << out << "\n";
    return 0;
}

int cmd_estimate_t(int d, const IntegratorConfig& cfg, int n_coeffs)
{
    const auto series = estimate_blowup_series(taylor_coefficients(d, n_coeffs));
    std::cout << "series-radius        T = " << fmt17(series.T)
              << "  (uncertainty " << fmt17(series.uncertainty) << ")\n";
    if (d <= 10) {
        const auto shoot = estimate_blowup_shooting(d, cfg);
        std::cout << "shooting-extrapolation T = " << fmt17(shoot.T)
                  << "  (uncertainty " << fmt17(shoot.uncertainty) << ")\n";
        const double diff = std::fabs(shoot.T - series.T);
        const double budget = shoot.uncertainty + series.uncertainty;
        std::cout << "disagreement " << fmt17(diff) << " vs combined uncertainty "
                  << fmt17(budget) << (diff <= std::max(budget, 1e-4) ? " (ok)\n" : " (!)\n");
        if (diff > std::max(budget, 1e-4)) return 1;
    } else {
        std::cout << "(shooting extrapolation unavailable for d >= 11; "
                     "series radius is the only estimator)\n";
    }
    return 0;
}

int cmd_timechange(int d, const IntegratorConfig& cfg, const std::string& prefix)
{
    auto traj = integrate(d, cfg);
    const auto T = estimate_blowup_shooting(traj, d);
    // u_i blows up like a power of 1/t toward t = 0 (for d >= 2), which makes
    // absolute residuals there meaningless; report the cascade from T/4 on.
    std::vector<DerivativeJet> tail(
        std::find_if(traj.begin(), traj.end(),
                     [&](const DerivativeJet& s) { return s.t >= T.T / 4; }),
        traj.end());
    auto u = build_u(tail, T);
    auto v = build_v(u, T.T);
    auto w = build_w(v);
    export_u_csv(u, prefix + "_u.csv");
    export_v_csv(v, prefix + "_v.csv");
    export_w_csv(w, prefix + "_w.csv");

    std::cout << "T = " << fmt17(T.T) << " (uncertainty " << fmt17(T.uncertainty)
              << "), u0 sensitivity to T: " << fmt17(u.u0_dT_sensitivity) << "\n";
    std::cout << "residuals u-system:";
    for (double r : residual_system_u(u, T.T)) std::cout << " " << fmt17(r);
    std::cout << "\nresiduals v-system:";
    for (double r : residual_system_v(v)) std::cout << " " << fmt17(r);
    std::cout << "\nresiduals w-system:";
    for (double r : residual_system_w(w)) std::cout << " " << fmt17(r);
    const auto def = v0_identity_defect(v);
    std::cout << "\nv0 integral identity defect " << fmt17(def.identity)
              << " (tail truncation " << fmt17(def.tail) << ")\n";
    std::cout << "psi(tau)/tau at end " << fmt17(psi_slope_at_end(w)) << " vs 1/(d+1) = "
              << fmt17(1.0 / (d + 1)) << "\n";
    std::cout << "psi round-trip vs carried integral: "
              << fmt17(psi_roundtrip_defect(w, v, traj)) << "\n";
    return 0;
}

int cmd_lv_sim(int d, double t_end, double tol, const std::vector<std::uint64_t>& seeds,
               const std::string& prefix)
{
    LVModel model{d};
    for (std::uint64_t seed : seeds) {
        SplitMix64 rng = SplitMix64::stream(seed, 0);
        const auto w0 = random_w0(d, rng);
        LVOptions opt;
        opt.t_end = t_end;
        opt.rel_tol = tol;
        opt.abs_tol = tol * 1e-2;
        const auto traj = simulate(model, w0, opt);
        const std::string tag = prefix + "_seed" + std::to_string(seed);
        export_lv_csv(traj, tag + ".csv");
        export_distance_csv(traj, tag + "_dist.csv");

        std::vector<std::pair<std::string, std::string>> kv = {
            {"subcommand", "lv-sim"},   {"d", std::to_string(d)},
            {"t_end", fmt17(t_end)},    {"rel_tol", fmt17(tol)},
            {"seed", std::to_string(seed)},
        };
        for (int i = 0; i < d; ++i) kv.emplace_back("w0_" + std::to_string(i + 1), fmt17(w0[i]));
        write_manifest(tag + ".manifest", kv);

        std::cout << "seed " << seed << ": floor " << fmt17(permanence_floor(traj))
                  << ", max(w,1) non-increasing: " << (traj.max_monotone ? "yes" : "NO")
                  << ", final distance "
                  << fmt17(distance_to_star(traj).back().second) << "\n";
        if (!traj.max_monotone) return 1;
    }
    return 0;
}

int cmd_lv_average(int d, double t_end, std::uint64_t seed, const std::string& out)
{
    LVModel model{d};
    SplitMix64 rng = SplitMix64::stream(seed, 0);
    LVOptions opt;
    opt.t_end = t_end;
    opt.checkpoints = {t_end / 1000, t_end / 100, t_end / 10};
    const auto traj = simulate(model, random_w0(d, rng), opt);
    if (!out.empty()) export_averages_csv(traj, out);

    const auto ws = model.w_star();
    std::cout << "i, avg_i(" << fmt17(t_end) << "), i/(d+1), |diff|\n";
    double worst = 0.0;
    for (int i = 0; i < d; ++i) {
        const double diff = std::fabs(traj.final_avg.avg[i] - ws[i]);
        worst = std::max(worst, diff);
        std::cout << (i + 1) << ", " << fmt17(traj.final_avg.avg[i]) << ", "
                  << fmt17(ws[i]) << ", " << fmt17(diff) << "\n";
    }
    const double defect = time_average_check(traj, model);
    std::cout << "A*avg - (b - eps) defect: " << fmt17(defect)
              << " (quadrature error estimate " << fmt17(traj.final_avg.quad_err)
              << ")\n";
    return defect <= std::max(10.0 * traj.final_avg.quad_err, 1e-9 * d) ? 0 : 1;
}

int cmd_lyapunov_verify(int d)
{
    auto lambda = feasible_lambda_d10();
    if (d < 1 || d > 10) {
        std::cerr << "the stored feasible vector covers d in [1,10]\n";
        return 2;
    }
    lambda.resize(d);
    const auto minors = leading_minors_exact(lambda);
    std::cout << "lambda = (";
    for (int i = 0; i < d; ++i) std::cout << (i ? "," : "") << lambda[i].get_str();
    std::cout << ")\n";
    bool all_positive = true;
    for (int k = 0; k < d; ++k) {
        std::cout << "Delta_" << (k + 1) << " = " << minors[k].get_str() << "\n";
        if (minors[k] <= 0) all_positive = false;
    }
    std::cout << (all_positive ? "all leading minors positive: matrix is positive-definite\n"
                               : "non-positive minor found\n");
    return all_positive ? 0 : 1;
}

int cmd_lyapunov_search(int d, int restarts, int iters, std::uint64_t seed, bool serial)
{
    SearchOptions opt;
    opt.restarts = restarts;
    opt.iters = iters;
    opt.seed = seed;
    opt.exec = serial ? Exec::Serial : Exec::OpenMP;
    const auto cand = search_lambda(d, opt);
    std::cout << "d = " << d << ", restarts = " << restarts << ", iters = " << iters
              << ", seed = " << seed << "\n";
    std::cout << "best min eigenvalue (sum lambda = 1): " << fmt17(cand.min_eig) << "\n";
    std::cout << "feasible: " << (cand.feasible ? "yes" : "no")
              << ", exact confirmation on rationalized lambda: "
              << (cand.exact_confirmed ? "yes" : "no") << "\n";
    std::cout << "lambda =";
    for (double v : cand.lambda) std::cout << " " << fmt17(v);
    std::cout << "\nminors (denominator 10^6 cleared):";
    for (const auto& m : cand.minors) std::cout << " " << m;
    std::cout << "\n";
    return 0;
}

int cmd_burn_prob(int d, long trials, std::uint64_t seed)
{
    IntegratorConfig cfg;
    cfg.y_max = 1e6;
    const auto traj = integrate(d, cfg);
    std::cout << "p_target, t, analytic, quadrature, mc, stderr, pulls\n";
    int rc = 0;
    for (double p : {0.5, 0.1}) {
        const double t = time_at_jet_value(traj, d, 1.0 / p);
        const double pa = unburned_probability_analytic(t, traj);
        const double pq = unburned_probability_quadrature(t, traj);
        BurnWindow w{.d = d, .half_width = 1.0, .t_max = t};
        const auto mc = mc_unburned_fraction(w, traj, t, trials, seed);
        const double pulls = std::fabs(mc.estimate - pa) / std::max(mc.stderr_, 1e-12);
        std::cout << fmt17(p) << ", " << fmt17(t) << ", " << fmt17(pa) << ", "
                  << fmt17(pq) << ", " << fmt17(mc.estimate) << ", "
                  << fmt17(mc.stderr_) << ", " << fmt17(pulls) << "\n";
        if (pulls > 3.0) rc = 1;
    }
    return rc;
}

int cmd_burn_render(int d, double R, double t_max, int resolution, std::uint64_t seed,
                    const std::string& out)
{
    IntegratorConfig cfg;
    cfg.y_max = 1e6;
    const auto traj = integrate(d, cfg);
    if (t_max <= 0.0) {
        // default: run until the unburned fraction drops to 1e-3
        t_max = time_at_jet_value(traj, d, 1e3);
    }
    BurnWindow w{.d = d, .half_width = R, .t_max = t_max};
    const auto atoms = sample_atoms(w, traj, seed);
    const auto raster = render_field(w, atoms, resolution);
    write_ppm(raster, out);
    write_legend_csv(atoms, out + ".legend.csv");
    write_manifest(out + ".manifest",
                   {{"subcommand", "burn-render"},
                    {"d", std::to_string(d)},
                    {"window", fmt17(R)},
                    {"t_max", fmt17(t_max)},
                    {"resolution", std::to_string(resolution)},
                    {"seed", std::to_string(seed)},
                    {"atoms", std::to_string(atoms.size())}});
    std::cout << "rendered " << atoms.size() << " atoms to " << out << "\n";
    return 0;
}

int cmd_burn_coverage(int d, const std::vector<double>& eps_list, long trials,
                      std::uint64_t seed, const std::string& out)
{
    if (d > 10) {
        std::cerr << "coverage check needs the shooting estimate (d <= 10)\n";
        return 2;
    }
    const auto traj = integrate(d);
    const double T = estimate_blowup_shooting(traj, d).T;
    const auto rows = coverage_rate_check(traj, T, 0.5, eps_list, trials, seed);
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out.empty()) {
        file.open(out);
        os = &file;
    }
    (*os) << "eps,analytic_exponent,mc_estimate,stderr\n";
    for (const auto& row : rows)
        (*os) << fmt17(row.eps) << "," << fmt17(row.analytic_exponent) << ","
              << fmt17(row.mc_estimate) << "," << fmt17(row.stderr_) << "\n";
    if (!out.empty())
        std::cout << "wrote exponent table (" << rows.size() << " rows) to " << out
                  << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"blowlab: numerical laboratory for a blow-up ODE, its "
                 "Lotka-Volterra reduction, and a Poissonian burning model"};
    app.require_subcommand(1);
    app.set_config("--config");

    int d = 1;
    double tol = 1e-10, t_end = 500.0, window = 1.0, t_max = 0.0, y_max = 1e8;
    long trials = 10'000;
    int resolution = 512, n_coeffs = 1024, restarts = 50, iters = 6000;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds = {0};
    std::vector<double> eps_list = {1e-2, 1e-3, 1e-4};
    std::string out = "out.csv";
    bool serial = false;

    auto add_common = [&](CLI::App* cmd, bool with_out = true) {
        cmd->add_option("--d", d, "dimension parameter d >= 1");
        cmd->add_option("--tol", tol, "relative tolerance");
        if (with_out) cmd->add_option("--out", out, "output path");
        return cmd;
    };

    auto* s_int = add_common(app.add_subcommand("integrate", "integrate toward the pole"));
    s_int->add_option("--y-max", y_max, "stop threshold on y");

    auto* s_est = add_common(app.add_subcommand("estimate-t", "blow-up time, both estimators"), false);
    s_est->add_option("--n-coeffs", n_coeffs, "series length");
    s_est->add_option("--y-max", y_max, "stop threshold on y");

    auto* s_tc = add_common(app.add_subcommand("timechange", "u/v/w cascade + residuals"));

    auto* s_lv = add_common(app.add_subcommand("lv-sim", "simulate the LV system"));
    s_lv->add_option("--t-end", t_end, "final time");
    s_lv->add_option("--seed", seeds, "one or more seeds");

    auto* s_avg = add_common(app.add_subcommand("lv-average", "time-average identity table"));
    s_avg->add_option("--t-end", t_end, "final time");
    s_avg->add_option("--seed", seed, "seed");

    int verify_d = 10;
    auto* s_ver = app.add_subcommand("lyapunov-verify", "exact minor table for the d=10 vector");
    s_ver->add_option("--d", verify_d, "prefix length in [1,10]");

    auto* s_sea = app.add_subcommand("lyapunov-search", "feasibility search per d");
    s_sea->add_option("--d", d, "dimension");
    s_sea->add_option("--restarts", restarts, "independent restarts");
    s_sea->add_option("--iters", iters, "ascent iterations per restart");
    s_sea->add_option("--seed", seed, "seed");
    s_sea->add_flag("--serial", serial, "force the serial reference path");

    auto* s_bp = app.add_subcommand("burn-prob", "analytic vs MC unburned probability");
    s_bp->add_option("--d", d, "dimension");
    s_bp->add_option("--trials", trials, "MC trials");
    s_bp->add_option("--seed", seed, "seed");

    auto* s_br = app.add_subcommand("burn-render", "PPM raster of the burning model");
    s_br->add_option("--d", d, "dimension (1 or 2)");
    s_br->add_option("--window", window, "half-width R of the observation window");
    s_br->add_option("--t-max", t_max, "final time (default: unburned fraction 1e-3)");
    s_br->add_option("--resolution", resolution, "pixels per axis");
    s_br->add_option("--seed", seed, "seed");
    s_br->add_option("--out", out, "output PPM path");

    auto* s_bc = app.add_subcommand("burn-coverage", "coverage exponent table");
    s_bc->add_option("--d", d, "dimension");
    s_bc->add_option("--eps", eps_list, "epsilon values");
    s_bc->add_option("--trials", trials, "MC trials per epsilon");
    s_bc->add_option("--seed", seed, "seed");
    s_bc->add_option("--out", out, "output CSV path");

    auto* s_all = app.add_subcommand("check-all", "run the full acceptance suite");
    (void)s_all;

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    IntegratorConfig cfg;
    cfg.rel_tol = tol;
    cfg.abs_tol = tol * 1e-2;
    cfg.y_max = y_max;

    try {
        if (s_int->parsed()) return cmd_integrate(d, cfg, out);
        if (s_est->parsed()) return cmd_estimate_t(d, cfg, n_coeffs);
        if (s_tc->parsed()) return cmd_timechange(d, cfg, out.empty() ? "timechange" : out);
        if (s_lv->parsed()) return cmd_lv_sim(d, t_end, tol, seeds, out.empty() ? "lv" : out);
        if (s_avg->parsed()) return cmd_lv_average(d, t_end, seed, out);
        if (s_ver->parsed()) return cmd_lyapunov_verify(verify_d);
        if (s_sea->parsed()) return cmd_lyapunov_search(d, restarts, iters, seed, serial);
        if (s_bp->parsed()) return cmd_burn_prob(d, trials, seed);
        if (s_br->parsed()) return cmd_burn_render(d, window, t_max, resolution, seed, out);
        if (s_bc->parsed()) return cmd_burn_coverage(d, eps_list, trials, seed, out);
        if (s_all->parsed()) {
            const auto results = acceptance::run({}, std::cout);
            for (const auto& r : results)
                if (!r.pass) return 1;
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 2;
}
