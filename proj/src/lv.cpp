#include "blowlab/lv.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <gmpxx.h>
#include <stdexcept>

#include "blowlab/common.hpp"
#include "blowlab/rk.hpp"

namespace blowlab {

std::vector<std::vector<double>> LVModel::A() const
{
    std::vector<std::vector<double>> a(d, std::vector<double>(d, 0.0));
    for (int i = 0; i < d; ++i) {
        a[i][0] += 1.0;
        a[i][i] += 1.0;
        if (i + 1 < d) a[i][i + 1] = -1.0;
    }
    return a;
}

std::vector<double> LVModel::b() const
{
    std::vector<double> out(d, 0.0);
    out[d - 1] = 1.0;
    return out;
}

std::vector<double> LVModel::w_star() const
{
    std::vector<double> out(d);
    for (int i = 0; i < d; ++i) out[i] = double(i + 1) / (d + 1);
    return out;
}

std::vector<double> lv_field(std::span<const double> w, const LVModel& model)
{
    const int d = model.d;
    if (static_cast<int>(w.size()) != d)
        throw std::invalid_argument("lv_field: state must have length d");
    std::vector<double> out(d);
    for (int i = 0; i + 1 < d; ++i) out[i] = w[i] * (w[i + 1] - w[0] - w[i]);
    out[d - 1] = w[d - 1] * (1.0 - w[0] - w[d - 1]);
    return out;
}

bool stationary_point_exact(int d)
{
    // w*_i = i/(d+1); rows of A w* must reproduce b exactly.
    std::vector<mpq_class> ws(d);
    for (int i = 0; i < d; ++i) {
        ws[i] = mpq_class(i + 1, d + 1);
        ws[i].canonicalize();
    }
    for (int i = 0; i < d; ++i) {
        mpq_class row = ws[0] + ws[i];
        if (i + 1 < d) row -= ws[i + 1];
        const mpq_class want = (i == d - 1) ? 1 : 0;
        if (row != want) return false;
    }
    return true;
}

LVTrajectory simulate(const LVModel& model, const std::vector<double>& w0,
                      const LVOptions& opt)
{
    const int d = model.d;
    if (d < 1) throw std::invalid_argument("d must be >= 1");
    if (static_cast<int>(w0.size()) != d)
        throw std::invalid_argument("w0 must have length d");
    for (double v : w0)
        if (!(v > 0.0)) throw std::invalid_argument("w0 must be componentwise positive");

    Field f = [&model](double, const std::vector<double>& w, std::vector<double>& dw) {
        const int n = model.d;
        for (int i = 0; i + 1 < n; ++i) dw[i] = w[i] * (w[i + 1] - w[0] - w[i]);
        dw[n - 1] = w[n - 1] * (1.0 - w[0] - w[n - 1]);
    };

    LVTrajectory out;
    out.d = d;
    out.w0 = w0;
    out.t_end = opt.t_end;
    out.min_coord = *std::min_element(w0.begin(), w0.end());
    out.min_coord_after_1 = std::numeric_limits<double>::infinity();

    double running_max = std::max(1.0, *std::max_element(w0.begin(), w0.end()));

    RKOptions rko;
    rko.rel_tol = opt.rel_tol;
    rko.abs_tol = opt.abs_tol;
    rko.max_steps = opt.max_steps;
    if (opt.h_max > 0.0) rko.h_max = opt.h_max;

    std::vector<double> ckpts = opt.checkpoints;
    std::sort(ckpts.begin(), ckpts.end());
    ckpts.erase(std::remove_if(ckpts.begin(), ckpts.end(),
                               [&](double c) { return !(c > 0.0) || c > opt.t_end; }),
                ckpts.end());
    ckpts.push_back(opt.t_end);
    std::size_t next_ckpt = 0;

    RKCallbacks cb;
    cb.max_step = [&](double t, const std::vector<double>&) {
        // land exactly on the next checkpoint / final time
        if (next_ckpt >= ckpts.size()) return std::numeric_limits<double>::infinity();
        return std::max(ckpts[next_ckpt] - t, 1e-14);
    };
    cb.admissible = [&](double, const std::vector<double>& w) {
        for (double v : w)
            if (!(v > 0.0)) return false;
        double m = 1.0;
        for (double v : w) m = std::max(m, v);
        return m <= running_max * (1.0 + 1e-12);
    };
    cb.stop = [&](double t, const std::vector<double>&) { return t >= opt.t_end; };

    // Running averages: trapezoid over accepted steps, plus a half-resolution
    // accumulator (every other step) for a Richardson error estimate.
    std::vector<double> acc(d, 0.0), acc2(d, 0.0);
    std::vector<double> prev_w = w0, prev2_w = w0;
    double prev_t = 0.0, prev2_t = 0.0;
    long step_parity = 0;

    std::size_t stride = 1, since_stored = 0;

    auto record_checkpoint = [&](double t, const std::vector<double>& w) {
        LVCheckpoint c;
        c.t = t;
        c.avg.resize(d);
        c.eps.resize(d);
        double qerr = 0.0;
        for (int i = 0; i < d; ++i) {
            // close the half-resolution accumulator at t before comparing
            const double a2 = acc2[i] + 0.5 * (t - prev2_t) * (prev2_w[i] + w[i]);
            c.avg[i] = acc[i] / t;
            c.eps[i] = std::log(w[i] / w0[i]) / t;
            qerr = std::max(qerr, std::fabs(acc[i] - a2) / (3.0 * t));
        }
        c.quad_err = qerr;
        return c;
    };

    auto observe = [&](double t, const std::vector<double>& w) {
        if (t > 0.0) {
            const double h = t - prev_t;
            for (int i = 0; i < d; ++i) acc[i] += 0.5 * h * (prev_w[i] + w[i]);
            ++step_parity;
            if (step_parity % 2 == 0) {
                const double h2 = t - prev2_t;
                for (int i = 0; i < d; ++i) acc2[i] += 0.5 * h2 * (prev2_w[i] + w[i]);
                prev2_t = t;
                prev2_w = w;
            }
            prev_t = t;
            prev_w = w;
        }
        for (double v : w) {
            out.min_coord = std::min(out.min_coord, v);
            if (t >= 1.0) out.min_coord_after_1 = std::min(out.min_coord_after_1, v);
        }
        double m = 1.0;
        for (double v : w) m = std::max(m, v);
        if (m > running_max * (1.0 + 1e-10)) out.max_monotone = false;
        running_max = std::min(running_max, std::max(m, 1.0));

        if (since_stored++ % stride == 0) {
            out.t.push_back(t);
            out.w.push_back(w);
            if (out.t.size() >= opt.max_samples) {
                // halve the stored resolution, keep endpoints aligned
                std::vector<double> nt;
                std::vector<std::vector<double>> nw;
                for (std::size_t k = 0; k < out.t.size(); k += 2) {
                    nt.push_back(out.t[k]);
                    nw.push_back(out.w[k]);
                }
                out.t.swap(nt);
                out.w.swap(nw);
                stride *= 2;
            }
        }

        while (next_ckpt < ckpts.size() && t > 0.0 &&
               t >= ckpts[next_ckpt] - 1e-12 * std::max(1.0, t)) {
            out.checkpoints.push_back(record_checkpoint(t, w));
            ++next_ckpt;
        }
    };

    std::vector<double> w = w0;
    integrate_adaptive(f, 0.0, w, rko, cb, observe);

    if (out.t.empty() || out.t.back() != prev_t) {
        out.t.push_back(prev_t);
        out.w.push_back(prev_w);
    }
    out.w_final = prev_w;
    out.final_avg = record_checkpoint(prev_t, prev_w);
    if (!std::isfinite(out.min_coord_after_1)) out.min_coord_after_1 = out.min_coord;
    return out;
}

double time_average_check(const LVTrajectory& traj, const LVModel& model)
{
    const int d = model.d;
    const auto& c = traj.final_avg;
    const auto A = model.A();
    const auto b = model.b();
    double worst = 0.0;
    for (int i = 0; i < d; ++i) {
        double lhs = 0.0;
        for (int j = 0; j < d; ++j) lhs += A[i][j] * c.avg[j];
        worst = std::max(worst, std::fabs(lhs - (b[i] - c.eps[i])));
    }
    return worst;
}

std::vector<std::pair<double, double>> distance_to_star(const LVTrajectory& traj)
{
    const auto ws = LVModel{traj.d}.w_star();
    std::vector<std::pair<double, double>> out;
    out.reserve(traj.t.size());
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        double s = 0.0;
        for (int i = 0; i < traj.d; ++i) {
            const double dv = traj.w[k][i] - ws[i];
            s += dv * dv;
        }
        out.emplace_back(traj.t[k], std::sqrt(s));
    }
    return out;
}

double permanence_floor(const LVTrajectory& traj)
{
    return traj.min_coord_after_1;
}

DescentReport lyapunov_descent_check(const LVTrajectory& traj,
                                     const std::vector<double>& lambda,
                                     const LVModel& model)
{
    const int d = model.d;
    const auto ws = model.w_star();
    const auto A = model.A();

    auto V = [&](const std::vector<double>& w) {
        double s = 0.0;
        for (int i = 0; i < d; ++i)
            s += lambda[i] * (w[i] - ws[i] - ws[i] * std::log(w[i] / ws[i]));
        return s;
    };
    // (DA + (DA)^T)/2 with D = diag(lambda)
    Eigen::MatrixXd Q(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            Q(i, j) = 0.5 * (lambda[i] * A[i][j] + lambda[j] * A[j][i]);

    DescentReport rep;
    rep.min_V = std::numeric_limits<double>::infinity();
    std::vector<double> vs(traj.t.size());
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        vs[k] = V(traj.w[k]);
        rep.min_V = std::min(rep.min_V, vs[k]);
        if (k > 0 && vs[k] > vs[k - 1] + 1e-12 * std::max(1.0, vs[k - 1]))
            rep.V_nonincreasing = false;
    }
    for (std::size_t k = 1; k + 1 < traj.t.size(); ++k) {
        const double hm = traj.t[k] - traj.t[k - 1];
        const double hp = traj.t[k + 1] - traj.t[k];
        const double dv = (vs[k + 1] * hm * hm - vs[k - 1] * hp * hp +
                           vs[k] * (hp * hp - hm * hm)) /
                          (hm * hp * (hm + hp));
        Eigen::VectorXd dev(d);
        for (int i = 0; i < d; ++i) dev(i) = traj.w[k][i] - ws[i];
        const double rhs = -dev.dot(Q * dev);
        rep.fd_identity_max_err = std::max(rep.fd_identity_max_err, std::fabs(dv - rhs));
    }
    return rep;
}

BoundaryPsiReport boundary_psi_check(const LVModel& model, int random_trials,
                                     std::uint64_t seed)
{
    const int d = model.d;
    BoundaryPsiReport rep;

    // Exact cascade: F(w) = 0 with w_1 > 0 forces w_{i} = i w_1 and
    // (d+1) w_1 = 1, i.e. w = w* in the strict interior.
    {
        std::vector<mpq_class> w(d);
        mpq_class w1(1, d + 1);
        bool ok = true;
        w[0] = w1;
        for (int i = 1; i < d; ++i) w[i] = mpq_class(i + 1) * w1;
        for (int i = 0; i < d; ++i) {
            mpq_class bracket = (i + 1 < d ? w[i + 1] : mpq_class(1)) - w[0] - w[i];
            if (w[i] * bracket != 0) ok = false;
            if (w[i] <= 0) ok = false;
        }
        rep.cascade_gives_w_star = ok;
    }

    // All boundary stationary points: the origin plus constant-1 suffixes
    // (0,...,0,1,...,1). Verify F = 0 and Psi = 1 exactly.
    bool all_psi_one = true;
    auto check_point = [&](const std::vector<mpq_class>& w) {
        for (int i = 0; i < d; ++i) {
            mpq_class bracket = (i + 1 < d ? w[i + 1] : mpq_class(1)) - w[0] - w[i];
            if (w[i] * bracket != 0) return false;
        }
        mpq_class psi = 1 - mpq_class(d + 1) * w[0];
        return psi == 1;
    };
    {
        std::vector<mpq_class> origin(d, 0);
        all_psi_one = all_psi_one && check_point(origin);
        ++rep.stationary_points_enumerated;
        for (int k = 2; k <= d; ++k) {
            std::vector<mpq_class> w(d, 0);
            for (int i = k - 1; i < d; ++i) w[i] = 1;
            all_psi_one = all_psi_one && check_point(w);
            ++rep.stationary_points_enumerated;
        }
    }

    // Randomized confirmation: damped Newton restricted to random boundary
    // faces; any converged stationary point must have w_1 = 0, hence Psi = 1.
    SplitMix64 rng = SplitMix64::stream(seed, 0xb0a7);
    for (int trial = 0; trial < random_trials; ++trial) {
        std::vector<int> zero(d, 0);
        int nz = 0;
        for (int i = 0; i < d; ++i) {
            zero[i] = rng.uniform() < 0.4 ? 1 : 0;
            nz += zero[i];
        }
        if (nz == 0) zero[static_cast<int>(rng.uniform(0, d))] = 1, nz = 1;
        if (nz == d) continue;

        std::vector<int> free_idx;
        for (int i = 0; i < d; ++i)
            if (!zero[i]) free_idx.push_back(i);
        const int m = static_cast<int>(free_idx.size());

        std::vector<double> w(d, 0.0);
        for (int i : free_idx) w[i] = rng.log_uniform(0.05, 2.0);

        bool converged = false;
        for (int it = 0; it < 200; ++it) {
            Eigen::VectorXd Fv(m);
            Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
            auto col = [&](int j) {
                for (int c = 0; c < m; ++c)
                    if (free_idx[c] == j) return c;
                return -1;
            };
            for (int r = 0; r < m; ++r) {
                const int i = free_idx[r];
                const double wn = i + 1 < d ? w[i + 1] : 1.0;
                Fv(r) = w[i] * (wn - w[0] - w[i]);
                const int c_i = r;
                J(r, c_i) += (wn - w[0] - w[i]) - w[i];
                if (i + 1 < d) {
                    const int c = col(i + 1);
                    if (c >= 0) J(r, c) += w[i];
                }
                const int c0 = col(0);
                if (c0 >= 0) J(r, c0) += -w[i];
            }
            if (Fv.lpNorm<Eigen::Infinity>() < 1e-13) {
                converged = true;
                break;
            }
            Eigen::VectorXd step = J.fullPivLu().solve(Fv);
            double damp = 1.0;
            for (int r = 0; r < m; ++r) {
                // keep iterates finite; faces may have roots with zero coords
                if (!std::isfinite(step(r))) damp = 0.0;
            }
            if (damp == 0.0) break;
            for (int r = 0; r < m; ++r) w[free_idx[r]] -= step(r);
        }
        if (!converged) continue;
        bool in_cone = true;
        for (int i = 0; i < d; ++i)
            if (w[i] < -1e-9) in_cone = false;
        if (!in_cone) continue;
        // Quadratically degenerate roots (e.g. F_1 = -2 w_1^2) stop with
        // w_i ~ sqrt(tol); snap those to the face and re-verify stationarity.
        for (int i = 0; i < d; ++i)
            if (std::fabs(w[i]) < 1e-6) w[i] = 0.0;
        double worst_f = 0.0;
        for (int i = 0; i < d; ++i) {
            const double wn = i + 1 < d ? w[i + 1] : 1.0;
            worst_f = std::max(worst_f, std::fabs(w[i] * (wn - w[0] - w[i])));
        }
        if (worst_f > 1e-10) continue;
        ++rep.newton_converged;
        const double psi = 1.0 - (d + 1) * w[0];
        if (std::fabs(psi - 1.0) > 1e-9) all_psi_one = false;
    }
    rep.all_boundary_psi_one = all_psi_one;
    return rep;
}

std::vector<double> random_w0(int d, SplitMix64& rng)
{
    std::vector<double> w(d);
    for (int i = 0; i < d; ++i) w[i] = rng.log_uniform(0.05, 2.0);
    return w;
}

void export_lv_csv(const LVTrajectory& traj, const std::string& path)
{
    CsvWriter csv(path);
    std::vector<std::string> cols = {"t"};
    for (int i = 1; i <= traj.d; ++i) cols.push_back("w" + std::to_string(i));
    csv.header(cols);
    std::vector<double> row(traj.d + 1);
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        row[0] = traj.t[k];
        for (int i = 0; i < traj.d; ++i) row[1 + i] = traj.w[k][i];
        csv.row(row);
    }
}

void export_distance_csv(const LVTrajectory& traj, const std::string& path)
{
    CsvWriter csv(path);
    csv.header({"t", "dist"});
    for (auto [t, dist] : distance_to_star(traj)) csv.row(std::vector<double>{t, dist});
}

void export_averages_csv(const LVTrajectory& traj, const std::string& path)
{
    CsvWriter csv(path);
    std::vector<std::string> cols = {"t"};
    for (int i = 1; i <= traj.d; ++i) cols.push_back("avg" + std::to_string(i));
    csv.header(cols);
    std::vector<double> row(traj.d + 1);
    for (const auto& c : traj.checkpoints) {
        row[0] = c.t;
        for (int i = 0; i < traj.d; ++i) row[1 + i] = c.avg[i];
        csv.row(row);
    }
}

}  // namespace blowlab
