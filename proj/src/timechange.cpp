#include "blowlab/timechange.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace blowlab {

namespace {

// Centered first derivative on a non-uniform grid, second order.
double fd_central(const std::vector<double>& ts, const std::vector<double>& fs,
                  std::size_t k)
{
    const double hm = ts[k] - ts[k - 1];
    const double hp = ts[k + 1] - ts[k];
    return (fs[k + 1] * hm * hm - fs[k - 1] * hp * hp + fs[k] * (hp * hp - hm * hm)) /
           (hm * hp * (hm + hp));
}

}  // namespace

UTrajectory build_u(const std::vector<DerivativeJet>& traj, const BlowupEstimate& T)
{
    const int d = static_cast<int>(traj.front().jet.size()) - 1;
    if (!traj.empty() && T.T <= traj.back().t)
        throw InvariantViolationError("blow-up estimate not beyond the trajectory end");

    UTrajectory u;
    u.d = d;
    u.T = T.T;
    for (const auto& s : traj) {
        if (!(s.t > 0.0) || !(s.jet[0] > 0.0)) continue;
        std::vector<double> row(d + 1);
        row[0] = 1.0 / ((T.T - s.t) * s.jet[0]);
        bool positive = row[0] > 0.0;
        for (int i = 1; i <= d; ++i) {
            row[i] = s.jet[i] / (s.jet[0] * s.jet[i - 1]);
            positive = positive && row[i] > 0.0;
        }
        if (!positive) throw InvariantViolationError("non-positive u component");
        u.bound = std::max(u.bound, *std::max_element(row.begin(), row.end()));
        u.u0_dT_sensitivity =
            std::max(u.u0_dT_sensitivity, row[0] / (T.T - s.t) * T.uncertainty);
        u.t.push_back(s.t);
        u.u.push_back(std::move(row));
    }
    return u;
}

std::vector<double> residual_system_u(const UTrajectory& u, double T)
{
    const int d = u.d;
    if (u.t.size() < 3) throw InsufficientDataError("need >= 3 samples for residuals");

    std::vector<double> res(d + 1, 0.0);
    std::vector<double> comp(u.t.size());
    for (int i = 0; i <= d; ++i) {
        for (std::size_t k = 0; k < u.t.size(); ++k) comp[k] = u.u[k][i];
        for (std::size_t k = 1; k + 1 < u.t.size(); ++k) {
            const double du = fd_central(u.t, comp, k);
            const double Tt = T - u.t[k];
            const auto& q = u.u[k];
            double rhs;
            if (i == 0)
                rhs = (q[0] - q[1]) / Tt;
            else if (i < d)
                rhs = q[i] * (q[i + 1] - q[1] - q[i]) / (q[0] * Tt);
            else
                rhs = q[d] * (1.0 - q[1] - q[d]) / (q[0] * Tt);
            res[i] = std::max(res[i], std::fabs(du - rhs) * Tt);
        }
    }
    return res;
}

VTrajectory build_v(const UTrajectory& u, double T)
{
    VTrajectory v;
    v.d = u.d;
    v.T = T;
    v.t0 = (1.0 - std::exp(-1.0)) * T;
    for (std::size_t k = 0; k < u.t.size(); ++k) {
        if (u.t[k] < v.t0) continue;
        v.s.push_back(std::log(T / (T - u.t[k])) - 1.0);
        v.v.push_back(u.u[k]);
    }
    if (v.s.size() < 8 || v.s.back() < 2.0)
        throw InsufficientDataError("u-trajectory does not cover [t0, T) closely enough");
    return v;
}

std::vector<double> residual_system_v(const VTrajectory& v)
{
    const int d = v.d;
    if (v.s.size() < 3) throw InsufficientDataError("need >= 3 samples for residuals");

    std::vector<double> res(d + 1, 0.0);
    std::vector<double> comp(v.s.size());
    for (int i = 0; i <= d; ++i) {
        for (std::size_t k = 0; k < v.s.size(); ++k) comp[k] = v.v[k][i];
        for (std::size_t k = 1; k + 1 < v.s.size(); ++k) {
            const double dv = fd_central(v.s, comp, k);
            const auto& q = v.v[k];
            double rhs;
            if (i == 0)
                rhs = q[0] - q[1];
            else if (i < d)
                rhs = q[i] * (q[i + 1] - q[1] - q[i]) / q[0];
            else
                rhs = q[d] * (1.0 - q[1] - q[d]) / q[0];
            res[i] = std::max(res[i], std::fabs(dv - rhs));
        }
    }
    return res;
}

V0IdentityDefect v0_identity_defect(const VTrajectory& v, TailMode tail_mode)
{
    const std::size_t n = v.s.size();
    if (n < 3) throw InsufficientDataError("need >= 3 samples");
    const double s_max = v.s.back();
    const bool use_limit =
        tail_mode == TailMode::Limit || (tail_mode == TailMode::Auto && v.d <= 10);
    const double v1_tail = use_limit ? 1.0 / (v.d + 1) : v.v.back()[1];

    // suffix trapezoid of v1 e^-sigma from s_k to s_max
    std::vector<double> suffix(n, 0.0);
    for (std::size_t k = n - 1; k-- > 0;) {
        const double h = v.s[k + 1] - v.s[k];
        suffix[k] = suffix[k + 1] +
                    0.5 * h *
                        (v.v[k][1] * std::exp(-(v.s[k] - v.s[0])) +
                         v.v[k + 1][1] * std::exp(-(v.s[k + 1] - v.s[0])));
    }
    // (the e^{-s_0} offset keeps the integrand O(1); fold it back below)

    V0IdentityDefect out;
    double v1_lo = v.v.back()[1], v1_hi = v1_lo;
    for (std::size_t k = n / 2; k < n; ++k) {
        v1_lo = std::min(v1_lo, v.v[k][1]);
        v1_hi = std::max(v1_hi, v.v[k][1]);
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double tail_weight = std::exp(v.s[k] - s_max);
        const double pred = std::exp(v.s[k] - v.s[0]) * suffix[k] + tail_weight * v1_tail;
        if (tail_weight <= 0.1)
            out.identity = std::max(out.identity, std::fabs(v.v[k][0] - pred));
        out.tail = std::max(out.tail, tail_weight * (v1_hi - v1_lo));
    }
    return out;
}

WTrajectory build_w(const VTrajectory& v)
{
    const std::size_t n = v.s.size();
    WTrajectory w;
    w.d = v.d;
    w.tau.resize(n);
    w.psi.resize(n);
    w.w.resize(n);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!(v.v[k][0] > 1e-12))
            throw InvariantViolationError("v0 near zero: cannot invert the time change");
        if (k > 0) {
            const double h = v.s[k] - v.s[k - 1];
            acc += 0.5 * h * (1.0 / v.v[k - 1][0] + 1.0 / v.v[k][0]);
        }
        w.tau[k] = acc;
        w.psi[k] = v.s[k] - v.s[0];
        w.w[k].assign(v.v[k].begin() + 1, v.v[k].end());
    }
    return w;
}

std::vector<double> residual_system_w(const WTrajectory& w)
{
    const int d = w.d;
    if (w.tau.size() < 3) throw InsufficientDataError("need >= 3 samples for residuals");

    std::vector<double> res(d, 0.0);
    std::vector<double> comp(w.tau.size());
    for (int i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < w.tau.size(); ++k) comp[k] = w.w[k][i];
        for (std::size_t k = 1; k + 1 < w.tau.size(); ++k) {
            const double dw = fd_central(w.tau, comp, k);
            const auto& q = w.w[k];
            const double rhs = i + 1 < d ? q[i] * (q[i + 1] - q[0] - q[i])
                                         : q[d - 1] * (1.0 - q[0] - q[d - 1]);
            res[i] = std::max(res[i], std::fabs(dw - rhs));
        }
    }
    return res;
}

double psi_slope_at_end(const WTrajectory& w)
{
    if (w.tau.empty() || !(w.tau.back() > 0.0))
        throw InsufficientDataError("empty w-trajectory");
    return w.psi.back() / w.tau.back();
}

double psi_roundtrip_defect(const WTrajectory& w, const VTrajectory& v,
                            const std::vector<DerivativeJet>& traj)
{
    const double t_first = v.T * (1.0 - std::exp(-(1.0 + v.s.front())));
    const double x0 = interp_x(traj, t_first);
    double worst = 0.0;
    for (std::size_t k = 0; k < w.tau.size(); ++k) {
        const double s = v.s[k];
        const double t = v.T * (1.0 - std::exp(-(1.0 + s)));
        if (t > traj.back().t) break;
        worst = std::max(worst, std::fabs(w.tau[k] - (interp_x(traj, t) - x0)));
    }
    return worst;
}

namespace {

template <class Traj>
void export_rows(const Traj& tr, const std::vector<double>& times, const char* tname,
                 const char* vname, int count, int offset, const std::string& path,
                 const std::vector<double>* extra = nullptr, const char* ename = nullptr)
{
    CsvWriter csv(path);
    std::vector<std::string> cols = {tname};
    for (int i = 0; i < count; ++i) cols.push_back(vname + std::to_string(i + offset));
    if (extra) cols.push_back(ename);
    csv.header(cols);
    std::vector<double> row;
    for (std::size_t k = 0; k < times.size(); ++k) {
        row.clear();
        row.push_back(times[k]);
        for (int i = 0; i < count; ++i) row.push_back(tr[k][i]);
        if (extra) row.push_back((*extra)[k]);
        csv.row(row);
    }
}

}  // namespace

void export_u_csv(const UTrajectory& u, const std::string& path)
{
    export_rows(u.u, u.t, "t", "u", u.d + 1, 0, path);
}

void export_v_csv(const VTrajectory& v, const std::string& path)
{
    export_rows(v.v, v.s, "s", "v", v.d + 1, 0, path);
}

void export_w_csv(const WTrajectory& w, const std::string& path)
{
    export_rows(w.w, w.tau, "tau", "w", w.d, 1, path, &w.psi, "psi");
}

}  // namespace blowlab
