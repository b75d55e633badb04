#include "blowlab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "blowlab/rk.hpp"

namespace blowlab {

void IntegratorConfig::validate() const
{
    if (!(rel_tol > 0.0 && rel_tol < 1.0) || !(abs_tol > 0.0 && abs_tol < 1.0))
        throw std::invalid_argument("tolerances must lie in (0, 1)");
    if (!(y_max >= 1e3)) throw std::invalid_argument("y_max must be >= 1e3");
    if (max_steps <= 0) throw std::invalid_argument("max_steps must be positive");
}

std::vector<double> cauchy_field(std::span<const double> jet, int d)
{
    if (static_cast<int>(jet.size()) != d + 1)
        throw std::invalid_argument("cauchy_field: jet must have length d+1");
    std::vector<double> out(d + 1);
    for (int i = 0; i < d; ++i) out[i] = jet[i + 1];
    out[d] = jet[0] * jet[d];
    return out;
}

namespace {

// augmented state: (y, y', ..., y^(d), x) with x' = y
Field make_field(int d)
{
    return [d](double, const std::vector<double>& z, std::vector<double>& dz) {
        for (int i = 0; i < d; ++i) dz[i] = z[i + 1];
        dz[d] = z[0] * z[d];
        dz[d + 1] = z[0];
    };
}

}  // namespace

std::vector<DerivativeJet> integrate(int d, const IntegratorConfig& config)
{
    if (d < 1) throw std::invalid_argument("d must be >= 1");
    config.validate();

    std::vector<double> z(d + 2, 0.0);
    z[d] = 1.0;

    RKOptions opt;
    opt.rel_tol = config.rel_tol;
    opt.abs_tol = config.abs_tol;
    opt.max_steps = config.max_steps;

    RKCallbacks cb;
    // Keep the step well inside the remaining time to the pole; the running
    // estimate of that distance is (d+1)/y once y has grown.
    cb.max_step = [d](double, const std::vector<double>& s) {
        return s[0] > 1.0 ? 0.1 * (d + 1) / s[0]
                          : std::numeric_limits<double>::infinity();
    };
    std::vector<double> prev(d + 2, 0.0);
    prev[d] = 1.0;
    cb.admissible = [d, &prev](double, const std::vector<double>& s) {
        for (int i = 0; i <= d; ++i) {
            const double slack = 4e-16 * std::fabs(prev[i]);
            if (s[i] < prev[i] - slack) return false;
        }
        return s[d] >= 1.0 - 4e-16;
    };
    cb.stop = [&config](double, const std::vector<double>& s) {
        return s[0] >= config.y_max;
    };

    std::vector<DerivativeJet> traj;
    auto observe = [&](double t, const std::vector<double>& s) {
        prev = s;
        DerivativeJet j;
        j.t = t;
        j.jet.assign(s.begin(), s.begin() + (d + 1));
        j.x = s[d + 1];
        traj.push_back(std::move(j));
    };

    integrate_adaptive(make_field(d), 0.0, z, opt, cb, observe);

    // Post-check: every returned jet satisfies the invariants.
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto& jet = traj[k].jet;
        if (jet[d] < 1.0 - 1e-12)
            throw InvariantViolationError("y^(d) dropped below 1 at t=" + fmt17(traj[k].t));
        for (int i = 0; i <= d; ++i)
            if (jet[i] < -1e-300)
                throw InvariantViolationError("negative derivative in accepted jet");
    }
    return traj;
}

DerivativeJet analytic_d1(double t)
{
    if (!(t >= 0.0) || t >= kBlowupTimeD1)
        throw std::domain_error("analytic_d1: t outside [0, pi/sqrt(2))");
    const double u = t / std::sqrt(2.0);
    DerivativeJet j;
    j.t = t;
    j.jet = {std::sqrt(2.0) * std::tan(u), 1.0 / (std::cos(u) * std::cos(u))};
    j.x = -2.0 * std::log(std::cos(u));
    return j;
}

BlowupEstimate estimate_blowup_shooting(const std::vector<DerivativeJet>& traj, int d)
{
    if (d < 1 || d > 10)
        throw std::invalid_argument(
            "shooting estimator is gated to d in [1, 10]; use the series radius beyond");
    if (traj.size() < 32)
        throw InsufficientDataError("trajectory too short for shooting extrapolation");

    const double y_end = traj.back().jet[0];

    // Window: K samples geometrically spaced over the last decade of y.
    constexpr int K = 16;
    std::vector<const DerivativeJet*> window;
    std::size_t lo = 0;
    for (int j = 0; j < K; ++j) {
        const double target = y_end * std::pow(10.0, -double(K - 1 - j) / (K - 1));
        while (lo + 1 < traj.size() && traj[lo].jet[0] < target) ++lo;
        if (window.empty() || window.back() != &traj[lo]) window.push_back(&traj[lo]);
    }
    if (window.size() < 4)
        throw InsufficientDataError("too few distinct samples in the last decade of y");

    std::vector<double> that;
    that.reserve(window.size());
    for (const auto* s : window) that.push_back(s->t + (d + 1) / s->jet[0]);

    // Direction flips above rounding noise signal that y_max was too small
    // for the extrapolation model to be in its asymptotic regime.
    int flips = 0, significant = 0, dir = 0;
    for (std::size_t j = 1; j < that.size(); ++j) {
        const double diff = that[j] - that[j - 1];
        if (std::fabs(diff) < 100 * 2.2e-16 * std::fabs(that[j])) continue;
        ++significant;
        const int s = diff > 0 ? 1 : -1;
        if (dir != 0 && s != dir) ++flips;
        dir = s;
    }
    if (significant >= 4 && flips * 3 > significant)
        throw InvariantViolationError(
            "non-monotone blow-up extrapolation sequence: y_max too small");

    // Aitken on (first, middle, last); the window is geometric in 1/y so the
    // leading correction is eliminated.
    const double t0 = that.front();
    const double t1 = that[that.size() / 2];
    const double t2 = that.back();
    double T = t2;
    const double d1 = t1 - t0, d2 = t2 - t1;
    if (std::fabs(d2 - d1) > 64 * 2.2e-16 * std::fabs(t2)) T = t2 - d2 * d2 / (d2 - d1);

    const auto [mn, mx] = std::minmax_element(that.begin(), that.end());
    double unc = std::max({*mx - *mn, std::fabs(T - t2), 8 * 2.2e-16 * std::fabs(T)});

    return BlowupEstimate{T, BlowupMethod::ShootingExtrapolation, unc, d};
}

BlowupEstimate estimate_blowup_shooting(int d, const IntegratorConfig& config)
{
    if (d < 1 || d > 10)
        throw std::invalid_argument(
            "shooting estimator is gated to d in [1, 10]; use the series radius beyond");
    auto traj = integrate(d, config);
    if (traj.back().jet[0] < config.y_max)
        throw InsufficientDataError("integration stopped before reaching y_max");
    return estimate_blowup_shooting(traj, d);
}

namespace {

std::size_t locate(const std::vector<DerivativeJet>& traj, double t)
{
    if (traj.size() < 2) throw InsufficientDataError("trajectory too short");
    if (t < traj.front().t || t > traj.back().t)
        throw std::domain_error("query time outside trajectory coverage");
    auto it = std::upper_bound(traj.begin(), traj.end(), t,
                               [](double v, const DerivativeJet& j) { return v < j.t; });
    std::size_t k = static_cast<std::size_t>(it - traj.begin());
    if (k == 0) k = 1;
    if (k >= traj.size()) k = traj.size() - 1;
    return k - 1;
}

double jet_derivative(const DerivativeJet& s, int i, int d)
{
    return i < d ? s.jet[i + 1] : s.jet[0] * s.jet[d];
}

double hermite(double t, double t0, double t1, double f0, double f1, double g0, double g1)
{
    const double h = t1 - t0;
    const double u = (t - t0) / h;
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * f0 + (u3 - 2 * u2 + u) * h * g0 +
           (-2 * u3 + 3 * u2) * f1 + (u3 - u2) * h * g1;
}

}  // namespace

double interp_jet(const std::vector<DerivativeJet>& traj, int i, double t)
{
    const int d = static_cast<int>(traj.front().jet.size()) - 1;
    if (i < 0 || i > d) throw std::invalid_argument("jet component out of range");
    const std::size_t k = locate(traj, t);
    const auto& a = traj[k];
    const auto& b = traj[k + 1];
    return hermite(t, a.t, b.t, a.jet[i], b.jet[i], jet_derivative(a, i, d),
                   jet_derivative(b, i, d));
}

double interp_x(const std::vector<DerivativeJet>& traj, double t)
{
    const std::size_t k = locate(traj, t);
    const auto& a = traj[k];
    const auto& b = traj[k + 1];
    return hermite(t, a.t, b.t, a.x, b.x, a.jet[0], b.jet[0]);
}

double time_at_jet_value(const std::vector<DerivativeJet>& traj, int i, double value)
{
    const int d = static_cast<int>(traj.front().jet.size()) - 1;
    if (i < 0 || i > d) throw std::invalid_argument("jet component out of range");
    if (value < traj.front().jet[i] || value > traj.back().jet[i])
        throw std::domain_error("value outside sampled range of y^(i)");

    std::size_t lo = 0, hi = traj.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (traj[mid].jet[i] <= value ? lo : hi) = mid;
    }
    // Newton on the Hermite interpolant inside the bracketing cell.
    double a = traj[lo].t, b = traj[hi].t, t = 0.5 * (a + b);
    for (int it = 0; it < 60; ++it) {
        const double f = interp_jet(traj, i, t) - value;
        (f <= 0.0 ? a : b) = t;
        const double deriv = i < d ? interp_jet(traj, i + 1, t)
                                   : interp_jet(traj, 0, t) * interp_jet(traj, d, t);
        double step = deriv > 0.0 ? f / deriv : 0.0;
        double tn = t - step;
        if (!(tn > a) || !(tn < b)) tn = 0.5 * (a + b);
        if (std::fabs(tn - t) <= 1e-15 * std::max(1.0, std::fabs(t))) return tn;
        t = tn;
    }
    return t;
}

double convolution_quadrature(const std::vector<DerivativeJet>& traj, int d, double t)
{
    if (t < traj.front().t || t > traj.back().t)
        throw std::domain_error("query time outside trajectory coverage");
    double inv_dfact = 1.0;
    for (int i = 2; i <= d; ++i) inv_dfact /= i;

    auto f = [&](const DerivativeJet& s) {
        return std::pow(t - s.t, d) * inv_dfact * s.jet[d];
    };
    auto fp = [&](const DerivativeJet& s) {
        // d/ds [ (t-s)^d/d! * y^(d)(s) ]
        const double p = d >= 1 ? std::pow(t - s.t, d - 1) : 0.0;
        return -double(d) * p * inv_dfact * s.jet[d] +
               std::pow(t - s.t, d) * inv_dfact * s.jet[0] * s.jet[d];
    };

    // Hermite-corrected trapezoid: exact for cubics on each cell.
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < traj.size() && traj[k].t < t; ++k) {
        const auto& a = traj[k];
        if (traj[k + 1].t <= t) {
            const auto& b = traj[k + 1];
            const double h = b.t - a.t;
            acc += 0.5 * h * (f(a) + f(b)) + h * h / 12.0 * (fp(a) - fp(b));
        } else {
            // partial last cell, endpoint values via Hermite interpolation
            const double h = t - a.t;
            DerivativeJet end;
            end.t = t;
            end.jet.resize(d + 1);
            for (int i = 0; i <= d; ++i) end.jet[i] = interp_jet(traj, i, t);
            acc += 0.5 * h * (f(a) + f(end)) + h * h / 12.0 * (fp(a) - fp(end));
            break;
        }
    }
    return acc;
}

void export_trajectory_csv(const std::vector<DerivativeJet>& traj, const std::string& path)
{
    const int d = static_cast<int>(traj.front().jet.size()) - 1;
    CsvWriter csv(path);
    std::vector<std::string> cols = {"t"};
    for (int i = 0; i <= d; ++i) cols.push_back("y" + std::to_string(i));
    cols.push_back("x");
    csv.header(cols);
    std::vector<double> row(d + 3);
    for (const auto& s : traj) {
        row[0] = s.t;
        for (int i = 0; i <= d; ++i) row[1 + i] = s.jet[i];
        row[d + 2] = s.x;
        csv.row(row);
    }
}

}  // namespace blowlab
