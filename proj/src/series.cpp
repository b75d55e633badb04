#include "blowlab/series.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace blowlab {

double SeriesCoefficients::a(int n) const
{
    return a_scaled[n] * std::exp(-n * std::log(rho));
}

double SeriesCoefficients::b(int n) const
{
    return b_scaled[n] * std::exp(-n * std::log(rho));
}

SeriesCoefficients taylor_coefficients(int d, int N)
{
    if (d < 1) throw std::invalid_argument("d must be >= 1");
    if (N < d + 2) throw std::invalid_argument("N too small: need N >= d+2");

    SeriesCoefficients c;
    c.d = d;
    c.rho = 1.0;
    c.a_scaled.assign(N, 0.0);
    c.b_scaled.assign(N, 0.0);
    c.b_scaled[0] = 1.0;

    const int m = d + 1;
    std::vector<double> log_fact(N + m + 1, 0.0);
    for (int i = 1; i <= N + m; ++i) log_fact[i] = log_fact[i - 1] + std::log(double(i));

    for (int n = 1; n < N; ++n) {
        if (n % m != 0) continue;  // only multiples of d+1 carry mass
        if (n >= m) {
            const int k = n - m;
            c.a_scaled[n] = c.b_scaled[k] * std::pow(c.rho, m) *
                            std::exp(log_fact[k] - log_fact[n]);
        }
        double s = 0.0;
        for (int k = m; k <= n; k += m)
            s += double(k) * c.a_scaled[k] * c.b_scaled[n - k];
        c.b_scaled[n] = s / n;

        // keep magnitudes bounded: retarget the scale so that b_scaled[n] ~ 1
        const double mag = std::fabs(c.b_scaled[n]);
        if (mag > 1e60 || (mag > 0.0 && mag < 1e-60)) {
            const double log_mu = -std::log(mag) / n;
            for (int k = 1; k <= n; ++k) {
                const double f = std::exp(k * log_mu);
                c.a_scaled[k] *= f;
                c.b_scaled[k] *= f;
            }
            c.rho *= std::exp(log_mu);
        }
    }
    return c;
}

double eval_series(const SeriesCoefficients& c, double t, int terms)
{
    const int N = terms < 0 ? c.size() : std::min(terms, c.size());
    // a[n] t^n = a_scaled[n] (t/rho)^n, summed highest order first
    const double q = t / c.rho;
    double acc = 0.0;
    for (int n = N - 1; n >= 0; --n)
        if (c.a_scaled[n] != 0.0) acc += c.a_scaled[n] * std::pow(q, n);
    return acc;
}

namespace {

struct FitResult {
    double intercept = 0.0;
    double stderr_intercept = 0.0;
    bool ok = false;
};

// Weighted least squares of ys ~ poly(1/k) of given degree, weights k^2.
FitResult wls_fit(const std::vector<double>& ks, const std::vector<double>& ys, int deg)
{
    const int n = static_cast<int>(ks.size());
    if (n < deg + 2) return {};
    Eigen::MatrixXd X(n, deg + 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        const double w = ks[i] * ks[i];
        double p = 1.0;
        for (int j = 0; j <= deg; ++j) {
            X(i, j) = w * p;
            p /= ks[i];
        }
        y(i) = w * ys[i];
    }
    Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    Eigen::VectorXd resid = X * beta - y;
    const double dof = std::max(1, n - deg - 1);
    const double sigma2 = resid.squaredNorm() / dof;
    Eigen::MatrixXd cov = (X.transpose() * X).ldlt().solve(
        Eigen::MatrixXd::Identity(deg + 1, deg + 1));
    FitResult r;
    r.intercept = beta(0);
    r.stderr_intercept = std::sqrt(std::max(0.0, sigma2 * cov(0, 0)));
    r.ok = true;
    return r;
}

}  // namespace

BlowupEstimate estimate_blowup_series(const SeriesCoefficients& c)
{
    const int d = c.d;
    const int m = d + 1;
    const int N = c.size();
    if (N < std::max(64, 18 * m))
        throw std::invalid_argument("N too small for radius extrapolation: need N >= max(64, 18*(d+1))");

    const int K = (N - 1) / m;
    std::vector<double> ks, rs;
    for (int k = K / 2; k + 1 <= K; ++k) {
        const double c0 = c.a_scaled[k * m];
        const double c1 = (k + 1) * m < N ? c.a_scaled[(k + 1) * m] : 0.0;
        if ((k + 1) * m >= N) break;
        if (!(c0 > 0.0) || !(c1 > 0.0))
            throw InvariantViolationError("non-positive coefficient ratio tail: N too small");
        ks.push_back(double(k));
        rs.push_back(c1 / c0);
    }
    if (ks.size() < 8)
        throw InsufficientDataError("fewer than 8 ratio points in the fit window");

    // A grossly non-monotone tail means the asymptotic regime is not reached.
    int flips = 0, dir = 0;
    for (std::size_t i = 1; i < rs.size(); ++i) {
        const double diff = rs[i] - rs[i - 1];
        if (std::fabs(diff) < 0.05 * rs[i]) continue;
        const int s = diff > 0 ? 1 : -1;
        if (dir != 0 && s != dir) ++flips;
        dir = s;
    }
    if (4 * flips > static_cast<int>(rs.size()))
        throw InvariantViolationError("non-monotone coefficient ratio tail: N too small");

    const double r_last = rs.back();
    auto to_T = [&](double r) { return c.rho * std::pow(r, -1.0 / m); };

    double T = to_T(r_last);
    double unc = std::fabs(to_T(rs.front()) - T);  // fallback: window spread
    int used_deg = -1;
    double prev_T = T;
    for (int deg = 3; deg >= 0; --deg) {
        FitResult fr = wls_fit(ks, rs, deg);
        if (!fr.ok) continue;
        if (!(fr.intercept > 0.0) || std::fabs(fr.intercept - r_last) > 0.5 * r_last)
            continue;
        if (used_deg < 0) {
            used_deg = deg;
            T = to_T(fr.intercept);
            unc = T * fr.stderr_intercept / (m * fr.intercept);
        } else {
            // next accepted lower degree provides the model-error handle
            prev_T = to_T(fr.intercept);
            unc = std::max(unc, std::fabs(T - prev_T));
            break;
        }
    }
    unc = std::max(unc, 8 * 2.2e-16 * T);
    return BlowupEstimate{T, BlowupMethod::SeriesRadius, unc, d};
}

void export_coefficients_csv(const SeriesCoefficients& c, const std::string& path)
{
    CsvWriter csv(path);
    csv.header({"n", "a_scaled", "a_unscaled", "rho"});
    for (int n = 0; n < c.size(); ++n)
        csv.row(std::vector<double>{double(n), c.a_scaled[n], c.a(n), c.rho});
}

}  // namespace blowlab
