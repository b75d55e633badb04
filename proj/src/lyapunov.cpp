#include "blowlab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "blowlab/rng.hpp"

namespace blowlab {

Eigen::MatrixXd build_matrix(const std::vector<double>& lambda)
{
    const int d = static_cast<int>(lambda.size());
    if (d < 1) throw std::invalid_argument("lambda must be non-empty");
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
    M(0, 0) = 4.0 * lambda[0];
    for (int j = 1; j < d; ++j)
        M(0, j) = M(j, 0) = (j == 1) ? lambda[1] - lambda[0] : lambda[j];
    for (int i = 1; i < d; ++i) M(i, i) = 2.0 * lambda[i];
    for (int i = 1; i + 1 < d; ++i) M(i, i + 1) = M(i + 1, i) = -lambda[i];
    return M;
}

namespace {

template <class Scalar>
std::vector<std::vector<Scalar>> build_matrix_t(const std::vector<Scalar>& lambda)
{
    const int d = static_cast<int>(lambda.size());
    std::vector<std::vector<Scalar>> M(d, std::vector<Scalar>(d, Scalar(0)));
    M[0][0] = Scalar(4) * lambda[0];
    for (int j = 1; j < d; ++j)
        M[0][j] = M[j][0] = (j == 1) ? lambda[1] - lambda[0] : lambda[j];
    for (int i = 1; i < d; ++i) M[i][i] = Scalar(2) * lambda[i];
    for (int i = 1; i + 1 < d; ++i) M[i][i + 1] = M[i + 1][i] = -lambda[i];
    return M;
}

// Determinant of the leading k x k block by fraction-free elimination.
// Falls back to rational elimination if an intermediate pivot vanishes.
mpz_class bareiss_det(const std::vector<std::vector<mpz_class>>& M0, int k)
{
    std::vector<std::vector<mpz_class>> M(k, std::vector<mpz_class>(k));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) M[i][j] = M0[i][j];

    mpz_class prev = 1;
    for (int c = 0; c + 1 < k; ++c) {
        if (M[c][c] == 0) {
            // rare: rational Gaussian elimination on the block
            std::vector<std::vector<mpq_class>> Q(k, std::vector<mpq_class>(k));
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) Q[i][j] = M0[i][j];
            mpq_class det = 1;
            for (int cc = 0; cc < k; ++cc) {
                int p = -1;
                for (int r = cc; r < k; ++r)
                    if (Q[r][cc] != 0) { p = r; break; }
                if (p < 0) return 0;
                if (p != cc) { std::swap(Q[p], Q[cc]); det = -det; }
                det *= Q[cc][cc];
                for (int r = cc + 1; r < k; ++r) {
                    mpq_class f = Q[r][cc] / Q[cc][cc];
                    for (int j = cc; j < k; ++j) Q[r][j] -= f * Q[cc][j];
                }
            }
            det.canonicalize();
            if (det.get_den() != 1)
                throw std::logic_error("integer determinant came out non-integer");
            return mpz_class(det.get_num());
        }
        for (int i = c + 1; i < k; ++i) {
            for (int j = c + 1; j < k; ++j) {
                M[i][j] = (M[i][j] * M[c][c] - M[i][c] * M[c][j]) / prev;
            }
            M[i][c] = 0;
        }
        prev = M[c][c];
    }
    return M[k - 1][k - 1];
}

}  // namespace

std::vector<mpz_class> leading_minors_exact(const std::vector<mpz_class>& lambda)
{
    const int d = static_cast<int>(lambda.size());
    auto M = build_matrix_t(lambda);
    std::vector<mpz_class> minors(d);
    for (int k = 1; k <= d; ++k) minors[k - 1] = bareiss_det(M, k);
    return minors;
}

PDVerdict is_positive_definite_float(const Eigen::MatrixXd& M)
{
    if (M.rows() != M.cols()) throw std::invalid_argument("matrix must be square");
    const double scale = M.cwiseAbs().maxCoeff();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    if (ldlt.info() != Eigen::Success) return PDVerdict::Indeterminate;
    const auto D = ldlt.vectorD();
    double min_pivot = D.minCoeff();
    if (std::fabs(min_pivot) < 1e-10 * scale) return PDVerdict::Indeterminate;
    return min_pivot > 0.0 ? PDVerdict::PositiveDefinite : PDVerdict::NotPositiveDefinite;
}

bool is_positive_definite_exact(const std::vector<mpq_class>& lambda)
{
    // Scale out the common denominator; PD is invariant under lambda -> c*lambda.
    mpz_class common = 1;
    for (const auto& q : lambda) common = common / gcd(common, q.get_den()) * q.get_den();
    std::vector<mpz_class> lz(lambda.size());
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        mpq_class scaled = lambda[i] * common;
        scaled.canonicalize();
        lz[i] = scaled.get_num();
        if (lz[i] <= 0) return false;
    }
    for (const auto& m : leading_minors_exact(lz))
        if (m <= 0) return false;
    return true;
}

namespace {

// g_k = v^T (dM/dlambda_k) v for the matrix pattern above.
void add_supergradient(const Eigen::VectorXd& v, std::vector<double>& g)
{
    const int d = static_cast<int>(g.size());
    g[0] += 4.0 * v(0) * v(0);
    if (d > 1) {
        g[0] += -2.0 * v(0) * v(1);
        g[1] += 2.0 * v(0) * v(1) + 2.0 * v(1) * v(1);
    }
    for (int j = 2; j < d; ++j) g[j] += 2.0 * v(0) * v(j) + 2.0 * v(j) * v(j);
    for (int i = 1; i + 1 < d; ++i) g[i] += -2.0 * v(i) * v(i + 1);
}

// Euclidean projection onto the unit simplex (sorting method).
void project_simplex(std::vector<double>& x)
{
    std::vector<double> u = x;
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, theta = 0.0;
    for (int i = 0; i < static_cast<int>(u.size()); ++i) {
        css += u[i];
        if (u[i] * (i + 1) > css - 1.0) theta = (css - 1.0) / (i + 1);
    }
    for (auto& v : x) v = std::max(v - theta, 0.0);
}

struct RestartResult {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> lambda;
};

RestartResult run_restart(int d, int iters, std::uint64_t seed, std::uint64_t restart)
{
    SplitMix64 rng = SplitMix64::stream(seed, restart);
    std::vector<double> lam(d);
    double sum = 0.0;
    for (auto& v : lam) sum += (v = rng.uniform(0.05, 1.0));
    for (auto& v : lam) v /= sum;

    RestartResult res;
    res.lambda = lam;
    double delta = 0.1;
    int since_improve = 0;

    for (int it = 1; it <= iters; ++it) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_matrix(lam));
        const auto& w = es.eigenvalues();
        const double f = w(0);
        if (f > res.best + 1e-15) {
            res.best = f;
            res.lambda = lam;
            since_improve = 0;
        } else if (++since_improve > 50) {
            delta *= 0.5;
            since_improve = 0;
        }

        // supergradient averaged over the (near-)degenerate bottom eigenspace
        const double tie = 1e-10 * std::max(1.0, std::fabs(f));
        std::vector<double> g(d, 0.0);
        int multiplicity = 0;
        for (int j = 0; j < d && w(j) <= f + tie; ++j) {
            add_supergradient(es.eigenvectors().col(j), g);
            ++multiplicity;
        }
        double gn2 = 0.0;
        for (auto& v : g) {
            v /= multiplicity;
            gn2 += v * v;
        }
        if (gn2 < 1e-30) break;

        // restarted Polyak step towards the level best + delta
        const double step = (res.best + delta - f) / gn2;
        for (int i = 0; i < d; ++i) lam[i] += step * g[i];
        project_simplex(lam);
        double s = 0.0;
        for (auto& v : lam) s += (v = std::max(v, 1e-6));
        for (auto& v : lam) v /= s;
    }
    return res;
}

}  // namespace

LyapunovCandidate search_lambda(int d, const SearchOptions& opt)
{
    if (d < 1) throw std::invalid_argument("d must be >= 1");

    std::vector<RestartResult> results(opt.restarts);
    parallel_for(opt.restarts, opt.exec, [&](std::int64_t r) {
        results[r] = run_restart(d, opt.iters, opt.seed, static_cast<std::uint64_t>(r));
    });

    int best = 0;
    for (int r = 1; r < opt.restarts; ++r)
        if (results[r].best > results[best].best) best = r;

    LyapunovCandidate cand;
    cand.d = d;
    cand.lambda = results[best].lambda;
    cand.min_eig = results[best].best;
    cand.feasible = cand.min_eig > kFeasibilityThreshold;

    // Exact confirmation on the rationalized vector (denominator 10^6).
    cand.lambda_rational.resize(d);
    for (int i = 0; i < d; ++i)
        cand.lambda_rational[i] =
            std::max<long>(1, std::llround(cand.lambda[i] * 1e6));
    auto minors = leading_minors_exact(cand.lambda_rational);
    cand.exact_confirmed = true;
    for (const auto& m : minors) {
        cand.minors.push_back(m.get_str());
        if (m <= 0) cand.exact_confirmed = false;
    }
    return cand;
}

std::vector<mpz_class> feasible_lambda_d10()
{
    return {1024, 227, 118, 92, 89, 97, 116, 153, 232, 481};
}

}  // namespace blowlab
