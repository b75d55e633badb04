#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <gmpxx.h>
#include <string>
#include <vector>

#include "blowlab/exec.hpp"

namespace blowlab {

// Diagonal-stability machinery for the Lotka-Volterra matrix A:
// M(lambda) = D A + (D A)^T with D = diag(lambda) is the symmetric matrix
//   [ 4 l1      l2-l1   l3    ...   ld  ]
//   [ l2-l1     2 l2    -l2             ]
//   [ l3        -l2     ...   ...       ]
//   [ ...               ...  ...  -l_{d-1} ]
//   [ ld                   -l_{d-1}  2 ld ]
// Positive-definiteness of M(lambda) for some lambda > 0 gives global
// convergence of the system to w*; feasibility holds for d <= 10 only.

Eigen::MatrixXd build_matrix(const std::vector<double>& lambda);

// Exact leading principal minors for integer lambda, via fraction-free
// (Bareiss) elimination in arbitrary-precision integers.
std::vector<mpz_class> leading_minors_exact(const std::vector<mpz_class>& lambda);

enum class PDVerdict { PositiveDefinite, NotPositiveDefinite, Indeterminate };

// Float path: LDL^T pivots with a tolerance band; pivots within
// 1e-10 * ||M|| of zero give Indeterminate.
PDVerdict is_positive_definite_float(const Eigen::MatrixXd& M);

// Exact path (Sylvester criterion in rational arithmetic).
bool is_positive_definite_exact(const std::vector<mpq_class>& lambda);

struct LyapunovCandidate {
    int d = 0;
    std::vector<double> lambda;             // on the unit simplex
    double min_eig = 0.0;                   // of M(lambda), sum(lambda) = 1
    bool feasible = false;                  // min_eig > 1e-8
    bool exact_confirmed = false;           // rationalized lambda passes Sylvester
    std::vector<std::string> minors;        // decimal strings of the exact minors
    std::vector<mpz_class> lambda_rational; // numerators over 10^6
};

struct SearchOptions {
    int restarts = 50;
    int iters = 6000;
    std::uint64_t seed = 0;
    Exec exec = Exec::OpenMP;
};

// Maximizes the (concave) minimal eigenvalue of M(lambda) over the simplex
// by projected supergradient ascent with restarted Polyak steps. Failure to
// find a feasible lambda is a valid result, not an error.
LyapunovCandidate search_lambda(int d, const SearchOptions& opt = {});

inline constexpr double kFeasibilityThreshold = 1e-8;

// The known feasible integer vector for d = 10 (used by the exact minor
// verification path; the search does not need it).
std::vector<mpz_class> feasible_lambda_d10();

}  // namespace blowlab
