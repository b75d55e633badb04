#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "blowlab/lyapunov.hpp"

using namespace blowlab;

TEST_SUITE_BEGIN("lyapunov");

TEST_CASE("matrix assembly matches hand substitution")
{
    const auto M1 = build_matrix({1.0});
    CHECK(M1(0, 0) == 4.0);

    const auto M2 = build_matrix({1.0, 1.0});
    CHECK(M2(0, 0) == 4.0);
    CHECK(M2(0, 1) == 0.0);
    CHECK(M2(1, 0) == 0.0);
    CHECK(M2(1, 1) == 2.0);

    const auto M3 = build_matrix({1.0, 2.0, 3.0});
    const double expect[3][3] = {{4, 1, 3}, {1, 4, -2}, {3, -2, 6}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(M3(i, j) == expect[i][j]);
}

TEST_CASE("exact minors of the d=10 feasible vector")
{
    const char* expected[10] = {
        "4096", "1224375", "114265104", "6270814340", "280372975336",
        "12330415584972", "687248010753336", "69483419810465760",
        "12807765625815100744", "136953089422286895648"};
    const auto minors = leading_minors_exact(feasible_lambda_d10());
    REQUIRE(minors.size() == 10);
    for (int k = 0; k < 10; ++k) CHECK(minors[k].get_str() == expected[k]);
}

TEST_CASE("float positive-definiteness verdicts")
{
    CHECK(is_positive_definite_float(Eigen::MatrixXd::Identity(5, 5)) ==
          PDVerdict::PositiveDefinite);

    std::vector<double> lam10;
    for (auto& z : feasible_lambda_d10()) lam10.push_back(z.get_d());
    CHECK(is_positive_definite_float(build_matrix(lam10)) ==
          PDVerdict::PositiveDefinite);

    Eigen::MatrixXd tiny = 1e-14 * Eigen::MatrixXd::Identity(3, 3);
    tiny(0, 0) = 1.0;
    CHECK(is_positive_definite_float(tiny) == PDVerdict::Indeterminate);
}

TEST_CASE("float and exact verdicts agree on all-ones weights")
{
    for (int d : {3, 10, 11}) {
        std::vector<mpq_class> ones(d, 1);
        const bool exact = is_positive_definite_exact(ones);
        const auto verdict =
            is_positive_definite_float(build_matrix(std::vector<double>(d, 1.0)));
        if (verdict == PDVerdict::PositiveDefinite) CHECK(exact);
        if (verdict == PDVerdict::NotPositiveDefinite) CHECK(!exact);
        // brute-force minor signs as an independent oracle
        std::vector<mpz_class> onesz(d, 1);
        bool by_minors = true;
        for (const auto& m : leading_minors_exact(onesz))
            if (m <= 0) by_minors = false;
        CHECK(exact == by_minors);
    }
}

TEST_CASE("search: d=1 gives the full simplex weight and min eig 4")
{
    SearchOptions opt;
    opt.restarts = 2;
    opt.iters = 16;
    const auto cand = search_lambda(1, opt);
    CHECK(cand.min_eig == doctest::Approx(4.0));
    CHECK(cand.feasible);
    CHECK(cand.exact_confirmed);
}

TEST_CASE("search finds a feasible vector at d=5 and confirms it exactly")
{
    SearchOptions opt;
    opt.restarts = 8;
    opt.iters = 1500;
    opt.seed = 3;
    const auto cand = search_lambda(5, opt);
    CHECK(cand.feasible);
    CHECK(cand.min_eig > 1e-3);
    CHECK(cand.exact_confirmed);
    std::vector<mpq_class> lam(5);
    for (int i = 0; i < 5; ++i) lam[i] = mpq_class(cand.lambda_rational[i], 1000000);
    CHECK(is_positive_definite_exact(lam));
}

TEST_CASE("feasibility is invariant under positive scaling")
{
    SearchOptions opt;
    opt.restarts = 4;
    opt.iters = 800;
    const auto cand = search_lambda(4, opt);
    const double base = cand.min_eig;
    for (double c : {0.5, 3.0}) {
        std::vector<double> scaled = cand.lambda;
        for (auto& v : scaled) v *= c;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_matrix(scaled));
        CHECK(es.eigenvalues()(0) == doctest::Approx(c * base).epsilon(1e-10));
        CHECK(is_positive_definite_float(build_matrix(scaled)) ==
              PDVerdict::PositiveDefinite);
    }
}

TEST_CASE("best value is non-decreasing in the iteration budget")
{
    for (int d : {6, 10}) {
        SearchOptions a, b;
        a.restarts = b.restarts = 3;
        a.seed = b.seed = 11;
        a.iters = 300;
        b.iters = 1200;
        CHECK(search_lambda(d, b).min_eig >= search_lambda(d, a).min_eig - 1e-15);
    }
}

TEST_SUITE_END();
