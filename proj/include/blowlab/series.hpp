#pragma once

#include <string>
#include <vector>

#include "blowlab/ode.hpp"

namespace blowlab {

// Taylor coefficients at t = 0 of the companion solution x (x^(d+1) = e^x,
// flat initial data) together with those of e^x. Coefficients decay like
// T^-n, which underflows doubles long before interesting n, so they are
// stored rescaled: a_scaled[n] = a[n] * rho^n for a running scale rho.
//
// Structural fact the code relies on: a[0..d] = 0 and the recurrence couples
// a[n+d+1] to b[n], so x is a power series in t^(d+1) and only indices
// n = k*(d+1) carry nonzero coefficients.
struct SeriesCoefficients {
    int d = 0;
    double rho = 1.0;
    std::vector<double> a_scaled;
    std::vector<double> b_scaled;

    int size() const { return static_cast<int>(a_scaled.size()); }
    // Unscaled coefficient; may underflow to 0 for large n.
    double a(int n) const;
    double b(int n) const;
};

// Coupled recurrences: n*b[n] = sum_{k} k*a[k]*b[n-k] (b = exp of series a)
// and (n+d+1)!/n! * a[n+d+1] = b[n]. Requires N >= d+2.
SeriesCoefficients taylor_coefficients(int d, int N);

// Partial sum of x at t (all available terms by default).
double eval_series(const SeriesCoefficients& c, double t, int terms = -1);

// Radius of convergence of the series = blow-up time. Ratio extrapolation
// in the Domb-Sykes style on the stride-(d+1) coefficient subsequence:
// r_k = a_{(k+1)m}/a_{km} with m = d+1 is fitted against 1/k by weighted
// least squares; T = rho * intercept^(-1/m). The polynomial degree of the
// fit degrades (3 -> 2 -> 1 -> 0) until the intercept is consistent with
// the ratio tail; the degree-to-degree difference feeds the uncertainty.
// Requires N >= max(64, 18*(d+1)).
BlowupEstimate estimate_blowup_series(const SeriesCoefficients& c);

void export_coefficients_csv(const SeriesCoefficients& c, const std::string& path);

}  // namespace blowlab
