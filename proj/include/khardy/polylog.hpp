#pragma once

#include "khardy/core.hpp"

namespace khardy {

// Polylogarithm engine: Li_m(z) = sum_{s>=1} z^s / s^m on the closed unit
// disk, real order m, complex argument z.
//
// Dispatch:
//   m nonpositive integer   rational closed form, built from Li_0 = z/(1-z)
//                           by the recurrence Li_{m-1}(z) = z d/dz Li_m(z)
//   m = 1                   -log(1-z)
//   z = 1, m > 1            zeta(m)
//   |z| = 1, z != 1, m > 1  direct series, Dirichlet-test tail bound
//   |z| < 1                 direct series, geometric-majorant tail bound
//
// |z| = 1 with m <= 1 raises DivergentInput, |z| > 1 raises InvalidInput.

struct PolylogRequest {
  double order = 2.0;
  cplx argument = 0.0;
  double tolerance = 1e-13;     // absolute bound on the dropped tail
  long max_terms = 8'000'000;
};

struct PolylogValue {
  cplx value = 0.0;
  double error_bound = 0.0;     // certified; 0 marks a closed form
  long terms = 0;               // series terms consumed (0 for closed forms)
};

PolylogValue polylog_ex(const PolylogRequest& req);

cplx polylog(double order, cplx z, double tol = 1e-13);

// Li_m(z)/z with the removable singularity at z = 0 filled in (value 1).
// Equals sum_{s>=1} z^{s-1}/s^m, the shifted series used by the metric
// closed forms when a coordinate sits at the origin.
cplx polylog_ratio(double order, cplx z, double tol = 1e-13);

// zeta(s), real s > 1, through the accelerated alternating eta series.
double zeta(double s);

// Euler-Maclaurin tail sum_{k>n} k^{-a} for a > 1; absolute error is
// O(n^{-a-7}), machine-level for n >= 64.  Used by the series routes whose
// d-blocks decay only algebraically.
double zeta_tail(double a, long n);

}
