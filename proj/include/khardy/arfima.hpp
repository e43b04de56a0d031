#pragma once

#include "khardy/core.hpp"
#include "khardy/series.hpp"

#include <string>
#include <vector>

namespace khardy {

/*
 * Stable, invertible ARFIMA filter
 *
 *   h(z) = (sigma^2 / 2 pi) (1 - z^{-1})^d
 *          prod_j (1 - mu_j z^{-1}) / prod_i (1 - lambda_i z^{-1})
 *
 * with all poles lambda_i and zeros mu_j strictly inside the unit disk, so
 * h is analytic in |z| > max |root| and its coefficient series in z^{-1}
 * is one-sided.  h_0 = sigma^2 / 2 pi; the default sigma makes that 1.
 */
struct ArfimaModel {
  double sigma = 2.5066282746310002;   // sqrt(2 pi): unit gain
  double d = 0.0;
  std::vector<cplx> poles;
  std::vector<cplx> zeros;

  void validate() const;         // throws InvalidInput
  double spectral_radius() const;
};

// Which parameters are geometric coordinates.  Ordering is d (when
// included), then poles, then zeros; sigma is never a coordinate.
struct CoordinateChart {
  bool include_d = true;
};

/*
 * A model pinned to a chart, with d promoted to a complex coordinate so
 * Wirtinger finite differences can move it off the real axis.  coord(a)
 * and with_coord(a, z) address the flattened coordinate vector.
 */
struct ChartPoint {
  double sigma = 2.5066282746310002;
  cplx d = 0.0;
  std::vector<cplx> poles;
  std::vector<cplx> zeros;
  bool include_d = true;

  static ChartPoint of(const ArfimaModel& m, CoordinateChart chart = {});

  long dim() const;
  cplx coord(long a) const;
  ChartPoint with_coord(long a, cplx value) const;

  // Sign tag of the coordinate in the curvature formulas: -1 for a pole,
  // +1 for a zero, 0 for the d slot.
  double gamma(long a) const;
  std::string label(long a) const;
};

// Convention for the index-0 cepstrum coefficient.
enum class C0 { one, log_gain };
double c0_value(double sigma, C0 convention);

// h(z) itself, evaluated in z^{-1} form, so poles sit at z = lambda_i and
// the natural domain is |z| > spectral radius.  z = 1 with fractional d is
// a branch point (a pole when d < 0).
cplx transfer_eval(const ArfimaModel& m, cplx z);

// log h as a function of the series variable w = z^{-1}, summed factor by
// factor so each principal log is winding-free (every 1 - a w with |a w| <
// 1 has positive real part).  The cepstrum coefficients are this
// function's Taylor coefficients in w.
cplx log_transfer(const ChartPoint& p, cplx w);

// Coefficients h_0..h_{terms-1} of h in powers of z^{-1}, by the
// fractional-binomial recurrence convolved with the numerator and pushed
// through the AR recursion; O(terms (p+q)) time.  The ChartPoint overload
// accepts complex d and skips validation: finite-difference stencils call
// it at perturbed points.
CoefficientSeries impulse_response(const ArfimaModel& m, long terms);
CoefficientSeries impulse_response(const ChartPoint& p, long terms);

// c_s = (sum_i lambda_i^s - sum_j mu_j^s - d) / s for s >= 1; index 0 is
// the chosen convention.  The overall sign (poles +, zeros and d -) is the
// one the contour integral fixes; it is the expansion of -log(1 - a w)
// applied factor by factor to log h.
CoefficientSeries complex_cepstrum(const ChartPoint& p, long terms,
                                   C0 c0 = C0::one);
CoefficientSeries complex_cepstrum(const ArfimaModel& m, long terms,
                                   C0 c0 = C0::one);

struct ContourOptions {
  long grid = 4096;        // base grid, power of two, >= 4 * terms
  // Cap on the last extrapolation increment.  The increment tracks the
  // error of the second-best row, so the returned top row is typically
  // two orders tighter than this certification.
  double tolerance = 1e-6;
  int levels = 4;          // grid doublings in the extrapolation chain
  Exec exec = Exec::serial;
};

/*
 * Independent route to the cepstrum: midpoint quadrature of
 * (1/2 pi) int log h(e^{i theta}) e^{i s theta} d theta on grids G, 2G,
 * ..., with Richardson extrapolation in 1/G to strip the algebraic
 * aliasing tail the branch point at z = 1 leaves when d != 0.  Throws
 * GridTooCoarse when the chain has not settled to the tolerance.
 */
CoefficientSeries cepstrum_contour_oracle(const ChartPoint& p, long terms,
                                          const ContourOptions& opt = {});

// Same quadrature applied to log |h|^2 = 2 Re log h.  For any stable
// invertible model p_s = c_s for s >= 1 and p_0 = 2 Re c_0.
CoefficientSeries power_cepstrum(const ChartPoint& p, long terms,
                                 const ContourOptions& opt = {});

}
