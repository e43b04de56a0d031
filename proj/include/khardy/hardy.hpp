#pragma once

#include "khardy/core.hpp"
#include "khardy/series.hpp"
#include "khardy/weights.hpp"

namespace khardy {

// ||f||_omega = (sum_s omega_s |f_s|^2)^{1/2}.  Indexes with undefined
// weight are skipped only when the coefficient there is exactly zero;
// otherwise IncompatibleWeight.
double weighted_norm(const CoefficientSeries& f, const WeightSequence& w);

// ||f - g||_omega with the same undefined-weight rule applied to the
// difference.  Sequences of unequal length are padded with zeros.
double weighted_distance(const CoefficientSeries& f,
                         const CoefficientSeries& g,
                         const WeightSequence& w);

/*
 * Reproducing kernel k_u(v) = sum_s conj(u)^s v^s / omega_s of the
 * weighted space, |u| < 1 and |v| < 1, closed forms where the family
 * admits one:
 *
 *   hardy       1 / (1 - conj(u) v)                    (Szego)
 *   bergman     1 / (1 - conj(u) v)^2
 *   dirichlet   log(1/(1 - conj(u) v)) / (conj(u) v),
 *               the norm extended by omega = 1 + s so index 0 enters with
 *               weight 1; value 1 at conj(u) v = 0.  The series with
 *               positive weights forces the positive-log sign.
 *   power(m)    Li_m(conj(u) v) plus the index-0 term when m = 0
 *   sobolev and custom are summed directly
 *
 * custom with the error extension has undefined weights beyond the table,
 * so no kernel exists: IncompatibleWeight.
 */
cplx reproducing_kernel(const WeightSequence& w, cplx u, cplx v,
                        double tolerance = 1e-13);

// Direct truncated kernel series, the cross-check for the closed forms.
cplx reproducing_kernel_series(const WeightSequence& w, cplx u, cplx v,
                               long terms);

// d_v d_ubar log k_u(v) by central Wirtinger finite differences on the
// Bergman kernel; the analytic value is 2 / (1 - conj(u) v)^2.
// StepTooLarge when the stencil leaves |u|, |v| < 1.
cplx bergman_metric_check(cplx u, cplx v, double step = 1e-4);

}
