#include "khardy/hardy.hpp"
#include "khardy/errors.hpp"
#include "khardy/polylog.hpp"

#include <algorithm>
#include <cmath>

namespace khardy {

namespace {

double accumulate_sq(const CoefficientSeries& f, const CoefficientSeries& g,
                     const WeightSequence& w) {
  const long nf = static_cast<long>(f.coeffs.size());
  const long ng = static_cast<long>(g.coeffs.size());
  const long n = std::max(nf, ng);
  double acc = 0.0;
  for (long s = 0; s < n; ++s) {
    const cplx a = s < nf ? f.coeffs[static_cast<std::size_t>(s)] : cplx(0.0);
    const cplx b = s < ng ? g.coeffs[static_cast<std::size_t>(s)] : cplx(0.0);
    const cplx d = a - b;
    const auto ws = w.maybe(s);
    if (!ws) {
      if (d == cplx(0.0)) continue;
      throw IncompatibleWeight("weight " + w.description() +
                               " undefined at index " + std::to_string(s) +
                               " with nonzero coefficient");
    }
    acc += *ws * std::norm(d);
  }
  return acc;
}

// Weight used by the kernel series: the dirichlet semi-norm is completed
// with omega = 1 + s so the kernel carries an index-0 term.
std::optional<double> kernel_weight(const WeightSequence& w, long s) {
  if (w.family() == WeightSequence::Family::dirichlet)
    return 1.0 + static_cast<double>(s);
  return w.maybe(s);
}

}   // namespace

double weighted_norm(const CoefficientSeries& f, const WeightSequence& w) {
  return std::sqrt(accumulate_sq(f, CoefficientSeries{}, w));
}

double weighted_distance(const CoefficientSeries& f,
                         const CoefficientSeries& g,
                         const WeightSequence& w) {
  return std::sqrt(accumulate_sq(f, g, w));
}

cplx reproducing_kernel(const WeightSequence& w, cplx u, cplx v,
                        double tolerance) {
  if (!(tolerance > 0.0)) throw InvalidInput("kernel: tolerance must be > 0");
  if (!(std::abs(u) < 1.0) || !(std::abs(v) < 1.0))
    throw DivergentInput("kernel: u and v must lie in the open unit disk");
  const cplx z = std::conj(u) * v;
  const double az = std::abs(z);
  using F = WeightSequence::Family;

  if (w.family() == F::custom &&
      w.extension() == WeightSequence::Extension::error_beyond_table)
    throw IncompatibleWeight(
        "custom weight without extension defines no kernel");

  switch (w.family()) {
    case F::hardy:
      return 1.0 / (1.0 - z);
    case F::bergman:
      return 1.0 / ((1.0 - z) * (1.0 - z));
    case F::dirichlet:
      if (az == 0.0) return 1.0;
      return -std::log(1.0 - z) / z;
    case F::power: {
      const double m = w.order();
      cplx k = polylog(m, z, tolerance);
      if (m == 0.0) k += 1.0;
      return k;
    }
    case F::sobolev:
    case F::custom: {
      // omega_s >= wmin > 0, so the tail is geometric / wmin.
      double wmin = 1.0;
      if (w.family() == F::custom)
        wmin = *std::min_element(w.table().begin(), w.table().end());
      cplx sum = 0.0;
      cplx zp = 1.0;
      for (long s = 0; s < 2'000'000; ++s) {
        sum += zp / w(s);
        zp *= z;
        if (std::abs(zp) / (wmin * (1.0 - az)) < tolerance) return sum;
      }
      throw NonConvergent("kernel series stalled");
    }
  }
  throw InvalidInput("kernel: unknown weight family");
}

cplx reproducing_kernel_series(const WeightSequence& w, cplx u, cplx v,
                               long terms) {
  if (terms < 1) throw InvalidInput("kernel series: terms >= 1");
  const cplx z = std::conj(u) * v;
  cplx sum = 0.0;
  cplx zp = 1.0;
  for (long s = 0; s < terms; ++s) {
    if (const auto ws = kernel_weight(w, s)) {
      sum += zp / *ws;
    } else if (w.family() == WeightSequence::Family::custom) {
      throw IncompatibleWeight(
          "custom weight without extension defines no kernel");
    }
    // power(m != 0) simply has no index-0 term
    zp *= z;
  }
  return sum;
}

cplx bergman_metric_check(cplx u, cplx v, double step) {
  if (!(step > 0.0)) throw InvalidInput("bergman_metric_check: step > 0");
  if (std::abs(u) + step >= 1.0 || std::abs(v) + step >= 1.0)
    throw StepTooLarge("bergman_metric_check: stencil leaves the unit disk");
  // principal log is safe: 1 - conj(u) v has positive real part, so the
  // kernel's argument stays within (-pi, pi)
  const auto f = [](cplx uu, cplx vv) {
    return std::log(reproducing_kernel(WeightSequence::bergman(), uu, vv));
  };
  const cplx hx(step, 0.0), hy(0.0, step);
  // mixed second partials by 4-point cross stencils
  const auto cross = [&](cplx du, cplx dv) {
    return (f(u + du, v + dv) - f(u + du, v - dv) - f(u - du, v + dv) +
            f(u - du, v - dv)) /
           (4.0 * step * step);
  };
  const cplx fxx = cross(hx, hx);
  const cplx fyy = cross(hy, hy);
  const cplx fxy = cross(hy, hx);   // d v_x d u_y
  const cplx fyx = cross(hx, hy);   // d v_y d u_x
  // d_v d_ubar = (1/4)(d_vx - i d_vy)(d_ux + i d_uy)
  return 0.25 * (fxx + fyy + cplx(0.0, 1.0) * (fxy - fyx));
}

}
