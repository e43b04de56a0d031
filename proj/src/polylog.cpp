#include "khardy/polylog.hpp"
#include "khardy/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace khardy {

namespace {

constexpr int kMaxClosedOrder = 40;   // deepest Li_{-k} kept in closed form
constexpr double kIntTol = 1e-12;     // "is an integer" slack on the order

/*
 * Li_{-k}(z) = P_k(z) / (1-z)^{k+1} for integer k >= 0, with
 *
 *   P_0(z) = z,
 *   P_{k+1}(z) = z [ (1-z) P_k'(z) + (k+1) P_k(z) ],
 *
 * so P_k has integer (Eulerian) coefficients, degree k+1, zero constant
 * term.  The table is built once; coefficients stay exactly representable
 * well past the k = 40 cap in double precision evaluation.
 */
const std::vector<std::vector<double>>& negative_order_polys() {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<double>> t;
    t.reserve(kMaxClosedOrder + 1);
    t.push_back({0.0, 1.0});            // P_0 = z
    for (int k = 0; k < kMaxClosedOrder; ++k) {
      const auto& p = t.back();
      std::vector<double> q(p.size() + 1, 0.0);
      for (std::size_t j = 0; j < p.size(); ++j) {
        // z * (1-z) * j z^{j-1} -> j z^j - j z^{j+1}
        if (j > 0) {
          q[j] += static_cast<double>(j) * p[j];
          q[j + 1] -= static_cast<double>(j) * p[j];
        }
        // z * (k+1) * z^j
        q[j + 1] += (k + 1) * p[j];
      }
      t.push_back(std::move(q));
    }
    return t;
  }();
  return table;
}

cplx eval_poly(const std::vector<double>& c, cplx z) {
  cplx acc = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) acc = acc * z + c[j];
  return acc;
}

// Direct series sum_{s>=1} z^{s-shift} / s^m with a certified stopping rule.
//   m >= 0: tail <= |z|^{S+1} / ((S+1)^m (1-|z|)), the geometric majorant.
//   m <  0: terms grow before they decay; once the worst-case term ratio
//           q = |z| ((s+1)/s)^{-m} falls below 1 the tail is bounded by
//           |a_{S+1}| / (1-q), the (S+1)^{|m|} safety factor made rigorous.
PolylogValue disk_series(double m, cplx z, double tol, long max_terms,
                         int shift) {
  const double az = std::abs(z);
  cplx sum = 0.0;
  cplx zp = shift ? cplx(1.0, 0.0) : z;   // z^{s-shift} at s = 1
  double azp = shift ? 1.0 : az;
  for (long s = 1; s <= max_terms; ++s) {
    const double sw = std::pow(static_cast<double>(s), -m);
    sum += zp * sw;
    const double head = azp * az;          // |z|^{s+1-shift}
    double bound;
    if (m >= 0.0) {
      bound = head * std::pow(s + 1.0, -m) / (1.0 - az);
    } else {
      const double q = az * std::pow((s + 2.0) / (s + 1.0), -m);
      bound = (q < 1.0)
                  ? head * std::pow(s + 1.0, -m) / (1.0 - q)
                  : std::numeric_limits<double>::infinity();
    }
    if (bound <= tol) return {sum, bound, s};
    zp *= z;
    azp = head;
  }
  throw NonConvergent("polylog: series stalled before the tolerance");
}

// |z| = 1, z != 1, m > 1.  Absolute convergence gives the integral tail
// bound zeta_tail(m, S); the Dirichlet test gives 2 (S+1)^{-m} / |1-z|.
// Either may win depending on how close z sits to 1.
PolylogValue circle_series(double m, cplx z, double tol, long max_terms) {
  const double gap = std::abs(1.0 - z);
  cplx sum = 0.0;
  cplx zp = 1.0;
  for (long s = 1; s <= max_terms; ++s) {
    zp *= z;
    sum += zp * std::pow(static_cast<double>(s), -m);
    const double bound = std::min(zeta_tail(m, s),
                                  2.0 * std::pow(s + 1.0, -m) / gap);
    if (bound <= tol) return {sum, bound, s};
  }
  throw NonConvergent("polylog: boundary series stalled; loosen tolerance");
}

bool near_int(double x, long& k) {
  const double r = std::round(x);
  if (std::abs(x - r) < kIntTol) {
    k = static_cast<long>(r);
    return true;
  }
  return false;
}

}   // namespace

PolylogValue polylog_ex(const PolylogRequest& req) {
  const double m = req.order;
  const cplx z = req.argument;
  if (!std::isfinite(m) || !std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw InvalidInput("polylog: non-finite order or argument");
  const double az = std::abs(z);
  if (az > 1.0 + 1e-12) throw InvalidInput("polylog: |z| > 1");
  if (az == 0.0) return {cplx(0.0), 0.0, 0};

  if (az >= 1.0 - 1e-14) {
    if (m <= 1.0 + 1e-15)
      throw DivergentInput("polylog: |z| = 1 requires order > 1");
    if (std::abs(z - 1.0) < 1e-14)
      return {cplx(zeta(m)), 4e-16 * zeta(m), 0};
    return circle_series(m, z, req.tolerance, req.max_terms);
  }

  long k = 0;
  if (near_int(m, k) && k <= 0 && -k <= kMaxClosedOrder) {
    const auto& p = negative_order_polys()[static_cast<std::size_t>(-k)];
    const cplx om = 1.0 - z;
    return {eval_poly(p, z) / std::pow(om, static_cast<double>(1 - k)), 0.0, 0};
  }
  if (near_int(m, k) && k == 1) return {-std::log(1.0 - z), 0.0, 0};

  return disk_series(m, z, req.tolerance, req.max_terms, 0);
}

cplx polylog(double order, cplx z, double tol) {
  return polylog_ex({order, z, tol}).value;
}

cplx polylog_ratio(double order, cplx z, double tol) {
  const double az = std::abs(z);
  if (az == 0.0) return 1.0;
  if (az > 1.0 + 1e-12) throw InvalidInput("polylog_ratio: |z| > 1");
  if (az >= 1.0 - 1e-14) return polylog(order, z, tol) / z;

  long k = 0;
  if (near_int(order, k) && k <= 0 && -k <= kMaxClosedOrder) {
    // P_k has zero constant term, so P_k(z)/z is again a polynomial.
    const auto& p = negative_order_polys()[static_cast<std::size_t>(-k)];
    std::vector<double> q(p.begin() + 1, p.end());
    const cplx om = 1.0 - z;
    return eval_poly(q, z) / std::pow(om, static_cast<double>(1 - k));
  }
  if (near_int(order, k) && k == 1) {
    if (az > 0.5) return -std::log(1.0 - z) / z;
    return disk_series(1.0, z, tol, 100000, 1).value;
  }
  return disk_series(order, z, tol, 8'000'000, 1).value;
}

/*
 * zeta(s) = 1/(1 - 2^{1-s}) * sum_{k>=1} (-1)^{k-1} k^{-s}, accelerated by
 * Borwein's Chebyshev weighting of the alternating series:
 *
 *   d_k = n sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!),
 *   zeta(s) ~ -1/(d_n (1-2^{1-s})) sum_{k<n} (-1)^k (d_k - d_n) (k+1)^{-s},
 *
 * with error below 3 (3+sqrt8)^{-n} / |1-2^{1-s}|; n = 40 leaves nothing in
 * double precision.
 */
double zeta(double s) {
  if (!(s > 1.0)) throw InvalidInput("zeta: requires s > 1");
  constexpr int n = 40;
  static const std::array<double, n + 1> d = [] {
    std::array<double, n + 1> out{};
    double t = 1.0 / n;   // i = 0 term: (n-1)!/n!
    double acc = t;
    out[0] = n * acc;
    for (int i = 1; i <= n; ++i) {
      t *= 4.0 * (n + i - 1.0) * (n - i + 1.0) / (2.0 * i * (2.0 * i - 1.0));
      acc += t;
      out[static_cast<std::size_t>(i)] = n * acc;
    }
    return out;
  }();
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double term = (d[static_cast<std::size_t>(k)] - d[n]) *
                        std::pow(k + 1.0, -s);
    sum += (k & 1) ? -term : term;
  }
  return -sum / (d[n] * (1.0 - std::pow(2.0, 1.0 - s)));
}

double zeta_tail(double a, long n) {
  if (!(a > 1.0)) throw DivergentInput("zeta_tail: requires a > 1");
  if (n < 1) throw InvalidInput("zeta_tail: n >= 1");
  const double x = static_cast<double>(n);
  const double inv = std::pow(x, -a);
  double t = inv * x / (a - 1.0);               // integral piece
  t -= inv / 2.0;
  const double f1 = a * inv / x;                // a n^{-a-1}
  t += f1 / 12.0;
  const double f3 = f1 * (a + 1.0) * (a + 2.0) / (x * x);
  t -= f3 / 720.0;
  const double f5 = f3 * (a + 3.0) * (a + 4.0) / (x * x);
  t += f5 / 30240.0;
  return t;
}

}
