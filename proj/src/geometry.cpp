#include "khardy/geometry.hpp"

#include "khardy/errors.hpp"
#include "khardy/polylog.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace khardy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Margin added to the spectral radius when an evaluator's truncation is
// frozen for finite differencing: every stencil the oracles build stays
// within this reach of the centre (validate() caps the steps accordingly).
constexpr double kFdSlack = 0.02;

double max_root_mag(const ChartPoint& p) {
  double r = 0.0;
  for (cplx v : p.poles) r = std::max(r, std::abs(v));
  for (cplx v : p.zeros) r = std::max(r, std::abs(v));
  return r;
}

void require_fd_room(const ChartPoint& p, double reach, const char* who) {
  if (max_root_mag(p) + reach >= 1.0 - 1e-9)
    throw StepTooLarge(std::string(who) +
                       ": stencil would leave the stability region; shrink "
                       "the step or the roots");
}

// sum_{s>=1} omega_s / s^2, exact per family.  This is the coefficient of
// |d|^2 in the potential, so an infinite value means the d-block diverges.
double z_sum_exact(const WeightSequence& w) {
  using F = WeightSequence::Family;
  switch (w.family()) {
    case F::hardy:
      return zeta(2.0);
    case F::bergman:
      // 1/(s^2 (1+s)) = 1/s^2 - 1/s + 1/(s+1) telescopes
      return zeta(2.0) - 1.0;
    case F::sobolev:
      if (w.order() == 0.0) return zeta(2.0);
      throw Divergent(
          "weighted d-block diverges: sobolev weights grow at least like "
          "s^2 against the 1/s^2 cepstrum envelope");
    case F::dirichlet:
      throw Divergent(
          "weighted d-block diverges: sum_s 1/s is infinite for the "
          "dirichlet weight");
    case F::power:
      if (w.order() < 1.0) return zeta(2.0 - w.order());
      throw Divergent(
          "weighted d-block diverges: sum_s s^(m-2) is infinite for m >= 1");
    case F::custom: {
      const auto& t = w.table();
      const long len = static_cast<long>(t.size());
      double acc = 0.0, h2 = 0.0;
      for (long s = 1; s < len; ++s) {
        const double inv = 1.0 / (static_cast<double>(s) * s);
        acc += t[static_cast<std::size_t>(s)] * inv;
        h2 += inv;
      }
      if (w.extension() == WeightSequence::Extension::repeat_last)
        acc += t.back() * (zeta(2.0) - h2);
      // error_beyond_table: the semi-norm ends at the table
      return acc;
    }
  }
  throw InvalidInput("weight: unknown family");
}

// Upper bound on omega_{t+1}/omega_t valid for every t >= s.
double ratio_sup(const WeightSequence& w, long s) {
  using F = WeightSequence::Family;
  const double sd = static_cast<double>(s);
  switch (w.family()) {
    case F::hardy:
      return 1.0;
    case F::bergman:
      return 1.0;
    case F::dirichlet:
      return (sd + 1.0) / sd;
    case F::sobolev:
      return std::pow((sd + 1.0) / sd, 2.0 * w.order());
    case F::power:
      return w.order() <= 0.0 ? 1.0 : std::pow((sd + 1.0) / sd, w.order());
    case F::custom: {
      const auto& t = w.table();
      const long len = static_cast<long>(t.size());
      double r = 1.0;
      for (long u = s; u + 1 < len; ++u)
        r = std::max(r, t[static_cast<std::size_t>(u + 1)] /
                            t[static_cast<std::size_t>(u)]);
      return r;
    }
  }
  return 1.0;
}

enum class Mult { one, inv_s, one_minus_inv, s_minus_one };

double mult_value(Mult m, long s) {
  const double sd = static_cast<double>(s);
  switch (m) {
    case Mult::one: return 1.0;
    case Mult::inv_s: return 1.0 / sd;
    case Mult::one_minus_inv: return 1.0 - 1.0 / sd;
    case Mult::s_minus_one: return sd - 1.0;
  }
  return 1.0;
}

// Upper bound on mult(t+1)/mult(t) for t >= s.
double mult_ratio_sup(Mult m, long s) {
  const double sd = static_cast<double>(s);
  switch (m) {
    case Mult::one: return 1.0;
    case Mult::inv_s: return 1.0;
    case Mult::one_minus_inv: return sd * sd / (sd * sd - 1.0);
    case Mult::s_minus_one: return sd / (sd - 1.0);
  }
  return 1.0;
}

/*
 * sum_{s >= smin} omega_s mult(s) x^{s-smin}, |x| < 1, stopping once the
 * certified geometric tail drops below tol.  A finite weight table without
 * extension simply ends the sum (semi-norm convention).  Throws
 * NonConvergent when the cap is hit first.
 */
cplx weighted_power_sum(const WeightSequence& w, cplx x, long smin, Mult mult,
                        double tol, long cap, SeriesInfo* info = nullptr) {
  const double ax = std::abs(x);
  cplx acc = 0.0, xp = 1.0;
  for (long s = smin; s <= cap; ++s) {
    const auto ws = w.maybe(s);
    if (!ws) break;   // only a finite table ends the defined range here
    const cplx term = *ws * mult_value(mult, s) * xp;
    acc += term;
    const double q = ax * ratio_sup(w, s) * mult_ratio_sup(mult, s);
    const double bound =
        q < 1.0 ? std::abs(term) * q / (1.0 - q) : kInf;
    if (bound <= tol) {
      if (info) { info->terms = s; info->tail_bound = bound; }
      return acc;
    }
    xp *= x;
  }
  if (std::abs(xp) == 0.0 || !w.maybe(cap + 1)) {
    if (info) { info->terms = cap; info->tail_bound = 0.0; }
    return acc;
  }
  throw NonConvergent(
      "series: weighted sum did not reach the tolerance within the "
      "truncation cap; raise truncation");
}

// ---------------------------------------------------------------------
// transform plumbing

long gram_terms(const GeometryConfig& cfg) {
  if (cfg.transform == Transform::log_squared_modulus)
    return std::min(cfg.truncation + 1, cfg.grid / 4);
  return cfg.truncation + 1;
}

// The grid estimate is part of the functional's definition: one fixed
// level, never a convergence failure, so the differentiated map is smooth.
ContourOptions frozen_contour(const GeometryConfig& cfg) {
  ContourOptions o;
  o.grid = cfg.grid;
  o.tolerance = kInf;
  o.levels = 1;
  o.exec = Exec::serial;
  return o;
}

std::vector<cplx> coeff_vector(const GeometryConfig& cfg, const ChartPoint& q,
                               long terms) {
  switch (cfg.transform) {
    case Transform::identity:
      return impulse_response(q, terms).coeffs;
    case Transform::log:
      return complex_cepstrum(q, terms, cfg.c0).coeffs;
    case Transform::log_squared_modulus:
      return power_cepstrum(q, terms, frozen_contour(cfg)).coeffs;
  }
  throw InvalidInput("transform: unknown");
}

// ---------------------------------------------------------------------
// potential evaluator: all adaptivity is frozen at construction so the
// map q -> K(q) the FD oracles differentiate is smooth

class PotentialEvaluator {
 public:
  PotentialEvaluator(const GeometryConfig& cfg, bool for_derivatives)
      : cfg_(cfg), w_(cfg.weight), center_(cfg.point()) {
    if (cfg.transform == Transform::log)
      init_log(for_derivatives);
    else
      init_direct();
  }

  double operator()(const ChartPoint& q) const {
    return cfg_.transform == Transform::log ? eval_log(q) : eval_direct(q);
  }

  const SeriesInfo& info() const { return info_; }

 private:
  void init_log(bool for_derivatives) {
    use_z_ = center_.d != 0.0 || (for_derivatives && center_.include_d);
    if (use_z_) z_ = z_sum_exact(w_);

    const double rho = max_root_mag(center_);
    const double rho_hat =
        std::min(rho + (for_derivatives ? kFdSlack : 0.0), 0.999999);
    const double pq =
        static_cast<double>(center_.poles.size() + center_.zeros.size());
    const double dabs = std::abs(center_.d) + (for_derivatives ? kFdSlack : 0);

    // pick n so the frozen truncation's own tail sits far below the FD
    // resolution; the d-block never truncates (z is exact)
    const double target = std::min(cfg_.tolerance, 1e-14);
    long n = 0;
    double tail = pq > 0.0 ? kInf : 0.0;
    double pa = rho_hat * rho_hat, pb = rho_hat;
    for (long s = 1; s <= cfg_.truncation; ++s) {
      const auto ws = w_.maybe(s);
      if (!ws) { n = s - 1; tail = 0.0; break; }
      const double wos2 = *ws / (static_cast<double>(s) * s);
      wos2_.push_back(wos2);
      n = s;
      if (pq == 0.0) { tail = 0.0; break; }
      const double qa = rho_hat * rho_hat * ratio_sup(w_, s);
      const double qb = rho_hat * ratio_sup(w_, s);
      if (qb < 1.0) {
        const double ta = wos2 * pq * pq * pa * qa / (1.0 - qa);
        const double tb = wos2 * pq * pb * qb / (1.0 - qb);
        tail = ta + 2.0 * dabs * tb;
        if (tail <= target) break;
      }
      pa *= rho_hat * rho_hat;
      pb *= rho_hat;
    }
    if (tail > target)
      throw NonConvergent(
          "potential: series tail does not reach the tolerance within the "
          "truncation cap; raise truncation");
    n_ = n;
    wos2_.resize(static_cast<std::size_t>(n_));
    info_.terms = n_;
    info_.tail_bound = tail;

    if (const auto w0 = w_.maybe(0))
      c0_term_ = *w0 * std::norm(c0_value(center_.sigma, cfg_.c0));
  }

  double eval_log(const ChartPoint& q) const {
    std::vector<cplx> lp = q.poles, zp = q.zeros;
    double a = 0.0;
    cplx b = 0.0;
    for (long s = 1; s <= n_; ++s) {
      cplx r = 0.0;
      for (std::size_t i = 0; i < lp.size(); ++i) {
        r += lp[i];
        lp[i] *= q.poles[i];
      }
      for (std::size_t i = 0; i < zp.size(); ++i) {
        r -= zp[i];
        zp[i] *= q.zeros[i];
      }
      const double wos2 = wos2_[static_cast<std::size_t>(s - 1)];
      a += wos2 * std::norm(r);
      b += wos2 * r;
    }
    double k = a - 2.0 * (std::conj(q.d) * b).real() + c0_term_;
    if (use_z_) k += std::norm(q.d) * z_;
    return k;
  }

  void init_direct() {
    n_ = gram_terms(cfg_);
    ws_.resize(static_cast<std::size_t>(n_));
    for (long s = 0; s < n_; ++s)
      ws_[static_cast<std::size_t>(s)] = w_.maybe(s).value_or(-1.0);
    info_.terms = n_;
    info_.tail_bound = tail_estimate();
  }

  // Decay-fit estimate of the dropped weighted mass; certified bounds need
  // the log route's regrouping.
  double tail_estimate() const {
    const auto f = coeff_vector(cfg_, center_, n_);
    const long last = n_ - 1;
    const long back = std::min<long>(8, last);
    if (back < 1) return kInf;
    const double fl = std::abs(f[static_cast<std::size_t>(last)]);
    if (fl == 0.0) return 0.0;
    const double fe = std::abs(f[static_cast<std::size_t>(last - back)]);
    if (fe == 0.0) return kInf;
    const double r = std::pow(fl / fe, 1.0 / static_cast<double>(back));
    const double q = r * r * ratio_sup(w_, last);
    if (!(q < 1.0)) return kInf;
    const double wl = std::max(ws_[static_cast<std::size_t>(last)], 0.0);
    return wl * fl * fl * q / (1.0 - q);
  }

  double eval_direct(const ChartPoint& q) const {
    const auto f = coeff_vector(cfg_, q, n_);
    double k = 0.0;
    for (long s = 0; s < n_; ++s) {
      const double ws = ws_[static_cast<std::size_t>(s)];
      if (ws >= 0.0) k += ws * std::norm(f[static_cast<std::size_t>(s)]);
    }
    return k;
  }

  GeometryConfig cfg_;
  WeightSequence w_;
  ChartPoint center_;
  long n_ = 0;
  double z_ = 0.0;
  bool use_z_ = false;
  double c0_term_ = 0.0;
  std::vector<double> wos2_;
  std::vector<double> ws_;
  SeriesInfo info_;
};

// Same shape with the centre subtracted: D(q) = sum omega_s |f_s(q) -
// f_s(q0)|^2.  Differs from the potential by pluriharmonic terms only, so
// it generates the same metric while its holomorphic-holomorphic Hessian
// vanishes at q0.
class CenteredEvaluator {
 public:
  explicit CenteredEvaluator(const GeometryConfig& cfg)
      : base_(cfg, true), cfg_(cfg), center_(cfg.point()) {
    if (cfg.transform == Transform::log) {
      r0_.resize(static_cast<std::size_t>(base_.info().terms));
      std::vector<cplx> lp = center_.poles, zp = center_.zeros;
      for (std::size_t s = 0; s < r0_.size(); ++s) {
        cplx r = 0.0;
        for (std::size_t i = 0; i < lp.size(); ++i) {
          r += lp[i];
          lp[i] *= center_.poles[i];
        }
        for (std::size_t i = 0; i < zp.size(); ++i) {
          r -= zp[i];
          zp[i] *= center_.zeros[i];
        }
        r0_[s] = r;
      }
      wos2_ = weights_over_s2();
      if (center_.include_d) z_ = z_sum_exact(cfg.weight);
    } else {
      f0_ = coeff_vector(cfg_, center_, gram_terms(cfg_));
      ws_.resize(f0_.size());
      for (std::size_t s = 0; s < f0_.size(); ++s)
        ws_[s] = cfg.weight.maybe(static_cast<long>(s)).value_or(-1.0);
    }
  }

  double operator()(const ChartPoint& q) const {
    if (cfg_.transform != Transform::log) {
      const auto f = coeff_vector(cfg_, q, static_cast<long>(f0_.size()));
      double acc = 0.0;
      for (std::size_t s = 0; s < f.size(); ++s)
        if (ws_[s] >= 0.0) acc += ws_[s] * std::norm(f[s] - f0_[s]);
      return acc;
    }
    std::vector<cplx> lp = q.poles, zp = q.zeros;
    double a = 0.0;
    cplx b = 0.0;
    for (std::size_t s = 0; s < r0_.size(); ++s) {
      cplx r = 0.0;
      for (std::size_t i = 0; i < lp.size(); ++i) {
        r += lp[i];
        lp[i] *= q.poles[i];
      }
      for (std::size_t i = 0; i < zp.size(); ++i) {
        r -= zp[i];
        zp[i] *= q.zeros[i];
      }
      const cplx dr = r - r0_[s];
      a += wos2_[s] * std::norm(dr);
      b += wos2_[s] * dr;
    }
    const cplx dd = q.d - center_.d;
    return a - 2.0 * (std::conj(dd) * b).real() + std::norm(dd) * z_;
  }

 private:
  std::vector<double> weights_over_s2() const {
    std::vector<double> out(r0_.size());
    for (std::size_t s = 0; s < out.size(); ++s) {
      const long idx = static_cast<long>(s) + 1;
      out[s] = cfg_.weight.maybe(idx).value_or(0.0) /
               (static_cast<double>(idx) * idx);
    }
    return out;
  }

  PotentialEvaluator base_;   // fixes the truncation choice
  GeometryConfig cfg_;
  ChartPoint center_;
  std::vector<cplx> r0_;
  std::vector<double> wos2_;
  double z_ = 0.0;
  std::vector<cplx> f0_;
  std::vector<double> ws_;
};

// ---------------------------------------------------------------------
// stencil engine: every F evaluation is an independent task, so the
// parallel path assigns disjoint slots and reduces serially; serial and
// parallel runs are bit-identical

ChartPoint shifted(const ChartPoint& c,
                   std::initializer_list<std::pair<long, double>> moves) {
  ChartPoint p = c;
  for (const auto& [dir, amount] : moves) {
    const long a = dir / 2;
    const cplx delta =
        (dir & 1) ? cplx(0.0, amount) : cplx(amount, 0.0);
    p = p.with_coord(a, p.coord(a) + delta);
  }
  return p;
}

void run_tasks(const std::vector<ChartPoint>& pts,
               const std::function<double(const ChartPoint&)>& F,
               std::vector<double>& out, Exec exec) {
  const long n = static_cast<long>(pts.size());
  out.resize(pts.size());
  if (exec == Exec::parallel) {
    std::exception_ptr err;
    std::atomic<bool> failed{false};
#ifdef _OPENMP
#pragma omp parallel for num_threads(thread_cap()) schedule(static)
#endif
    for (long i = 0; i < n; ++i) {
      if (failed.load(std::memory_order_relaxed)) continue;
      try {
        out[static_cast<std::size_t>(i)] =
            F(pts[static_cast<std::size_t>(i)]);
      } catch (...) {
#ifdef _OPENMP
#pragma omp critical(khardy_task_err)
#endif
        if (!failed.exchange(true)) err = std::current_exception();
      }
    }
    if (failed.load()) std::rethrow_exception(err);
  } else {
    for (long i = 0; i < n; ++i)
      out[static_cast<std::size_t>(i)] = F(pts[static_cast<std::size_t>(i)]);
  }
}

/*
 * Central-difference second derivatives of a real scalar F over the chart,
 * at steps h and h/2, combined by one Richardson step.  mixed() returns
 * the Wirtinger Hessian d_a d_conj(b) F, holo() the plain d_a d_b F;
 * conjugate/symmetric entries share their primitive stencils, so the
 * respective symmetry is exact.
 */
class HessianEngine {
 public:
  HessianEngine(const ChartPoint& center,
                const std::function<double(const ChartPoint&)>& F, double h,
                Exec exec)
      : c_(center), n_(center.dim()), h_(h) {
    const long d2 = 2 * n_;
    pair_of_.assign(static_cast<std::size_t>(d2 * d2), -1);
    std::vector<ChartPoint> pts;
    pts.push_back(c_);
    for (int step = 0; step < 2; ++step) {
      const double hs = step ? h_ / 2.0 : h_;
      for (long dir = 0; dir < d2; ++dir)
        for (int sg = 0; sg < 2; ++sg)
          pts.push_back(shifted(c_, {{dir, sg ? hs : -hs}}));
    }
    long pid = 0;
    for (long du = 0; du < d2; ++du)
      for (long dv = du + 1; dv < d2; ++dv) {
        pair_of_[static_cast<std::size_t>(du * d2 + dv)] = pid++;
        for (int step = 0; step < 2; ++step) {
          const double hs = step ? h_ / 2.0 : h_;
          for (int s1 = 0; s1 < 2; ++s1)
            for (int s2 = 0; s2 < 2; ++s2)
              pts.push_back(shifted(c_, {{du, s1 ? hs : -hs},
                                         {dv, s2 ? hs : -hs}}));
        }
      }
    run_tasks(pts, F, vals_, exec);
  }

  Matrix mixed() const {
    Matrix full = mixed_at(0), half = mixed_at(1);
    return (4.0 * half - full) / 3.0;
  }

  Matrix holo() const {
    Matrix full = holo_at(0), half = holo_at(1);
    return (4.0 * half - full) / 3.0;
  }

 private:
  double f0() const { return vals_[0]; }

  double single(int step, long dir, int sg) const {
    const std::size_t base = 1 + static_cast<std::size_t>(step * 4 * n_);
    return vals_[base + static_cast<std::size_t>(dir * 2 + sg)];
  }

  // [F(+)-2F(0)+F(-)] / hs^2 along one real direction
  double sec(int step, long dir) const {
    const double hs = step ? h_ / 2.0 : h_;
    return (single(step, dir, 1) + single(step, dir, 0) - 2.0 * f0()) /
           (hs * hs);
  }

  // four-point cross derivative d^2 F / (d dir_u d dir_v), du < dv
  double cross(int step, long du, long dv) const {
    const long d2 = 2 * n_;
    const long pid = pair_of_[static_cast<std::size_t>(du * d2 + dv)];
    const std::size_t base =
        1 + static_cast<std::size_t>(8 * n_) +
        static_cast<std::size_t>(pid * 8 + step * 4);
    const double hs = step ? h_ / 2.0 : h_;
    const double pp = vals_[base + 3], pm = vals_[base + 2],
                 mp = vals_[base + 1], mm = vals_[base + 0];
    return (pp - pm - mp + mm) / (4.0 * hs * hs);
  }

  double xcross(int step, long du, long dv) const {
    return du < dv ? cross(step, du, dv) : cross(step, dv, du);
  }

  Matrix mixed_at(int step) const {
    Matrix g(n_, n_);
    for (long a = 0; a < n_; ++a) {
      g(a, a) = 0.25 * (sec(step, 2 * a) + sec(step, 2 * a + 1));
      for (long b = a + 1; b < n_; ++b) {
        const double re =
            xcross(step, 2 * a, 2 * b) + xcross(step, 2 * a + 1, 2 * b + 1);
        const double im =
            xcross(step, 2 * a, 2 * b + 1) - xcross(step, 2 * a + 1, 2 * b);
        g(a, b) = 0.25 * cplx(re, im);
        g(b, a) = std::conj(g(a, b));
      }
    }
    return g;
  }

  Matrix holo_at(int step) const {
    Matrix g(n_, n_);
    for (long a = 0; a < n_; ++a) {
      g(a, a) = 0.25 * cplx(sec(step, 2 * a) - sec(step, 2 * a + 1),
                            -2.0 * xcross(step, 2 * a, 2 * a + 1));
      for (long b = a + 1; b < n_; ++b) {
        const double re =
            xcross(step, 2 * a, 2 * b) - xcross(step, 2 * a + 1, 2 * b + 1);
        const double im =
            -(xcross(step, 2 * a, 2 * b + 1) + xcross(step, 2 * a + 1, 2 * b));
        g(a, b) = 0.25 * cplx(re, im);
        g(b, a) = g(a, b);
      }
    }
    return g;
  }

  ChartPoint c_;
  long n_;
  double h_;
  std::vector<double> vals_;
  std::vector<long> pair_of_;
};

// ---------------------------------------------------------------------
// coefficient derivatives for the Gram routes (identity and power
// transforms); the log transform has them in closed form.
//
// The grid estimate behind log_squared_modulus aliases part of
// conj(log h) into every retained index, so those coefficients are not
// holomorphic in the coordinates: f_s = H_s + conj(A_s) with H, A
// holomorphic.  The mixed Hessian of the frozen functional then carries
// two Gram blocks, sum omega (d_a H) conj(d_b H) + (d_a A) conj(d_b A),
// and the FD oracle sees both, so the series route must too.  d_a f
// recovers d_a H and d_conj(a) f recovers conj(d_a A).  All differences
// get the same one-step Richardson refinement as the FD oracle.

struct GramFirst {
  std::vector<std::vector<cplx>> holo;   // [a][s] = d_a f_s
  std::vector<std::vector<cplx>> anti;   // [a][s] = d_conj(a) f_s
  bool has_anti = false;                 // identically zero when false
};

GramFirst gram_first(const GeometryConfig& cfg, const ChartPoint& c,
                     long terms) {
  const long dim = c.dim();
  GramFirst out;
  out.has_anti = cfg.transform == Transform::log_squared_modulus;
  out.holo.resize(static_cast<std::size_t>(dim));
  if (out.has_anti) out.anti.resize(static_cast<std::size_t>(dim));

  const auto central = [&](long axis, double h) {
    const auto p = coeff_vector(cfg, shifted(c, {{axis, h}}), terms);
    const auto m = coeff_vector(cfg, shifted(c, {{axis, -h}}), terms);
    std::vector<cplx> v(static_cast<std::size_t>(terms));
    for (long s = 0; s < terms; ++s) {
      const auto i = static_cast<std::size_t>(s);
      v[i] = (p[i] - m[i]) / (2.0 * h);
    }
    return v;
  };
  const auto refined = [&](long axis) {
    auto coarse = central(axis, cfg.fd_step);
    const auto fine = central(axis, 0.5 * cfg.fd_step);
    for (long s = 0; s < terms; ++s) {
      const auto i = static_cast<std::size_t>(s);
      coarse[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
    }
    return coarse;
  };

  for (long a = 0; a < dim; ++a) {
    const auto fx = refined(2 * a);
    if (!out.has_anti) {
      // h_s is holomorphic in every coordinate, so one real-direction
      // central difference is the complex derivative
      out.holo[static_cast<std::size_t>(a)] = fx;
      continue;
    }
    const auto fy = refined(2 * a + 1);
    auto& da = out.holo[static_cast<std::size_t>(a)];
    auto& db = out.anti[static_cast<std::size_t>(a)];
    da.resize(static_cast<std::size_t>(terms));
    db.resize(static_cast<std::size_t>(terms));
    for (long s = 0; s < terms; ++s) {
      const auto i = static_cast<std::size_t>(s);
      da[i] = 0.5 * (fx[i] - cplx(0.0, 1.0) * fy[i]);
      db[i] = 0.5 * (fx[i] + cplx(0.0, 1.0) * fy[i]);
    }
  }
  return out;
}

// Second coefficient derivatives, same layout as GramFirst: holo[a][b][s]
// = d_a d_b f_s and anti[a][b][s] = d_conj(a) d_conj(b) f_s, so d_a d_b A
// = conj(anti).  The two combinations share every stencil evaluation and
// differ only in the sign of the imaginary part.
struct GramSecond {
  std::vector<std::vector<std::vector<cplx>>> holo;
  std::vector<std::vector<std::vector<cplx>>> anti;
  bool has_anti = false;
};

GramSecond gram_second(const GeometryConfig& cfg, const ChartPoint& c,
                       long terms) {
  const long dim = c.dim();
  const auto at = [&](std::initializer_list<std::pair<long, double>> mv) {
    return coeff_vector(cfg, shifted(c, mv), terms);
  };
  const auto f0 = at({});

  GramSecond out;
  out.has_anti = cfg.transform == Transform::log_squared_modulus;
  out.holo.assign(
      static_cast<std::size_t>(dim),
      std::vector<std::vector<cplx>>(static_cast<std::size_t>(dim)));
  if (out.has_anti) out.anti = out.holo;

  const auto combine = [terms](auto&& f) {
    std::vector<cplx> v(static_cast<std::size_t>(terms));
    for (long s = 0; s < terms; ++s) v[static_cast<std::size_t>(s)] = f(s);
    return v;
  };

  // one (a, b) block at step h; returns {holo, anti} with anti empty for
  // holomorphic transforms
  const auto block = [&](long a, long b, double h)
      -> std::pair<std::vector<cplx>, std::vector<cplx>> {
    if (cfg.transform == Transform::identity) {
      if (a == b) {
        const auto p = at({{2 * a, h}}), m = at({{2 * a, -h}});
        return {combine([&](long s) {
                  const auto i = static_cast<std::size_t>(s);
                  return (p[i] - 2.0 * f0[i] + m[i]) / (h * h);
                }),
                {}};
      }
      const auto pp = at({{2 * a, h}, {2 * b, h}});
      const auto pm = at({{2 * a, h}, {2 * b, -h}});
      const auto mp = at({{2 * a, -h}, {2 * b, h}});
      const auto mm = at({{2 * a, -h}, {2 * b, -h}});
      return {combine([&](long s) {
                const auto i = static_cast<std::size_t>(s);
                return (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h);
              }),
              {}};
    }
    const auto cross = [&](long du, long dv) {
      const auto pp = at({{du, h}, {dv, h}});
      const auto pm = at({{du, h}, {dv, -h}});
      const auto mp = at({{du, -h}, {dv, h}});
      const auto mm = at({{du, -h}, {dv, -h}});
      return combine([&](long s) {
        const auto i = static_cast<std::size_t>(s);
        return (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h);
      });
    };
    if (a == b) {
      const auto xp = at({{2 * a, h}}), xm = at({{2 * a, -h}});
      const auto yp = at({{2 * a + 1, h}}), ym = at({{2 * a + 1, -h}});
      const auto cxy = cross(2 * a, 2 * a + 1);
      const auto part = [&](double sign) {
        return combine([&](long s) {
          const auto i = static_cast<std::size_t>(s);
          const cplx sxx = (xp[i] - 2.0 * f0[i] + xm[i]) / (h * h);
          const cplx syy = (yp[i] - 2.0 * f0[i] + ym[i]) / (h * h);
          return 0.25 * (sxx - syy + sign * 2.0 * cplx(0.0, 1.0) * cxy[i]);
        });
      };
      return {part(-1.0), part(1.0)};
    }
    const auto cxx = cross(2 * a, 2 * b);
    const auto cyy = cross(2 * a + 1, 2 * b + 1);
    const auto cxy = cross(2 * a, 2 * b + 1);
    const auto cyx = cross(2 * a + 1, 2 * b);
    const auto part = [&](double sign) {
      return combine([&](long s) {
        const auto i = static_cast<std::size_t>(s);
        return 0.25 *
               (cxx[i] - cyy[i] + sign * cplx(0.0, 1.0) * (cxy[i] + cyx[i]));
      });
    };
    return {part(-1.0), part(1.0)};
  };

  const auto richardson = [terms](std::vector<cplx> coarse,
                                  const std::vector<cplx>& fine) {
    for (long s = 0; s < terms; ++s) {
      const auto i = static_cast<std::size_t>(s);
      coarse[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
    }
    return coarse;
  };

  for (long a = 0; a < dim; ++a)
    for (long b = a; b < dim; ++b) {
      auto coarse = block(a, b, cfg.fd_step);
      const auto fine = block(a, b, 0.5 * cfg.fd_step);
      const auto ai = static_cast<std::size_t>(a);
      const auto bi = static_cast<std::size_t>(b);
      out.holo[ai][bi] = richardson(std::move(coarse.first), fine.first);
      out.holo[bi][ai] = out.holo[ai][bi];
      if (out.has_anti) {
        out.anti[ai][bi] = richardson(std::move(coarse.second), fine.second);
        out.anti[bi][ai] = out.anti[ai][bi];
      }
    }
  return out;
}

Matrix gram_metric(const GeometryConfig& cfg, const ChartPoint& c) {
  const long terms = gram_terms(cfg);
  const long dim = c.dim();
  const auto df = gram_first(cfg, c, terms);
  std::vector<double> ws(static_cast<std::size_t>(terms));
  for (long s = 0; s < terms; ++s)
    ws[static_cast<std::size_t>(s)] = cfg.weight.maybe(s).value_or(-1.0);
  Matrix g(dim, dim);
  for (long a = 0; a < dim; ++a)
    for (long b = a; b < dim; ++b) {
      cplx acc = 0.0;
      const auto& da = df.holo[static_cast<std::size_t>(a)];
      const auto& db = df.holo[static_cast<std::size_t>(b)];
      for (long s = 0; s < terms; ++s) {
        const auto i = static_cast<std::size_t>(s);
        if (ws[i] >= 0.0) acc += ws[i] * da[i] * std::conj(db[i]);
      }
      if (df.has_anti) {
        const auto& ea = df.anti[static_cast<std::size_t>(a)];
        const auto& eb = df.anti[static_cast<std::size_t>(b)];
        for (long s = 0; s < terms; ++s) {
          const auto i = static_cast<std::size_t>(s);
          if (ws[i] >= 0.0) acc += ws[i] * std::conj(ea[i]) * eb[i];
        }
      }
      g(a, b) = acc;
      g(b, a) = std::conj(acc);
    }
  return g;
}

// analytic metric for transform=log; tol/cap control the adaptive root
// blocks, the d block is exact
Matrix log_metric(const WeightSequence& w, const ChartPoint& c, double tol,
                  long cap) {
  const long dim = c.dim();
  Matrix g(dim, dim);
  double z = 0.0;
  bool have_z = false;
  for (long a = 0; a < dim; ++a)
    for (long b = a; b < dim; ++b) {
      const double ga = c.gamma(a), gb = c.gamma(b);
      cplx v;
      if (ga == 0.0 && gb == 0.0) {
        if (!have_z) { z = z_sum_exact(w); have_z = true; }
        v = z;
      } else if (ga == 0.0) {
        v = gb * weighted_power_sum(w, std::conj(c.coord(b)), 1, Mult::inv_s,
                                    tol, cap);
      } else if (gb == 0.0) {
        v = ga * weighted_power_sum(w, c.coord(a), 1, Mult::inv_s, tol, cap);
      } else {
        v = ga * gb *
            weighted_power_sum(w, c.coord(a) * std::conj(c.coord(b)), 1,
                               Mult::one, tol, cap);
      }
      g(a, b) = v;
      g(b, a) = std::conj(v);
    }
  return g;
}

// metric evaluator with truncation frozen at the centre, for the outer FD
// loops (Ricci, closedness); smoothness matters more than adaptivity here
class MetricEvaluator {
 public:
  MetricEvaluator(const GeometryConfig& cfg, const ChartPoint& center)
      : cfg_(cfg) {
    if (cfg.transform != Transform::log) return;
    if (center.include_d) z_ = z_sum_exact(cfg.weight);
    const double rho_hat =
        std::min(max_root_mag(center) + kFdSlack, 0.999999);
    const double x = rho_hat * rho_hat;
    long n = 0;
    double tail = kInf;
    double xp = 1.0;
    for (long s = 1; s <= cfg.truncation; ++s) {
      const auto ws = cfg.weight.maybe(s);
      if (!ws) { n = s - 1; tail = 0.0; break; }
      wn_.push_back(*ws);
      n = s;
      const double q = x * ratio_sup(cfg.weight, s);
      if (q < 1.0) {
        tail = *ws * xp * q / (1.0 - q);
        if (tail <= 1e-16) break;
      }
      xp *= x;
    }
    if (tail > 1e-16)
      throw NonConvergent(
          "metric: frozen truncation cannot certify its tail; raise "
          "truncation");
    n_ = n;
    wn_.resize(static_cast<std::size_t>(n_));
  }

  Matrix operator()(const ChartPoint& q) const {
    if (cfg_.transform != Transform::log) return gram_metric(cfg_, q);
    const long dim = q.dim();
    Matrix g(dim, dim);
    for (long a = 0; a < dim; ++a)
      for (long b = a; b < dim; ++b) {
        const double ga = q.gamma(a), gb = q.gamma(b);
        cplx v;
        if (ga == 0.0 && gb == 0.0) {
          v = z_;
        } else if (ga == 0.0 || gb == 0.0) {
          const cplx x = ga == 0.0 ? std::conj(q.coord(b)) : q.coord(a);
          cplx acc = 0.0, xp = 1.0;
          for (long s = 1; s <= n_; ++s) {
            acc += wn_[static_cast<std::size_t>(s - 1)] /
                   static_cast<double>(s) * xp;
            xp *= x;
          }
          v = (ga == 0.0 ? gb : ga) * acc;
        } else {
          const cplx x = q.coord(a) * std::conj(q.coord(b));
          cplx acc = 0.0, xp = 1.0;
          for (long s = 1; s <= n_; ++s) {
            acc += wn_[static_cast<std::size_t>(s - 1)] * xp;
            xp *= x;
          }
          v = ga * gb * acc;
        }
        g(a, b) = v;
        g(b, a) = std::conj(v);
      }
    return g;
  }

 private:
  GeometryConfig cfg_;
  long n_ = 0;
  double z_ = 0.0;
  std::vector<double> wn_;
};

double degeneracy_floor(const Matrix& g) {
  if (g.rows() == 0) return 0.0;
  const double scale = g.rowwise().norm().maxCoeff();
  return 1e-12 * std::pow(scale, static_cast<double>(g.rows()));
}

double guarded_log_abs_det(const Matrix& g) {
  const cplx det = g.determinant();
  if (std::abs(det) < degeneracy_floor(g))
    throw DegenerateMetric(
        "metric: |det g| below 1e-12 * (max row norm)^n; coordinates are "
        "degenerate at this point");
  return std::log(std::abs(det));
}

// closed-form connection kernels; the difference of polylogarithms
// cancels catastrophically near the origin, where the defining series is
// instantly geometric
cplx conn_cd(double m, cplx x, double tol) {
  if (std::abs(x) >= 0.4)
    return (polylog(-m, x, tol) - polylog(1.0 - m, x, tol)) / (x * x);
  // coefficient s^m - s^{m-1} = s^{m-1}(s-1): successive ratio is
  // ((s+1)/s)^{m-1} * s/(s-1), decreasing in s
  cplx acc = 0.0, xp = 1.0;
  for (long s = 2; s <= 1000; ++s) {
    const double sd = static_cast<double>(s);
    const double coef = std::pow(sd, m) - std::pow(sd, m - 1.0);
    acc += coef * xp;
    const double q = std::abs(x) *
                     std::pow((sd + 1.0) / sd, std::max(m - 1.0, 0.0)) *
                     (sd / (sd - 1.0));
    if (q < 1.0 && std::abs(coef * xp) * q / (1.0 - q) <= tol) return acc;
    xp *= x;
  }
  throw NonConvergent("connection kernel: series stalled below |x| = 0.4");
}

cplx conn_ck(double m, cplx w, double tol) {
  if (std::abs(w) >= 0.4)
    return (polylog(-m - 1.0, w, tol) - polylog(-m, w, tol)) / (w * w);
  cplx acc = 0.0, wp = 1.0;
  for (long s = 2; s <= 1000; ++s) {
    const double sd = static_cast<double>(s);
    const double coef = std::pow(sd, m) * (sd - 1.0);
    acc += coef * wp;
    const double q = std::abs(w) *
                     std::pow((sd + 1.0) / sd, std::max(m, 0.0)) *
                     (sd / (sd - 1.0));
    if (q < 1.0 && std::abs(coef * wp) * q / (1.0 - q) <= tol) return acc;
    wp *= w;
  }
  throw NonConvergent("connection kernel: series stalled below |w| = 0.4");
}

void require_power_log(const GeometryConfig& cfg, const char* who) {
  if (cfg.weight.family() != WeightSequence::Family::power ||
      cfg.transform != Transform::log)
    throw InvalidInput(std::string(who) +
                       ": closed form requires a power weight with "
                       "transform=log");
}

}   // namespace

void GeometryConfig::validate() const {
  model.validate();
  if (truncation < 8) throw InvalidInput("config: truncation must be >= 8");
  if (!(tolerance > 0.0) || !std::isfinite(tolerance))
    throw InvalidInput("config: tolerance must be finite and > 0");
  if (!(fd_step > 0.0) || fd_step > 2e-3)
    throw InvalidInput("config: fd_step must lie in (0, 2e-3]");
  if (!(fd_step_outer > 0.0) || fd_step_outer > 5e-3)
    throw InvalidInput("config: fd_step_outer must lie in (0, 5e-3]");
  if (grid < 64 || (grid & (grid - 1)) != 0)
    throw InvalidInput("config: grid must be a power of two >= 64");
}

Finiteness divergence_guard(const ArfimaModel& model,
                            const CoordinateChart& chart,
                            const WeightSequence& weight) {
  (void)chart;   // the |d|^2 block is chart-independent
  model.validate();
  using F = WeightSequence::Family;
  if (model.d == 0.0) return Finiteness::finite;
  switch (weight.family()) {
    case F::hardy:
    case F::bergman:
      return Finiteness::finite;
    case F::power:
    case F::sobolev:
      return weight.order() >= 1.0 ? Finiteness::divergent
                                   : Finiteness::finite;
    case F::dirichlet:
      return Finiteness::divergent;
    case F::custom:
      // repeat_last keeps the weights bounded; error_beyond_table ends the
      // semi-norm at the table
      return Finiteness::finite;
  }
  return Finiteness::unknown;
}

double potential_series(const GeometryConfig& cfg, SeriesInfo* info) {
  cfg.validate();
  PotentialEvaluator eval(cfg, false);
  const double k = eval(cfg.point());
  if (info) *info = eval.info();
  return k;
}

double potential_closed(const GeometryConfig& cfg) {
  cfg.validate();
  require_power_log(cfg, "potential_closed");
  const double m = cfg.weight.order();
  const ChartPoint c = cfg.point();
  const double tol = std::min(cfg.tolerance, 1e-13);

  std::vector<cplx> roots;
  std::vector<double> gam;
  for (std::size_t i = 0; i < c.poles.size(); ++i) {
    roots.push_back(c.poles[i]);
    gam.push_back(-1.0);
  }
  for (std::size_t i = 0; i < c.zeros.size(); ++i) {
    roots.push_back(c.zeros[i]);
    gam.push_back(1.0);
  }

  double k = 0.0;
  for (std::size_t i = 0; i < roots.size(); ++i)
    for (std::size_t j = 0; j < roots.size(); ++j)
      k += gam[i] * gam[j] *
           polylog(2.0 - m, roots[i] * std::conj(roots[j]), tol).real();
  if (c.d != 0.0) {
    if (m >= 1.0)
      throw Divergent(
          "weighted potential diverges: d != 0 with m >= 1 makes the "
          "d-block sum s^(m-2) infinite");
    for (std::size_t i = 0; i < roots.size(); ++i)
      k += 2.0 * gam[i] *
           (std::conj(c.d) * polylog(2.0 - m, roots[i], tol)).real();
    k += std::norm(c.d) * zeta(2.0 - m);
  }
  if (m == 0.0) k += std::norm(c0_value(c.sigma, cfg.c0));
  return k;
}

Matrix metric_series(const GeometryConfig& cfg) {
  cfg.validate();
  const ChartPoint c = cfg.point();
  if (cfg.transform == Transform::log)
    return log_metric(cfg.weight, c, cfg.tolerance, cfg.truncation);
  require_fd_room(c, 2.0 * cfg.fd_step, "metric");
  return gram_metric(cfg, c);
}

Matrix metric_closed(const GeometryConfig& cfg) {
  cfg.validate();
  require_power_log(cfg, "metric_closed");
  const double m = cfg.weight.order();
  const ChartPoint c = cfg.point();
  const long dim = c.dim();
  const double tol = std::min(cfg.tolerance, 1e-13);
  Matrix g(dim, dim);
  for (long a = 0; a < dim; ++a)
    for (long b = a; b < dim; ++b) {
      const double ga = c.gamma(a), gb = c.gamma(b);
      cplx v;
      if (ga == 0.0 && gb == 0.0) {
        if (m >= 1.0)
          throw Divergent(
              "metric diverges: g_00 = sum_s s^(m-2) is infinite for "
              "m >= 1");
        v = zeta(2.0 - m);
      } else if (ga == 0.0) {
        v = gb * polylog_ratio(1.0 - m, std::conj(c.coord(b)), tol);
      } else if (gb == 0.0) {
        v = ga * polylog_ratio(1.0 - m, c.coord(a), tol);
      } else {
        v = ga * gb *
            polylog_ratio(-m, c.coord(a) * std::conj(c.coord(b)), tol);
      }
      g(a, b) = v;
      g(b, a) = std::conj(v);
    }
  return g;
}

Matrix metric_fd_oracle(const GeometryConfig& cfg, Exec exec) {
  cfg.validate();
  const ChartPoint c = cfg.point();
  require_fd_room(c, 2.0 * cfg.fd_step, "metric_fd");
  // difference the centred functional: it differs from the potential by
  // pluriharmonic terms only, so the mixed Hessian is the same, and it
  // vanishes at the centre, so the stencil does not divide the potential's
  // bulk summation roundoff by h^2
  const CenteredEvaluator eval(cfg);
  HessianEngine eng(
      c, [&eval](const ChartPoint& q) { return eval(q); }, cfg.fd_step, exec);
  return eng.mixed();
}

Tensor3 connection_series(const GeometryConfig& cfg) {
  cfg.validate();
  const ChartPoint c = cfg.point();
  const long dim = c.dim();
  Tensor3 out(static_cast<std::size_t>(dim), Matrix::Zero(dim, dim));

  if (cfg.transform == Transform::log) {
    for (long a = 0; a < dim; ++a) {
      const double ga = c.gamma(a);
      if (ga == 0.0) continue;   // second derivative in d vanishes
      for (long k = 0; k < dim; ++k) {
        const double gk = c.gamma(k);
        cplx v;
        if (gk == 0.0) {
          v = ga * weighted_power_sum(cfg.weight, c.coord(a), 2,
                                      Mult::one_minus_inv, cfg.tolerance,
                                      cfg.truncation);
        } else {
          const cplx xk = std::conj(c.coord(k));
          v = ga * gk * xk *
              weighted_power_sum(cfg.weight, c.coord(a) * xk, 2,
                                 Mult::s_minus_one, cfg.tolerance,
                                 cfg.truncation);
        }
        out[static_cast<std::size_t>(k)](a, a) = v;
      }
    }
    return out;
  }

  require_fd_room(c, 2.0 * cfg.fd_step, "connection");
  const long terms = gram_terms(cfg);
  const auto df = gram_first(cfg, c, terms);
  const auto d2 = gram_second(cfg, c, terms);
  std::vector<double> ws(static_cast<std::size_t>(terms));
  for (long s = 0; s < terms; ++s)
    ws[static_cast<std::size_t>(s)] = cfg.weight.maybe(s).value_or(-1.0);
  for (long k = 0; k < dim; ++k)
    for (long a = 0; a < dim; ++a)
      for (long b = 0; b < dim; ++b) {
        cplx acc = 0.0;
        const auto& dab =
            d2.holo[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        const auto& dk = df.holo[static_cast<std::size_t>(k)];
        for (long s = 0; s < terms; ++s) {
          const auto i = static_cast<std::size_t>(s);
          if (ws[i] >= 0.0) acc += ws[i] * dab[i] * std::conj(dk[i]);
        }
        if (d2.has_anti) {
          // d_a d_b A = conj(anti), d_k A = conj(anti df)
          const auto& eab = d2.anti[static_cast<std::size_t>(a)]
                                   [static_cast<std::size_t>(b)];
          const auto& ek = df.anti[static_cast<std::size_t>(k)];
          for (long s = 0; s < terms; ++s) {
            const auto i = static_cast<std::size_t>(s);
            if (ws[i] >= 0.0) acc += ws[i] * std::conj(eab[i]) * ek[i];
          }
        }
        out[static_cast<std::size_t>(k)](a, b) = acc;
      }
  return out;
}

Tensor3 connection_closed(const GeometryConfig& cfg) {
  cfg.validate();
  require_power_log(cfg, "connection_closed");
  const double m = cfg.weight.order();
  const ChartPoint c = cfg.point();
  const long dim = c.dim();
  const double tol = std::min(cfg.tolerance, 1e-13);
  Tensor3 out(static_cast<std::size_t>(dim), Matrix::Zero(dim, dim));
  for (long a = 0; a < dim; ++a) {
    const double ga = c.gamma(a);
    if (ga == 0.0) continue;
    for (long k = 0; k < dim; ++k) {
      const double gk = c.gamma(k);
      cplx v;
      if (gk == 0.0) {
        v = ga * conn_cd(m, c.coord(a), tol);
      } else {
        const cplx xk = std::conj(c.coord(k));
        v = ga * gk * xk * conn_ck(m, c.coord(a) * xk, tol);
      }
      out[static_cast<std::size_t>(k)](a, a) = v;
    }
  }
  return out;
}

Tensor3 connection_fd_oracle(const GeometryConfig& cfg, Exec exec) {
  cfg.validate();
  const ChartPoint c = cfg.point();
  const long dim = c.dim();
  // the outer division by fd_step_outer amplifies inner roundoff, so the
  // inner Hessians take a wider step than metric_fd_oracle
  const double h_in = 3.0 * cfg.fd_step;
  const double delta = cfg.fd_step_outer;
  require_fd_room(c, delta + 2.0 * h_in, "connection_fd");
  // centred functional for the same reason as metric_fd_oracle; its mixed
  // Hessian matches the potential's at every point, not just the centre
  const CenteredEvaluator eval(cfg);
  const auto F = [&eval](const ChartPoint& q) { return eval(q); };

  // Hessians at centre +- delta and +- delta/2 along every real direction;
  // each inner engine runs serial, the outer task list is the parallel axis
  const long tasks = 2 * dim * 2 * 2;
  std::vector<Matrix> hess(static_cast<std::size_t>(tasks));
  std::vector<long> ids(static_cast<std::size_t>(tasks));
  for (long i = 0; i < tasks; ++i) ids[static_cast<std::size_t>(i)] = i;
  const auto run_one = [&](long id) {
    const long dir = id / 4;
    const int sg = (id / 2) & 1;
    const int step = id & 1;
    const double ds = (step ? delta / 2.0 : delta) * (sg ? 1.0 : -1.0);
    HessianEngine eng(shifted(c, {{dir, ds}}), F, h_in, Exec::serial);
    hess[static_cast<std::size_t>(id)] = eng.mixed();
  };
  if (exec == Exec::parallel) {
    std::exception_ptr err;
    std::atomic<bool> failed{false};
#ifdef _OPENMP
#pragma omp parallel for num_threads(thread_cap()) schedule(dynamic)
#endif
    for (long i = 0; i < tasks; ++i) {
      if (failed.load(std::memory_order_relaxed)) continue;
      try {
        run_one(i);
      } catch (...) {
#ifdef _OPENMP
#pragma omp critical(khardy_conn_err)
#endif
        if (!failed.exchange(true)) err = std::current_exception();
      }
    }
    if (failed.load()) std::rethrow_exception(err);
  } else {
    for (long i = 0; i < tasks; ++i) run_one(i);
  }

  const auto H = [&](long dir, int sg, int step) -> const Matrix& {
    return hess[static_cast<std::size_t>(dir * 4 + sg * 2 + step)];
  };
  Tensor3 out(static_cast<std::size_t>(dim), Matrix::Zero(dim, dim));
  for (long a = 0; a < dim; ++a) {
    const auto d1 = [&](long dir) {
      const Matrix full = (H(dir, 1, 0) - H(dir, 0, 0)) / (2.0 * delta);
      const Matrix half = (H(dir, 1, 1) - H(dir, 0, 1)) / delta;
      return Matrix((4.0 * half - full) / 3.0);
    };
    const Matrix dx = d1(2 * a), dy = d1(2 * a + 1);
    const Matrix da = 0.5 * (dx - cplx(0.0, 1.0) * dy);
    for (long b = 0; b < dim; ++b)
      for (long k = 0; k < dim; ++k)
        out[static_cast<std::size_t>(k)](a, b) = da(b, k);
  }
  return out;
}

Matrix ricci_fd(const GeometryConfig& cfg, Exec exec) {
  cfg.validate();
  const ChartPoint c = cfg.point();
  if (c.dim() == 0) return Matrix(0, 0);
  require_fd_room(c, 4.0 * cfg.fd_step, "ricci");
  const MetricEvaluator me(cfg, c);
  const auto F = [&me](const ChartPoint& q) {
    return guarded_log_abs_det(me(q));
  };
  HessianEngine eng(c, F, cfg.fd_step, exec);
  return Matrix(-eng.mixed());
}

cplx laplace_beltrami(const GeometryConfig& cfg, const Matrix& hessian) {
  cfg.validate();
  const Matrix g = metric_series(cfg);
  if (hessian.rows() != g.rows() || hessian.cols() != g.cols())
    throw InvalidInput("laplace_beltrami: hessian shape must match the chart");
  if (g.rows() == 0) return 0.0;
  const cplx det = g.determinant();
  if (std::abs(det) < degeneracy_floor(g))
    throw DegenerateMetric(
        "metric: |det g| below 1e-12 * (max row norm)^n; coordinates are "
        "degenerate at this point");
  return 2.0 * g.partialPivLu().solve(hessian).trace();
}

KahlerResidual check_kahler(const GeometryConfig& cfg, Exec exec) {
  cfg.validate();
  const ChartPoint c = cfg.point();
  const long dim = c.dim();
  KahlerResidual out;
  if (dim == 0) return out;
  require_fd_room(c, 2.0 * cfg.fd_step, "check_kahler");

  {
    const CenteredEvaluator dist(cfg);
    HessianEngine eng(
        c, [&dist](const ChartPoint& q) { return dist(q); }, cfg.fd_step,
        exec);
    const Matrix holo = eng.holo();
    out.hermitian = holo.cwiseAbs().maxCoeff();
  }

  {
    const MetricEvaluator me(cfg, c);
    const double h = cfg.fd_step;
    const long tasks = 2 * dim * 2 * 2;
    std::vector<Matrix> vals(static_cast<std::size_t>(tasks));
    const auto run_one = [&](long id) {
      const long dir = id / 4;
      const int sg = (id / 2) & 1;
      const int step = id & 1;
      const double ds = (step ? h / 2.0 : h) * (sg ? 1.0 : -1.0);
      vals[static_cast<std::size_t>(id)] = me(shifted(c, {{dir, ds}}));
    };
    if (exec == Exec::parallel) {
      std::exception_ptr err;
      std::atomic<bool> failed{false};
#ifdef _OPENMP
#pragma omp parallel for num_threads(thread_cap()) schedule(dynamic)
#endif
      for (long i = 0; i < tasks; ++i) {
        if (failed.load(std::memory_order_relaxed)) continue;
        try {
          run_one(i);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(khardy_kahler_err)
#endif
          if (!failed.exchange(true)) err = std::current_exception();
        }
      }
      if (failed.load()) std::rethrow_exception(err);
    } else {
      for (long i = 0; i < tasks; ++i) run_one(i);
    }
    const auto V = [&](long dir, int sg, int step) -> const Matrix& {
      return vals[static_cast<std::size_t>(dir * 4 + sg * 2 + step)];
    };
    std::vector<Matrix> dmet(static_cast<std::size_t>(dim));
    for (long a = 0; a < dim; ++a) {
      const auto d1 = [&](long dir) {
        const Matrix full = (V(dir, 1, 0) - V(dir, 0, 0)) / (2.0 * h);
        const Matrix half = (V(dir, 1, 1) - V(dir, 0, 1)) / h;
        return Matrix((4.0 * half - full) / 3.0);
      };
      const Matrix dx = d1(2 * a), dy = d1(2 * a + 1);
      dmet[static_cast<std::size_t>(a)] = 0.5 * (dx - cplx(0.0, 1.0) * dy);
    }
    double worst = 0.0;
    for (long a = 0; a < dim; ++a)
      for (long b = a + 1; b < dim; ++b)
        for (long k = 0; k < dim; ++k)
          worst = std::max(
              worst, std::abs(dmet[static_cast<std::size_t>(a)](b, k) -
                              dmet[static_cast<std::size_t>(b)](a, k)));
    out.closedness = worst;
  }
  return out;
}

GeometryReport geometry_report(const GeometryConfig& cfg,
                               const ReportRequest& req, Exec exec) {
  cfg.validate();
  if (divergence_guard(cfg.model, cfg.chart, cfg.weight) ==
      Finiteness::divergent)
    throw Divergent(
        "weighted potential diverges: d != 0 while sum_s omega_s/s^2 is "
        "infinite for this weight");

  const bool closed_forms =
      cfg.weight.family() == WeightSequence::Family::power &&
      cfg.transform == Transform::log;

  GeometryReport rep;
  const ChartPoint c = cfg.point();
  for (long a = 0; a < c.dim(); ++a) rep.labels.push_back(c.label(a));
  rep.potential = potential_series(cfg, &rep.potential_info);
  rep.metric = metric_series(cfg);
  if (closed_forms) {
    rep.potential_closed = potential_closed(cfg);
    rep.metric_closed = metric_closed(cfg);
  }
  if (req.connection) {
    rep.connection = connection_series(cfg);
    if (closed_forms) rep.connection_closed = connection_closed(cfg);
  }
  if (req.ricci) rep.ricci = ricci_fd(cfg, exec);
  if (req.check) rep.residuals = check_kahler(cfg, exec);
  rep.truncation = cfg.transform == Transform::log ? rep.potential_info.terms
                                                   : gram_terms(cfg) - 1;
  rep.fd_step = cfg.fd_step;
  if (cfg.transform == Transform::log_squared_modulus) rep.grid = cfg.grid;
  return rep;
}

}
