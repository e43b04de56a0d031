#include <cstdio>
#include "khardy/arfima.hpp"
#include "khardy/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>

namespace khardy {

namespace {

constexpr double kStabilityMargin = 1e-12;

void check_roots(const std::vector<cplx>& roots, const char* what) {
  for (cplx r : roots)
    if (!(std::abs(r) < 1.0 - kStabilityMargin))
      throw InvalidInput(std::string("model: ") + what +
                         " must lie strictly inside the unit disk");
}

}   // namespace

void ArfimaModel::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw InvalidInput("model: sigma must be finite and > 0");
  if (!std::isfinite(d)) throw InvalidInput("model: d must be finite");
  check_roots(poles, "poles");
  check_roots(zeros, "zeros");
}

double ArfimaModel::spectral_radius() const {
  double r = 0.0;
  for (cplx p : poles) r = std::max(r, std::abs(p));
  for (cplx z : zeros) r = std::max(r, std::abs(z));
  return r;
}

ChartPoint ChartPoint::of(const ArfimaModel& m, CoordinateChart chart) {
  m.validate();
  ChartPoint p;
  p.sigma = m.sigma;
  p.d = m.d;
  p.poles = m.poles;
  p.zeros = m.zeros;
  p.include_d = chart.include_d;
  return p;
}

long ChartPoint::dim() const {
  return (include_d ? 1 : 0) + static_cast<long>(poles.size()) +
         static_cast<long>(zeros.size());
}

cplx ChartPoint::coord(long a) const {
  if (a < 0 || a >= dim()) throw InvalidIndex("chart: coordinate out of range");
  if (include_d) {
    if (a == 0) return d;
    --a;
  }
  const long p = static_cast<long>(poles.size());
  if (a < p) return poles[static_cast<std::size_t>(a)];
  return zeros[static_cast<std::size_t>(a - p)];
}

ChartPoint ChartPoint::with_coord(long a, cplx value) const {
  if (a < 0 || a >= dim()) throw InvalidIndex("chart: coordinate out of range");
  ChartPoint out = *this;
  if (include_d) {
    if (a == 0) {
      out.d = value;
      return out;
    }
    --a;
  }
  const long p = static_cast<long>(poles.size());
  if (a < p)
    out.poles[static_cast<std::size_t>(a)] = value;
  else
    out.zeros[static_cast<std::size_t>(a - p)] = value;
  return out;
}

double ChartPoint::gamma(long a) const {
  if (a < 0 || a >= dim()) throw InvalidIndex("chart: coordinate out of range");
  if (include_d) {
    if (a == 0) return 0.0;
    --a;
  }
  return a < static_cast<long>(poles.size()) ? -1.0 : 1.0;
}

std::string ChartPoint::label(long a) const {
  if (a < 0 || a >= dim()) throw InvalidIndex("chart: coordinate out of range");
  if (include_d) {
    if (a == 0) return "d";
    --a;
  }
  const long p = static_cast<long>(poles.size());
  if (a < p) return "pole[" + std::to_string(a) + "]";
  return "zero[" + std::to_string(a - p) + "]";
}

double c0_value(double sigma, C0 convention) {
  if (!(sigma > 0.0)) throw InvalidInput("c0: sigma must be > 0");
  if (convention == C0::one) return 1.0;
  return 2.0 * std::log(sigma) - std::log(2.0 * pi);
}

cplx transfer_eval(const ArfimaModel& m, cplx z) {
  m.validate();
  if (std::abs(z) < 1e-300) throw InvalidInput("transfer: z must be nonzero");
  const cplx w = 1.0 / z;
  cplx num = 1.0;
  for (cplx mu : m.zeros) num *= 1.0 - mu * w;
  cplx den = 1.0;
  for (cplx la : m.poles) {
    const cplx f = 1.0 - la * w;
    if (std::abs(f) < 1e-14)
      throw PoleHit("transfer: z coincides with a pole of h");
    den *= f;
  }
  cplx frac = 1.0;
  if (m.d != 0.0) {
    const cplx om = 1.0 - w;
    if (std::abs(om) < 1e-14) {
      const double r = std::round(m.d);
      if (std::abs(m.d - r) > 0.0)
        throw BranchPoint("transfer: z = 1 is a branch point for fractional d");
      if (m.d < 0.0) throw PoleHit("transfer: z = 1 is a pole for d < 0");
      frac = 0.0;   // integer d > 0: (1 - z^{-1})^d vanishes
    } else {
      frac = std::pow(om, cplx(m.d));
    }
  }
  return (m.sigma * m.sigma / (2.0 * pi)) * frac * num / den;
}

cplx log_transfer(const ChartPoint& p, cplx w) {
  cplx acc = 2.0 * std::log(p.sigma) - std::log(2.0 * pi);
  if (p.d != 0.0) {
    const cplx om = 1.0 - w;
    if (std::abs(om) < 1e-14)
      throw BranchPoint("log transfer: w = 1 is a branch point when d != 0");
    acc += p.d * std::log(om);
  }
  for (cplx mu : p.zeros) acc += std::log(1.0 - mu * w);
  for (cplx la : p.poles) acc -= std::log(1.0 - la * w);
  return acc;
}

namespace {

CoefficientSeries impulse_core(double sigma, cplx d,
                               const std::vector<cplx>& poles,
                               const std::vector<cplx>& zeros, long terms) {
  if (terms < 1) throw InvalidInput("impulse: terms must be >= 1");

  // fractional binomial: (1-z)^d = sum g_s z^s
  std::vector<cplx> g(static_cast<std::size_t>(terms));
  g[0] = 1.0;
  for (long s = 1; s < terms; ++s)
    g[static_cast<std::size_t>(s)] =
        g[static_cast<std::size_t>(s - 1)] *
        ((static_cast<double>(s - 1) - d) / static_cast<double>(s));

  const auto expand = [](const std::vector<cplx>& roots) {
    std::vector<cplx> c{1.0};
    for (cplx r : roots) {
      c.push_back(0.0);
      for (std::size_t j = c.size() - 1; j > 0; --j) c[j] -= r * c[j - 1];
    }
    return c;
  };
  const std::vector<cplx> b = expand(zeros);
  const std::vector<cplx> a = expand(poles);

  CoefficientSeries out;
  out.kind = SeriesKind::transfer;
  out.coeffs.resize(static_cast<std::size_t>(terms));
  for (long s = 0; s < terms; ++s) {
    cplx u = 0.0;
    const long tb = std::min<long>(s, static_cast<long>(b.size()) - 1);
    for (long t = 0; t <= tb; ++t)
      u += b[static_cast<std::size_t>(t)] * g[static_cast<std::size_t>(s - t)];
    const long ta = std::min<long>(s, static_cast<long>(a.size()) - 1);
    for (long t = 1; t <= ta; ++t)
      u -= a[static_cast<std::size_t>(t)] *
           out.coeffs[static_cast<std::size_t>(s - t)];
    out.coeffs[static_cast<std::size_t>(s)] = u;
  }
  const double gain = sigma * sigma / (2.0 * pi);
  for (auto& h : out.coeffs) h *= gain;
  return out;
}

}   // namespace

CoefficientSeries impulse_response(const ArfimaModel& m, long terms) {
  m.validate();
  return impulse_core(m.sigma, m.d, m.poles, m.zeros, terms);
}

CoefficientSeries impulse_response(const ChartPoint& p, long terms) {
  return impulse_core(p.sigma, p.d, p.poles, p.zeros, terms);
}

CoefficientSeries complex_cepstrum(const ChartPoint& p, long terms, C0 c0) {
  if (terms < 1) throw InvalidInput("cepstrum: terms must be >= 1");
  CoefficientSeries out;
  out.kind = SeriesKind::complex_cepstrum;
  out.coeffs.resize(static_cast<std::size_t>(terms));
  out.coeffs[0] = c0_value(p.sigma, c0);
  std::vector<cplx> lp = p.poles;
  std::vector<cplx> zp = p.zeros;
  for (long s = 1; s < terms; ++s) {
    cplx r = -p.d;
    for (cplx& v : lp) r += v;
    for (cplx& v : zp) r -= v;
    out.coeffs[static_cast<std::size_t>(s)] = r / static_cast<double>(s);
    for (std::size_t i = 0; i < lp.size(); ++i) lp[i] *= p.poles[i];
    for (std::size_t i = 0; i < zp.size(); ++i) zp[i] *= p.zeros[i];
  }
  return out;
}

CoefficientSeries complex_cepstrum(const ArfimaModel& m, long terms, C0 c0) {
  return complex_cepstrum(ChartPoint::of(m), terms, c0);
}

namespace {

std::vector<cplx> circle_log_samples(const ChartPoint& p, long grid,
                                     Exec exec) {
  std::vector<cplx> out(static_cast<std::size_t>(grid));
  const auto sample = [&](long k) {
    const double th = 2.0 * pi * (static_cast<double>(k) + 0.5) /
                      static_cast<double>(grid);
    return log_transfer(p, std::polar(1.0, th));
  };
  if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for num_threads(thread_cap()) schedule(static)
#endif
    for (long k = 0; k < grid; ++k)
      out[static_cast<std::size_t>(k)] = sample(k);
  } else {
    for (long k = 0; k < grid; ++k)
      out[static_cast<std::size_t>(k)] = sample(k);
  }
  return out;
}

// (1/G) sum_k f_k e^{-i s theta_k}, theta_k = 2 pi (k + 1/2) / G: the s-th
// Fourier coefficient of a sampled function of e^{i theta}.  The rotation
// is refreshed from an exact integer angle reduction every 64 steps so
// precision does not degrade with G.
std::vector<cplx> dft_onesided(const std::vector<cplx>& f, long terms,
                               Exec exec) {
  const long g = static_cast<long>(f.size());
  std::vector<cplx> out(static_cast<std::size_t>(terms));
  const auto one = [&](long s) {
    const cplx step = std::polar(1.0, -2.0 * pi * static_cast<double>(s) /
                                          static_cast<double>(g));
    cplx acc = 0.0;
    cplx w = 1.0;
    for (long k = 0; k < g; ++k) {
      if ((k & 63) == 0) {
        const long n = (2 * s * k + s) % (2 * g);   // angle = -pi n / g exactly
        w = std::polar(1.0, -pi * static_cast<double>(n) /
                                 static_cast<double>(g));
      }
      acc += f[static_cast<std::size_t>(k)] * w;
      w *= step;
    }
    return acc / static_cast<double>(g);
  };
  if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for num_threads(thread_cap()) schedule(static)
#endif
    for (long s = 0; s < terms; ++s)
      out[static_cast<std::size_t>(s)] = one(s);
  } else {
    for (long s = 0; s < terms; ++s)
      out[static_cast<std::size_t>(s)] = one(s);
  }
  return out;
}

CoefficientSeries contour_common(const ChartPoint& p, long terms,
                                 const ContourOptions& opt, bool power) {
  if (terms < 1) throw InvalidInput("contour: terms must be >= 1");
  if (opt.grid < 1 || (opt.grid & (opt.grid - 1)) != 0)
    throw InvalidInput("contour: grid must be a power of two");
  if (opt.grid < 4 * terms)
    throw InvalidInput("contour: grid must be >= 4 * terms");
  if (opt.levels < 1) throw InvalidInput("contour: levels must be >= 1");

  // Richardson table over grids G 2^l; rows[r] holds T[l][r] for the
  // current l.  The midpoint-rule error of the branch-point factor is a
  // power series in 1/G, so stage r cancels the 1/G^r term.
  std::vector<std::vector<cplx>> prev;
  std::vector<cplx> best, best_before;
  for (int l = 0; l < opt.levels; ++l) {
    const long g = opt.grid << l;
    auto samples = circle_log_samples(p, g, opt.exec);
    if (power)
      for (auto& v : samples) v = 2.0 * v.real();
    std::vector<std::vector<cplx>> cur;
    cur.push_back(dft_onesided(samples, terms, opt.exec));
    for (int r = 1; r <= l; ++r) {
      const double p2 = std::pow(2.0, r);
      std::vector<cplx> next(static_cast<std::size_t>(terms));
      for (long s = 0; s < terms; ++s)
        next[static_cast<std::size_t>(s)] =
            (p2 * cur[static_cast<std::size_t>(r - 1)]
                     [static_cast<std::size_t>(s)] -
             prev[static_cast<std::size_t>(r - 1)]
                 [static_cast<std::size_t>(s)]) /
            (p2 - 1.0);
      cur.push_back(std::move(next));
    }
    best_before = best;
    best = cur.back();
    prev = std::move(cur);
  }

  if (opt.levels >= 2) {
    double gap = 0.0;
    for (long s = 0; s < terms; ++s)
      gap = std::max(gap, std::abs(best[static_cast<std::size_t>(s)] -
                                   best_before[static_cast<std::size_t>(s)]));
    if (!(gap <= opt.tolerance)) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.3e", gap);
      throw GridTooCoarse(std::string("contour: extrapolation still moving by ") +
                          buf + "; enlarge grid or levels");
    }
  }

  CoefficientSeries out;
  out.kind = power ? SeriesKind::power_cepstrum : SeriesKind::complex_cepstrum;
  out.coeffs = std::move(best);
  return out;
}

}   // namespace

CoefficientSeries cepstrum_contour_oracle(const ChartPoint& p, long terms,
                                          const ContourOptions& opt) {
  return contour_common(p, terms, opt, false);
}

CoefficientSeries power_cepstrum(const ChartPoint& p, long terms,
                                 const ContourOptions& opt) {
  return contour_common(p, terms, opt, true);
}

}
