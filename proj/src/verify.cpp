#include "khardy/verify.hpp"

#include "khardy/batch.hpp"
#include "khardy/errors.hpp"
#include "khardy/hardy.hpp"
#include "khardy/polylog.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace khardy {

namespace {

double u01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

unsigned long long mix64(unsigned long long x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 case_rng(const VerifyOptions& opt, int suite, long i) {
  return std::mt19937_64(
      mix64(opt.seed + 0x10000ULL * static_cast<unsigned long long>(suite) +
            static_cast<unsigned long long>(i)));
}

// max-|difference|; empty charts (no roots, no d slot) compare equal
double mat_residual(const Matrix& a, const Matrix& b) {
  if (a.size() == 0 && b.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

double tensor_residual(const Tensor3& a, const Tensor3& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    worst = std::max(worst, mat_residual(a[k], b[k]));
  return worst;
}

constexpr double kOrders[4] = {0.0, 0.5, 1.0, -1.0};

GeometryConfig order_cfg(const ArfimaModel& m, double order) {
  GeometryConfig cfg;
  cfg.model = m;
  cfg.chart.include_d = order < 1.0;   // g_00 diverges once m >= 1
  cfg.weight = WeightSequence::power(order);
  cfg.transform = Transform::log;
  cfg.tolerance = 1e-12;
  return cfg;
}

template <class Body>
CheckResult run_suite(const char* name, int suite_id, double tol, long cases,
                      const VerifyOptions& opt, Body&& body) {
  std::vector<double> res(static_cast<std::size_t>(cases), 0.0);
  std::vector<std::string> errs(static_cast<std::size_t>(cases));
  if (opt.exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for num_threads(thread_cap()) schedule(dynamic)
#endif
    for (long i = 0; i < cases; ++i) {
      auto rng = case_rng(opt, suite_id, i);
      try {
        res[static_cast<std::size_t>(i)] = body(i, rng);
      } catch (const std::exception& e) {
        errs[static_cast<std::size_t>(i)] = e.what();
      }
    }
  } else {
    for (long i = 0; i < cases; ++i) {
      auto rng = case_rng(opt, suite_id, i);
      try {
        res[static_cast<std::size_t>(i)] = body(i, rng);
      } catch (const std::exception& e) {
        errs[static_cast<std::size_t>(i)] = e.what();
      }
    }
  }
  CheckResult out;
  out.name = name;
  out.tolerance = tol;
  out.cases = cases;
  for (long i = 0; i < cases; ++i) {
    if (!errs[static_cast<std::size_t>(i)].empty()) {
      out.residual = std::numeric_limits<double>::infinity();
      out.note = "case " + std::to_string(i) + ": " +
                 errs[static_cast<std::size_t>(i)];
      break;
    }
    out.residual = std::max(out.residual, res[static_cast<std::size_t>(i)]);
  }
  out.pass = out.note.empty() && out.residual <= tol;
  return out;
}

}   // namespace

ArfimaModel random_model(std::mt19937_64& rng, bool allow_d) {
  ArfimaModel m;
  const long p = static_cast<long>(rng() % 3);
  const long q = static_cast<long>(rng() % 3);
  const auto root = [&rng] {
    const double r =
        u01(rng) < 0.1 ? 0.02 * u01(rng) : 0.85 * std::sqrt(u01(rng));
    return std::polar(r, 2.0 * pi * u01(rng));
  };
  for (long i = 0; i < p; ++i) m.poles.push_back(root());
  for (long i = 0; i < q; ++i) m.zeros.push_back(root());
  if (allow_d && u01(rng) < 0.7) m.d = -0.45 + 0.9 * u01(rng);
  if (u01(rng) < 0.25) m.sigma = 0.5 + 2.0 * u01(rng);
  return m;
}

bool VerifyReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return !checks.empty();
}

std::string VerifyReport::summary() const {
  std::ostringstream os;
  char buf[64];
  for (const auto& c : checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name << ": residual ";
    std::snprintf(buf, sizeof buf, "%.3e", c.residual);
    os << buf << " tolerance ";
    std::snprintf(buf, sizeof buf, "%.3e", c.tolerance);
    os << buf << " cases " << c.cases;
    if (!c.note.empty()) os << " (" << c.note << ")";
    os << "\n";
  }
  return os.str();
}

VerifyReport run_verify(const VerifyOptions& opt) {
  const long n = std::max<long>(opt.models, 8);
  VerifyReport rep;

  rep.checks.push_back(run_suite(
      "cepstrum_oracle", 1, 1e-8, std::max<long>(n, 50), opt,
      [](long, std::mt19937_64& rng) {
        const ArfimaModel m = random_model(rng);
        const ChartPoint p = ChartPoint::of(m);
        const auto a = complex_cepstrum(p, 65, C0::log_gain);
        const auto b = cepstrum_contour_oracle(p, 65);
        double worst = 0.0;
        for (std::size_t s = 0; s < a.coeffs.size(); ++s)
          worst = std::max(worst, std::abs(a.coeffs[s] - b.coeffs[s]));
        return worst;
      }));

  rep.checks.push_back(run_suite(
      "series_vs_closed", 2, 1e-9, n, opt, [](long i, std::mt19937_64& rng) {
        const double ord = kOrders[i % 4];
        ArfimaModel m = random_model(rng);
        if (ord >= 1.0) m.d = 0.0;
        const GeometryConfig cfg = order_cfg(m, ord);
        double worst =
            std::abs(potential_series(cfg) - potential_closed(cfg));
        worst = std::max(worst,
                         mat_residual(metric_series(cfg), metric_closed(cfg)));
        worst = std::max(worst, tensor_residual(connection_series(cfg),
                                                connection_closed(cfg)));
        return worst;
      }));

  rep.checks.push_back(run_suite(
      "closed_vs_fd", 3, 1e-6, n, opt, [&opt](long i, std::mt19937_64& rng) {
        const double ord = kOrders[i % 4];
        ArfimaModel m = random_model(rng);
        if (ord >= 1.0) m.d = 0.0;
        const GeometryConfig cfg = order_cfg(m, ord);
        Matrix closed = metric_closed(cfg);
        if (opt.inject_metric_sign_flip) closed = -closed;
        return mat_residual(closed, metric_fd_oracle(cfg));
      }));

  rep.checks.push_back(run_suite(
      "kahler_hermitian", 4, 1e-6, n, opt, [](long i, std::mt19937_64& rng) {
        const double ord = kOrders[i % 4];
        ArfimaModel m = random_model(rng);
        if (ord >= 1.0) m.d = 0.0;
        return check_kahler(order_cfg(m, ord), Exec::serial).hermitian;
      }));

  rep.checks.push_back(run_suite(
      "kahler_closedness", 5, 1e-6, n, opt, [](long i, std::mt19937_64& rng) {
        const double ord = kOrders[i % 4];
        ArfimaModel m = random_model(rng);
        if (ord >= 1.0) m.d = 0.0;
        return check_kahler(order_cfg(m, ord), Exec::serial).closedness;
      }));

  rep.checks.push_back(run_suite(
      "connection_fd", 6, 1e-4, std::min<long>(n, 12), opt,
      [](long i, std::mt19937_64& rng) {
        const double ord = kOrders[i % 4];
        ArfimaModel m = random_model(rng);
        if (ord >= 1.0) m.d = 0.0;
        const GeometryConfig cfg = order_cfg(m, ord);
        return tensor_residual(connection_series(cfg),
                               connection_fd_oracle(cfg));
      }));

  rep.checks.push_back(run_suite(
      "metric_psd", 7, 1e-10, n, opt, [](long i, std::mt19937_64& rng) {
        const ArfimaModel m = random_model(rng);
        GeometryConfig cfg;
        cfg.model = m;
        cfg.transform = Transform::log;
        cfg.tolerance = 1e-12;
        switch (i % 6) {
          case 0: cfg.weight = WeightSequence::hardy(); break;
          case 1: cfg.weight = WeightSequence::power(0.5); break;
          case 2: cfg.weight = WeightSequence::bergman(); break;
          case 3: cfg.weight = WeightSequence::dirichlet(); break;
          case 4: cfg.weight = WeightSequence::sobolev(1); break;
          default:
            cfg.weight = WeightSequence::custom(
                {1.0, 0.8, 0.64, 0.512, 0.4096},
                WeightSequence::Extension::repeat_last);
        }
        // a d slot needs sum omega_s/s^2 finite
        cfg.chart.include_d =
            cfg.weight.family() != WeightSequence::Family::dirichlet &&
            cfg.weight.family() != WeightSequence::Family::sobolev;
        const Matrix g = metric_series(cfg);
        if (g.rows() == 0) return 0.0;
        Eigen::SelfAdjointEigenSolver<Matrix> es(g);
        return std::max(0.0, -es.eigenvalues().minCoeff());
      }));

  {
    auto pool_rng = case_rng(opt, 8, 0);
    std::vector<CoefficientSeries> pool;
    for (long i = 0; i < 60; ++i)
      pool.push_back(
          complex_cepstrum(ChartPoint::of(random_model(pool_rng)), 128));
    const auto& w = WeightSequence::hardy();
    rep.checks.push_back(run_suite(
        "distance_axioms", 8, 1e-12, opt.triples, opt,
        [&pool, &w](long, std::mt19937_64& rng) {
          const auto pick = [&] {
            return pool[static_cast<std::size_t>(rng() % pool.size())];
          };
          const auto a = pick(), b = pick(), c = pick();
          const double ab = weighted_distance(a, b, w);
          const double ba = weighted_distance(b, a, w);
          const double aa = weighted_distance(a, a, w);
          const double bc = weighted_distance(b, c, w);
          const double ac = weighted_distance(a, c, w);
          double worst = std::max(std::abs(ab - ba), aa);
          worst = std::max(worst, ac - ab - bc);
          worst = std::max(worst, ab - ac - bc);
          worst = std::max(worst, bc - ab - ac);
          return worst;
        }));
  }

  rep.checks.push_back(run_suite(
      "m0_reproduction", 9, 1e-10, n, opt, [](long, std::mt19937_64& rng) {
        const ArfimaModel m = random_model(rng);
        const GeometryConfig cfg = order_cfg(m, 0.0);
        const ChartPoint c = cfg.point();
        const Matrix g = metric_closed(cfg);
        const long dim = c.dim();
        Matrix ref(dim, dim);
        const auto szego_edge = [](cplx x) {
          return x == 0.0 ? cplx(1.0) : -std::log(1.0 - x) / x;
        };
        for (long a = 0; a < dim; ++a)
          for (long b = 0; b < dim; ++b) {
            const double ga = c.gamma(a), gb = c.gamma(b);
            if (ga == 0.0 && gb == 0.0)
              ref(a, b) = pi * pi / 6.0;
            else if (ga == 0.0)
              ref(a, b) = gb * szego_edge(std::conj(c.coord(b)));
            else if (gb == 0.0)
              ref(a, b) = ga * szego_edge(c.coord(a));
            else
              ref(a, b) =
                  ga * gb / (1.0 - c.coord(a) * std::conj(c.coord(b)));
          }
        return mat_residual(g, ref);
      }));

  rep.checks.push_back(run_suite(
      "m1_reproduction", 10, 1e-5, std::min<long>(n, 20), opt,
      [](long, std::mt19937_64& rng) {
        // AR(1) block of the m=1 metric is half the Bergman disk metric;
        // |lambda| <= 0.6 keeps the kernel FD check inside its accuracy
        const cplx lambda =
            std::polar(0.6 * std::sqrt(u01(rng)), 2.0 * pi * u01(rng));
        ArfimaModel m;
        m.poles.push_back(lambda);
        GeometryConfig cfg = order_cfg(m, 1.0);
        const Matrix g = metric_closed(cfg);
        const cplx bergman = bergman_metric_check(lambda, lambda);
        return std::abs(g(0, 0) - 0.5 * bergman);
      }));

  return rep;
}

}
