// Acceptance gate: nine independent reproduction and property checks, one
// PASS/FAIL line each, exit 0 only when every check holds at its stated
// tolerance.  Expected values come from closed forms or from oracle routes
// that share no code with the quantity under test.

#include "khardy/batch.hpp"
#include "khardy/errors.hpp"
#include "khardy/geometry.hpp"
#include "khardy/hardy.hpp"
#include "khardy/json_io.hpp"
#include "khardy/polylog.hpp"
#include "khardy/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace khardy;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = 0.5772156649015329;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    worst = std::max(worst, max_abs_diff(a[k], b[k]));
  return worst;
}

ArfimaModel make_model(double d, std::vector<cplx> poles,
                       std::vector<cplx> zeros) {
  ArfimaModel m;
  m.d = d;
  m.poles = std::move(poles);
  m.zeros = std::move(zeros);
  return m;
}

// ---------------------------------------------------------------- check 1

Outcome m0_metric_reproduction() {
  GeometryConfig cfg;
  cfg.model = make_model(0.2, {{0.5, 0.0}, {0.3, 0.2}}, {{0.25, 0.0}});
  cfg.weight = WeightSequence::power(0.0);

  const ChartPoint pt = cfg.point();
  const long n = pt.dim();
  Matrix pattern(n, n);
  pattern(0, 0) = kPi * kPi / 6.0;
  for (long b = 1; b < n; ++b) {
    const cplx xc = std::conj(pt.coord(b));
    pattern(0, b) = -pt.gamma(b) * std::log(1.0 - xc) / xc;
    pattern(b, 0) = std::conj(pattern(0, b));
  }
  for (long a = 1; a < n; ++a)
    for (long b = 1; b < n; ++b)
      pattern(a, b) = pt.gamma(a) * pt.gamma(b) /
                      (1.0 - pt.coord(a) * std::conj(pt.coord(b)));

  const Matrix closed = metric_closed(cfg);
  const double vs_pattern = max_abs_diff(closed, pattern);
  const double vs_series = max_abs_diff(closed, metric_series(cfg));
  const double vs_fd =
      max_abs_diff(closed, metric_fd_oracle(cfg, Exec::parallel));
  return {vs_pattern <= 1e-12 && vs_series <= 1e-9 && vs_fd <= 1e-6,
          "pattern " + num(vs_pattern) + ", series " + num(vs_series) +
              ", fd " + num(vs_fd)};
}

// ---------------------------------------------------------------- check 2

Outcome m1_mutual_information() {
  GeometryConfig cfg;
  cfg.model = make_model(0.0, {{0.5, 0.0}}, {{0.25, 0.0}});
  cfg.chart.include_d = false;
  cfg.weight = WeightSequence::power(1.0);

  const double lam = 0.5, mu = 0.25;
  const double k_expected = std::log((1.0 - lam * mu) * (1.0 - mu * lam) /
                                     ((1.0 - lam * lam) * (1.0 - mu * mu)));
  const double k_closed = potential_closed(cfg);
  const double k_series = potential_series(cfg);
  const double pot_err = std::max(std::abs(k_closed - k_expected),
                                  std::abs(k_closed - k_series));

  const ChartPoint pt = cfg.point();
  const long n = pt.dim();
  Matrix metric_pattern(n, n);
  Tensor3 conn_pattern(static_cast<std::size_t>(n), Matrix::Zero(n, n));
  for (long a = 0; a < n; ++a)
    for (long b = 0; b < n; ++b) {
      const cplx prod = pt.coord(a) * std::conj(pt.coord(b));
      const double sign = pt.gamma(a) * pt.gamma(b);
      metric_pattern(a, b) = sign / ((1.0 - prod) * (1.0 - prod));
      conn_pattern[static_cast<std::size_t>(b)](a, a) =
          sign * 2.0 * std::conj(pt.coord(b)) /
          ((1.0 - prod) * (1.0 - prod) * (1.0 - prod));
    }

  const double metric_err =
      std::max(max_abs_diff(metric_closed(cfg), metric_pattern),
               max_abs_diff(metric_series(cfg), metric_pattern));
  const double conn_closed_err =
      max_abs_diff(connection_closed(cfg), conn_pattern);
  const double conn_fd_err =
      max_abs_diff(connection_fd_oracle(cfg, Exec::parallel), conn_pattern);
  return {pot_err <= 1e-12 && metric_err <= 1e-10 &&
              conn_closed_err <= 1e-10 && conn_fd_err <= 1e-4,
          "potential " + num(pot_err) + ", metric " + num(metric_err) +
              ", connection closed " + num(conn_closed_err) + ", fd " +
              num(conn_fd_err)};
}

// ---------------------------------------------------------------- check 3

Outcome kahler_condition() {
  std::mt19937_64 rng(20260815);
  double worst = 0.0;
  long cases = 0;
  for (int i = 0; i < 100; ++i) {
    const ArfimaModel m = random_model(rng);
    for (double order : {0.0, 0.5, -1.0}) {
      GeometryConfig cfg;
      cfg.model = m;
      cfg.weight = WeightSequence::power(order);
      const KahlerResidual r = check_kahler(cfg, Exec::parallel);
      worst = std::max({worst, r.hermitian, r.closedness});
      ++cases;
    }
    // order 1 needs d = 0: the d block of the metric is the divergent
    // harmonic sum otherwise
    GeometryConfig cfg;
    cfg.model = m;
    cfg.model.d = 0.0;
    cfg.chart.include_d = false;
    cfg.weight = WeightSequence::power(1.0);
    const KahlerResidual r = check_kahler(cfg, Exec::parallel);
    worst = std::max({worst, r.hermitian, r.closedness});
    ++cases;
  }
  return {worst <= 1e-6,
          std::to_string(cases) + " cases, worst residual " + num(worst)};
}

// ---------------------------------------------------------------- check 4

Outcome transform_metric_routes() {
  std::mt19937_64 rng(40260815);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const ArfimaModel m = random_model(rng);
    for (int t = 0; t < 3; ++t) {
      GeometryConfig cfg;
      cfg.model = m;
      if (t == 0) {
        cfg.transform = Transform::identity;
        cfg.weight = WeightSequence::bergman();
      } else if (t == 1) {
        cfg.transform = Transform::log;
        cfg.weight = WeightSequence::power(0.5);
      } else {
        cfg.transform = Transform::log_squared_modulus;
        cfg.weight = WeightSequence::power(0.0);
        cfg.grid = 512;
        cfg.truncation = 127;
      }
      worst = std::max(worst, max_abs_diff(metric_series(cfg),
                                           metric_fd_oracle(cfg,
                                                            Exec::parallel)));
    }
  }
  return {worst <= 1e-5, "60 cases, worst entry " + num(worst)};
}

// ---------------------------------------------------------------- check 5

Outcome cepstrum_routes() {
  std::mt19937_64 rng(50260815);
  ContourOptions copt;
  copt.exec = Exec::parallel;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    ArfimaModel m = random_model(rng);
    if (i % 5 == 0) m.d = 0.0;
    const ChartPoint p = ChartPoint::of(m);
    const auto analytic = complex_cepstrum(p, 65, C0::log_gain);
    const auto contour = cepstrum_contour_oracle(p, 65, copt);
    for (long s = 0; s <= 64; ++s)
      worst =
          std::max(worst, std::abs(analytic.coeffs[static_cast<std::size_t>(
                                       s)] -
                                   contour.coeffs[static_cast<std::size_t>(
                                       s)]));
  }
  return {worst <= 1e-8, "200 models, s <= 64, worst " + num(worst)};
}

// ---------------------------------------------------------------- check 6

Outcome divergence_guard_check() {
  // fractional d against a summable-harmonic weight must refuse
  GeometryConfig div_cfg;
  div_cfg.model = make_model(0.3, {{0.5, 0.0}}, {});
  div_cfg.weight = WeightSequence::power(1.0);
  bool guarded =
      divergence_guard(div_cfg.model, div_cfg.chart, div_cfg.weight) ==
      Finiteness::divergent;
  bool threw = false;
  try {
    potential_series(div_cfg);
  } catch (const Divergent&) {
    threw = true;
  }

  // the divergence is the harmonic sum: dirichlet-weighted partial sums of
  // the pure-d cepstrum grow like d^2 (log N + gamma)
  const ArfimaModel pure_d = make_model(0.3, {}, {});
  const long n_terms = 1'000'000;
  const auto cep = complex_cepstrum(pure_d, n_terms + 1, C0::log_gain);
  const double norm = weighted_norm(cep, WeightSequence::dirichlet());
  const double partial = norm * norm;
  const double dd = 0.3 * 0.3;
  const double harmonic_model =
      dd * (std::log(static_cast<double>(n_terms)) + kEulerGamma);
  const bool grows = partial >= 10.0 * dd &&
                     std::abs(partial - harmonic_model) <= 0.01 * partial;

  // d = 0 with a steep weight stays finite and matches the closed form
  GeometryConfig fin_cfg;
  fin_cfg.model = make_model(0.0, {{0.5, 0.0}}, {{0.25, 0.0}});
  fin_cfg.chart.include_d = false;
  fin_cfg.weight = WeightSequence::power(3.0);
  const double closed = potential_closed(fin_cfg);
  const double series = potential_series(fin_cfg);
  const bool finite_ok = std::abs(closed - series) <= 1e-9;

  return {guarded && threw && grows && finite_ok,
          "guard " + std::string(guarded && threw ? "ok" : "MISSED") +
              ", partial sum " + num(partial) + " vs harmonic model " +
              num(harmonic_model) + ", m=3 closed|series " +
              num(std::abs(closed - series))};
}

// ---------------------------------------------------------------- check 7

Outcome distance_axioms() {
  std::mt19937_64 rng(70260815);
  DistanceOptions opt;
  std::vector<CoefficientSeries> pool;
  std::vector<ArfimaModel> models;
  for (int i = 0; i < 60; ++i) {
    models.push_back(random_model(rng));
    pool.push_back(transform_series(models.back(), opt));
  }
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  double min_slack = 0.0;
  bool exact = true;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t i = pick(rng), j = pick(rng), k = pick(rng);
    const double dij = weighted_distance(pool[i], pool[j], opt.weight);
    const double dji = weighted_distance(pool[j], pool[i], opt.weight);
    const double djk = weighted_distance(pool[j], pool[k], opt.weight);
    const double dik = weighted_distance(pool[i], pool[k], opt.weight);
    exact = exact && dij == dji;
    exact = exact && weighted_distance(pool[i], pool[i], opt.weight) == 0.0;
    // zero distance exactly when the coefficient sequences coincide
    bool same = true;
    for (std::size_t s = 0; s < pool[i].coeffs.size(); ++s)
      same = same && pool[i].coeffs[s] == pool[j].coeffs[s];
    exact = exact && (dij == 0.0) == same;
    min_slack = std::min(min_slack, dij + djk - dik);
  }
  return {exact && min_slack >= -1e-12,
          std::string(exact ? "symmetry+identity exact" : "EXACTNESS LOST") +
              ", min triangle slack " + num(min_slack)};
}

// ---------------------------------------------------------------- check 8

Outcome kernel_closed_forms() {
  std::mt19937_64 rng(80260815);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto sample = [&](double radius) {
    return std::polar(radius * std::sqrt(unit(rng)), angle(rng));
  };

  const WeightSequence families[] = {
      WeightSequence::hardy(), WeightSequence::bergman(),
      WeightSequence::power(0.5), WeightSequence::power(2.0)};
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const cplx u = sample(0.85), v = sample(0.85);
    for (const auto& w : families)
      worst = std::max(worst, std::abs(reproducing_kernel(w, u, v) -
                                       reproducing_kernel_series(w, u, v,
                                                                 2048)));
  }

  double worst_fd = 0.0;
  for (int i = 0; i < 25; ++i) {
    const cplx u = sample(0.7), v = sample(0.7);
    const cplx denom = 1.0 - std::conj(u) * v;
    worst_fd = std::max(worst_fd, std::abs(bergman_metric_check(u, v) -
                                           2.0 / (denom * denom)));
  }
  return {worst <= 1e-10 && worst_fd <= 1e-6,
          "closed|series " + num(worst) + ", bergman fd " + num(worst_fd)};
}

// ---------------------------------------------------------------- check 9

Outcome polylog_invariants() {
  std::mt19937_64 rng(90260815);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double tol = 1e-14;

  // z d/dz by a four-point Wirtinger cross refined once in h; the cross
  // cancels the h^2 term, Richardson the h^4 term, so the branch-point
  // derivative growth at |1 - z| = 0.1 stays inside the budget
  const auto derivative = [&](double order, cplx z) {
    const auto cross = [&](double h) {
      const cplx ih(0.0, h);
      return (polylog(order, z + h, tol) - polylog(order, z - h, tol)) /
                 (2.0 * h) +
             (polylog(order, z + ih, tol) - polylog(order, z - ih, tol)) /
                 (2.0 * ih);
    };
    const double h = 4e-4;
    return (16.0 * cross(h / 2.0) - cross(h)) / 30.0;
  };

  double worst_rec = 0.0;
  for (int i = 0; i < 100; ++i) {
    const cplx z = std::polar(0.9 * std::sqrt(unit(rng)), angle(rng));
    for (double order : {-2.0, -1.0, 0.0, 1.0, 2.0})
      worst_rec = std::max(worst_rec,
                           std::abs(polylog(order - 1.0, z, tol) -
                                    z * derivative(order, z)));
  }

  double worst_closed = 0.0;
  for (int i = 0; i < 50; ++i) {
    const cplx z = std::polar(0.9 * std::sqrt(unit(rng)), angle(rng));
    for (double order : {0.0, -1.0, -2.0, -3.0}) {
      cplx direct = 0.0;
      cplx zs = 1.0;
      for (long s = 1; s <= 2000; ++s) {
        zs *= z;
        direct += zs * std::pow(static_cast<double>(s), -order);
      }
      worst_closed =
          std::max(worst_closed, std::abs(polylog(order, z, tol) - direct));
    }
  }

  bool monotone = true;
  for (double order : {0.0, 0.5, 1.0, 2.0}) {
    double prev = 0.0;
    for (double x = 0.02; x <= 0.9; x += 0.02) {
      const double cur = std::abs(polylog(order, x, tol));
      monotone = monotone && cur > prev;
      prev = cur;
    }
  }

  const double worst_zeta = std::max(
      {std::abs(zeta(2.0) - kPi * kPi / 6.0),
       std::abs(zeta(4.0) - kPi * kPi * kPi * kPi / 90.0),
       std::abs(zeta(1.5) - 2.6123753486854883)});
  bool zeta_domain = false;
  try {
    zeta(1.0);
  } catch (const InvalidInput&) {
    zeta_domain = true;
  }
  const double worst_value = std::max(
      {std::abs(polylog(0.0, 0.5, tol) - 1.0),
       std::abs(polylog(2.0, 1.0, tol) - kPi * kPi / 6.0),
       std::abs(polylog(1.0, 0.5, tol) - std::log(2.0)),
       std::abs(polylog(-1.0, 0.5, tol) - 2.0)});

  return {worst_rec <= 1e-8 && worst_closed <= 1e-10 && monotone &&
              worst_zeta <= 1e-12 && zeta_domain && worst_value <= 1e-12,
          "recurrence " + num(worst_rec) + ", closed " + num(worst_closed) +
              ", zeta " + num(worst_zeta) +
              (monotone ? "" : ", MONOTONICITY LOST") +
              (zeta_domain ? "" : ", DOMAIN CHECK LOST")};
}

}   // namespace

int main(int, char**) {
  struct Check {
    const char* name;
    std::function<Outcome()> run;
    double budget_s;   // 0 = no per-check budget
  };
  const Check checks[] = {
      {"m=0 metric reproduction", m0_metric_reproduction, 1.0},
      {"m=1 mutual-information geometry", m1_mutual_information, 1.0},
      {"Kahler condition residuals", kahler_condition, 20.0},
      {"transform family metric routes", transform_metric_routes, 10.0},
      {"cepstrum analytic vs contour", cepstrum_routes, 5.0},
      {"divergence guard", divergence_guard_check, 0.0},
      {"distance axioms", distance_axioms, 0.0},
      {"kernel closed forms", kernel_closed_forms, 0.0},
      {"polylog engine invariants", polylog_invariants, 0.0},
  };

  bool all_pass = true;
  double total = 0.0;
  for (std::size_t i = 0; i < std::size(checks); ++i) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      out = checks[i].run();
    } catch (const std::exception& e) {
      out = {false, std::string("unexpected exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      start)
            .count();
    total += secs;
    if (checks[i].budget_s > 0.0 && secs >= checks[i].budget_s) {
      out.pass = false;
      out.detail += ", over the " + num(checks[i].budget_s) + " s budget";
    }
    std::printf("%s %zu %s: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL",
                i + 1, checks[i].name, out.detail.c_str(), secs);
    all_pass = all_pass && out.pass;
  }
  if (total >= 60.0) {
    std::printf("FAIL total runtime %.1f s exceeds 60 s\n", total);
    all_pass = false;
  }
  return all_pass ? 0 : 1;
}
