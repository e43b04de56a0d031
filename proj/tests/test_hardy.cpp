#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "khardy/arfima.hpp"
#include "khardy/errors.hpp"
#include "khardy/hardy.hpp"
#include "khardy/weights.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

using namespace khardy;

namespace {

cplx sample_disk(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::polar(radius * std::sqrt(u(rng)), 2.0 * pi * u(rng));
}

CoefficientSeries series_of(std::vector<cplx> coeffs) {
  CoefficientSeries s;
  s.coeffs = std::move(coeffs);
  return s;
}

}   // namespace

TEST_CASE("weight families") {
  const auto h = WeightSequence::hardy();
  CHECK(h(0) == 1.0);
  CHECK(h(17) == 1.0);
  CHECK(h.first_index() == 0);
  CHECK(h.growth_degree() == 0.0);

  const auto s1 = WeightSequence::sobolev(1);
  CHECK(s1(0) == 1.0);
  CHECK(s1(3) == 10.0);   // 1 + 3^2
  CHECK(s1.growth_degree() == 2.0);
  CHECK(WeightSequence::sobolev(0)(5) == 1.0);
  CHECK_THROWS_AS(WeightSequence::sobolev(-1), InvalidInput);

  const auto d = WeightSequence::dirichlet();
  CHECK(d(4) == 4.0);
  CHECK(!d.maybe(0).has_value());
  CHECK_THROWS_AS(d(0), InvalidIndex);
  CHECK(d.first_index() == 1);

  const auto b = WeightSequence::bergman();
  CHECK(b(0) == 1.0);
  CHECK(b(3) == 0.25);

  const auto p = WeightSequence::power(0.5);
  CHECK(p(4) == 2.0);
  CHECK(!p.maybe(0).has_value());
  CHECK(WeightSequence::power(0.0)(0) == 1.0);

  const auto c = WeightSequence::custom({2.0, 1.0, 0.5});
  CHECK(c(2) == 0.5);
  CHECK(!c.maybe(3).has_value());
  const auto cr = WeightSequence::custom({2.0, 1.0, 0.5},
                                         WeightSequence::Extension::repeat_last);
  CHECK(cr(9) == 0.5);
  CHECK_THROWS_AS(WeightSequence::custom({}), InvalidInput);
  CHECK_THROWS_AS(WeightSequence::custom({1.0, -0.5}), InvalidInput);
}

TEST_CASE("cepstrum norm of AR(1)") {
  // lambda = 0.5: c_s = 0.5^s / s, so the s >= 1 hardy mass is Li_2(0.25)
  const ArfimaModel m{2.5066282746310002, 0.0, {{0.5, 0.0}}, {}};
  const auto c = complex_cepstrum(m, 64, C0::one);
  const auto w = WeightSequence::hardy();
  CHECK(weighted_norm(c, w) ==
        doctest::Approx(1.1259008122755453).epsilon(1e-14));

  auto tail_only = c;
  tail_only.coeffs[0] = 0.0;
  CHECK(weighted_norm(tail_only, w) ==
        doctest::Approx(0.51735156236618500).epsilon(1e-14));
}

TEST_CASE("stationary variance identity") {
  // hardy norm of the impulse response: sigma^4/(4 pi^2 (1-|lambda|^2))
  ArfimaModel m;
  m.poles = {{0.6, 0.0}};
  const auto h = impulse_response(m, 512);
  const double got = weighted_norm(h, WeightSequence::hardy());
  const double want = std::sqrt(
      std::pow(m.sigma, 4) / (4.0 * pi * pi * (1.0 - 0.36)));
  CHECK(got == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("distance between AR(1) models") {
  const ArfimaModel a{2.5066282746310002, 0.0, {{0.5, 0.0}}, {}};
  const ArfimaModel b{2.5066282746310002, 0.0, {{0.25, 0.0}}, {}};
  const auto ca = complex_cepstrum(a, 256, C0::one);
  const auto cb = complex_cepstrum(b, 256, C0::one);
  const double got = weighted_distance(ca, cb, WeightSequence::hardy());
  CHECK(got == doctest::Approx(0.26995851839822373).epsilon(1e-14));
  CHECK(weighted_distance(cb, ca, WeightSequence::hardy()) == got);
  CHECK(weighted_distance(ca, ca, WeightSequence::hardy()) == 0.0);
}

TEST_CASE("length mismatch zero-pads") {
  const auto a = series_of({1.0, 0.5, 0.25});
  const auto b = series_of({1.0, 0.5, 0.25, 0.0, 0.0});
  const auto c = series_of({1.0, 0.5, 0.25, 0.125});
  const auto w = WeightSequence::hardy();
  CHECK(weighted_distance(a, b, w) == 0.0);
  CHECK(weighted_distance(a, c, w) == 0.125);
}

TEST_CASE("undefined weights demand zero coefficients") {
  const auto w = WeightSequence::custom({1.0, 1.0});
  CHECK(weighted_norm(series_of({1.0, 1.0, 0.0, 0.0}), w) ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(weighted_norm(series_of({1.0, 1.0, 1e-30}), w),
                  IncompatibleWeight);
  // differences may cancel beyond the table
  const auto a = series_of({1.0, 0.0, 0.7});
  const auto b = series_of({0.0, 0.0, 0.7});
  CHECK(weighted_distance(a, b, w) == 1.0);
  CHECK_THROWS_AS(weighted_distance(a, series_of({0.0, 0.0}), w),
                  IncompatibleWeight);
  // dirichlet is a semi-norm: index 0 must be zero
  CHECK_THROWS_AS(weighted_norm(series_of({1.0, 1.0}),
                                WeightSequence::dirichlet()),
                  IncompatibleWeight);
  CHECK(weighted_norm(series_of({0.0, 2.0}), WeightSequence::dirichlet()) ==
        2.0);
}

TEST_CASE("kernel closed forms") {
  const cplx u(0.5, 0.0), v(0.3, -0.2);
  const cplx w = std::conj(u) * v;

  CHECK(std::abs(reproducing_kernel(WeightSequence::hardy(), u, v) -
                 1.0 / (1.0 - w)) <= 1e-14);
  CHECK(std::abs(reproducing_kernel(WeightSequence::bergman(), u, v) -
                 1.0 / ((1.0 - w) * (1.0 - w))) <= 1e-14);
  CHECK(std::abs(reproducing_kernel(WeightSequence::dirichlet(), u, v) -
                 (-std::log(1.0 - w) / w)) <= 1e-14);
  CHECK(reproducing_kernel(WeightSequence::dirichlet(), 0.0, v) == cplx(1.0));
  // power m = 0 carries the extra omega_0 = 1 slot
  CHECK(std::abs(reproducing_kernel(WeightSequence::power(0.0), u, u) -
                 cplx(4.0 / 3.0)) <= 1e-14);
  CHECK_THROWS_AS(reproducing_kernel(WeightSequence::custom({1.0}), u, v),
                  IncompatibleWeight);
}

TEST_CASE("kernel properties") {
  std::mt19937_64 rng(20260815);
  const WeightSequence families[] = {
      WeightSequence::hardy(), WeightSequence::bergman(),
      WeightSequence::dirichlet(), WeightSequence::power(1.5),
      WeightSequence::power(0.0)};
  for (const auto& w : families) {
    for (int i = 0; i < 25; ++i) {
      const cplx u = sample_disk(rng, 0.85);
      const cplx v = sample_disk(rng, 0.85);
      const cplx kuv = reproducing_kernel(w, u, v);
      // conjugate symmetry and agreement with the truncated series
      CHECK(std::abs(kuv - std::conj(reproducing_kernel(w, v, u))) <= 1e-12);
      CHECK(std::abs(kuv - reproducing_kernel_series(w, u, v, 2048)) <=
            1e-10 * std::max(1.0, std::abs(kuv)));
      // reproducing property against an explicit polynomial
      const std::vector<cplx> f = {0.0, cplx(0.3, 0.1), cplx(-0.2, 0.05), 0.4};
      cplx inner = 0.0, at_u = 0.0;
      for (std::size_t s = 0; s < f.size(); ++s) {
        at_u += f[s] * std::pow(u, static_cast<double>(s));
        if (const auto ws = w.maybe(static_cast<long>(s)); ws && *ws > 0.0) {
          // k_u coefficients are conj(u)^s / omega_s
          const cplx ks = std::pow(std::conj(u), static_cast<double>(s)) / *ws;
          inner += *ws * f[s] * std::conj(ks);
        }
      }
      // f_0 = 0 keeps families with undefined omega_0 reproducing too
      CHECK(std::abs(inner - at_u) <= 1e-12);
    }
  }
}

TEST_CASE("kernel gram matrices stay positive semidefinite") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const cplx pts[3] = {sample_disk(rng, 0.8), sample_disk(rng, 0.8),
                         sample_disk(rng, 0.8)};
    const auto w = trial % 2 ? WeightSequence::bergman()
                             : WeightSequence::hardy();
    cplx g[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        g[i][j] = reproducing_kernel(w, pts[i], pts[j]);
    // 1x1, 2x2, 3x3 leading principal minors of a PSD hermitian matrix
    const double m1 = g[0][0].real();
    const double m2 = (g[0][0] * g[1][1] - g[0][1] * g[1][0]).real();
    const cplx m3 = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) -
                    g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0]) +
                    g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    CHECK(m1 >= 0.0);
    CHECK(m2 >= -1e-12);
    CHECK(m3.real() >= -1e-12);
    CHECK(std::abs(m3.imag()) <= 1e-12);
  }
}

TEST_CASE("bergman metric finite-difference check") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 30; ++i) {
    const cplx u = sample_disk(rng, 0.7);
    const cplx v = sample_disk(rng, 0.7);
    const cplx w = std::conj(u) * v;
    const cplx want = 2.0 / ((1.0 - w) * (1.0 - w));
    CHECK(std::abs(bergman_metric_check(u, v) - want) <= 1e-6);
  }
}
