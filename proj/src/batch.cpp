#include "khardy/batch.hpp"

#include "khardy/errors.hpp"
#include "khardy/hardy.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <atomic>
#include <exception>
#include <stdexcept>
#include <string>
#include <utility>

namespace khardy {

CoefficientSeries transform_series(const ArfimaModel& m,
                                   const DistanceOptions& opt) {
  switch (opt.transform) {
    case Transform::identity:
      return impulse_response(m, opt.terms);
    case Transform::log:
      return complex_cepstrum(m, opt.terms, opt.c0);
    case Transform::log_squared_modulus:
      return power_cepstrum(ChartPoint::of(m), opt.terms, opt.contour);
  }
  throw InvalidInput("transform: unknown");
}

double pair_distance(const ArfimaModel& a, const ArfimaModel& b,
                     const DistanceOptions& opt) {
  return weighted_distance(transform_series(a, opt), transform_series(b, opt),
                           opt.weight);
}

Eigen::MatrixXd distance_matrix(const std::vector<ArfimaModel>& models,
                                const DistanceOptions& opt) {
  const long n = static_cast<long>(models.size());
  std::vector<CoefficientSeries> tf;
  tf.reserve(models.size());
  for (const auto& m : models) tf.push_back(transform_series(m, opt));

  std::vector<std::pair<long, long>> pairs;
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<double> dist(pairs.size());

  const long tasks = static_cast<long>(pairs.size());
  if (opt.exec == Exec::parallel) {
    std::exception_ptr err;
    std::atomic<bool> failed{false};
#ifdef _OPENMP
#pragma omp parallel for num_threads(thread_cap()) schedule(static)
#endif
    for (long t = 0; t < tasks; ++t) {
      if (failed.load(std::memory_order_relaxed)) continue;
      try {
        const auto& [i, j] = pairs[static_cast<std::size_t>(t)];
        dist[static_cast<std::size_t>(t)] =
            weighted_distance(tf[static_cast<std::size_t>(i)],
                              tf[static_cast<std::size_t>(j)], opt.weight);
      } catch (...) {
#ifdef _OPENMP
#pragma omp critical(khardy_batch_err)
#endif
        if (!failed.exchange(true)) err = std::current_exception();
      }
    }
    if (failed.load()) std::rethrow_exception(err);
  } else {
    for (long t = 0; t < tasks; ++t) {
      const auto& [i, j] = pairs[static_cast<std::size_t>(t)];
      dist[static_cast<std::size_t>(t)] =
          weighted_distance(tf[static_cast<std::size_t>(i)],
                            tf[static_cast<std::size_t>(j)], opt.weight);
    }
  }

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (long t = 0; t < tasks; ++t) {
    const auto& [i, j] = pairs[static_cast<std::size_t>(t)];
    out(i, j) = dist[static_cast<std::size_t>(t)];
    out(j, i) = dist[static_cast<std::size_t>(t)];
  }

  for (long k = 0; k < n; ++k)
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j)
        if (out(i, j) > out(i, k) + out(k, j) + 1e-12)
          throw std::logic_error(
              "distance_matrix: triangle inequality violated at (" +
              std::to_string(i) + ", " + std::to_string(j) + ", " +
              std::to_string(k) + ")");
  return out;
}

}
