#include <benchmark/benchmark.h>

#include "khardy/arfima.hpp"
#include "khardy/batch.hpp"
#include "khardy/geometry.hpp"

#include <random>
#include <vector>

namespace {

using namespace khardy;

ArfimaModel bench_model() {
  ArfimaModel m;
  m.d = 0.3;
  m.poles = {{0.5, 0.2}, {-0.3, 0.1}};
  m.zeros = {{0.25, 0.0}};
  return m;
}

void contour_cepstrum(benchmark::State& state, Exec exec) {
  const ChartPoint p = ChartPoint::of(bench_model());
  ContourOptions opt;
  opt.grid = 4096;
  opt.exec = exec;
  for (auto _ : state) {
    auto series = cepstrum_contour_oracle(p, 65, opt);
    benchmark::DoNotOptimize(series.coeffs.data());
  }
}
void BM_contour_serial(benchmark::State& s) { contour_cepstrum(s, Exec::serial); }
void BM_contour_parallel(benchmark::State& s) { contour_cepstrum(s, Exec::parallel); }

void fd_hessian(benchmark::State& state, Exec exec) {
  GeometryConfig cfg;
  cfg.model = bench_model();
  cfg.chart.include_d = true;
  cfg.weight = WeightSequence::power(0.5);
  for (auto _ : state) {
    auto g = metric_fd_oracle(cfg, exec);
    benchmark::DoNotOptimize(g.data());
  }
}
void BM_metric_fd_serial(benchmark::State& s) { fd_hessian(s, Exec::serial); }
void BM_metric_fd_parallel(benchmark::State& s) { fd_hessian(s, Exec::parallel); }

std::vector<ArfimaModel> model_pool(std::size_t n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  std::vector<ArfimaModel> out(n);
  for (auto& m : out) {
    m.poles = {{u(rng), 0.5 * u(rng)}};
    m.zeros = {{0.5 * u(rng), 0.25 * u(rng)}};
  }
  return out;
}

void distances(benchmark::State& state, Exec exec) {
  const auto models = model_pool(24);
  DistanceOptions opt;
  opt.terms = 256;
  opt.exec = exec;
  for (auto _ : state) {
    auto dm = distance_matrix(models, opt);
    benchmark::DoNotOptimize(dm.data());
  }
}
void BM_distance_matrix_serial(benchmark::State& s) { distances(s, Exec::serial); }
void BM_distance_matrix_parallel(benchmark::State& s) { distances(s, Exec::parallel); }

}   // namespace

BENCHMARK(BM_contour_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_contour_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_metric_fd_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_metric_fd_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_distance_matrix_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_distance_matrix_parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
