#pragma once

#include "khardy/arfima.hpp"
#include "khardy/core.hpp"
#include "khardy/series.hpp"
#include "khardy/weights.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace khardy {

// Which functional of the filter feeds the weighted norm:
//   identity             f_s = h_s, the impulse response
//   log                  f_s = c_s, the complex cepstrum
//   log_squared_modulus  f_s = p_s, the power cepstrum, estimated on a
//                        fixed contour grid that is part of the
//                        functional's definition
enum class Transform { identity, log, log_squared_modulus };

using Matrix = Eigen::MatrixXcd;

// connection[k](i, j) = Gamma_{ij, conj(k)}; symmetric in (i, j).
using Tensor3 = std::vector<Matrix>;

struct GeometryConfig {
  ArfimaModel model;
  CoordinateChart chart;
  WeightSequence weight = WeightSequence::power(0.0);
  Transform transform = Transform::log;
  C0 c0 = C0::one;
  long truncation = 4096;       // top retained series index
  double tolerance = 1e-10;     // absolute tail target for adaptive series
  double fd_step = 1e-4;        // inner step of the finite-difference oracles
  double fd_step_outer = 1e-3;  // outer step for third derivatives
  long grid = 2048;             // contour grid for log_squared_modulus

  void validate() const;
  ChartPoint point() const { return ChartPoint::of(model, chart); }
};

enum class Finiteness { finite, divergent, unknown };

// Convergence verdict for the weighted potential of `model` under `weight`.
// The |d|^2 sum_s omega_s / s^2 block belongs to the potential whether or
// not d is a chart coordinate, so the verdict ignores the chart; the
// parameter mirrors the operations that consume the verdict.
Finiteness divergence_guard(const ArfimaModel& model,
                            const CoordinateChart& chart,
                            const WeightSequence& weight);

struct SeriesInfo {
  long terms = 0;          // series indexes actually summed
  double tail_bound = 0.0; // certified for transform=log; a conservative
                           // decay-fit estimate for the other transforms
};

/*
 * Weighted potential K = sum_s omega_s |f_s|^2.  Indexes where the weight
 * is undefined are skipped: the geometry uses the weight's semi-norm, so a
 * power weight with m != 0 drops s = 0 and a finite table without
 * extension ends the sum at the table.  For transform=log the d and cross
 * blocks are regrouped against the exact value of sum_s omega_s / s^2, so
 * the tail bound covers the full remainder; identity and
 * log_squared_modulus truncate at cfg.truncation.  Throws Divergent when
 * the regrouped d-block diverges, NonConvergent when the tolerance is out
 * of reach within the truncation cap.
 */
double potential_series(const GeometryConfig& cfg, SeriesInfo* info = nullptr);

// Polylogarithm closed form; power weights with transform=log only.
// Throws Divergent for m >= 1 with d != 0.
double potential_closed(const GeometryConfig& cfg);

/*
 * Metric g_{a conj(b)} = sum_s omega_s (d_a f_s) conj(d_b f_s).
 * transform=log uses the analytic coefficient derivatives, adaptive in the
 * root blocks with the d block summed exactly; the other transforms build
 * the Gram matrix of Richardson-refined finite-difference coefficient
 * derivatives at fixed truncation, the same functional the FD oracle
 * differentiates.  The grid estimate behind log_squared_modulus aliases
 * part of conj(log h) into every retained index, so those coefficients
 * are not holomorphic in the coordinates and the Gram carries both
 * Wirtinger components.
 */
Matrix metric_series(const GeometryConfig& cfg);

// Polylogarithm closed form; power weights with transform=log only.
Matrix metric_closed(const GeometryConfig& cfg);

/*
 * Independent route: the Wirtinger Hessian of the potential by central
 * differences at cfg.fd_step, refined by one Richardson step (h/2 against
 * h) to cancel the leading h^2 truncation term.  Conjugate entries are
 * assembled from the same primitive stencils, so the result is Hermitian
 * to the last bit.  Throws StepTooLarge when a stencil point could leave
 * the stability region.
 */
Matrix metric_fd_oracle(const GeometryConfig& cfg, Exec exec = Exec::serial);

/*
 * Connection Gamma_{ab, conj(c)} = sum_s omega_s (d_a d_b f_s)
 * conj(d_c f_s), the lowered Christoffel symbols of the metric.  For
 * transform=log the second derivative is diagonal in the root
 * coordinates, so only Gamma_{aa, conj(c)} entries and no d-row survive.
 */
Tensor3 connection_series(const GeometryConfig& cfg);

// Polylogarithm closed form; power weights with transform=log only.
Tensor3 connection_closed(const GeometryConfig& cfg);

// Third mixed Wirtinger derivatives of the potential: an outer central
// difference at cfg.fd_step_outer over inner FD Hessians, both Richardson
// refined.  The inner step is widened to 3 * cfg.fd_step because the outer
// division amplifies inner roundoff.
Tensor3 connection_fd_oracle(const GeometryConfig& cfg,
                             Exec exec = Exec::serial);

/*
 * Ricci tensor R_{a conj(b)} = - d_a d_conj(b) log det g, by the same
 * Richardson-refined Wirtinger stencils over an analytic metric evaluator
 * whose truncation is frozen at the centre, so the differentiated function
 * is smooth.  Throws DegenerateMetric when |det g| at any stencil point
 * falls below 1e-12 * (max row norm)^n.
 */
Matrix ricci_fd(const GeometryConfig& cfg, Exec exec = Exec::serial);

// Laplace-Beltrami action 2 sum_{ab} g^{ab} H_{a conj(b)} of the metric on
// a Hermitian Hessian matrix, e.g. an FD Hessian of a scalar observable.
// Same degeneracy gate as ricci_fd.
cplx laplace_beltrami(const GeometryConfig& cfg, const Matrix& hessian);

struct KahlerResidual {
  double hermitian = 0.0;   // max |holomorphic-holomorphic FD Hessian| of
                            // the centred potential
  double closedness = 0.0;  // max |d_a g_{b conj(c)} - d_b g_{a conj(c)}|
};

/*
 * Two numerical certificates that the metric is Kaehler:
 *
 *   hermitian   The potential recentred by its pluriharmonic gauge term,
 *               D(q) = sum_s omega_s |f_s(q) - f_s(q0)|^2, generates the
 *               same metric; its holomorphic-holomorphic Hessian vanishes
 *               at the centre q0, which the raw potential's does not.
 *               Reported: max FD residual of that vanishing.
 *   closedness  max FD residual of d_a g_{b conj(c)} = d_b g_{a conj(c)}
 *               over the analytic metric at frozen truncation.
 */
KahlerResidual check_kahler(const GeometryConfig& cfg,
                            Exec exec = Exec::serial);

struct ReportRequest {
  bool connection = false;
  bool ricci = false;
  bool check = false;
};

// Everything the CLI serializes.  Closed forms are filled in when the
// weight is a power family and the transform is log.
struct GeometryReport {
  std::vector<std::string> labels;
  double potential = 0.0;
  std::optional<double> potential_closed;
  Matrix metric;
  std::optional<Matrix> metric_closed;
  std::optional<Tensor3> connection;
  std::optional<Tensor3> connection_closed;
  std::optional<Matrix> ricci;
  std::optional<KahlerResidual> residuals;
  SeriesInfo potential_info;
  long truncation = 0;
  double fd_step = 0.0;
  long grid = 0;        // meaningful for transform=log_squared_modulus
};

// Runs the guard (throws Divergent with the reason when it reports
// divergence), then assembles the report.
GeometryReport geometry_report(const GeometryConfig& cfg,
                               const ReportRequest& req = {},
                               Exec exec = Exec::serial);

}
