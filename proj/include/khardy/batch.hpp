#pragma once

#include <Eigen/Dense>
#include <vector>

#include "khardy/arfima.hpp"
#include "khardy/geometry.hpp"

namespace khardy {

struct DistanceOptions {
  WeightSequence weight = WeightSequence::hardy();
  Transform transform = Transform::log;
  C0 c0 = C0::one;
  long terms = 256;
  ContourOptions contour;   // only the log_squared_modulus route reads it
  Exec exec = Exec::serial;
};

// Coefficient sequence of the model under the transform, the common input
// of every distance below.
CoefficientSeries transform_series(const ArfimaModel& m,
                                   const DistanceOptions& opt);

double pair_distance(const ArfimaModel& a, const ArfimaModel& b,
                     const DistanceOptions& opt);

/*
 * Pairwise distance matrix.  Each unordered pair is computed once and
 * mirrored, so symmetry and the zero diagonal are exact; the triangle
 * inequality is validated to -1e-12 slack on every entry before the
 * matrix is returned.  Pairs evaluate in parallel under Exec::parallel
 * with deterministic slot assignment.
 */
Eigen::MatrixXd distance_matrix(const std::vector<ArfimaModel>& models,
                                const DistanceOptions& opt);

}
