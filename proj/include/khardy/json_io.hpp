#pragma once

#include <string>
#include <vector>

#include "khardy/geometry.hpp"
#include "khardy/series.hpp"

#include <Eigen/Dense>

namespace khardy {

/*
 * Model schema: {"sigma": real, "d": real, "poles": [[re, im], ...],
 * "zeros": [[re, im], ...]}.  All four fields are required, complex
 * numbers are exactly-two-number arrays, unknown fields are rejected, and
 * every error names the offending field.  Serialization keeps the exact
 * binary doubles, so parse -> serialize -> parse is the identity.
 */
ArfimaModel model_from_json(const std::string& text);
std::string model_to_json(const ArfimaModel& m);

// Reads and parses one model file; errors name the path.
ArfimaModel load_model(const std::string& path);

/*
 * Weight schema: {"family": "hardy" | "sobolev" | "dirichlet" | "bergman"
 * | "power" | "custom", "m": order, "table": [...], "extension": "error" |
 * "repeat-last"}.  "m" belongs to sobolev (non-negative integer) and power
 * (real); "table"/"extension" to custom.
 */
WeightSequence weight_from_json(const std::string& text);
std::string weight_to_json(const WeightSequence& w);

// Inline JSON when the argument starts with '{', otherwise a file path.
WeightSequence weight_from_spec(const std::string& spec);

std::string series_to_json(const CoefficientSeries& f);
std::string series_to_csv(const CoefficientSeries& f);

/*
 * GeometryReport as JSON.  Matrices flatten row-major into [re, im]
 * pairs beside the "dim" field; the connection flattens in (k, i, j)
 * order with k the conjugate index.  --check residuals appear as
 * "hermitian_residual" / "closed_form_residual"; "convergence" carries
 * terms, tail bound, truncation, fd step, and grid.  Non-finite tail
 * bounds serialize as null.
 */
std::string report_to_json(const GeometryReport& rep);

// One complex matrix as CSV: row labels in the first column, then
// <label>_re/<label>_im column pairs, shortest round-trip decimals.
std::string complex_matrix_to_csv(const Matrix& m,
                                  const std::vector<std::string>& labels);

std::string distance_matrix_to_csv(const Eigen::MatrixXd& m,
                                   const std::vector<std::string>& names);
std::string distance_matrix_to_json(const Eigen::MatrixXd& m,
                                    const std::vector<std::string>& names);

}
