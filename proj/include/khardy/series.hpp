#pragma once

#include "khardy/core.hpp"

#include <optional>
#include <vector>

namespace khardy {

enum class SeriesKind { transfer, complex_cepstrum, power_cepstrum, generic };

// Truncated coefficient sequence: coeffs holds indexes 0..N, so
// truncation() is the top index N, not the length.  tail_bound, when
// present, bounds the weighted l2 mass beyond N for the weight the series
// was produced for.
struct CoefficientSeries {
  std::vector<cplx> coeffs;
  SeriesKind kind = SeriesKind::generic;
  std::optional<double> tail_bound;

  long truncation() const { return static_cast<long>(coeffs.size()) - 1; }
};

}
