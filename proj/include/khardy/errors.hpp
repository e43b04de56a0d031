#pragma once

#include <stdexcept>

namespace khardy {

// Error taxonomy shared by all modules.  The CLI maps these onto its exit
// codes (see tools/main.cpp): invalid input and schema problems exit 2,
// convergence failures 3, divergent requests 4, singular metrics 5.

// Malformed request: bad parameter value, schema violation, unusable option
// combination.  Messages name the offending field or argument.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Index outside a weight sequence's domain (s = 0 for semi-norm families,
// past the table of a custom weight with the error extension).
struct InvalidIndex : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Weight sequence undefined at an index carrying nonzero data.
struct IncompatibleWeight : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Evaluation point outside the domain of convergence (|z| = 1 at low order,
// kernel argument on the boundary).
struct DivergentInput : std::domain_error {
  using std::domain_error::domain_error;
};

// The requested series is provably infinite (the |d|^2 term under weights of
// order >= 1, a g_00 block with a non-summable weight).
struct Divergent : std::domain_error {
  using std::domain_error::domain_error;
};

// Iteration budget exhausted before the tail bound met the tolerance.
struct NonConvergent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Transfer-function evaluation at a pole.
struct PoleHit : std::domain_error {
  using std::domain_error::domain_error;
};

// Transfer-function evaluation at the z = 1 branch point with fractional d.
struct BranchPoint : std::domain_error {
  using std::domain_error::domain_error;
};

// Contour grid refinement still moves some coefficient past the tolerance.
struct GridTooCoarse : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A finite-difference step that would leave the valid domain.
struct StepTooLarge : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Singular or empty metric where an inverse or determinant is required.
struct DegenerateMetric : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}
