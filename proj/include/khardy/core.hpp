#pragma once

#include <complex>

namespace khardy {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

// Execution policy for the data-parallel kernels.  Exec::serial is the
// reference path.  Exec::parallel distributes independent output slots over
// OpenMP threads while keeping the per-slot arithmetic identical, so both
// paths produce bitwise-equal results; tests assert exact equality.
enum class Exec { serial, parallel };

// Worker count for Exec::parallel regions: the OpenMP default capped by the
// KAHLER_HARDY_THREADS environment variable.  Always >= 1.
int thread_cap();

}
