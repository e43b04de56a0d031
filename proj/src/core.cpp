#include "khardy/core.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cstdlib>
#include <string>

namespace khardy {

int thread_cap() {
  static const int cap = [] {
    int n = 1;
#ifdef _OPENMP
    n = omp_get_max_threads();
#endif
    if (const char* env = std::getenv("KAHLER_HARDY_THREADS")) {
      try {
        const int v = std::stoi(env);
        if (v >= 1) n = std::min(n, v);
      } catch (...) {
        // unparsable value: keep the OpenMP default
      }
    }
    return n;
  }();
  return cap;
}

}
