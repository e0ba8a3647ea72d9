#include "varinf/kernels.hpp"

#include <cstdlib>
#include <string>

namespace varinf::kernels {

int reduction_width() {
#ifdef _OPENMP
  static const int width = [] {
    int w = omp_get_max_threads();
    if (const char* env = std::getenv("VARINF_THREADS")) {
      try {
        const int cap = std::stoi(env);
        if (cap >= 1 && cap < w) w = cap;
      } catch (...) {
        // unparseable cap: keep the hardware width
      }
    }
    return w;
  }();
  return width;
#else
  return 1;
#endif
}

double pairwise_sum(std::vector<double>& buf) {
  std::size_t n = buf.size();
  if (n == 0) return 0.0;
  while (n > 1) {
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i + m < n; ++i) buf[i] += buf[i + m];
    n = m;
  }
  return buf[0];
}

}  // namespace varinf::kernels
