#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace varinf::kernels {

// Worker count for buffer fills: hardware width capped by VARINF_THREADS
// (values < 1 are ignored). Always 1 without OpenMP.
int reduction_width();

// In-place pairwise tree sum with a topology fixed by the buffer length
// alone, so the result is bit-identical no matter how many threads filled
// the buffer. Destroys the buffer contents.
double pairwise_sum(std::vector<double>& buf);

// Fills buf[i] = term(i) in parallel (each index independent), then reduces.
template <typename F>
double map_reduce(int n, F&& term) {
  std::vector<double> buf(static_cast<std::size_t>(n));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(reduction_width())
#endif
  for (int i = 0; i < n; ++i) buf[static_cast<std::size_t>(i)] = term(i);
  return pairwise_sum(buf);
}

template <typename F>
void parallel_for(int n, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(reduction_width())
#endif
  for (int i = 0; i < n; ++i) body(i);
}

}  // namespace varinf::kernels
