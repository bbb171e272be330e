#include "rkbs/simd/dense.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace rkbs::simd::avx2 {

// No FMA: multiply and add stay separate to match the reference rounding.
__attribute__((target("avx2"))) void dense_layer(const DenseArgs& a) {
  const std::size_t full = a.batch / 4 * 4;
  const __m256d zero = _mm256_setzero_pd();
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double* w = a.weights + r * a.cols;
    double* y = a.out + r * a.batch;
    const __m256d bias = _mm256_set1_pd(a.bias[r]);
    std::size_t s = 0;
    for (; s < full; s += 4) {
      __m256d acc = zero;
      for (std::size_t c = 0; c < a.cols; ++c) {
        const __m256d x = _mm256_loadu_pd(a.in + c * a.batch + s);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(w[c]), x));
      }
      acc = _mm256_add_pd(acc, bias);
      // max_pd returns the second operand for NaN and for +-0, like the
      // reference's !(acc > 0) test.
      if (a.relu) acc = _mm256_max_pd(acc, zero);
      _mm256_storeu_pd(y + s, acc);
    }
    for (; s < a.batch; ++s) {
      double acc = 0.0;
      for (std::size_t c = 0; c < a.cols; ++c) acc += w[c] * a.in[c * a.batch + s];
      acc += a.bias[r];
      y[s] = (a.relu && !(acc > 0.0)) ? 0.0 : acc;
    }
  }
}

}  // namespace rkbs::simd::avx2
#endif
