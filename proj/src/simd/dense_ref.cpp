#include "rkbs/simd/dense.hpp"

namespace rkbs::simd::ref {

void dense_layer(const DenseArgs& a) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double* w = a.weights + r * a.cols;
    double* y = a.out + r * a.batch;
    for (std::size_t s = 0; s < a.batch; ++s) {
      double acc = 0.0;
      for (std::size_t c = 0; c < a.cols; ++c) acc += w[c] * a.in[c * a.batch + s];
      acc += a.bias[r];
      y[s] = (a.relu && !(acc > 0.0)) ? 0.0 : acc;
    }
  }
}

}  // namespace rkbs::simd::ref
