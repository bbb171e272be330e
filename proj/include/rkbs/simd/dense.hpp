#pragma once

#include <cstddef>
#include <string_view>

// Batched dense layer y = act(W x + b) over a batch of inputs laid out
// feature-major (x[f * batch + s]). Every variant accumulates in the same
// order with separate multiply and add, so all variants agree bit for bit
// with the scalar reference.

namespace rkbs::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

struct DenseArgs {
  const double* weights;  // rows x cols, row-major
  const double* bias;     // rows
  std::size_t rows;
  std::size_t cols;
  const double* in;       // cols x batch
  double* out;            // rows x batch
  std::size_t batch;
  bool relu;
};

namespace ref {
void dense_layer(const DenseArgs& args);
}

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void dense_layer(const DenseArgs& args);
}
#endif

// Best variant the running CPU supports. RKBS_FORCE_SCALAR=1 pins the
// reference path.
Isa detected_isa();
Isa active_isa();
// Overrides dispatch; returns the previous choice. Requests for an
// unsupported ISA fall back to Scalar.
Isa set_active_isa(Isa isa);

void dense_layer(const DenseArgs& args);

}  // namespace rkbs::simd
