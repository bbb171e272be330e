#include "rkbs/network.hpp"

#include <algorithm>
#include <cmath>

#include "rkbs/errors.hpp"
#include "rkbs/simd/dense.hpp"

namespace rkbs {

std::string to_string(Activation a) { return a == Activation::ReLU ? "relu" : "identity"; }

Activation activation_from_string(const std::string& name) {
  if (name == "relu" || name == "ReLU") return Activation::ReLU;
  if (name == "identity") return Activation::Identity;
  throw ValidationError("unsupported activation '" + name +
                        "' (only 1-Lipschitz activations with sigma(0)=0: relu, identity)");
}

Architecture::Architecture(std::vector<std::size_t> widths, Activation activation,
                           bool output_activation_applied)
    : widths_(std::move(widths)),
      activation_(activation),
      output_activation_applied_(output_activation_applied) {
  if (widths_.size() < 2) throw ShapeError("architecture needs at least one layer");
  for (std::size_t k = 0; k < widths_.size(); ++k) {
    if (widths_[k] == 0) throw ShapeError("layer width " + std::to_string(k) + " is zero");
  }
  offsets_.assign(widths_.size(), 0);
  for (std::size_t k = 1; k < widths_.size(); ++k) {
    offsets_[k] = offsets_[k - 1] + widths_[k] * (widths_[k - 1] + 1);
  }
}

std::size_t Architecture::widest() const {
  return *std::max_element(widths_.begin(), widths_.end());
}

ParamVector::ParamVector(const Architecture& arch)
    : arch_(arch), values_(arch.param_count(), 0.0) {}

ParamVector::ParamVector(const Architecture& arch, std::vector<double> flat)
    : arch_(arch), values_(std::move(flat)) {
  if (values_.size() != arch_.param_count()) {
    throw ShapeError("parameter length " + std::to_string(values_.size()) + " does not match " +
                     std::to_string(arch_.param_count()) + " for the architecture");
  }
}

std::vector<double> pack(const ParamVector& theta) {
  return {theta.flat().begin(), theta.flat().end()};
}

ParamVector unpack(const Architecture& arch, std::span<const double> flat) {
  return ParamVector(arch, std::vector<double>(flat.begin(), flat.end()));
}

double param_norm(const Architecture& arch, std::span<const double> flat) {
  double norm = 0.0;
  for (std::size_t k = 1; k <= arch.depth(); ++k) {
    const std::size_t cols = arch.cols(k);
    const double* w = flat.data() + arch.weight_offset(k);
    const double* b = flat.data() + arch.bias_offset(k);
    for (std::size_t i = 0; i < arch.rows(k); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < cols; ++j) row += std::fabs(w[i * cols + j]);
      row += std::fabs(b[i]);
      norm = std::max(norm, row);
    }
  }
  return norm;
}

double param_norm(const ParamVector& theta) {
  return param_norm(theta.architecture(), theta.flat());
}

void forward_batch(const Architecture& arch, std::span<const double> theta,
                   std::span<const double> inputs, std::size_t batch,
                   std::vector<double>& scratch_a, std::vector<double>& scratch_b,
                   std::vector<double>& out) {
  if (theta.size() != arch.param_count()) {
    throw ShapeError("parameter length " + std::to_string(theta.size()) + " does not match " +
                     std::to_string(arch.param_count()));
  }
  if (inputs.size() != arch.input_dim() * batch) {
    throw ShapeError("layer 1: expected input dimension " + std::to_string(arch.input_dim()) +
                     " for " + std::to_string(batch) + " sample(s), got " +
                     std::to_string(inputs.size()) + " values");
  }
  const std::size_t cap = arch.widest() * batch;
  if (scratch_a.size() < cap) scratch_a.resize(cap);
  if (scratch_b.size() < cap) scratch_b.resize(cap);

  const double* in = inputs.data();
  double* buffers[2] = {scratch_a.data(), scratch_b.data()};
  for (std::size_t k = 1; k <= arch.depth(); ++k) {
    double* dst = buffers[k % 2];
    simd::dense_layer({theta.data() + arch.weight_offset(k), theta.data() + arch.bias_offset(k),
                       arch.rows(k), arch.cols(k), in, dst, batch, arch.activates(k)});
    in = dst;
  }
  out.assign(in, in + arch.output_dim() * batch);
}

std::vector<double> forward_batch(const Architecture& arch, std::span<const double> theta,
                                  std::span<const double> inputs, std::size_t batch) {
  std::vector<double> a, b, out;
  forward_batch(arch, theta, inputs, batch, a, b, out);
  return out;
}

std::vector<double> forward(const Architecture& arch, std::span<const double> theta,
                            std::span<const double> x) {
  if (x.size() != arch.input_dim()) {
    throw ShapeError("layer 1: input has dimension " + std::to_string(x.size()) +
                     ", architecture expects " + std::to_string(arch.input_dim()));
  }
  return forward_batch(arch, theta, x, 1);
}

std::vector<double> forward(const ParamVector& theta, std::span<const double> x) {
  return forward(theta.architecture(), theta.flat(), x);
}

}  // namespace rkbs
