#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rkbs {

enum class Activation { ReLU, Identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

// Fixed feedforward architecture m_0 -> m_1 -> ... -> m_l.
//
// Parameters are stored flat, layer-major. Within layer k the weight matrix
// W^(k) (m_k x m_{k-1}) comes first in row-major order, followed by the bias
// b^(k). For 2-2-1 this is (w1, w2, w3, w4, b1, b2, w5, w6, b3).
class Architecture {
 public:
  Architecture() = default;
  explicit Architecture(std::vector<std::size_t> widths,
                        Activation activation = Activation::ReLU,
                        bool output_activation_applied = false);

  std::size_t depth() const { return widths_.size() - 1; }
  std::size_t input_dim() const { return widths_.front(); }
  std::size_t output_dim() const { return widths_.back(); }
  const std::vector<std::size_t>& widths() const { return widths_; }
  Activation activation() const { return activation_; }
  bool output_activation_applied() const { return output_activation_applied_; }

  // Layer index k runs from 1 to depth().
  std::size_t rows(std::size_t k) const { return widths_[k]; }
  std::size_t cols(std::size_t k) const { return widths_[k - 1]; }
  std::size_t weight_offset(std::size_t k) const { return offsets_[k - 1]; }
  std::size_t bias_offset(std::size_t k) const { return offsets_[k - 1] + rows(k) * cols(k); }
  std::size_t param_count() const { return offsets_.back(); }
  std::size_t widest() const;

  // Applies the activation of layer k (the output layer only when
  // output_activation_applied is set).
  bool activates(std::size_t k) const {
    return activation_ == Activation::ReLU && (k < depth() || output_activation_applied_);
  }

  bool operator==(const Architecture& other) const = default;

 private:
  std::vector<std::size_t> widths_{1, 1};
  Activation activation_ = Activation::ReLU;
  bool output_activation_applied_ = false;
  std::vector<std::size_t> offsets_{0, 2};
};

class ParamVector {
 public:
  ParamVector() = default;
  // Zero parameters for the architecture.
  explicit ParamVector(const Architecture& arch);
  ParamVector(const Architecture& arch, std::vector<double> flat);

  const Architecture& architecture() const { return arch_; }
  std::span<const double> flat() const { return values_; }
  std::span<double> flat() { return values_; }

  double weight(std::size_t k, std::size_t i, std::size_t j) const {
    return values_[arch_.weight_offset(k) + i * arch_.cols(k) + j];
  }
  double& weight(std::size_t k, std::size_t i, std::size_t j) {
    return values_[arch_.weight_offset(k) + i * arch_.cols(k) + j];
  }
  double bias(std::size_t k, std::size_t i) const { return values_[arch_.bias_offset(k) + i]; }
  double& bias(std::size_t k, std::size_t i) { return values_[arch_.bias_offset(k) + i]; }

  bool operator==(const ParamVector& other) const = default;

 private:
  Architecture arch_;
  std::vector<double> values_;
};

std::vector<double> pack(const ParamVector& theta);
ParamVector unpack(const Architecture& arch, std::span<const double> flat);

// max over every neuron row of (sum_j |W_ij| + |b_i|).
double param_norm(const Architecture& arch, std::span<const double> flat);
double param_norm(const ParamVector& theta);

std::vector<double> forward(const Architecture& arch, std::span<const double> theta,
                            std::span<const double> x);
std::vector<double> forward(const ParamVector& theta, std::span<const double> x);

// Evaluates the network on `batch` inputs at once. `inputs` is feature-major:
// inputs[f * batch + b] is feature f of sample b. Returns output-major values
// in the same layout.
std::vector<double> forward_batch(const Architecture& arch, std::span<const double> theta,
                                  std::span<const double> inputs, std::size_t batch);

// Same, reusing caller-owned scratch (two buffers of widest()*batch) and
// writing the result into `out`.
void forward_batch(const Architecture& arch, std::span<const double> theta,
                   std::span<const double> inputs, std::size_t batch,
                   std::vector<double>& scratch_a, std::vector<double>& scratch_b,
                   std::vector<double>& out);

}  // namespace rkbs
