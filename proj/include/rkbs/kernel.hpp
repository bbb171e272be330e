#pragma once

#include <span>
#include <vector>

#include "rkbs/network.hpp"

namespace rkbs {

// Decay weight xi(theta) = 1 / max{1, ||theta||^p}.
struct DecayWeight {
  double exponent;
};

// The network-induced kernel k(x, theta) = f_theta(x) * xi(theta).
class KernelContext {
 public:
  KernelContext() = default;
  // Decay exponent defaults to depth + 1.
  explicit KernelContext(Architecture arch);
  KernelContext(Architecture arch, double decay_exponent);

  const Architecture& arch() const { return arch_; }
  DecayWeight decay() const { return decay_; }

  // True when the analytic bounds hold: p >= l + 1 (supported activations
  // are all 1-Lipschitz with sigma(0) = 0).
  bool certifiable() const;
  // True for the configuration whose evaluation sup-norms are known in
  // closed form: ReLU hidden layers, affine output, p = l + 1.
  bool closed_form_evaluation_norms() const;

 private:
  Architecture arch_;
  DecayWeight decay_{2.0};
};

double xi(const KernelContext& ctx, std::span<const double> theta);
double xi(const KernelContext& ctx, const ParamVector& theta);

std::vector<double> kernel_eval(const KernelContext& ctx, std::span<const double> x,
                                const ParamVector& theta);
double kernel_eval(const KernelContext& ctx, std::span<const double> x, const ParamVector& theta,
                   std::size_t component);

// C(x) = max{1, ||x||_inf}; |k_i(x, theta)| <= C(x) for every theta.
// Throws CertificationUnavailable when the context is not certifiable.
double input_bound(const KernelContext& ctx, std::span<const double> x);

// Parameters with one active neuron per layer: the first layer reads
// sign * x[coordinate], deeper layers pass neuron 0 through with weight 1,
// and the output row `component` reads it. param_norm is 1.
ParamVector coordinate_selector(const Architecture& arch, std::size_t coordinate, double sign,
                                std::size_t component);
// Same chain with the first-layer neuron fed by a unit bias: k(x, .) = 1.
ParamVector bias_selector(const Architecture& arch, std::size_t component);
// All zeros except output bias `component` = 1. k(x, theta) = 1 for every x.
ParamVector constant_selector(const Architecture& arch, std::size_t component);

// Selector attaining ||k(x, .)||_inf: the coordinate selector for the first
// coordinate with |x_c| = ||x||_inf >= 1, otherwise the bias selector.
ParamVector norm_attaining_selector(const Architecture& arch, std::span<const double> x,
                                    std::size_t component);

// Every coordinate/bias selector whose value at x equals C(x), in a fixed
// order (coordinates ascending, then the bias selector).
std::vector<ParamVector> attaining_selectors(const Architecture& arch,
                                             std::span<const double> x, std::size_t component);

}  // namespace rkbs
