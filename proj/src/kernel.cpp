#include "rkbs/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "rkbs/errors.hpp"

namespace rkbs {

KernelContext::KernelContext(Architecture arch)
    : arch_(std::move(arch)), decay_{static_cast<double>(arch_.depth() + 1)} {}

KernelContext::KernelContext(Architecture arch, double decay_exponent)
    : arch_(std::move(arch)), decay_{decay_exponent} {
  if (!(decay_exponent > 0.0)) throw ValidationError("decay exponent must be positive");
}

bool KernelContext::certifiable() const {
  return decay_.exponent >= static_cast<double>(arch_.depth() + 1);
}

bool KernelContext::closed_form_evaluation_norms() const {
  return arch_.activation() == Activation::ReLU && !arch_.output_activation_applied() &&
         decay_.exponent == static_cast<double>(arch_.depth() + 1);
}

double xi(const KernelContext& ctx, std::span<const double> theta) {
  const double n = param_norm(ctx.arch(), theta);
  if (n <= 1.0) return 1.0;
  return 1.0 / std::max(1.0, std::pow(n, ctx.decay().exponent));
}

double xi(const KernelContext& ctx, const ParamVector& theta) { return xi(ctx, theta.flat()); }

std::vector<double> kernel_eval(const KernelContext& ctx, std::span<const double> x,
                                const ParamVector& theta) {
  std::vector<double> out = forward(ctx.arch(), theta.flat(), x);
  const double w = xi(ctx, theta);
  for (double& v : out) v *= w;
  return out;
}

double kernel_eval(const KernelContext& ctx, std::span<const double> x, const ParamVector& theta,
                   std::size_t component) {
  return kernel_eval(ctx, x, theta).at(component);
}

double input_bound(const KernelContext& ctx, std::span<const double> x) {
  if (!ctx.certifiable()) {
    throw CertificationUnavailable("decay exponent " + std::to_string(ctx.decay().exponent) +
                                   " is below depth+1 = " +
                                   std::to_string(ctx.arch().depth() + 1));
  }
  if (x.size() != ctx.arch().input_dim()) {
    throw ShapeError("layer 1: input has dimension " + std::to_string(x.size()) +
                     ", architecture expects " + std::to_string(ctx.arch().input_dim()));
  }
  double bound = 1.0;
  for (double v : x) bound = std::max(bound, std::fabs(v));
  return bound;
}

namespace {

// Pass-through for layers 2..l on neuron 0, ending at output row `component`.
void chain_tail(ParamVector& theta, std::size_t component) {
  const Architecture& arch = theta.architecture();
  for (std::size_t k = 2; k <= arch.depth(); ++k) {
    const std::size_t row = (k == arch.depth()) ? component : 0;
    theta.weight(k, row, 0) = 1.0;
  }
}

}  // namespace

ParamVector coordinate_selector(const Architecture& arch, std::size_t coordinate, double sign,
                                std::size_t component) {
  if (coordinate >= arch.input_dim() || component >= arch.output_dim()) {
    throw ShapeError("selector index out of range");
  }
  ParamVector theta(arch);
  const std::size_t row = arch.depth() == 1 ? component : 0;
  theta.weight(1, row, coordinate) = sign < 0 ? -1.0 : 1.0;
  chain_tail(theta, component);
  return theta;
}

ParamVector bias_selector(const Architecture& arch, std::size_t component) {
  if (component >= arch.output_dim()) throw ShapeError("selector index out of range");
  ParamVector theta(arch);
  const std::size_t row = arch.depth() == 1 ? component : 0;
  theta.bias(1, row) = 1.0;
  chain_tail(theta, component);
  return theta;
}

ParamVector constant_selector(const Architecture& arch, std::size_t component) {
  if (component >= arch.output_dim()) throw ShapeError("selector index out of range");
  ParamVector theta(arch);
  theta.bias(arch.depth(), component) = 1.0;
  return theta;
}

ParamVector norm_attaining_selector(const Architecture& arch, std::span<const double> x,
                                    std::size_t component) {
  return attaining_selectors(arch, x, component).front();
}

std::vector<ParamVector> attaining_selectors(const Architecture& arch,
                                             std::span<const double> x, std::size_t component) {
  double c_x = 1.0;
  for (double v : x) c_x = std::max(c_x, std::fabs(v));
  std::vector<ParamVector> out;
  for (std::size_t c = 0; c < x.size(); ++c) {
    if (std::fabs(x[c]) == c_x) {
      out.push_back(coordinate_selector(arch, c, x[c] < 0 ? -1.0 : 1.0, component));
    }
  }
  if (c_x == 1.0) out.push_back(bias_selector(arch, component));
  return out;
}

}  // namespace rkbs
