#pragma once

#include <vector>

#include "rkbs/kernel.hpp"
#include "rkbs/supnorm.hpp"

namespace rkbs::testing {

// 2-2-1 ReLU network, xi = 1 / max{1, ||theta||^3}, inputs
// x1 = (1,-1), x2 = (-1,0), x3 = (0,1).
inline KernelContext two_two_one() { return KernelContext(Architecture({2, 2, 1})); }

inline std::vector<std::vector<double>> three_inputs() { return {{1, -1}, {-1, 0}, {0, 1}}; }

inline ParamVector params(const std::vector<double>& flat) {
  return unpack(Architecture({2, 2, 1}), flat);
}

inline Combination signed_sum(const std::vector<double>& coefficients,
                              const std::vector<std::vector<double>>& xs,
                              const KernelContext& ctx = two_two_one()) {
  std::vector<Term> terms;
  for (std::size_t i = 0; i < xs.size(); ++i) terms.push_back({coefficients[i], xs[i]});
  return Combination(ctx, std::move(terms));
}

// Small search budget for unit tests; the defaults are for real runs.
inline SearchConfig quick_search(std::uint64_t seed = 1) {
  SearchConfig cfg;
  cfg.seed = seed;
  cfg.starts = 64;
  cfg.iterations = 200;
  return cfg;
}

}  // namespace rkbs::testing
