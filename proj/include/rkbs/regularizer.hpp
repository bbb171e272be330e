#pragma once

#include <span>
#include <string>
#include <vector>

#include "rkbs/signs.hpp"
#include "rkbs/solver.hpp"

namespace rkbs {

// R(f) = (1/m) sum_i (f(x_i) - y_i)^2 + lambda0 * ||f||.
struct RegConfig {
  double lambda0 = 0.1;
  // Sweep sign vectors whose admissibility is open as well.
  bool include_uncertified_signs = false;
};

void validate(const RegConfig& cfg);

struct OrthantResult {
  SignVector s;
  std::vector<double> epsilon;
  std::vector<double> coefficients;  // beta + epsilon, in the closed orthant of s
  double r_value = 0.0;
  bool feasible = true;
};

// Closed-form minimizer of (1/m) sum d_i^2 eps_i^2 + lambda0 sum n_i |beta_i + eps_i|
// with sign(beta_i + eps_i) in {0, s_i}.
OrthantResult orthant_minimize(std::span<const int> s, std::span<const double> beta,
                               std::span<const double> diag, std::span<const double> anchor_norms,
                               std::size_t m, const RegConfig& cfg);

// R re-derived from coefficients: eps_i = c_i - beta_i.
double r_value(std::span<const double> coefficients, std::span<const double> beta,
               std::span<const double> diag, std::span<const double> anchor_norms, std::size_t m,
               double lambda0);

// One result per sign vector, ascending by r_value; ties broken by the sign
// vectors compared numerically (-1 < 0 < 1).
std::vector<OrthantResult> sweep(std::span<const SignVector> signs, std::span<const double> beta,
                                 std::span<const double> diag,
                                 std::span<const double> anchor_norms, const RegConfig& cfg);

// [lambda0 * norm_lower, lambda0 * norm_upper] for an interpolating solution.
Bracket r_interval_unregularized(const MNISolution& mni, const RegConfig& cfg);

enum class DecisionKind { Unregularized, Regularized, Ambiguous };
const char* to_string(DecisionKind k);

struct Decision {
  DecisionKind kind = DecisionKind::Unregularized;
  // Regularized: the winning sign vector.
  SignVector s;
  // Ambiguous: what was chosen (always the interpolant).
  DecisionKind fallback = DecisionKind::Unregularized;
};

Decision select(const OrthantResult& sweep_best, Bracket interval);

struct SelectionReport {
  std::vector<OrthantResult> sweep;
  Bracket interval{0.0, 0.0};
  Decision decision;
};

// Sweep over the admissible sign vectors of a scalar solution, then select.
SelectionReport regularize(const ComponentSolution& sol, const RegConfig& cfg);

}  // namespace rkbs
