#include "rkbs/regularizer.hpp"

#include <algorithm>
#include <cmath>

#include "rkbs/errors.hpp"
#include "rkbs/parallel.hpp"

namespace rkbs {

void validate(const RegConfig& cfg) {
  if (!(cfg.lambda0 > 0.0) || !std::isfinite(cfg.lambda0)) {
    throw ValidationError("lambda0 must be a positive finite number");
  }
}

double r_value(std::span<const double> coefficients, std::span<const double> beta,
               std::span<const double> diag, std::span<const double> anchor_norms, std::size_t m,
               double lambda0) {
  double loss = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const double eps = coefficients[i] - beta[i];
    loss += diag[i] * diag[i] * eps * eps;
    norm += anchor_norms[i] * std::fabs(coefficients[i]);
  }
  return loss / static_cast<double>(m) + lambda0 * norm;
}

OrthantResult orthant_minimize(std::span<const int> s, std::span<const double> beta,
                               std::span<const double> diag, std::span<const double> anchor_norms,
                               std::size_t m, const RegConfig& cfg) {
  validate(cfg);
  const std::size_t k = beta.size();
  if (s.size() != k || diag.size() != k || anchor_norms.size() != k) {
    throw ShapeError("orthant_minimize: sign, coefficient, diagonal and norm lengths differ");
  }
  if (m == 0 && k > 0) throw ShapeError("orthant_minimize: m must be positive");
  OrthantResult r;
  r.s.assign(s.begin(), s.end());
  r.epsilon.resize(k);
  r.coefficients.resize(k);
  double loss = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = diag[i];
    if (!(d > 0.0)) {
      throw DegenerateDiagonal("diagonal entry " + std::to_string(i + 1) + " is " +
                               std::to_string(d) + "; the closed form needs d > 0");
    }
    // Unconstrained stationary shift is -+ lambda0 n m / (2 d^2); project
    // onto the closed orthant.
    const double shift = cfg.lambda0 * anchor_norms[i] * static_cast<double>(m) / (2.0 * d * d);
    double eps;
    if (s[i] == 0) {
      eps = -beta[i];
    } else if (s[i] > 0) {
      eps = std::max(-beta[i], -shift);
    } else {
      eps = std::min(-beta[i], shift);
    }
    r.epsilon[i] = eps;
    r.coefficients[i] = s[i] == 0 ? 0.0 : beta[i] + eps;
    loss += d * d * eps * eps;
    norm += anchor_norms[i] * std::fabs(r.coefficients[i]);
  }
  r.r_value = k ? loss / static_cast<double>(m) + cfg.lambda0 * norm : 0.0;
  return r;
}

std::vector<OrthantResult> sweep(std::span<const SignVector> signs, std::span<const double> beta,
                                 std::span<const double> diag,
                                 std::span<const double> anchor_norms, const RegConfig& cfg) {
  validate(cfg);
  std::vector<OrthantResult> out(signs.size());
  parallel_for(signs.size(), [&](std::size_t i) {
    out[i] = orthant_minimize(signs[i], beta, diag, anchor_norms, beta.size(), cfg);
  });
  std::stable_sort(out.begin(), out.end(), [](const OrthantResult& a, const OrthantResult& b) {
    if (a.r_value != b.r_value) return a.r_value < b.r_value;
    return a.s < b.s;
  });
  return out;
}

Bracket r_interval_unregularized(const MNISolution& mni, const RegConfig& cfg) {
  validate(cfg);
  return {cfg.lambda0 * mni.norm_lower, cfg.lambda0 * mni.norm_upper};
}

const char* to_string(DecisionKind k) {
  switch (k) {
    case DecisionKind::Unregularized:
      return "unregularized";
    case DecisionKind::Regularized:
      return "regularized";
    case DecisionKind::Ambiguous:
      break;
  }
  return "ambiguous";
}

Decision select(const OrthantResult& sweep_best, Bracket interval) {
  Decision d;
  if (interval.upper < sweep_best.r_value) {
    d.kind = DecisionKind::Unregularized;
  } else if (sweep_best.r_value < interval.lower) {
    d.kind = DecisionKind::Regularized;
    d.s = sweep_best.s;
  } else {
    d.kind = DecisionKind::Ambiguous;
    d.fallback = DecisionKind::Unregularized;
  }
  return d;
}

SelectionReport regularize(const ComponentSolution& sol, const RegConfig& cfg) {
  validate(cfg);
  const std::size_t k = sol.beta.size();
  std::vector<SignVector> signs;
  for (const auto& row : sol.admissible) {
    if (row.verdict.kind == VerdictKind::CertifiedAdmissible ||
        (cfg.include_uncertified_signs && row.verdict.kind == VerdictKind::Uncertified)) {
      signs.push_back(row.s);
    }
  }
  std::vector<double> diag(k), norms(k);
  for (std::size_t i = 0; i < k; ++i) {
    diag[i] = sol.anchor_set.gram[i][i];
    norms[i] = sol.anchor_set.dual_norm_brackets[i].upper;
  }
  // A negative diagonal entry flips orientation: the sign vector then
  // constrains sign(c_i) * sign(d_i). Solving in -c_i, -beta_i, |d_i| gives
  // the closed form its d > 0 and leaves s as it is.
  std::vector<double> beta(sol.beta);
  std::vector<int> flip(k, 1);
  for (std::size_t i = 0; i < k; ++i) {
    if (diag[i] < 0.0) {
      flip[i] = -1;
      diag[i] = -diag[i];
      beta[i] = -beta[i];
    }
  }

  SelectionReport rep;
  rep.sweep = sweep(signs, beta, diag, norms, cfg);
  for (auto& r : rep.sweep) {
    for (std::size_t i = 0; i < k; ++i) {
      if (flip[i] < 0) {
        r.epsilon[i] = -r.epsilon[i];
        r.coefficients[i] = -r.coefficients[i];
      }
    }
  }
  rep.interval = r_interval_unregularized(sol.mni, cfg);
  if (!rep.sweep.empty()) {
    rep.decision = select(rep.sweep.front(), rep.interval);
  }
  return rep;
}

}  // namespace rkbs
