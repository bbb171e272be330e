#include "rkbs/signs.hpp"

#include <cmath>
#include <sstream>

#include "rkbs/errors.hpp"
#include "rkbs/parallel.hpp"

namespace rkbs {

std::string format_signs(std::span<const int> s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ',';
    os << s[i];
  }
  os << ')';
  return os.str();
}

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::CertifiedAdmissible:
      return "certified_admissible";
    case VerdictKind::CertifiedInadmissible:
      return "certified_inadmissible";
    case VerdictKind::Uncertified:
      break;
  }
  return "uncertified";
}

std::vector<double> witness_scales(const KernelContext& ctx,
                                   std::span<const std::vector<double>> inputs,
                                   std::size_t component, const SignConfig& cfg) {
  std::vector<double> scales(inputs.size(), 1.0);
  if (!cfg.scaled_witnesses) return scales;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const double u = evaluation_sup_norm(ctx, inputs[i], component, cfg.search).upper;
    if (std::isfinite(u) && u > 0.0) scales[i] = u;
  }
  return scales;
}

Combination sign_combination(const KernelContext& ctx, std::span<const int> s,
                             std::span<const std::vector<double>> inputs,
                             std::span<const double> scales, std::size_t component) {
  if (s.size() != inputs.size() || scales.size() != inputs.size()) {
    throw ShapeError("sign vector has length " + std::to_string(s.size()) + ", dataset has " +
                     std::to_string(inputs.size()) + " points");
  }
  std::vector<Term> terms;
  terms.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < -1 || s[i] > 1) throw ShapeError("sign entries must be -1, 0 or 1");
    terms.push_back({s[i] / scales[i], inputs[i]});
  }
  return Combination(ctx, std::move(terms), component);
}

AdmissibilityVerdict is_admissible(std::span<const int> s,
                                   std::span<const std::vector<double>> inputs,
                                   const KernelContext& ctx, const SignConfig& cfg,
                                   std::size_t component) {
  const auto scales = witness_scales(ctx, inputs, component, cfg);
  return is_admissible(s, inputs, scales, ctx, cfg, component);
}

AdmissibilityVerdict is_admissible(std::span<const int> s,
                                   std::span<const std::vector<double>> inputs,
                                   std::span<const double> scales, const KernelContext& ctx,
                                   const SignConfig& cfg, std::size_t component) {
  const Combination comb = sign_combination(ctx, s, inputs, scales, component);
  const double one_up = 1.0 + cfg.tolerance;
  AdmissibilityVerdict v;

  std::size_t plus = 0, minus = 0;
  for (int e : s) {
    plus += e > 0;
    minus += e < 0;
  }
  if (plus + minus == 0) {
    v.kind = VerdictKind::CertifiedAdmissible;
    v.certificate = "zero";
    return v;
  }

  // Constant selector: every k(x_i, .) equals 1 there.
  {
    ParamVector c = constant_selector(ctx.arch(), component);
    const double value = std::fabs(comb.value(c));
    if (value > one_up) {
      v.kind = VerdictKind::CertifiedInadmissible;
      v.certificate = "constant selector";
      v.witness = std::move(c);
      v.value = value;
      return v;
    }
  }

  if (ctx.certifiable()) {
    const double bound = analytic_upper(comb);
    if (plus + minus == 1 && bound <= one_up) {
      v.kind = VerdictKind::CertifiedAdmissible;
      v.certificate = "unit evaluation";
      return v;
    }
    if (plus == 1 && minus == 1 && ctx.arch().activation() == Activation::ReLU &&
        bound <= one_up) {
      v.kind = VerdictKind::CertifiedAdmissible;
      v.certificate = "pairwise difference bound";
      return v;
    }
  }

  SupNormEstimate est = estimate_sup(comb, cfg.search);
  if (est.lower > one_up) {
    v.kind = VerdictKind::CertifiedInadmissible;
    v.certificate = "search witness";
    v.witness = est.witness;
    v.value = est.lower;
  } else if (est.upper <= one_up) {
    v.kind = VerdictKind::CertifiedAdmissible;
    v.certificate = "analytic upper";
  } else {
    v.kind = VerdictKind::Uncertified;
  }
  v.estimate = std::move(est);
  return v;
}

std::optional<double> recheck_witness(std::span<const int> s,
                                      std::span<const std::vector<double>> inputs,
                                      const KernelContext& ctx, const ParamVector& theta,
                                      const SignConfig& cfg, std::size_t component) {
  const auto scales = witness_scales(ctx, inputs, component, cfg);
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != 0) sum += s[i] / scales[i] * kernel_eval(ctx, inputs[i], theta, component);
  }
  const double value = std::fabs(sum);
  if (value > 1.0 + cfg.tolerance) return value;
  return std::nullopt;
}

std::vector<SignVerdict> enumerate_admissible(std::span<const std::vector<double>> inputs,
                                              const KernelContext& ctx, const SignConfig& cfg,
                                              std::size_t component) {
  const std::size_t m = inputs.size();
  if (m > cfg.cap) {
    throw EnumerationRefused("sign enumeration over " + std::to_string(m) +
                             " points needs 3^" + std::to_string(m) + " = " +
                             std::to_string(static_cast<unsigned long long>(std::pow(3.0, m))) +
                             " sup-norm checks; the cap is " + std::to_string(cfg.cap));
  }
  std::size_t total = 1;
  for (std::size_t i = 0; i < m; ++i) total *= 3;

  const auto scales = witness_scales(ctx, inputs, component, cfg);
  std::vector<SignVerdict> out(total);
  parallel_for(total, [&](std::size_t idx) {
    // Base-3 digits, most significant first; digit 0,1,2 -> +1,0,-1.
    SignVector s(m);
    std::size_t r = idx;
    for (std::size_t i = m; i-- > 0;) {
      s[i] = 1 - static_cast<int>(r % 3);
      r /= 3;
    }
    out[idx].verdict = is_admissible(s, inputs, scales, ctx, cfg, component);
    out[idx].s = std::move(s);
  });
  return out;
}

}  // namespace rkbs
