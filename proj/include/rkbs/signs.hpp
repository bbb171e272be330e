#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rkbs/kernel.hpp"
#include "rkbs/supnorm.hpp"

namespace rkbs {

// Entries in {-1, 0, +1}, one per data point.
using SignVector = std::vector<int>;

std::string format_signs(std::span<const int> s);

enum class VerdictKind { CertifiedAdmissible, CertifiedInadmissible, Uncertified };
const char* to_string(VerdictKind k);

struct AdmissibilityVerdict {
  VerdictKind kind = VerdictKind::Uncertified;
  // Name of the certificate (admissible) or of the witness source
  // (inadmissible).
  std::string certificate;
  // Inadmissible: |sum_i (s_i / c_i) k(x_i, witness)|, above 1 + tolerance.
  std::optional<ParamVector> witness;
  double value = 0.0;
  // Present whenever the numerical sup-norm search ran.
  std::optional<SupNormEstimate> estimate;
};

struct SignConfig {
  SearchConfig search;
  // Combine s_i / ||k(x_i, .)||_inf instead of s_i so that every singleton
  // is a unit-norm element even for points outside the unit box.
  bool scaled_witnesses = true;
  std::size_t cap = 12;
  // Margin on both sides of 1.
  double tolerance = 1e-9;
};

// Per-point divisors c_i used to form sign combinations: the certified
// evaluation sup-norm upper bound when scaling is on (1 if no finite bound
// exists), otherwise 1.
std::vector<double> witness_scales(const KernelContext& ctx,
                                   std::span<const std::vector<double>> inputs,
                                   std::size_t component, const SignConfig& cfg);

// The combination sum_i (s_i / c_i) k_component(x_i, .).
Combination sign_combination(const KernelContext& ctx, std::span<const int> s,
                             std::span<const std::vector<double>> inputs,
                             std::span<const double> scales, std::size_t component);

AdmissibilityVerdict is_admissible(std::span<const int> s,
                                   std::span<const std::vector<double>> inputs,
                                   const KernelContext& ctx, const SignConfig& cfg = {},
                                   std::size_t component = 0);

// Same, with precomputed scales.
AdmissibilityVerdict is_admissible(std::span<const int> s,
                                   std::span<const std::vector<double>> inputs,
                                   std::span<const double> scales, const KernelContext& ctx,
                                   const SignConfig& cfg, std::size_t component);

// Re-evaluates a claimed counterexample directly: returns the value of the
// sign combination at theta, or nullopt when it does not exceed 1 + tol.
std::optional<double> recheck_witness(std::span<const int> s,
                                      std::span<const std::vector<double>> inputs,
                                      const KernelContext& ctx, const ParamVector& theta,
                                      const SignConfig& cfg = {}, std::size_t component = 0);

struct SignVerdict {
  SignVector s;
  AdmissibilityVerdict verdict;
};

// All 3^m sign vectors with verdicts, ordered lexicographically with
// +1 < 0 < -1 in each coordinate. Throws EnumerationRefused above the cap.
std::vector<SignVerdict> enumerate_admissible(std::span<const std::vector<double>> inputs,
                                              const KernelContext& ctx,
                                              const SignConfig& cfg = {},
                                              std::size_t component = 0);

}  // namespace rkbs
