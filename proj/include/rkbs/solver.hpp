#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rkbs/kernel.hpp"
#include "rkbs/signs.hpp"
#include "rkbs/supnorm.hpp"

namespace rkbs {

using Matrix = std::vector<std::vector<double>>;  // row-major

// Points (x_i, y_i). Duplicate inputs collapse when their outputs agree and
// are rejected otherwise.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::vector<double>> inputs, std::vector<std::vector<double>> outputs);

  std::size_t size() const { return inputs_.size(); }
  bool empty() const { return inputs_.empty(); }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  const std::vector<std::vector<double>>& inputs() const { return inputs_; }
  const std::vector<std::vector<double>>& outputs() const { return outputs_; }
  // Indices into the constructor's input sequence that were dropped as
  // duplicates.
  const std::vector<std::size_t>& collapsed() const { return collapsed_; }

  std::vector<double> column(std::size_t component) const;
  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<std::vector<double>> inputs_, outputs_;
  std::size_t input_dim_ = 0, output_dim_ = 0;
  std::vector<std::size_t> collapsed_;
};

struct SolverConfig {
  SignConfig signs;
  // Penalty on off-diagonal values in the fallback anchor search.
  double rho = 1e3;
  // Off-diagonal magnitudes at or below this count as zero.
  double zero_tolerance = 1e-9;
  double condition_limit = 1e12;
};

struct PointAnchor {
  bool success = false;
  std::optional<ParamVector> anchor;
  std::string source;  // "selector" or "penalized search"
  std::string reason;  // why no anchor was accepted
  // Parameters reaching ||k(x_i, .)||_inf at x_i, kept for the greedy
  // subset extraction even when they fail the off-diagonal test.
  std::vector<ParamVector> candidates;
};

struct AnchorReport {
  std::vector<PointAnchor> points;
  std::vector<SupNormEstimate> evaluation_norms;
  std::size_t successes() const;
};

// Looks for theta_i with |k(x_i, theta_i)| = ||k(x_i, .)||_inf and
// k(x_j, theta_i) = 0 for j != i: selector templates first, then a
// penalized pattern search.
AnchorReport find_anchors(const Dataset& data, const KernelContext& ctx, const SolverConfig& cfg,
                          std::size_t component = 0);

struct Exclusion {
  std::size_t index;
  std::string reason;
};

struct NiceSubset {
  std::vector<std::size_t> kept;
  std::vector<ParamVector> anchors;  // aligned with kept
  std::vector<Exclusion> excluded;
};

// Greedy in input order: a point is kept when some attaining parameter
// vanishes at every kept point and every kept anchor vanishes at it.
NiceSubset extract_nice_subset(const Dataset& data, const AnchorReport& report,
                               const KernelContext& ctx, const SolverConfig& cfg,
                               std::size_t component = 0);

struct AnchorSet {
  std::vector<ParamVector> anchors;
  Matrix gram;  // gram[i][j] = k(x_i, theta_j)
  bool diagonal = false;
  std::vector<bool> attainment;
  std::vector<Bracket> dual_norm_brackets;  // ||k(., theta_i)||
  std::vector<double> evaluation_norms;     // certified upper bound on ||k(x_i, .)||_inf
};

AnchorSet build_anchor_set(std::span<const std::vector<double>> inputs,
                           std::vector<ParamVector> anchors, const KernelContext& ctx,
                           const SolverConfig& cfg, std::size_t component = 0);

// beta with M beta = y. Diagonal M is divided exactly; otherwise LU with
// partial pivoting. Throws IllConditionedError above the condition limit.
std::vector<double> solve_coefficients(const Matrix& m, std::span<const double> y,
                                       double condition_limit = 1e12);

struct KernelExpansion {
  KernelContext ctx;
  std::size_t component = 0;
  std::vector<double> beta;
  std::vector<ParamVector> anchors;
};

// sum_i beta_i k(x, theta_i), all output components.
std::vector<double> evaluate(const KernelExpansion& f, std::span<const double> x);
double evaluate_component(const KernelExpansion& f, std::span<const double> x);

enum class MniStatus { CertifiedMinimal, Candidate };
const char* to_string(MniStatus s);

struct MNISolution {
  KernelExpansion expansion;
  double norm_lower = 0.0;
  double norm_upper = 0.0;
  MniStatus status = MniStatus::Candidate;
  // Orientation-adjusted sign(beta) when it is certified admissible.
  std::optional<SignVector> witness_sign;
  // Sign vector reaching norm_lower.
  SignVector lower_sign;
};

MNISolution assemble_mni(const AnchorSet& anchors, std::span<const double> beta,
                         std::span<const double> y, std::span<const SignVerdict> admissible,
                         const KernelContext& ctx, const SolverConfig& cfg,
                         std::size_t component = 0);

struct ConditionCheck {
  bool pass = false;
  double value = 0.0;   // measured quantity
  double target = 0.0;  // what it is compared against
};

struct VerificationReport {
  ConditionCheck unit_ball;      // sup-norm upper bound of sum alpha_i k(x_i, .) vs 1
  ConditionCheck attains_norm;   // alpha . M . beta vs sum |beta_i|
  ConditionCheck interpolation;  // max |M beta - y| vs 0
  bool all() const { return unit_ball.pass && attains_norm.pass && interpolation.pass; }
};

VerificationReport verify_representer(const KernelExpansion& f, std::span<const double> alpha,
                                      std::span<const std::vector<double>> inputs,
                                      std::span<const double> y, const SolverConfig& cfg);

// Everything the scalar pipeline produced for one output component.
struct ComponentSolution {
  std::size_t component = 0;
  AnchorReport anchor_report;
  NiceSubset nice;
  AnchorSet anchor_set;
  std::vector<double> y;  // targets on the kept points
  std::vector<double> beta;
  std::vector<SignVerdict> admissible;
  MNISolution mni;
};

// Anchors, nice subset, coefficient solve, sign enumeration and norm
// bracket for one component. Throws SolverFailure when no point gets a
// strict anchor and IllConditionedError from the solve.
ComponentSolution solve_scalar(const Dataset& data, const KernelContext& ctx,
                               const SolverConfig& cfg, std::size_t component = 0);

struct VectorSolution {
  std::vector<ComponentSolution> components;
  double norm_lower = 0.0;
  double norm_upper = 0.0;
  bool certified_minimal = false;
};

// One independent scalar solve per output component.
VectorSolution solve_vector_valued(const Dataset& data, const KernelContext& ctx,
                                   const SolverConfig& cfg);

std::vector<double> evaluate(const VectorSolution& f, std::span<const double> x);

}  // namespace rkbs
