#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "rkbs/kernel.hpp"

namespace rkbs {

struct Term {
  double coefficient;
  std::vector<double> x;
};

// g(theta) = sum_i alpha_i k_c(x_i, theta) for one output component c.
class Combination {
 public:
  Combination(KernelContext ctx, std::vector<Term> terms, std::size_t component = 0);

  const KernelContext& context() const { return ctx_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t component() const { return component_; }
  bool is_zero() const;

  Combination scaled(double c) const;

  // Evaluates g with private scratch; not shareable between threads. Make
  // one per worker.
  class Evaluator {
   public:
    explicit Evaluator(const Combination& comb);
    double operator()(std::span<const double> theta);

   private:
    const Combination* comb_;
    std::vector<double> a_, b_, out_;
  };

  double value(std::span<const double> theta) const;
  double value(const ParamVector& theta) const { return value(theta.flat()); }

 private:
  KernelContext ctx_;
  std::vector<Term> terms_;
  std::size_t component_;
  std::vector<double> inputs_;  // feature-major, batch = terms_.size()
};

enum class SupNormStatus { CertifiedExact, Bracketed };
const char* to_string(SupNormStatus s);

struct SupNormEstimate {
  double lower = 0.0;
  // +infinity when no analytic bound applies (decay exponent below depth+1).
  double upper = std::numeric_limits<double>::infinity();
  ParamVector witness;
  SupNormStatus status = SupNormStatus::Bracketed;
};

struct SearchConfig {
  std::uint64_t seed = 0;
  std::size_t starts = 256;
  std::size_t iterations = 400;
  double tail_margin = 1e-6;
  double tolerance = 1e-9;
};

void validate(const SearchConfig& cfg);

struct Bracket {
  double lower;
  double upper;
};

// Certified upper bound on ||g||_inf: the smaller of the triangle bound
// sum |alpha_i| C(x_i) and, for ReLU networks, the sign-split bound
// max{P+, P-, |sum alpha_i|} with P+- the positive/negative parts of
// sum alpha_i C(x_i). Throws CertificationUnavailable when p < l + 1.
double analytic_upper(const Combination& comb);

// Multistart derivative-free search for sup |g| over the tail-truncated
// parameter ball. Deterministic for a fixed seed regardless of threading.
SupNormEstimate estimate_sup(const Combination& comb, const SearchConfig& cfg = {});

// ||k(x, .)||_inf for one output component. Closed form for ReLU with
// affine output and p = l + 1, numerical bracket otherwise.
SupNormEstimate evaluation_sup_norm(const KernelContext& ctx, std::span<const double> x,
                                    std::size_t component = 0, const SearchConfig& cfg = {});

// Bracket on the norm of k(., theta) as a functional: upper is 1, lower the
// best |g(theta)| over probes certified to lie in the unit ball.
Bracket dual_point_norm(const KernelContext& ctx, const ParamVector& theta,
                        std::span<const Combination> probes);

// Coordinate pattern search (plus random poll directions) maximizing an
// objective over flat parameter vectors. Entries with mask 0 stay fixed.
struct PatternSearchOptions {
  std::size_t iterations = 400;
  double initial_step = 0.25;
  double min_step = 1e-12;
  double max_step = 1.0;
  double radius = std::numeric_limits<double>::infinity();  // param_norm bound
  std::size_t random_directions = 4;
};

struct PatternSearchResult {
  std::vector<double> theta;
  double value;
};

PatternSearchResult pattern_search(const Architecture& arch,
                                   const std::function<double(std::span<const double>)>& objective,
                                   std::vector<double> start, std::span<const std::uint8_t> mask,
                                   const PatternSearchOptions& options, std::mt19937_64& rng);

// Independent random stream for (seed, stream index).
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream);

// Active coordinates for a scalar component: every hidden layer plus the
// output row `component`.
std::vector<std::uint8_t> component_mask(const Architecture& arch, std::size_t component);

// Random parameters on the active coordinates with param_norm equal to
// `norm`.
std::vector<double> random_params(const Architecture& arch, std::span<const std::uint8_t> mask,
                                  double norm, std::mt19937_64& rng);

}  // namespace rkbs
