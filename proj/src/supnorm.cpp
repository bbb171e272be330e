#include "rkbs/supnorm.hpp"

#include <algorithm>
#include <cmath>

#include "rkbs/errors.hpp"
#include "rkbs/parallel.hpp"

namespace rkbs {

Combination::Combination(KernelContext ctx, std::vector<Term> terms, std::size_t component)
    : ctx_(std::move(ctx)), terms_(std::move(terms)), component_(component) {
  const Architecture& arch = ctx_.arch();
  if (component_ >= arch.output_dim()) {
    throw ShapeError("component " + std::to_string(component_) + " out of range for output dim " +
                     std::to_string(arch.output_dim()));
  }
  const std::size_t m = terms_.size();
  inputs_.assign(arch.input_dim() * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (terms_[i].x.size() != arch.input_dim()) {
      throw ShapeError("layer 1: term " + std::to_string(i) + " has input dimension " +
                       std::to_string(terms_[i].x.size()) + ", expected " +
                       std::to_string(arch.input_dim()));
    }
    for (std::size_t f = 0; f < arch.input_dim(); ++f) inputs_[f * m + i] = terms_[i].x[f];
  }
}

bool Combination::is_zero() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return t.coefficient == 0.0; });
}

Combination Combination::scaled(double c) const {
  std::vector<Term> terms = terms_;
  for (Term& t : terms) t.coefficient *= c;
  return Combination(ctx_, std::move(terms), component_);
}

Combination::Evaluator::Evaluator(const Combination& comb) : comb_(&comb) {}

double Combination::Evaluator::operator()(std::span<const double> theta) {
  const Combination& c = *comb_;
  const std::size_t m = c.terms_.size();
  if (m == 0) return 0.0;
  forward_batch(c.ctx_.arch(), theta, c.inputs_, m, a_, b_, out_);
  const double w = xi(c.ctx_, theta);
  const double* row = out_.data() + c.component_ * m;
  double g = 0.0;
  for (std::size_t i = 0; i < m; ++i) g += c.terms_[i].coefficient * (row[i] * w);
  return g;
}

double Combination::value(std::span<const double> theta) const {
  Evaluator ev(*this);
  return ev(theta);
}

const char* to_string(SupNormStatus s) {
  return s == SupNormStatus::CertifiedExact ? "certified_exact" : "bracketed";
}

void validate(const SearchConfig& cfg) {
  if (cfg.starts == 0 || cfg.iterations == 0 || !(cfg.tail_margin > 0.0) ||
      !(cfg.tolerance > 0.0)) {
    throw ValidationError("search config: starts, iterations, tail_margin and tol must be positive");
  }
}

double analytic_upper(const Combination& comb) {
  const KernelContext& ctx = comb.context();
  double triangle = 0.0, pos = 0.0, neg = 0.0, sum = 0.0;
  for (const Term& t : comb.terms()) {
    const double c = input_bound(ctx, t.x);
    triangle += std::fabs(t.coefficient) * c;
    if (t.coefficient > 0) pos += t.coefficient * c;
    if (t.coefficient < 0) neg -= t.coefficient * c;
    sum += t.coefficient;
  }
  if (ctx.arch().activation() != Activation::ReLU) return triangle;
  // Hidden ReLU outputs are nonnegative, so each output weight sees a
  // difference of two nonnegative sums; the output bias sees sum alpha_i.
  const double split = std::max({pos, neg, std::fabs(sum)});
  return std::min(triangle, split);
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

namespace {

double uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool lex_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

std::vector<std::uint8_t> component_mask(const Architecture& arch, std::size_t component) {
  std::vector<std::uint8_t> mask(arch.param_count(), 1);
  const std::size_t l = arch.depth();
  for (std::size_t i = 0; i < arch.rows(l); ++i) {
    if (i == component) continue;
    for (std::size_t j = 0; j < arch.cols(l); ++j) {
      mask[arch.weight_offset(l) + i * arch.cols(l) + j] = 0;
    }
    mask[arch.bias_offset(l) + i] = 0;
  }
  return mask;
}

std::vector<double> random_params(const Architecture& arch, std::span<const std::uint8_t> mask,
                                  double norm, std::mt19937_64& rng) {
  std::vector<double> theta(arch.param_count(), 0.0);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (mask[i]) theta[i] = 2.0 * uniform(rng) - 1.0;
  }
  const double n = param_norm(arch, theta);
  if (n > 0.0) {
    for (double& v : theta) v *= norm / n;
  }
  return theta;
}

PatternSearchResult pattern_search(const Architecture& arch,
                                   const std::function<double(std::span<const double>)>& objective,
                                   std::vector<double> x, std::span<const std::uint8_t> mask,
                                   const PatternSearchOptions& opt, std::mt19937_64& rng) {
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (mask[i]) active.push_back(i);
  }
  // Pairs of active entries sharing a neuron row. Moving mass between them
  // follows the ridges of the max-row norm, where plain coordinate steps
  // stall.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 1; k <= arch.depth(); ++k) {
    for (std::size_t r = 0; r < arch.rows(k); ++r) {
      std::vector<std::size_t> row;
      for (std::size_t j = 0; j < arch.cols(k); ++j) row.push_back(arch.weight_offset(k) + r * arch.cols(k) + j);
      row.push_back(arch.bias_offset(k) + r);
      for (std::size_t a = 0; a < row.size(); ++a) {
        for (std::size_t b = a + 1; b < row.size(); ++b) {
          if (mask[row[a]] && mask[row[b]]) pairs.emplace_back(row[a], row[b]);
        }
      }
    }
  }
  double best = objective(x);
  double h = opt.initial_step;
  std::vector<double> cand(x.size());
  std::vector<double> dir(x.size(), 0.0);

  auto try_point = [&](const std::vector<double>& p) {
    if (param_norm(arch, p) > opt.radius) return false;
    const double v = objective(p);
    if (v > best) {
      best = v;
      x = p;
      return true;
    }
    return false;
  };

  for (std::size_t it = 0; it < opt.iterations && h >= opt.min_step && !active.empty(); ++it) {
    bool improved = false;
    for (std::size_t a = 0; a < active.size() && !improved; ++a) {
      const std::size_t idx = active[a];
      for (double sgn : {1.0, -1.0}) {
        cand = x;
        cand[idx] += sgn * h;
        if (try_point(cand)) {
          improved = true;
          break;
        }
      }
    }
    for (std::size_t p = 0; p < pairs.size() && !improved; ++p) {
      for (double si : {1.0, -1.0}) {
        for (double sj : {1.0, -1.0}) {
          cand = x;
          cand[pairs[p].first] += si * h;
          cand[pairs[p].second] += sj * h;
          if (try_point(cand)) {
            improved = true;
            break;
          }
        }
        if (improved) break;
      }
    }
    for (std::size_t q = 0; q < opt.random_directions && !improved; ++q) {
      double amax = 0.0;
      for (std::size_t idx : active) {
        dir[idx] = 2.0 * uniform(rng) - 1.0;
        amax = std::max(amax, std::fabs(dir[idx]));
      }
      if (amax == 0.0) continue;
      for (double sgn : {1.0, -1.0}) {
        cand = x;
        for (std::size_t idx : active) cand[idx] += sgn * h * dir[idx] / amax;
        if (try_point(cand)) {
          improved = true;
          break;
        }
      }
    }
    h = improved ? std::min(2.0 * h, opt.max_step) : 0.5 * h;
  }
  return {std::move(x), best};
}

SupNormEstimate estimate_sup(const Combination& comb, const SearchConfig& cfg) {
  validate(cfg);
  const KernelContext& ctx = comb.context();
  const Architecture& arch = ctx.arch();
  const std::size_t component = comb.component();

  if (comb.is_zero()) {
    return {0.0, 0.0, ParamVector(arch), SupNormStatus::CertifiedExact};
  }

  const bool certified = ctx.certifiable();
  double triangle = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  if (certified) {
    for (const Term& t : comb.terms()) triangle += std::fabs(t.coefficient) * input_bound(ctx, t.x);
    upper = analytic_upper(comb);
  }

  // Structured starts: zero, the constant selector and every selector chain.
  std::vector<std::vector<double>> starts;
  starts.push_back(std::vector<double>(arch.param_count(), 0.0));
  starts.push_back(pack(constant_selector(arch, component)));
  for (std::size_t c = 0; c < arch.input_dim(); ++c) {
    for (double s : {1.0, -1.0}) starts.push_back(pack(coordinate_selector(arch, c, s, component)));
  }
  starts.push_back(pack(bias_selector(arch, component)));

  struct Candidate {
    std::vector<double> theta;
    double value = -1.0;
  };
  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.value != b.value) return a.value > b.value;
    return lex_less(a.theta, b.theta);
  };

  Candidate best;
  {
    Combination::Evaluator ev(comb);
    for (const auto& s : starts) {
      Candidate c{s, std::fabs(ev(s))};
      if (best.value < 0 || better(c, best)) best = std::move(c);
    }
  }

  const auto finish = [&](const Candidate& c) {
    SupNormEstimate est;
    est.witness = ParamVector(arch, c.theta);
    est.lower = std::fabs(comb.value(c.theta));
    est.upper = upper;
    if (est.lower > est.upper) {
      if (est.lower - est.upper > 1e-12 * std::max(1.0, est.upper)) {
        throw std::logic_error("sup-norm search exceeded a certified upper bound");
      }
      est.upper = est.lower;
    }
    est.status = (est.upper - est.lower <= cfg.tolerance) ? SupNormStatus::CertifiedExact
                                                          : SupNormStatus::Bracketed;
    return est;
  };

  if (best.value >= upper - cfg.tolerance) return finish(best);

  // |g(theta)| <= triangle / ||theta|| outside the unit ball, so nothing
  // beyond this radius can beat the current best.
  double radius = 10.0;
  if (certified) {
    const double margin = cfg.tail_margin * triangle;
    radius = best.value > margin ? std::max(1.0, triangle / (best.value - margin)) : 1e3;
  }

  const std::vector<std::uint8_t> mask = component_mask(arch, component);
  const std::size_t total = starts.size() + cfg.starts;
  std::vector<Candidate> results(total);
  PatternSearchOptions opt;
  opt.iterations = cfg.iterations;
  opt.radius = radius;

  parallel_for(total, [&](std::size_t i) {
    std::mt19937_64 rng = stream_rng(cfg.seed, i);
    std::vector<double> start;
    if (i < starts.size()) {
      start = starts[i];
    } else {
      const double u = uniform(rng);
      double norm;
      if (u < 0.5) {
        norm = 1.0;
      } else if (u < 0.8) {
        norm = uniform(rng);
      } else {
        norm = 1.0 + uniform(rng) * (std::min(radius, 4.0) - 1.0);
      }
      start = random_params(arch, mask, std::min(norm, radius), rng);
    }
    Combination::Evaluator ev(comb);
    auto objective = [&ev](std::span<const double> t) { return std::fabs(ev(t)); };
    PatternSearchResult r = pattern_search(arch, objective, std::move(start), mask, opt, rng);
    results[i] = {std::move(r.theta), r.value};
  });

  for (auto& c : results) {
    if (better(c, best)) best = std::move(c);
  }
  return finish(best);
}

SupNormEstimate evaluation_sup_norm(const KernelContext& ctx, std::span<const double> x,
                                    std::size_t component, const SearchConfig& cfg) {
  if (ctx.closed_form_evaluation_norms()) {
    const double c = input_bound(ctx, x);
    ParamVector w = norm_attaining_selector(ctx.arch(), x, component);
    const double attained = std::fabs(kernel_eval(ctx, x, w, component));
    return {attained, c, std::move(w),
            c - attained <= cfg.tolerance ? SupNormStatus::CertifiedExact
                                          : SupNormStatus::Bracketed};
  }
  Combination single(ctx, {Term{1.0, std::vector<double>(x.begin(), x.end())}}, component);
  return estimate_sup(single, cfg);
}

Bracket dual_point_norm(const KernelContext& ctx, const ParamVector& theta,
                        std::span<const Combination> probes) {
  double lower = 0.0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Combination& probe = probes[i];
    if (!(probe.context().arch() == ctx.arch())) {
      throw RejectedProbe("probe " + std::to_string(i) + " uses a different architecture");
    }
    const double bound = analytic_upper(probe);
    if (bound > 1.0 + 1e-12) {
      throw RejectedProbe("probe " + std::to_string(i) + " has certified norm bound " +
                          std::to_string(bound) + " > 1, not a unit-ball element");
    }
    lower = std::max(lower, std::fabs(probe.value(theta)));
  }
  return {lower, 1.0};
}

}  // namespace rkbs
