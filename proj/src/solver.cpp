#include "rkbs/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "rkbs/errors.hpp"
#include "rkbs/parallel.hpp"

namespace rkbs {

namespace {

[[noreturn]] void throw_ill_conditioned(double cond, double limit) {
  std::ostringstream os;
  os << "Gram matrix condition estimate " << cond << " exceeds " << limit;
  throw IllConditionedError(os.str(), cond);
}

std::string row_name(std::size_t i) { return "row " + std::to_string(i + 1); }

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

// Flips the sign of output row `component` so that k(x, theta) >= 0.
ParamVector orient(const KernelContext& ctx, ParamVector theta, std::span<const double> x,
                   std::size_t component) {
  if (kernel_eval(ctx, x, theta, component) >= 0.0) return theta;
  const Architecture& arch = ctx.arch();
  const std::size_t l = arch.depth();
  std::vector<double> flat = pack(theta);
  const std::size_t cols = arch.cols(l);
  for (std::size_t j = 0; j < cols; ++j) {
    double& w = flat[arch.weight_offset(l) + component * cols + j];
    w = -w;
  }
  double& b = flat[arch.bias_offset(l) + component];
  b = -b;
  return ParamVector(arch, std::move(flat));
}

// Largest |k(x_j, theta)| over j != skip.
double max_off(const KernelContext& ctx, std::span<const std::vector<double>> xs,
               const ParamVector& theta, std::size_t skip, std::size_t component,
               std::size_t* where = nullptr) {
  double worst = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (j == skip) continue;
    const double v = std::fabs(kernel_eval(ctx, xs[j], theta, component));
    if (v > worst) {
      worst = v;
      if (where) *where = j;
    }
  }
  return worst;
}

bool lex_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

int sign_of(double v) { return (v > 0) - (v < 0); }

}  // namespace

Dataset::Dataset(std::vector<std::vector<double>> inputs, std::vector<std::vector<double>> outputs) {
  if (inputs.size() != outputs.size()) {
    throw ValidationError("dataset has " + std::to_string(inputs.size()) + " inputs but " +
                          std::to_string(outputs.size()) + " outputs");
  }
  if (inputs.empty()) return;
  input_dim_ = inputs[0].size();
  output_dim_ = outputs[0].size();
  if (input_dim_ == 0 || output_dim_ == 0) {
    throw ValidationError("dataset " + row_name(0) + " has an empty input or output");
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != input_dim_ || outputs[i].size() != output_dim_) {
      throw ValidationError("dataset " + row_name(i) + " has " + std::to_string(inputs[i].size()) +
                            " inputs and " + std::to_string(outputs[i].size()) +
                            " outputs, expected " + std::to_string(input_dim_) + " and " +
                            std::to_string(output_dim_));
    }
    if (!all_finite(inputs[i]) || !all_finite(outputs[i])) {
      throw ValidationError("dataset " + row_name(i) + " has a non-finite value");
    }
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    bool duplicate = false;
    for (std::size_t k = 0; k < inputs_.size(); ++k) {
      if (inputs_[k] != inputs[i]) continue;
      if (outputs_[k] != outputs[i]) {
        throw ValidationError("dataset " + row_name(i) +
                              " repeats an earlier input with a different output");
      }
      duplicate = true;
      break;
    }
    if (duplicate) {
      collapsed_.push_back(i);
      continue;
    }
    inputs_.push_back(std::move(inputs[i]));
    outputs_.push_back(std::move(outputs[i]));
  }
}

std::vector<double> Dataset::column(std::size_t component) const {
  if (!empty() && component >= output_dim_) {
    throw ShapeError("output component " + std::to_string(component) + " out of range");
  }
  std::vector<double> c(size());
  for (std::size_t i = 0; i < size(); ++i) c[i] = outputs_[i][component];
  return c;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset d;
  d.input_dim_ = input_dim_;
  d.output_dim_ = output_dim_;
  for (std::size_t i : indices) {
    d.inputs_.push_back(inputs_.at(i));
    d.outputs_.push_back(outputs_.at(i));
  }
  return d;
}

std::size_t AnchorReport::successes() const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const PointAnchor& p) { return p.success; }));
}

AnchorReport find_anchors(const Dataset& data, const KernelContext& ctx, const SolverConfig& cfg,
                          std::size_t component) {
  const auto& xs = data.inputs();
  const std::size_t m = xs.size();
  const Architecture& arch = ctx.arch();
  const SearchConfig& search = cfg.signs.search;
  if (m && data.input_dim() != arch.input_dim()) {
    throw ShapeError("dataset inputs have dimension " + std::to_string(data.input_dim()) +
                     ", the network expects " + std::to_string(arch.input_dim()));
  }
  if (component >= arch.output_dim()) {
    throw ShapeError("output component " + std::to_string(component) + " out of range");
  }

  AnchorReport report;
  report.points.resize(m);
  report.evaluation_norms.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    report.evaluation_norms[i] = evaluation_sup_norm(ctx, xs[i], component, search);
  }

  const std::vector<std::uint8_t> mask = component_mask(arch, component);
  for (std::size_t i = 0; i < m; ++i) {
    PointAnchor& pa = report.points[i];
    const SupNormEstimate& norm = report.evaluation_norms[i];
    const double target = norm.lower;
    auto attains = [&](const ParamVector& theta) {
      return target > 0.0 &&
             std::fabs(kernel_eval(ctx, xs[i], theta, component)) >= target - search.tolerance;
    };

    std::vector<ParamVector> pool;
    if (ctx.closed_form_evaluation_norms()) pool = attaining_selectors(arch, xs[i], component);
    pool.push_back(norm.witness);
    for (auto& theta : pool) {
      if (!attains(theta)) continue;
      ParamVector t = orient(ctx, std::move(theta), xs[i], component);
      if (std::find(pa.candidates.begin(), pa.candidates.end(), t) == pa.candidates.end()) {
        pa.candidates.push_back(std::move(t));
      }
    }

    std::size_t blocker = 0;
    for (const auto& theta : pa.candidates) {
      std::size_t where = 0;
      if (max_off(ctx, xs, theta, i, component, &where) <= cfg.zero_tolerance) {
        pa.success = true;
        pa.anchor = theta;
        pa.source = "selector";
        break;
      }
      blocker = where;
    }
    if (pa.success) continue;
    if (m == 1) {
      pa.reason = "no parameter attains the evaluation norm";
      continue;
    }

    // Fallback: maximize |k_i| - rho * sum_{j != i} |k_j|. Half of the
    // starts move only the first-layer row of a selector chain, where the
    // objective is piecewise linear in (w, b); the rest move every active
    // entry. An attaining anchor has param_norm <= 1 whenever the decay
    // bound holds, so the search stays in that ball.
    const std::size_t first_row = arch.depth() == 1 ? component : 0;
    std::vector<std::uint8_t> row_mask(arch.param_count(), 0);
    for (std::size_t j = 0; j < arch.cols(1); ++j) row_mask[arch.weight_offset(1) + first_row * arch.cols(1) + j] = 1;
    row_mask[arch.bias_offset(1) + first_row] = 1;
    const std::vector<double> chain = pack(coordinate_selector(arch, 0, 1.0, component));

    struct Start {
      std::vector<double> theta;
      const std::vector<std::uint8_t>* mask;
    };
    std::vector<Start> starts;
    for (const auto& c : pa.candidates) starts.push_back({pack(c), &row_mask});
    const std::size_t structured = starts.size();
    const std::size_t total = structured + search.starts;
    std::vector<PatternSearchResult> results(total);
    PatternSearchOptions opt;
    opt.iterations = search.iterations;
    opt.radius = ctx.certifiable() ? 1.0 : 10.0;
    parallel_for(total, [&](std::size_t s) {
      std::mt19937_64 rng = stream_rng(search.seed, ((i + 1) << 32) | s);
      Start start;
      if (s < structured) {
        start = starts[s];
      } else if ((s - structured) % 2 == 0) {
        std::vector<double> row = random_params(arch, row_mask, 1.0, rng);
        start = {chain, &row_mask};
        for (std::size_t q = 0; q < row.size(); ++q) {
          if (row_mask[q]) start.theta[q] = row[q];
        }
      } else {
        start = {random_params(arch, mask, 1.0, rng), &mask};
      }
      auto objective = [&](std::span<const double> t) {
        double v = 0.0, pen = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          const std::vector<double> out = forward(arch, t, xs[j]);
          const double k = out[component] * xi(ctx, t);
          if (j == i) {
            v = std::fabs(k);
          } else {
            pen += std::fabs(k);
          }
        }
        return v - cfg.rho * pen;
      };
      results[s] = pattern_search(arch, objective, std::move(start.theta), *start.mask, opt, rng);
    });
    const PatternSearchResult* best = nullptr;
    for (const auto& r : results) {
      if (!best || r.value > best->value || (r.value == best->value && lex_less(r.theta, best->theta))) {
        best = &r;
      }
    }
    ParamVector found(arch, best->theta);
    if (attains(found) && max_off(ctx, xs, found, i, component) <= cfg.zero_tolerance) {
      found = orient(ctx, std::move(found), xs[i], component);
      pa.candidates.push_back(found);
      pa.success = true;
      pa.anchor = std::move(found);
      pa.source = "penalized search";
      continue;
    }
    std::ostringstream why;
    if (pa.candidates.empty()) {
      why << "no attaining template; penalized search reached |k| = "
          << std::fabs(kernel_eval(ctx, xs[i], found, component)) << " of " << target;
    } else {
      why << "every attaining template is nonzero at " << row_name(blocker)
          << "; penalized search found no separating anchor";
    }
    pa.reason = why.str();
  }
  return report;
}

NiceSubset extract_nice_subset(const Dataset& data, const AnchorReport& report,
                               const KernelContext& ctx, const SolverConfig& cfg,
                               std::size_t component) {
  const auto& xs = data.inputs();
  NiceSubset out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const PointAnchor& pa = report.points.at(i);
    std::vector<const ParamVector*> options;
    if (pa.anchor) options.push_back(&*pa.anchor);
    for (const auto& c : pa.candidates) options.push_back(&c);

    std::size_t clash = 0;
    const ParamVector* chosen = nullptr;
    for (const ParamVector* theta : options) {
      bool ok = true;
      for (std::size_t q = 0; q < out.kept.size() && ok; ++q) {
        const std::size_t j = out.kept[q];
        if (std::fabs(kernel_eval(ctx, xs[j], *theta, component)) > cfg.zero_tolerance ||
            std::fabs(kernel_eval(ctx, xs[i], out.anchors[q], component)) > cfg.zero_tolerance) {
          ok = false;
          clash = j;
        }
      }
      if (ok) {
        chosen = theta;
        break;
      }
    }
    if (chosen) {
      out.kept.push_back(i);
      out.anchors.push_back(*chosen);
    } else if (options.empty()) {
      out.excluded.push_back({i, pa.reason.empty() ? "no attaining anchor" : pa.reason});
    } else {
      out.excluded.push_back({i, "every attaining anchor overlaps kept " + row_name(clash)});
    }
  }
  return out;
}

AnchorSet build_anchor_set(std::span<const std::vector<double>> inputs,
                           std::vector<ParamVector> anchors, const KernelContext& ctx,
                           const SolverConfig& cfg, std::size_t component) {
  const std::size_t m = inputs.size();
  if (anchors.size() != m) throw ShapeError("anchor count differs from point count");
  AnchorSet set;
  set.anchors = std::move(anchors);
  set.gram.assign(m, std::vector<double>(m, 0.0));
  set.diagonal = true;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      set.gram[i][j] = kernel_eval(ctx, inputs[i], set.anchors[j], component);
      if (i != j && std::fabs(set.gram[i][j]) > cfg.zero_tolerance) set.diagonal = false;
    }
  }

  std::vector<SupNormEstimate> norms(m);
  for (std::size_t i = 0; i < m; ++i) {
    norms[i] = evaluation_sup_norm(ctx, inputs[i], component, cfg.signs.search);
    set.evaluation_norms.push_back(norms[i].upper);
  }

  // Scaled singletons k(x_j, .) / ||k(x_j, .)|| are unit-ball probes.
  std::vector<Combination> probes;
  if (ctx.certifiable()) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = norms[j].upper;
      if (std::isfinite(c) && c > 0.0) {
        probes.emplace_back(ctx, std::vector<Term>{{1.0 / c, inputs[j]}}, component);
        if (analytic_upper(probes.back()) > 1.0 + 1e-12) probes.pop_back();
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    const Bracket b = dual_point_norm(ctx, set.anchors[i], probes);
    set.dual_norm_brackets.push_back(b);
    set.attainment.push_back(norms[i].status == SupNormStatus::CertifiedExact &&
                             b.lower >= 1.0 - 1e-9 &&
                             std::fabs(set.gram[i][i]) >= norms[i].upper - 1e-9);
  }
  return set;
}

std::vector<double> solve_coefficients(const Matrix& m, std::span<const double> y,
                                       double condition_limit) {
  const std::size_t n = m.size();
  if (y.size() != n) throw ShapeError("right-hand side length differs from matrix size");
  for (const auto& row : m) {
    if (row.size() != n) throw ShapeError("Gram matrix is not square");
  }
  if (n == 0) return {};

  bool diagonal = true;
  for (std::size_t i = 0; i < n && diagonal; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && m[i][j] != 0.0) {
        diagonal = false;
        break;
      }
    }
  }
  if (diagonal) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, std::fabs(m[i][i]));
      hi = std::max(hi, std::fabs(m[i][i]));
    }
    const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(cond <= condition_limit)) {
      throw_ill_conditioned(cond, condition_limit);
    }
    std::vector<double> beta(n);
    for (std::size_t i = 0; i < n; ++i) beta[i] = y[i] / m[i][i];
    return beta;
  }

  Eigen::MatrixXd a(n, n);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    b(i) = y[i];
    for (std::size_t j = 0; j < n; ++j) a(i, j) = m[i][j];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(cond <= condition_limit)) {
    throw_ill_conditioned(cond, condition_limit);
  }
  const Eigen::VectorXd x = lu.solve(b);
  return std::vector<double>(x.data(), x.data() + n);
}

std::vector<double> evaluate(const KernelExpansion& f, std::span<const double> x) {
  std::vector<double> out(f.ctx.arch().output_dim(), 0.0);
  for (std::size_t i = 0; i < f.beta.size(); ++i) {
    if (f.beta[i] == 0.0) continue;
    const std::vector<double> k = kernel_eval(f.ctx, x, f.anchors[i]);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += f.beta[i] * k[c];
  }
  return out;
}

double evaluate_component(const KernelExpansion& f, std::span<const double> x) {
  double sum = 0.0;
  for (std::size_t i = 0; i < f.beta.size(); ++i) {
    if (f.beta[i] == 0.0) continue;
    sum += f.beta[i] * kernel_eval(f.ctx, x, f.anchors[i], f.component);
  }
  return sum;
}

const char* to_string(MniStatus s) {
  return s == MniStatus::CertifiedMinimal ? "certified_minimal" : "candidate";
}

MNISolution assemble_mni(const AnchorSet& anchors, std::span<const double> beta,
                         std::span<const double> y, std::span<const SignVerdict> admissible,
                         const KernelContext& ctx, const SolverConfig& cfg,
                         std::size_t component) {
  const std::size_t m = beta.size();
  if (y.size() != m || anchors.anchors.size() != m) {
    throw ShapeError("coefficient, target and anchor counts differ");
  }
  MNISolution sol;
  sol.expansion = {ctx, component, std::vector<double>(beta.begin(), beta.end()), anchors.anchors};

  for (std::size_t i = 0; i < m; ++i) {
    sol.norm_upper += std::fabs(beta[i]) * anchors.dual_norm_brackets[i].upper;
  }

  // Certified-admissible sign combinations are unit-ball elements on which
  // the data functional takes the value sum_j s_j y_j / c_j.
  std::vector<double> scales(m, 1.0);
  if (cfg.signs.scaled_witnesses) {
    for (std::size_t i = 0; i < m; ++i) {
      const double c = anchors.evaluation_norms[i];
      if (std::isfinite(c) && c > 0.0) scales[i] = c;
    }
  }
  auto pairing = [&](std::span<const int> s) {
    double v = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (s[j]) v += s[j] * y[j] / scales[j];
    }
    return std::fabs(v);
  };
  sol.lower_sign.assign(m, 0);
  for (const auto& row : admissible) {
    if (row.verdict.kind != VerdictKind::CertifiedAdmissible) continue;
    const double v = pairing(row.s);
    if (v > sol.norm_lower) {
      sol.norm_lower = v;
      sol.lower_sign = row.s;
    }
  }

  // Orientation-adjusted sign(beta).
  SignVector s(m);
  for (std::size_t i = 0; i < m; ++i) s[i] = sign_of(beta[i]) * sign_of(anchors.gram[i][i]);
  AdmissibilityVerdict verdict;
  bool found = false;
  for (const auto& row : admissible) {
    if (row.s == s) {
      verdict = row.verdict;
      found = true;
      break;
    }
  }
  if (!found) {
    verdict.kind = VerdictKind::Uncertified;
  }
  const bool attained =
      std::all_of(anchors.attainment.begin(), anchors.attainment.end(), [](bool b) { return b; });
  if (verdict.kind == VerdictKind::CertifiedAdmissible) {
    const double v = pairing(s);
    if (v > sol.norm_lower) {
      sol.norm_lower = v;
      sol.lower_sign = s;
    }
    if (attained && anchors.diagonal && sol.norm_upper - sol.norm_lower <= 1e-9) {
      sol.status = MniStatus::CertifiedMinimal;
      sol.witness_sign = s;
    }
  }
  if (sol.norm_lower > sol.norm_upper) {
    if (sol.norm_lower - sol.norm_upper > 1e-9 * std::max(1.0, sol.norm_upper)) {
      throw std::logic_error("norm lower bound exceeds the upper bound");
    }
    sol.norm_lower = sol.norm_upper;
  }
  return sol;
}

VerificationReport verify_representer(const KernelExpansion& f, std::span<const double> alpha,
                                      std::span<const std::vector<double>> inputs,
                                      std::span<const double> y, const SolverConfig& cfg) {
  const std::size_t m = inputs.size();
  if (alpha.size() != m || y.size() != m || f.beta.size() != m || f.anchors.size() != m) {
    throw ShapeError("verify_representer: lengths differ");
  }
  const double tol = cfg.signs.tolerance;
  VerificationReport r;

  std::vector<Term> terms;
  for (std::size_t i = 0; i < m; ++i) terms.push_back({alpha[i], inputs[i]});
  const SupNormEstimate est =
      estimate_sup(Combination(f.ctx, std::move(terms), f.component), cfg.signs.search);
  r.unit_ball = {est.upper <= 1.0 + tol, est.upper, 1.0};

  double pairing = 0.0, target = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      row += kernel_eval(f.ctx, inputs[i], f.anchors[j], f.component) * f.beta[j];
    }
    pairing += alpha[i] * row;
    residual = std::max(residual, std::fabs(row - y[i]));
    target += std::fabs(f.beta[i]);
  }
  pairing = std::fabs(pairing);
  r.attains_norm = {pairing >= target - tol * std::max(1.0, target), pairing, target};
  r.interpolation = {residual <= 1e-9, residual, 0.0};
  return r;
}

ComponentSolution solve_scalar(const Dataset& data, const KernelContext& ctx,
                               const SolverConfig& cfg, std::size_t component) {
  ComponentSolution out;
  out.component = component;
  out.anchor_report = find_anchors(data, ctx, cfg, component);
  if (!data.empty() && out.anchor_report.successes() == 0) {
    std::ostringstream msg;
    msg << "no viable anchors for output component " << component + 1;
    for (std::size_t i = 0; i < data.size(); ++i) {
      msg << "\n  " << row_name(i) << ": " << out.anchor_report.points[i].reason;
    }
    throw SolverFailure(msg.str());
  }
  out.nice = extract_nice_subset(data, out.anchor_report, ctx, cfg, component);
  const Dataset kept = data.subset(out.nice.kept);
  out.anchor_set = build_anchor_set(kept.inputs(), out.nice.anchors, ctx, cfg, component);
  out.y = kept.empty() ? std::vector<double>{} : kept.column(component);
  out.beta = solve_coefficients(out.anchor_set.gram, out.y, cfg.condition_limit);

  if (kept.size() <= cfg.signs.cap) {
    out.admissible = enumerate_admissible(kept.inputs(), ctx, cfg.signs, component);
  } else {
    // Too many points to enumerate: singletons and sign(beta) only.
    const auto scales = witness_scales(ctx, kept.inputs(), component, cfg.signs);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      for (int e : {1, -1}) {
        SignVector s(kept.size(), 0);
        s[i] = e;
        out.admissible.push_back(
            {s, is_admissible(s, kept.inputs(), scales, ctx, cfg.signs, component)});
      }
    }
    SignVector s(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
      s[i] = sign_of(out.beta[i]) * sign_of(out.anchor_set.gram[i][i]);
    }
    out.admissible.push_back(
        {s, is_admissible(s, kept.inputs(), scales, ctx, cfg.signs, component)});
  }
  out.mni = assemble_mni(out.anchor_set, out.beta, out.y, out.admissible, ctx, cfg, component);
  return out;
}

VectorSolution solve_vector_valued(const Dataset& data, const KernelContext& ctx,
                                   const SolverConfig& cfg) {
  const std::size_t t = data.empty() ? ctx.arch().output_dim() : data.output_dim();
  if (t != ctx.arch().output_dim()) {
    throw ShapeError("dataset has " + std::to_string(t) + " outputs, the network has " +
                     std::to_string(ctx.arch().output_dim()));
  }
  VectorSolution out;
  out.components.resize(t);
  parallel_for(t, [&](std::size_t c) { out.components[c] = solve_scalar(data, ctx, cfg, c); });
  out.certified_minimal = true;
  for (const auto& c : out.components) {
    out.norm_lower += c.mni.norm_lower;
    out.norm_upper += c.mni.norm_upper;
    out.certified_minimal = out.certified_minimal && c.mni.status == MniStatus::CertifiedMinimal;
  }
  return out;
}

std::vector<double> evaluate(const VectorSolution& f, std::span<const double> x) {
  std::vector<double> out(f.components.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = evaluate_component(f.components[c].mni.expansion, x);
  }
  return out;
}

}  // namespace rkbs
