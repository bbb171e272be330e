// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "grid_oracle.hpp"
#include "reg_oracle.hpp"
#include "rkbs/cli.hpp"
#include "rkbs/parallel.hpp"
#include "rkbs/regularizer.hpp"
#include "rkbs/signs.hpp"
#include "rkbs/solver.hpp"

using namespace rkbs;
using namespace rkbs::testing;

namespace {

// Collects failed checks for one criterion.
struct Check {
  std::vector<std::string> failures;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void near(double actual, double expected, double tol, const std::string& what) {
    if (!(std::fabs(actual - expected) <= tol)) {
      std::ostringstream os;
      os.precision(17);
      os << what << ": got " << actual << ", expected " << expected << " (tol " << tol << ")";
      failures.push_back(os.str());
    }
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(15);
  os << v;
  return os.str();
}

Dataset three_point(const std::vector<double>& y) {
  std::vector<std::vector<double>> ys;
  for (double v : y) ys.push_back({v});
  return Dataset(three_inputs(), ys);
}

SolverConfig default_solver() { return SolverConfig{}; }

const ParamVector sel_x1 = params({1, 0, 0, 0, 0, 0, 1, 0, 0});
const ParamVector sel_neg_x1 = params({-1, 0, 0, 0, 0, 0, 1, 0, 0});
const ParamVector sel_x2 = params({0, 1, 0, 0, 0, 0, 1, 0, 0});

const std::set<SignVector> kAdmissible{{0, 0, 0},  {1, 0, 0},  {-1, 0, 0}, {0, 1, 0},  {0, -1, 0},
                                       {0, 0, 1},  {0, 0, -1}, {1, -1, 0}, {-1, 1, 0}, {1, 0, -1},
                                       {-1, 0, 1}, {0, 1, -1}, {0, -1, 1}};

void kernel_norms(Check& c) {
  const auto ctx = two_two_one();
  for (const auto& x : three_inputs()) {
    const auto est = evaluation_sup_norm(ctx, x);
    c.expect(est.upper == 1.0, "closed-form upper != 1");
    c.expect(est.status == SupNormStatus::CertifiedExact, "not certified");
    c.near(est.lower, 1.0, 1e-6, "closed-form lower");
    // numerical bracket through the generic search
    const auto num = estimate_sup(signed_sum({1}, {x}), SearchConfig{});
    c.near(num.lower, 1.0, 1e-6, "search lower");
    c.expect(num.upper == 1.0, "search upper != 1");
  }
  c.detail = "||k(x_i,.)|| = 1 certified for i = 1..3";
}

void anchors_and_gram(Check& c) {
  const auto ctx = two_two_one();
  const Dataset data = three_point({2, -3, 0.5});
  const auto report = find_anchors(data, ctx, default_solver());
  c.expect(report.successes() == 3, "not every point anchored");
  if (report.successes() != 3) return;
  c.expect(*report.points[0].anchor == sel_x1, "anchor 1 is not the x1 selector");
  c.expect(*report.points[1].anchor == sel_neg_x1, "anchor 2 is not the -x1 selector");
  c.expect(*report.points[2].anchor == sel_x2, "anchor 3 is not the x2 selector");
  const auto nice = extract_nice_subset(data, report, ctx, default_solver());
  const auto set = build_anchor_set(data.inputs(), nice.anchors, ctx, default_solver());
  double off = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      // independent re-evaluation of the Gram entries
      const double direct = kernel_eval(ctx, data.inputs()[i], nice.anchors[j], 0);
      c.expect(direct == set.gram[i][j], "Gram entry differs from direct evaluation");
      if (i == j)
        c.near(set.gram[i][j], 1.0, 0.0, "diagonal");
      else
        off = std::max(off, std::fabs(set.gram[i][j]));
    }
  }
  c.expect(off <= 1e-12, "off-diagonal above 1e-12");
  c.detail = "three selectors, M = I3, max off-diagonal " + fmt(off);
}

void admissible_set(Check& c) {
  const auto ctx = two_two_one();
  const auto xs = three_inputs();
  const auto table = enumerate_admissible(xs, ctx, SignConfig{});
  c.expect(table.size() == 27, "enumeration size");
  std::size_t admissible = 0, inadmissible = 0;
  for (const auto& row : table) {
    const bool expected = kAdmissible.count(row.s) > 0;
    if (row.verdict.kind == VerdictKind::CertifiedAdmissible) {
      ++admissible;
      c.expect(expected, format_signs(row.s) + " certified admissible but should not be");
    } else if (row.verdict.kind == VerdictKind::CertifiedInadmissible) {
      ++inadmissible;
      c.expect(!expected, format_signs(row.s) + " certified inadmissible but should be admissible");
      if (!row.verdict.witness) {
        c.expect(false, format_signs(row.s) + " has no witness");
        continue;
      }
      double v = 0.0;
      for (std::size_t i = 0; i < 3; ++i) v += row.s[i] * kernel_eval(ctx, xs[i], *row.verdict.witness, 0);
      c.expect(std::fabs(v) > 1.0, format_signs(row.s) + " witness does not exceed 1");
    } else {
      c.expect(false, format_signs(row.s) + " left uncertified");
    }
  }
  c.expect(admissible == 13 && inadmissible == 14, "counts");

  struct Witness {
    SignVector s;
    std::vector<double> theta;
    double value;
  };
  const std::vector<Witness> witnesses{
      {{-1, 1, 1}, {-4.0 / 15, 2.0 / 5, 0, 0, 1.0 / 3, 0, 1, 0, 0}, 4.0 / 3},
      {{1, -1, 1}, {3.0 / 10, 1.0 / 5, 0, 0, 1.0 / 2, 0, 1, 0, 0}, 1.1},
      {{1, 1, -1}, {1.0 / 5, -3.0 / 10, 0, 0, 1.0 / 2, 0, 1, 0, 0}, 1.1},
  };
  for (const auto& w : witnesses) {
    const ParamVector theta = params(w.theta);
    double v = 0.0;
    for (std::size_t i = 0; i < 3; ++i) v += w.s[i] * kernel_eval(ctx, xs[i], theta, 0);
    c.near(v, w.value, 1e-12, "witness for " + format_signs(w.s));
  }
  c.detail = std::to_string(admissible) + " admissible, " + std::to_string(inadmissible) +
             " inadmissible; witnesses 4/3, 1.1, 1.1";
}

void mni_certification(Check& c) {
  const auto sol = solve_scalar(three_point({-1, 0, 1}), two_two_one(), default_solver());
  c.expect(sol.mni.status == MniStatus::CertifiedMinimal, "not certified minimal");
  c.near(sol.mni.norm_lower, 2.0, 0.0, "norm lower");
  c.near(sol.mni.norm_upper, 2.0, 0.0, "norm upper");
  c.expect(sol.mni.witness_sign && *sol.mni.witness_sign == SignVector{-1, 0, 1}, "witness sign");
  const auto v = verify_representer(sol.mni.expansion, std::vector<double>{-1, 0, 1}, three_inputs(),
                                    sol.y, default_solver());
  c.expect(v.all(), "representer verification");
  c.detail = "norm " + fmt(sol.mni.norm_upper) + ", witness (-1,0,1), status " +
             to_string(sol.mni.status);
}

void norm_bracket(Check& c) {
  const auto sol = solve_scalar(three_point({2, -3, 0.5}), two_two_one(), default_solver());
  c.near(sol.mni.norm_lower, 5.0, 0.0, "lower");
  c.near(sol.mni.norm_upper, 5.5, 0.0, "upper");
  c.detail = "[" + fmt(sol.mni.norm_lower) + ", " + fmt(sol.mni.norm_upper) + "]";
}

// R for one sign vector from the per-coordinate grid oracle (d = n = 1).
double oracle_r(const std::vector<double>& beta, const SignVector& s, double lambda0) {
  double total = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    total += grid_minimize_coordinate(beta[i], 1.0, 1.0, s[i], lambda0,
                                      static_cast<int>(beta.size()))
                 .value;
  }
  return total;
}

void sweep_table(Check& c) {
  const auto sol = solve_scalar(three_point({2, -3, 0.5}), two_two_one(), default_solver());
  RegConfig cfg;
  cfg.lambda0 = 0.1;
  const auto rep = regularize(sol, cfg);
  const std::map<SignVector, double> expected{
      {{1, -1, 0}, 341.0 / 600},   {{-1, 1, 0}, 53.0 / 12},    {{1, 0, -1}, 3931.0 / 1200},
      {{-1, 0, 1}, 5251.0 / 1200}, {{0, -1, 1}, 1001.0 / 600}, {{0, 1, -1}, 53.0 / 12},
      {{1, 0, 0}, 3931.0 / 1200},  {{-1, 0, 0}, 53.0 / 12},    {{0, 1, 0}, 53.0 / 12},
      {{0, -1, 0}, 2051.0 / 1200}, {{0, 0, 1}, 5251.0 / 1200}, {{0, 0, -1}, 53.0 / 12},
      {{0, 0, 0}, 53.0 / 12}};
  c.expect(rep.sweep.size() == 13, "sweep size " + std::to_string(rep.sweep.size()));
  std::set<SignVector> seen;
  for (const auto& r : rep.sweep) {
    seen.insert(r.s);
    const auto it = expected.find(r.s);
    if (it == expected.end()) {
      c.expect(false, "unexpected sign vector " + format_signs(r.s));
      continue;
    }
    c.near(r.r_value, it->second, 1e-9, "R" + format_signs(r.s));
    c.near(oracle_r(sol.beta, r.s, cfg.lambda0), it->second, 1e-9, "oracle R" + format_signs(r.s));
  }
  c.expect(seen.size() == 13, "sign vectors missing from the sweep");
  c.detail = "13 R values within 1e-9; (1,0,0) gives 3931/1200";
}

void selection(Check& c) {
  const auto ctx = two_two_one();
  RegConfig cfg;
  cfg.lambda0 = 0.1;
  const auto first = regularize(solve_scalar(three_point({2, -3, 0.5}), ctx, default_solver()), cfg);
  c.near(first.interval.lower, 0.5, 1e-12, "interval lower");
  c.near(first.interval.upper, 0.55, 1e-12, "interval upper");
  c.expect(first.decision.kind == DecisionKind::Unregularized, "lambda0 = 1/10 not unregularized");

  cfg.lambda0 = 1.0 / 3;
  const auto sol = solve_scalar(three_point({1, -0.5, 0.5}), ctx, default_solver());
  const auto second = regularize(sol, cfg);
  c.near(second.interval.lower, 0.5, 1e-12, "rescaled-target interval lower");
  c.near(second.interval.upper, 2.0 / 3, 1e-12, "rescaled-target interval upper");
  c.expect(second.decision.kind == DecisionKind::Regularized, "rescaled-target case not regularized");
  c.near(second.sweep.front().r_value, 5.0 / 12, 1e-12, "rescaled-target R");
  c.expect(second.sweep.front().coefficients == std::vector<double>{0.5, 0, 0},
           "rescaled-target coefficients are not (1/2, 0, 0)");
  c.detail = "unregularized at [0.5, 0.55]; R = 5/12 regularized against [1/2, 2/3]";
}

void scaled_anchor(Check& c) {
  const auto ctx = two_two_one();
  std::string values;
  for (double a : {-2.0, -1.0, 3.0}) {
    const Dataset data({{2, -2}, {-1, 0}, {0, 1}}, {{a}, {0}, {1}});
    const auto sol = solve_scalar(data, ctx, default_solver());
    c.near(sol.anchor_set.gram[0][0], 2.0, 0.0, "diagonal entry");
    c.near(sol.beta[0], a / 2, 0.0, "coefficient for a = " + fmt(a));
    c.near(evaluate_component(sol.mni.expansion, data.inputs()[0]), a, 1e-12, "interpolation");
    values += (values.empty() ? "" : ", ") + fmt(sol.beta[0]);
  }
  c.detail = "M11 = 2, coefficient a/2: " + values;
}

void properties(Check& c) {
  std::mt19937_64 rng(20240601);
  std::vector<std::string> parts;

  // pack/unpack
  {
    const std::vector<Architecture> archs{Architecture({2, 2, 1}), Architecture({4, 3, 5, 2})};
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int t = 0; t < 1000; ++t) {
      const auto& arch = archs[t % 2];
      std::vector<double> flat(arch.param_count());
      for (double& v : flat) v = u(rng);
      c.expect(pack(unpack(arch, flat)) == flat, "pack/unpack round trip");
    }
    parts.push_back("pack 1e3");
  }

  // kernel bound
  {
    const std::vector<KernelContext> ctxs{KernelContext(Architecture({2, 2, 1})),
                                          KernelContext(Architecture({3, 4, 3, 2}))};
    std::uniform_real_distribution<double> ux(-5, 5), ulog(-2, 3), unit(-1, 1);
    std::size_t worst = 0;
    for (int t = 0; t < 10000; ++t) {
      const auto& ctx = ctxs[t % 2];
      const Architecture& arch = ctx.arch();
      std::vector<double> flat(arch.param_count());
      for (double& v : flat) v = unit(rng);
      // rescale so the norm spans [1e-2, 1e3]
      const double target = std::pow(10.0, ulog(rng));
      const double n = param_norm(arch, flat);
      for (double& v : flat) v *= target / n;
      std::vector<double> x(arch.input_dim());
      double cx = 1.0;
      for (double& v : x) {
        v = ux(rng);
        cx = std::max(cx, std::fabs(v));
      }
      const auto k = kernel_eval(ctx, x, unpack(arch, flat));
      for (double v : k) {
        if (!(std::fabs(v) <= cx * (1 + 1e-12))) ++worst;
      }
    }
    c.expect(worst == 0, std::to_string(worst) + " kernel bound violations");
    parts.push_back("kernel bound 1e4");
  }

  // sandwich
  {
    std::uniform_real_distribution<double> ux(-2, 2), ua(-1.5, 1.5);
    SearchConfig cfg;
    cfg.starts = 32;
    cfg.iterations = 150;
    for (int t = 0; t < 50; ++t) {
      const std::size_t m = 1 + rng() % 3;
      std::vector<std::vector<double>> xs(m, std::vector<double>(2));
      std::vector<double> alpha(m);
      for (std::size_t i = 0; i < m; ++i) {
        xs[i] = {ux(rng), ux(rng)};
        alpha[i] = ua(rng);
      }
      const auto comb = signed_sum(alpha, xs);
      cfg.seed = t;
      const auto est = estimate_sup(comb, cfg);
      const double oracle = grid_oracle(comb, 20000, t);
      c.expect(oracle <= est.lower + 1e-9, "grid oracle above search lower, trial " + std::to_string(t));
      c.expect(est.lower <= est.upper, "lower above upper, trial " + std::to_string(t));
      c.expect(est.upper <= analytic_upper(comb) + 1e-12, "upper above analytic bound");
    }
    parts.push_back("sandwich 50");
  }

  // closed form vs grid
  {
    std::uniform_real_distribution<double> ub(-3, 3), ul(0.01, 1.0), ud(0.5, 2.0), un(0.25, 1.0);
    for (int t = 0; t < 100; ++t) {
      const int m = 1 + static_cast<int>(rng() % 4);
      std::vector<double> beta(m), d(m), n(m);
      SignVector s(m);
      for (int i = 0; i < m; ++i) {
        beta[i] = ub(rng);
        d[i] = t % 2 ? ud(rng) : 1.0;
        n[i] = t % 3 ? un(rng) : 1.0;
        s[i] = static_cast<int>(rng() % 3) - 1;
      }
      RegConfig cfg;
      cfg.lambda0 = ul(rng);
      const auto r = orthant_minimize(s, beta, d, n, m, cfg);
      for (int i = 0; i < m; ++i) {
        const GridMin g = grid_minimize_coordinate(beta[i], d[i], n[i], s[i], cfg.lambda0, m);
        const double closed = d[i] * d[i] * r.epsilon[i] * r.epsilon[i] / m +
                              cfg.lambda0 * n[i] * std::fabs(beta[i] + r.epsilon[i]);
        c.near(r.epsilon[i], g.arg, 1e-6, "regularizer argmin");
        c.near(closed, g.value, 1e-9, "regularizer value");
      }
    }
    parts.push_back("regularizer grid 1e2");
  }

  // negation symmetry
  {
    std::uniform_real_distribution<double> ux(-1.5, 1.5);
    const auto ctx = two_two_one();
    for (std::size_t m = 1; m <= 4; ++m) {
      std::vector<std::vector<double>> xs(m);
      for (auto& x : xs) x = {ux(rng), ux(rng)};
      SignConfig cfg;
      cfg.search.seed = m;
      cfg.search.starts = 16;
      cfg.search.iterations = 100;
      const auto table = enumerate_admissible(xs, ctx, cfg);
      std::map<SignVector, VerdictKind> kinds;
      for (const auto& row : table) kinds[row.s] = row.verdict.kind;
      for (const auto& row : table) {
        SignVector neg(row.s);
        for (int& e : neg) e = -e;
        c.expect(kinds.at(neg) == row.verdict.kind, "negation asymmetry at " + format_signs(row.s));
      }
    }
    parts.push_back("negation m<=4");
  }

  // vector-valued
  {
    std::uniform_real_distribution<double> big(1.0, 3.0), frac(0.0, 1.0), uy(-2, 2);
    const KernelContext ctx(Architecture({2, 2, 3}));
    SolverConfig cfg;
    cfg.signs.search.starts = 8;
    cfg.signs.search.iterations = 100;
    for (int t = 0; t < 3; ++t) {
      const double a = big(rng), b = big(rng), cc = big(rng);
      const std::vector<std::vector<double>> xs{{a, -frac(rng) * a}, {-b, -frac(rng) * b}, {0.0, cc}};
      std::vector<std::vector<double>> ys(3, std::vector<double>(3));
      for (auto& y : ys)
        for (double& v : y) v = uy(rng);
      const Dataset data(xs, ys);
      cfg.signs.search.seed = t;
      const auto vec = solve_vector_valued(data, ctx, cfg);
      for (std::size_t comp = 0; comp < 3; ++comp) {
        const auto scalar = solve_scalar(data, ctx, cfg, comp);
        c.expect(vec.components[comp].beta == scalar.beta, "vector beta differs");
        c.expect(vec.components[comp].mni.norm_lower == scalar.mni.norm_lower, "vector lower differs");
        c.expect(vec.components[comp].mni.norm_upper == scalar.mni.norm_upper, "vector upper differs");
        c.expect(vec.components[comp].anchor_set.anchors == scalar.anchor_set.anchors,
                 "vector anchors differ");
      }
    }
    parts.push_back("vector t=3");
  }
  for (const auto& p : parts) c.detail += (c.detail.empty() ? "" : ", ") + p;
}

void determinism(Check& c) {
  cli::CommonOptions opt;
  opt.config = std::filesystem::path(RKBS_SOURCE_DIR) / "data" / "three_point.json";
  auto run = [&](std::size_t threads) {
    set_thread_count(threads);
    std::ostringstream out, err;
    cli::Output io{out, err, false};
    const int rc = cli::cmd_solve(opt, io);
    c.expect(rc == cli::kOk, "cmd_solve exit " + std::to_string(rc) + ": " + err.str());
    auto doc = nlohmann::json::parse(out.str());
    doc["provenance"].erase("wall_clock_seconds");
    return doc.dump(2);
  };
  const std::string s1 = run(1), s2 = run(1), p1 = run(4), p2 = run(4);
  set_thread_count(0);
  c.expect(s1 == s2, "serial runs differ");
  c.expect(p1 == p2, "parallel runs differ");
  c.expect(s1 == p1, "serial and parallel differ");
  c.detail = "4 reports of " + std::to_string(s1.size()) + " bytes identical (1 and 4 threads)";
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Check&)> run;
  };
  const std::vector<Criterion> criteria{
      {"kernel norms", kernel_norms},
      {"anchors and Gram", anchors_and_gram},
      {"admissible set", admissible_set},
      {"MNI certification", mni_certification},
      {"norm bracket", norm_bracket},
      {"sweep table", sweep_table},
      {"selection", selection},
      {"scaled anchor", scaled_anchor},
      {"property suites", properties},
      {"determinism", determinism},
  };
  int failed = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].run(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = check.failures.empty();
    failed += !ok;
    std::printf("%s %2zu %-18s %6.2fs  %s\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].name, secs,
                check.detail.c_str());
    const std::size_t shown = std::min<std::size_t>(check.failures.size(), 10);
    for (std::size_t k = 0; k < shown; ++k) std::printf("       - %s\n", check.failures[k].c_str());
    if (check.failures.size() > shown)
      std::printf("       ... %zu more\n", check.failures.size() - shown);
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%zu of %zu criteria passed in %.1fs\n", criteria.size() - failed, criteria.size(), total);
  return failed == 0 ? 0 : 1;
}
