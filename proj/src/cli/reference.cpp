// Built-in three-point fixture: the 2-2-1 ReLU network with decay exponent
// 3 and inputs (1,-1), (-1,0), (0,1). Expected values are exact rationals
// stored as 15-significant-digit renderings.
#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "rkbs/cli.hpp"

namespace rkbs::cli {

bool Expectation::pass() const {
  return std::isfinite(actual) && std::fabs(actual - expected) <= tolerance;
}

namespace {

struct Recorder {
  double perturb;
  std::vector<Expectation> rows;

  void add(std::string quantity, std::string exact, const char* rendered, double actual,
           double tol) {
    rows.push_back({std::move(quantity), std::move(exact), std::stod(rendered) + perturb, actual,
                    tol});
  }
  void flag(std::string quantity, bool actual) {
    rows.push_back({std::move(quantity), "true", 1.0 + perturb, actual ? 1.0 : 0.0, 0.0});
  }
};

const std::vector<std::vector<double>> kInputs{{1, -1}, {-1, 0}, {0, 1}};

Dataset targets(const std::vector<std::vector<double>>& xs, const std::vector<double>& y) {
  std::vector<std::vector<double>> ys;
  for (double v : y) ys.push_back({v});
  return Dataset(xs, ys);
}

double max_offset_from_identity(const Matrix& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      worst = std::max(worst, std::fabs(m[i][j] - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

}  // namespace

std::vector<Expectation> reproduce_reference(const Overrides& overrides, double perturb) {
  SolveConfig base;
  base.architecture.layers = {2, 2, 1};
  base.inline_dataset = targets(kInputs, {0, 0, 0});
  apply(overrides, base);
  const KernelContext ctx = base.context();
  const SolverConfig scfg = base.solver();
  Recorder rec{perturb, {}};

  // Evaluation norms.
  for (std::size_t i = 0; i < 3; ++i) {
    const auto est = evaluation_sup_norm(ctx, kInputs[i], 0, scfg.signs.search);
    const std::string name = "||k(x" + std::to_string(i + 1) + ",.)||";
    rec.add(name + " upper", "1", "1", est.upper, 0.0);
    rec.add(name + " lower", "1", "1", est.lower, 1e-6);
  }

  // Main scenario: y = (2, -3, 1/2), lambda0 = 1/10.
  const auto main = solve_scalar(targets(kInputs, {2, -3, 0.5}), ctx, scfg);
  const std::vector<std::vector<double>> selectors{{1, 0, 0, 0, 0, 0, 1, 0, 0},
                                                   {-1, 0, 0, 0, 0, 0, 1, 0, 0},
                                                   {0, 1, 0, 0, 0, 0, 1, 0, 0}};
  for (std::size_t i = 0; i < 3; ++i) {
    rec.flag("anchor " + std::to_string(i + 1) + " is the selector template",
             main.anchor_set.anchors.size() == 3 && pack(main.anchor_set.anchors[i]) == selectors[i]);
  }
  rec.add("max |M - I|", "0", "0", max_offset_from_identity(main.anchor_set.gram), 1e-12);

  const std::set<SignVector> listed{{0, 0, 0},  {1, 0, 0},  {-1, 0, 0}, {0, 1, 0},  {0, -1, 0},
                                    {0, 0, 1},  {0, 0, -1}, {1, -1, 0}, {-1, 1, 0}, {1, 0, -1},
                                    {-1, 0, 1}, {0, 1, -1}, {0, -1, 1}};
  std::set<SignVector> admissible;
  std::size_t inadmissible = 0;
  for (const auto& row : main.admissible) {
    if (row.verdict.kind == VerdictKind::CertifiedAdmissible) admissible.insert(row.s);
    if (row.verdict.kind == VerdictKind::CertifiedInadmissible) ++inadmissible;
  }
  rec.add("certified admissible sign vectors", "13", "13", admissible.size(), 0.0);
  rec.add("certified inadmissible sign vectors", "14", "14", inadmissible, 0.0);
  rec.flag("admissible set equals the listed thirteen", admissible == listed);

  struct Witness {
    SignVector s;
    std::vector<double> theta;
    const char* exact;
    const char* rendered;
  };
  const std::vector<Witness> witnesses{
      {{-1, 1, 1}, {-4.0 / 15, 2.0 / 5, 0, 0, 1.0 / 3, 0, 1, 0, 0}, "4/3", "1.33333333333333"},
      {{1, -1, 1}, {3.0 / 10, 1.0 / 5, 0, 0, 1.0 / 2, 0, 1, 0, 0}, "11/10", "1.1"},
      {{1, 1, -1}, {1.0 / 5, -3.0 / 10, 0, 0, 1.0 / 2, 0, 1, 0, 0}, "11/10", "1.1"}};
  for (const auto& w : witnesses) {
    const auto value = recheck_witness(w.s, kInputs, ctx, unpack(ctx.arch(), w.theta), scfg.signs);
    rec.add("witness value for " + format_signs(w.s), w.exact, w.rendered, value ? *value : 0.0,
            1e-12);
  }

  rec.add("norm lower, y=(2,-3,1/2)", "5", "5", main.mni.norm_lower, 1e-12);
  rec.add("norm upper, y=(2,-3,1/2)", "11/2", "5.5", main.mni.norm_upper, 1e-12);
  rec.flag("y=(2,-3,1/2) stays a candidate", main.mni.status == MniStatus::Candidate);

  RegConfig reg;
  reg.lambda0 = 0.1;
  const auto sel = regularize(main, reg);
  const std::map<SignVector, std::pair<const char*, const char*>> sweep_expected{
      {{1, -1, 0}, {"341/600", "0.568333333333333"}},   {{-1, 1, 0}, {"53/12", "4.41666666666667"}},
      {{1, 0, -1}, {"3931/1200", "3.27583333333333"}},  {{-1, 0, 1}, {"5251/1200", "4.37583333333333"}},
      {{0, -1, 1}, {"1001/600", "1.66833333333333"}},   {{0, 1, -1}, {"53/12", "4.41666666666667"}},
      {{1, 0, 0}, {"3931/1200", "3.27583333333333"}},   {{-1, 0, 0}, {"53/12", "4.41666666666667"}},
      {{0, 1, 0}, {"53/12", "4.41666666666667"}},       {{0, -1, 0}, {"2051/1200", "1.70916666666667"}},
      {{0, 0, 1}, {"5251/1200", "4.37583333333333"}},   {{0, 0, -1}, {"53/12", "4.41666666666667"}},
      {{0, 0, 0}, {"53/12", "4.41666666666667"}}};
  for (const auto& [s, ev] : sweep_expected) {
    double actual = NAN;
    for (const auto& r : sel.sweep) {
      if (r.s == s) actual = r.r_value;
    }
    rec.add("R at " + format_signs(s) + ", lambda0=1/10", ev.first, ev.second, actual, 1e-9);
  }
  rec.add("R(f0) lower, lambda0=1/10", "1/2", "0.5", sel.interval.lower, 1e-12);
  rec.add("R(f0) upper, lambda0=1/10", "11/20", "0.55", sel.interval.upper, 1e-12);
  rec.flag("lambda0=1/10 keeps the interpolant", sel.decision.kind == DecisionKind::Unregularized);

  // Rescaled targets y = (1, -1/2, 1/2), lambda0 = 1/3.
  const auto rescaled = solve_scalar(targets(kInputs, {1, -0.5, 0.5}), ctx, scfg);
  reg.lambda0 = 1.0 / 3;
  const auto sel2 = regularize(rescaled, reg);
  rec.add("norm lower, y=(1,-1/2,1/2)", "3/2", "1.5", rescaled.mni.norm_lower, 1e-12);
  rec.add("norm upper, y=(1,-1/2,1/2)", "2", "2", rescaled.mni.norm_upper, 1e-12);
  rec.add("R(f0) lower, lambda0=1/3", "1/2", "0.5", sel2.interval.lower, 1e-12);
  rec.add("R(f0) upper, lambda0=1/3", "2/3", "0.666666666666667", sel2.interval.upper, 1e-12);
  rec.add("best R, lambda0=1/3", "5/12", "0.416666666666667",
          sel2.sweep.empty() ? NAN : sel2.sweep.front().r_value, 1e-9);
  rec.flag("best sign vector is (1,-1,0)",
           !sel2.sweep.empty() && sel2.sweep.front().s == SignVector{1, -1, 0});
  rec.add("regularized coefficient 1", "1/2", "0.5",
          sel2.sweep.empty() ? NAN : sel2.sweep.front().coefficients[0], 1e-12);
  rec.flag("lambda0=1/3 prefers the regularized fit",
           sel2.decision.kind == DecisionKind::Regularized);

  // y = (a, 0, c) with a = -1, c = 1.
  const auto cert = solve_scalar(targets(kInputs, {-1, 0, 1}), ctx, scfg);
  rec.flag("y=(-1,0,1) is certified minimal", cert.mni.status == MniStatus::CertifiedMinimal);
  rec.add("norm, y=(-1,0,1)", "2", "2", cert.mni.norm_upper, 0.0);
  rec.add("norm gap, y=(-1,0,1)", "0", "0", cert.mni.norm_upper - cert.mni.norm_lower, 0.0);
  rec.flag("witness sign is (-1,0,1)",
           cert.mni.witness_sign && *cert.mni.witness_sign == SignVector{-1, 0, 1});
  rec.flag("representer conditions hold for y=(-1,0,1)",
           verify_representer(cert.mni.expansion, std::vector<double>{-1, 0, 1}, kInputs, cert.y,
                              scfg)
               .all());

  // First input moved to (2,-2), y = (-2, 0, 1).
  const std::vector<std::vector<double>> scaled{{2, -2}, {-1, 0}, {0, 1}};
  const auto sc = solve_scalar(targets(scaled, {-2, 0, 1}), ctx, scfg);
  rec.add("M_11 for x1=(2,-2)", "2", "2", sc.anchor_set.gram.empty() ? NAN : sc.anchor_set.gram[0][0],
          0.0);
  rec.add("beta_1 = a/2 for a=-2", "-1", "-1", sc.beta.empty() ? NAN : sc.beta[0], 0.0);
  rec.flag("x1=(2,-2) case is certified minimal", sc.mni.status == MniStatus::CertifiedMinimal);
  rec.add("norm, x1=(2,-2)", "2", "2", sc.mni.norm_upper, 1e-12);
  return rec.rows;
}

}  // namespace rkbs::cli
