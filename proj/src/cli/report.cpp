#include <cmath>

#include "rkbs/cli.hpp"
#include "rkbs/errors.hpp"

namespace rkbs::cli {

using nlohmann::json;

namespace {

// Infinite bounds are written as null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json bracket(double lower, double upper) { return json::array({num(lower), num(upper)}); }

std::vector<std::size_t> one_based(const std::vector<std::size_t>& idx) {
  std::vector<std::size_t> out;
  for (std::size_t i : idx) out.push_back(i + 1);
  return out;
}

json component_json(const ComponentSolution& c, const SelectionReport& sel) {
  json anchors = json::array();
  for (std::size_t i = 0; i < c.anchor_report.points.size(); ++i) {
    const PointAnchor& p = c.anchor_report.points[i];
    json a = {{"index", i + 1}, {"success", p.success}};
    if (p.success) {
      a["source"] = p.source;
      a["theta"] = pack(*p.anchor);
    } else {
      a["reason"] = p.reason;
    }
    anchors.push_back(std::move(a));
  }
  json excluded = json::array();
  for (const auto& e : c.nice.excluded) excluded.push_back({{"index", e.index + 1}, {"reason", e.reason}});

  json used = json::array();
  for (const auto& theta : c.anchor_set.anchors) used.push_back(pack(theta));
  json dual = json::array();
  for (const auto& b : c.anchor_set.dual_norm_brackets) dual.push_back(bracket(b.lower, b.upper));

  json sweep = json::array();
  for (const auto& r : sel.sweep) {
    sweep.push_back({{"s", r.s},
                     {"epsilon", r.epsilon},
                     {"coefficients", r.coefficients},
                     {"r", r.r_value}});
  }
  json decision = {{"decision", to_string(sel.decision.kind)},
                   {"interval", bracket(sel.interval.lower, sel.interval.upper)},
                   {"flagged", sel.decision.kind == DecisionKind::Ambiguous}};
  if (!sel.sweep.empty()) decision["best_r"] = sel.sweep.front().r_value;
  if (sel.decision.kind == DecisionKind::Regularized) decision["s"] = sel.decision.s;
  if (sel.decision.kind == DecisionKind::Ambiguous) decision["chosen"] = to_string(sel.decision.fallback);

  json norm = {{"lower", c.mni.norm_lower},
               {"upper", c.mni.norm_upper},
               {"status", to_string(c.mni.status)},
               {"lower_sign", c.mni.lower_sign},
               {"witness_sign", c.mni.witness_sign ? json(*c.mni.witness_sign) : json(nullptr)}};

  return {{"component", c.component + 1},
          {"anchors", anchors},
          {"nice_subset", {{"kept", one_based(c.nice.kept)}, {"excluded", excluded}}},
          {"anchor_parameters", used},
          {"gram", c.anchor_set.gram},
          {"diagonal", c.anchor_set.diagonal},
          {"attainment", c.anchor_set.attainment},
          {"dual_norm_brackets", dual},
          {"evaluation_norms", c.anchor_set.evaluation_norms},
          {"targets", c.y},
          {"beta", c.beta},
          {"norm", norm},
          {"admissible", admissible_table_json(c.admissible)},
          {"sweep", sweep},
          {"selection", decision}};
}

}  // namespace

SolveResult run_solve(const SolveConfig& cfg) {
  SolveResult r;
  r.dataset = load_dataset(cfg);
  const KernelContext ctx = cfg.context();
  if (!r.dataset.empty() && r.dataset.input_dim() != ctx.arch().input_dim()) {
    throw ValidationError("dataset inputs have dimension " + std::to_string(r.dataset.input_dim()) +
                          ", the architecture expects " + std::to_string(ctx.arch().input_dim()));
  }
  if (!r.dataset.empty() && r.dataset.output_dim() != ctx.arch().output_dim()) {
    throw ValidationError("dataset outputs have dimension " + std::to_string(r.dataset.output_dim()) +
                          ", the architecture produces " + std::to_string(ctx.arch().output_dim()));
  }
  r.solution = solve_vector_valued(r.dataset, ctx, cfg.solver());
  for (const auto& c : r.solution.components) r.selections.push_back(regularize(c, cfg.regularization));
  return r;
}

json admissible_table_json(const std::vector<SignVerdict>& table) {
  json rows = json::array();
  for (const auto& row : table) {
    const AdmissibilityVerdict& v = row.verdict;
    json j = {{"s", row.s}, {"verdict", to_string(v.kind)}};
    if (!v.certificate.empty()) j["certificate"] = v.certificate;
    if (v.witness) {
      j["witness"] = pack(*v.witness);
      j["value"] = v.value;
    }
    if (v.estimate) j["bracket"] = bracket(v.estimate->lower, v.estimate->upper);
    rows.push_back(std::move(j));
  }
  return rows;
}

json make_report(const SolveConfig& cfg, const SolveResult& result, double wall_clock_seconds) {
  json components = json::array();
  for (std::size_t c = 0; c < result.solution.components.size(); ++c) {
    components.push_back(component_json(result.solution.components[c], result.selections[c]));
  }
  return {{"schema_version", kSchemaVersion},
          {"kind", "solve"},
          {"config", to_json(cfg)},
          {"dataset",
           {{"points", result.dataset.size()},
            {"collapsed_duplicates", one_based(result.dataset.collapsed())}}},
          {"components", components},
          {"combined",
           {{"norm", bracket(result.solution.norm_lower, result.solution.norm_upper)},
            {"certified_minimal", result.solution.certified_minimal}}},
          {"provenance",
           {{"version", RKBS_VERSION},
            {"seed", cfg.search.seed},
            {"wall_clock_seconds", wall_clock_seconds}}}};
}

std::vector<std::string> validate_report(const json& r) {
  std::vector<std::string> problems;
  auto need = [&](const json& obj, const std::string& path, const char* key,
                  bool (json::*is)() const noexcept) {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(path + "." + key + " is missing");
      return false;
    }
    if (!(obj[key].*is)()) {
      problems.push_back(path + "." + key + " has the wrong type");
      return false;
    }
    return true;
  };
  if (!r.is_object()) return {"report is not an object"};
  if (need(r, "report", "schema_version", &json::is_number_integer) &&
      r["schema_version"] != kSchemaVersion) {
    problems.push_back("report.schema_version is not " + std::to_string(kSchemaVersion));
  }
  need(r, "report", "kind", &json::is_string);
  need(r, "report", "config", &json::is_object);
  if (need(r, "report", "provenance", &json::is_object)) {
    need(r["provenance"], "provenance", "version", &json::is_string);
    need(r["provenance"], "provenance", "seed", &json::is_number_unsigned);
    need(r["provenance"], "provenance", "wall_clock_seconds", &json::is_number);
  }
  if (r.value("kind", "") != "solve") return problems;

  if (need(r, "report", "combined", &json::is_object)) {
    need(r["combined"], "combined", "norm", &json::is_array);
    need(r["combined"], "combined", "certified_minimal", &json::is_boolean);
  }
  if (!need(r, "report", "components", &json::is_array)) return problems;
  for (std::size_t c = 0; c < r["components"].size(); ++c) {
    const json& comp = r["components"][c];
    const std::string p = "components[" + std::to_string(c) + "]";
    for (const char* key : {"anchors", "anchor_parameters", "gram", "beta", "targets", "admissible",
                            "sweep", "attainment", "dual_norm_brackets", "evaluation_norms"}) {
      need(comp, p, key, &json::is_array);
    }
    for (const char* key : {"norm", "selection", "nice_subset"}) need(comp, p, key, &json::is_object);
    if (!problems.empty()) continue;
    const std::size_t k = comp["beta"].size();
    if (comp["gram"].size() != k || comp["anchor_parameters"].size() != k ||
        comp["targets"].size() != k) {
      problems.push_back(p + ": gram, anchors, targets and beta sizes differ");
    }
    for (const json& row : comp["gram"]) {
      if (!row.is_array() || row.size() != k) problems.push_back(p + ".gram is not square");
    }
    const json& n = comp["norm"];
    if (need(n, p + ".norm", "lower", &json::is_number) &&
        need(n, p + ".norm", "upper", &json::is_number) &&
        n["lower"].get<double>() > n["upper"].get<double>()) {
      problems.push_back(p + ".norm lower exceeds upper");
    }
    if (need(n, p + ".norm", "status", &json::is_string) && n["status"] != "certified_minimal" &&
        n["status"] != "candidate") {
      problems.push_back(p + ".norm.status is not a known status");
    }
    const json& s = comp["selection"];
    if (need(s, p + ".selection", "decision", &json::is_string) &&
        s["decision"] != "unregularized" && s["decision"] != "regularized" &&
        s["decision"] != "ambiguous") {
      problems.push_back(p + ".selection.decision is not a known decision");
    }
    double prev = -1.0;
    for (const json& row : comp["sweep"]) {
      if (!row.contains("r") || !row["r"].is_number()) {
        problems.push_back(p + ".sweep row without r");
        break;
      }
      if (row["r"].get<double>() < prev) problems.push_back(p + ".sweep is not sorted by r");
      prev = row["r"].get<double>();
    }
  }
  return problems;
}

}  // namespace rkbs::cli
