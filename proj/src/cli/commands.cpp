#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "rkbs/cli.hpp"
#include "rkbs/errors.hpp"

namespace rkbs::cli {

using nlohmann::json;

namespace {

template <class F>
int guarded(const Output& io, F&& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    io.err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const ShapeError& e) {
    io.err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const EnumerationRefused& e) {
    io.err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const CertificationUnavailable& e) {
    io.err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const json::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const IllConditionedError& e) {
    io.err << "error: " << e.what() << '\n';
    return kIllConditioned;
  } catch (const SolverFailure& e) {
    io.err << "error: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kSolverFailure;
  }
}

SolveConfig configured(const CommonOptions& opt) {
  SolveConfig cfg = load_config(opt.config);
  apply(opt.overrides, cfg);
  return cfg;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path.string());
  f << doc.dump(2) << '\n';
  if (!f) throw ValidationError("failed writing " + path.string());
}

std::string fmt(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string vec(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s + ")";
}

const char* paint(const Output& io, VerdictKind k) {
  if (!io.color) return "";
  switch (k) {
    case VerdictKind::CertifiedAdmissible:
      return "\033[32m";
    case VerdictKind::CertifiedInadmissible:
      return "\033[31m";
    case VerdictKind::Uncertified:
      break;
  }
  return "\033[33m";
}
const char* reset(const Output& io) { return io.color ? "\033[0m" : ""; }

void print_table(const Output& io, const std::vector<SignVerdict>& table) {
  for (const auto& row : table) {
    const auto& v = row.verdict;
    io.out << "  " << std::left << std::setw(14) << format_signs(row.s) << paint(io, v.kind)
           << std::setw(24) << to_string(v.kind) << reset(io) << v.certificate;
    if (v.witness) io.out << "  value " << fmt(v.value);
    if (v.estimate) io.out << "  bracket [" << fmt(v.estimate->lower) << ", " << fmt(v.estimate->upper) << "]";
    io.out << '\n';
  }
}

json provenance(std::uint64_t seed, double seconds) {
  return {{"version", RKBS_VERSION}, {"seed", seed}, {"wall_clock_seconds", seconds}};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int cmd_solve(const CommonOptions& opt, const Output& io) {
  return guarded(io, [&] {
    const SolveConfig cfg = configured(opt);
    const auto t0 = std::chrono::steady_clock::now();
    const SolveResult result = run_solve(cfg);
    const json report = make_report(cfg, result, seconds_since(t0));
    const auto problems = validate_report(report);
    if (!problems.empty()) throw std::logic_error("report failed validation: " + problems.front());

    const auto path = opt.out ? opt.out : cfg.output_path;
    if (!path) {
      io.out << report.dump(2) << '\n';
      return int(kOk);
    }
    write_json(*path, report);
    for (std::size_t c = 0; c < result.solution.components.size(); ++c) {
      const auto& comp = result.solution.components[c];
      const auto& sel = result.selections[c];
      io.out << "component " << c + 1 << ": kept " << comp.nice.kept.size() << " of "
             << result.dataset.size() << " points\n";
      for (const auto& e : comp.nice.excluded) io.out << "  excluded row " << e.index + 1 << ": " << e.reason << '\n';
      io.out << "  beta " << vec(comp.beta) << "\n  norm [" << fmt(comp.mni.norm_lower) << ", "
             << fmt(comp.mni.norm_upper) << "] " << to_string(comp.mni.status) << '\n';
      if (!sel.sweep.empty()) {
        io.out << "  best regularized R " << fmt(sel.sweep.front().r_value) << " at "
               << format_signs(sel.sweep.front().s) << ", interpolant R in [" << fmt(sel.interval.lower)
               << ", " << fmt(sel.interval.upper) << "]\n";
      }
      io.out << "  decision " << to_string(sel.decision.kind);
      if (sel.decision.kind == DecisionKind::Ambiguous) {
        io.out << " (defaulting to " << to_string(sel.decision.fallback) << ")";
      }
      io.out << '\n';
    }
    io.out << "report written to " << path->string() << '\n';
    return int(kOk);
  });
}

int cmd_admissible(const CommonOptions& opt, const Output& io) {
  return guarded(io, [&] {
    const SolveConfig cfg = configured(opt);
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset data = load_dataset(cfg);
    const KernelContext ctx = cfg.context();
    const SolverConfig scfg = cfg.solver();
    if (!data.empty() && data.input_dim() != ctx.arch().input_dim()) {
      throw ValidationError("dataset inputs have dimension " + std::to_string(data.input_dim()) +
                            ", the architecture expects " + std::to_string(ctx.arch().input_dim()));
    }
    json components = json::array();
    for (std::size_t c = 0; c < ctx.arch().output_dim(); ++c) {
      const auto table = enumerate_admissible(data.inputs(), ctx, scfg.signs, c);
      std::size_t certified = 0;
      for (const auto& row : table) certified += row.verdict.kind == VerdictKind::CertifiedAdmissible;
      io.out << "component " << c + 1 << ": " << certified << " of " << table.size()
             << " sign vectors certified admissible\n";
      print_table(io, table);
      components.push_back({{"component", c + 1}, {"table", admissible_table_json(table)}});
    }
    if (opt.out) {
      write_json(*opt.out, {{"schema_version", kSchemaVersion},
                            {"kind", "admissible"},
                            {"config", to_json(cfg)},
                            {"components", components},
                            {"provenance", provenance(cfg.search.seed, seconds_since(t0))}});
    }
    return int(kOk);
  });
}

SupnormTerm parse_term(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ValidationError("term '" + text + "' is not COEFFICIENT:INDEX");
  SupnormTerm t{};
  try {
    std::size_t used = 0;
    const std::string c = text.substr(0, colon), i = text.substr(colon + 1);
    t.coefficient = std::stod(c, &used);
    if (used != c.size() || !std::isfinite(t.coefficient)) throw std::invalid_argument(c);
    const long long idx = std::stoll(i, &used);
    if (used != i.size() || idx < 1) throw std::invalid_argument(i);
    t.index = static_cast<std::size_t>(idx);
  } catch (const std::logic_error&) {
    throw ValidationError("term '" + text + "' is not COEFFICIENT:INDEX with a 1-based index");
  }
  return t;
}

int cmd_supnorm(const CommonOptions& opt, const std::vector<SupnormTerm>& terms,
                std::size_t component, const Output& io) {
  return guarded(io, [&] {
    const SolveConfig cfg = configured(opt);
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset data = load_dataset(cfg);
    const KernelContext ctx = cfg.context();
    if (component < 1 || component > ctx.arch().output_dim()) {
      throw ValidationError("component must be between 1 and " + std::to_string(ctx.arch().output_dim()));
    }
    std::vector<Term> parts;
    for (const auto& t : terms) {
      if (t.index > data.size()) {
        throw ValidationError("term index " + std::to_string(t.index) + " exceeds the " +
                              std::to_string(data.size()) + " dataset rows");
      }
      parts.push_back({t.coefficient, data.inputs()[t.index - 1]});
    }
    const Combination comb(ctx, std::move(parts), component - 1);
    const SupNormEstimate est = estimate_sup(comb, cfg.search);
    const std::vector<double> witness = pack(est.witness);
    io.out << "lower   " << fmt(est.lower) << "\nupper   " << fmt(est.upper) << "\nstatus  "
           << to_string(est.status) << "\nwitness " << vec(witness) << '\n';
    if (opt.out) {
      json terms_json = json::array();
      for (const auto& t : terms) terms_json.push_back({{"coefficient", t.coefficient}, {"index", t.index}});
      write_json(*opt.out, {{"schema_version", kSchemaVersion},
                            {"kind", "supnorm"},
                            {"config", to_json(cfg)},
                            {"terms", terms_json},
                            {"component", component},
                            {"lower", est.lower},
                            {"upper", std::isfinite(est.upper) ? json(est.upper) : json(nullptr)},
                            {"status", to_string(est.status)},
                            {"witness", witness},
                            {"provenance", provenance(cfg.search.seed, seconds_since(t0))}});
    }
    return int(kOk);
  });
}

int cmd_reproduce(const ReproduceOptions& opt, const Output& io) {
  return guarded(io, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = reproduce_reference(opt.overrides, opt.perturb);
    std::size_t failed = 0;
    io.out << std::left << std::setw(46) << "quantity" << std::setw(12) << "exact" << std::setw(20)
           << "expected" << std::setw(20) << "actual" << "status\n";
    for (const auto& r : rows) {
      const bool ok = r.pass();
      failed += !ok;
      io.out << std::left << std::setw(46) << r.quantity << std::setw(12) << r.exact
             << std::setw(20) << fmt(r.expected) << std::setw(20) << fmt(r.actual)
             << (io.color ? (ok ? "\033[32m" : "\033[31m") : "") << (ok ? "ok" : "MISMATCH")
             << (io.color ? "\033[0m" : "");
      if (!ok) io.out << "  |diff| " << fmt(std::fabs(r.actual - r.expected)) << " > " << fmt(r.tolerance);
      io.out << '\n';
    }
    io.out << rows.size() - failed << " of " << rows.size() << " values match\n";
    if (opt.out) {
      json table = json::array();
      for (const auto& r : rows) {
        table.push_back({{"quantity", r.quantity},
                         {"exact", r.exact},
                         {"expected", r.expected},
                         {"actual", std::isfinite(r.actual) ? json(r.actual) : json(nullptr)},
                         {"tolerance", r.tolerance},
                         {"pass", r.pass()}});
      }
      std::uint64_t seed = opt.overrides.seed.value_or(0);
      write_json(*opt.out, {{"schema_version", kSchemaVersion},
                            {"kind", "reproduce"},
                            {"rows", table},
                            {"provenance", provenance(seed, seconds_since(t0))}});
    }
    return failed ? int(kSolverFailure) : int(kOk);
  });
}

}  // namespace rkbs::cli
