#include <unistd.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "rkbs/cli.hpp"
#include "rkbs/parallel.hpp"

namespace {

using namespace rkbs::cli;

struct Flags {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> starts, iters;
  std::optional<double> tol, lambda0;
  bool include_uncertified = false;
};

void add_search_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--seed", f.seed, "Search seed");
  cmd->add_option("--starts", f.starts, "Random starts per sup-norm search")->check(CLI::PositiveNumber);
  cmd->add_option("--iters", f.iters, "Pattern-search iterations per start")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f.tol, "Certification tolerance")->check(CLI::PositiveNumber);
}

void add_common(CLI::App* cmd, Flags& f, bool needs_config) {
  auto* c = cmd->add_option("--config", f.config, "Config file (JSON)");
  if (needs_config) c->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "Write the JSON result here");
  add_search_flags(cmd, f);
  cmd->add_option("--lambda0", f.lambda0, "Regularization weight")->check(CLI::PositiveNumber);
  cmd->add_flag("--include-uncertified-signs", f.include_uncertified,
                "Sweep sign vectors whose admissibility is open");
}

Overrides overrides(const Flags& f) {
  return {f.seed, f.starts, f.iters, f.tol, f.lambda0, f.include_uncertified};
}

CommonOptions common(const Flags& f) {
  CommonOptions o;
  o.config = f.config;
  if (!f.out.empty()) o.out = f.out;
  o.overrides = overrides(f);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimal-norm interpolation with ReLU-network kernels"};
  app.set_version_flag("--version", RKBS_VERSION);
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  Flags f;
  auto* solve = app.add_subcommand("solve", "Fit a minimal-norm interpolant and run the regularization sweep");
  add_common(solve, f, true);

  auto* admissible = app.add_subcommand("admissible", "Enumerate and certify sign vectors");
  add_common(admissible, f, true);

  auto* supnorm = app.add_subcommand("supnorm", "Bracket the sup-norm of a kernel combination");
  add_common(supnorm, f, true);
  std::vector<std::string> term_text;
  std::size_t component = 1;
  supnorm->add_option("--term", term_text, "COEFFICIENT:INDEX pair (1-based dataset row); repeatable");
  supnorm->add_option("--component", component, "Output component (1-based)");

  auto* reproduce = app.add_subcommand("reproduce-paper-example",
                                       "Check the built-in three-point example against its expected values");
  Flags rf;
  add_search_flags(reproduce, rf);
  reproduce->add_option("--out", rf.out, "Write the comparison table as JSON");
  double perturb = 0.0;
  reproduce->add_option("--perturb", perturb, "Shift every expected value (harness check)")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  rkbs::set_thread_count(threads);
  const bool color = std::getenv("NO_COLOR") == nullptr && isatty(STDOUT_FILENO);
  const Output io{std::cout, std::cerr, color};

  if (*solve) return cmd_solve(common(f), io);
  if (*admissible) return cmd_admissible(common(f), io);
  if (*supnorm) {
    std::vector<SupnormTerm> terms;
    try {
      for (const auto& t : term_text) terms.push_back(parse_term(t));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kValidation;
    }
    return cmd_supnorm(common(f), terms, component, io);
  }
  ReproduceOptions ro;
  ro.overrides = overrides(rf);
  ro.perturb = perturb;
  if (!rf.out.empty()) ro.out = rf.out;
  return cmd_reproduce(ro, io);
}
