#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rkbs/regularizer.hpp"
#include "rkbs/signs.hpp"
#include "rkbs/solver.hpp"

namespace rkbs::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kOk = 0, kValidation = 2, kSolverFailure = 3, kIllConditioned = 4 };

struct ArchitectureConfig {
  std::vector<std::size_t> layers;
  Activation activation = Activation::ReLU;
  bool output_activation_applied = false;
};

struct SolveConfig {
  ArchitectureConfig architecture;
  std::optional<double> decay_exponent;
  SearchConfig search;
  RegConfig regularization;
  bool scaled_witnesses = true;
  std::size_t sign_cap = 12;
  // Exactly one of these is set: inline data or a CSV path.
  std::optional<Dataset> inline_dataset;
  std::optional<std::filesystem::path> dataset_path;
  std::optional<std::filesystem::path> output_path;

  KernelContext context() const;
  SolverConfig solver() const;
};

// Parses and validates a config document. Unknown keys anywhere are
// rejected. Relative paths resolve against base_dir. Throws ValidationError.
SolveConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
SolveConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const SolveConfig& cfg);

// CSV with header x1..xs,y1..yt. Throws ValidationError naming the row.
Dataset parse_csv(std::istream& in);
Dataset load_csv(const std::filesystem::path& path);
Dataset load_dataset(const SolveConfig& cfg);

// Overrides from the command line.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> starts;
  std::optional<std::size_t> iterations;
  std::optional<double> tolerance;
  std::optional<double> lambda0;
  bool include_uncertified_signs = false;
};
void apply(const Overrides& o, SolveConfig& cfg);

struct SolveResult {
  Dataset dataset;
  VectorSolution solution;
  std::vector<SelectionReport> selections;
};

// Anchors, nice subset, coefficients, admissible set, sweep and selection
// for every output component.
SolveResult run_solve(const SolveConfig& cfg);

nlohmann::json make_report(const SolveConfig& cfg, const SolveResult& result,
                           double wall_clock_seconds);
nlohmann::json admissible_table_json(const std::vector<SignVerdict>& table);

// Structural check of a report document. Returns the problems found.
std::vector<std::string> validate_report(const nlohmann::json& report);

struct Output {
  std::ostream& out;
  std::ostream& err;
  bool color = false;
};

struct CommonOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  Overrides overrides;
};

int cmd_solve(const CommonOptions& opt, const Output& io);
int cmd_admissible(const CommonOptions& opt, const Output& io);

struct SupnormTerm {
  double coefficient;
  std::size_t index;  // 1-based dataset row
};
// Parses "C:I".
SupnormTerm parse_term(const std::string& text);
int cmd_supnorm(const CommonOptions& opt, const std::vector<SupnormTerm>& terms,
                std::size_t component, const Output& io);

struct ReproduceOptions {
  Overrides overrides;
  // Added to every expected value; used to check that mismatches fail.
  double perturb = 0.0;
  std::optional<std::filesystem::path> out;
};
int cmd_reproduce(const ReproduceOptions& opt, const Output& io);

// One row of the reference comparison.
struct Expectation {
  std::string quantity;
  std::string exact;  // rational form
  double expected;
  double actual;
  double tolerance;
  bool pass() const;
};
std::vector<Expectation> reproduce_reference(const Overrides& overrides, double perturb = 0.0);

}  // namespace rkbs::cli
