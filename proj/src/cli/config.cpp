#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rkbs/cli.hpp"
#include "rkbs/errors.hpp"

namespace rkbs::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ValidationError("unknown key '" + key + "' in " + where);
  }
}

double get_number(const json& v, const std::string& name) {
  if (!v.is_number()) throw ValidationError(name + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ValidationError(name + " must be finite");
  return d;
}

std::uint64_t get_count(const json& v, const std::string& name, bool allow_zero = false) {
  if (!v.is_number_unsigned()) {
    throw ValidationError(name + " must be a nonnegative integer");
  }
  const auto n = v.get<std::uint64_t>();
  if (!allow_zero && n == 0) throw ValidationError(name + " must be positive");
  return n;
}

bool get_bool(const json& v, const std::string& name) {
  if (!v.is_boolean()) throw ValidationError(name + " must be true or false");
  return v.get<bool>();
}

std::vector<std::vector<double>> get_matrix(const json& v, const std::string& name) {
  if (!v.is_array()) throw ValidationError(name + " must be an array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& row = v[i];
    const std::string rname = name + " row " + std::to_string(i + 1);
    if (!row.is_array()) throw ValidationError(rname + " must be an array");
    std::vector<double> r;
    for (const json& e : row) r.push_back(get_number(e, rname));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

double parse_double(std::string_view field, std::size_t row, std::size_t col) {
  // Trim blanks.
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  double v = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw ValidationError("dataset row " + std::to_string(row) + ", column " +
                          std::to_string(col) + ": '" + std::string(field) +
                          "' is not a finite number");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

KernelContext SolveConfig::context() const {
  Architecture arch(architecture.layers, architecture.activation,
                    architecture.output_activation_applied);
  if (decay_exponent) return KernelContext(std::move(arch), *decay_exponent);
  return KernelContext(std::move(arch));
}

SolverConfig SolveConfig::solver() const {
  SolverConfig s;
  s.signs.search = search;
  s.signs.scaled_witnesses = scaled_witnesses;
  s.signs.cap = sign_cap;
  s.signs.tolerance = search.tolerance;
  return s;
}

SolveConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  reject_unknown(doc, "config",
                 {"schema_version", "architecture", "decay_exponent", "search", "regularization",
                  "signs", "dataset", "output"});
  SolveConfig cfg;
  if (doc.contains("schema_version") &&
      (!doc["schema_version"].is_number_integer() || doc["schema_version"] != kSchemaVersion)) {
    throw ValidationError("config schema_version must be " + std::to_string(kSchemaVersion));
  }

  if (!doc.contains("architecture")) throw ValidationError("config is missing 'architecture'");
  const json& a = doc["architecture"];
  reject_unknown(a, "architecture", {"layers", "activation", "output_activation_applied"});
  if (!a.contains("layers") || !a["layers"].is_array()) {
    throw ValidationError("architecture.layers must be an array of widths");
  }
  for (const json& w : a["layers"]) {
    cfg.architecture.layers.push_back(get_count(w, "architecture.layers entry"));
  }
  if (a.contains("activation")) {
    if (!a["activation"].is_string()) throw ValidationError("architecture.activation must be a string");
    cfg.architecture.activation = activation_from_string(a["activation"].get<std::string>());
  }
  if (a.contains("output_activation_applied")) {
    cfg.architecture.output_activation_applied =
        get_bool(a["output_activation_applied"], "architecture.output_activation_applied");
  }
  try {
    Architecture check(cfg.architecture.layers, cfg.architecture.activation,
                       cfg.architecture.output_activation_applied);
  } catch (const ShapeError& e) {
    throw ValidationError(std::string("architecture: ") + e.what());
  }

  if (doc.contains("decay_exponent")) {
    cfg.decay_exponent = get_number(doc["decay_exponent"], "decay_exponent");
    if (!(*cfg.decay_exponent > 0)) throw ValidationError("decay_exponent must be positive");
  }

  if (doc.contains("search")) {
    const json& s = doc["search"];
    reject_unknown(s, "search", {"seed", "starts", "iters", "tol"});
    if (s.contains("seed")) cfg.search.seed = get_count(s["seed"], "search.seed", true);
    if (s.contains("starts")) cfg.search.starts = get_count(s["starts"], "search.starts");
    if (s.contains("iters")) cfg.search.iterations = get_count(s["iters"], "search.iters");
    if (s.contains("tol")) cfg.search.tolerance = get_number(s["tol"], "search.tol");
    validate(cfg.search);
  }

  if (doc.contains("regularization")) {
    const json& r = doc["regularization"];
    reject_unknown(r, "regularization", {"lambda0", "include_uncertified_signs"});
    if (r.contains("lambda0")) cfg.regularization.lambda0 = get_number(r["lambda0"], "regularization.lambda0");
    if (r.contains("include_uncertified_signs")) {
      cfg.regularization.include_uncertified_signs =
          get_bool(r["include_uncertified_signs"], "regularization.include_uncertified_signs");
    }
    validate(cfg.regularization);
  }

  if (doc.contains("signs")) {
    const json& s = doc["signs"];
    reject_unknown(s, "signs", {"scaled_witnesses", "cap"});
    if (s.contains("scaled_witnesses")) cfg.scaled_witnesses = get_bool(s["scaled_witnesses"], "signs.scaled_witnesses");
    if (s.contains("cap")) cfg.sign_cap = get_count(s["cap"], "signs.cap", true);
  }

  if (!doc.contains("dataset")) throw ValidationError("config is missing 'dataset'");
  const json& d = doc["dataset"];
  if (d.is_string()) {
    cfg.dataset_path = resolve(base_dir, d.get<std::string>());
  } else {
    reject_unknown(d, "dataset", {"inputs", "outputs"});
    if (!d.contains("inputs") || !d.contains("outputs")) {
      throw ValidationError("inline dataset needs 'inputs' and 'outputs'");
    }
    cfg.inline_dataset = Dataset(get_matrix(d["inputs"], "dataset.inputs"),
                                 get_matrix(d["outputs"], "dataset.outputs"));
  }

  if (doc.contains("output")) {
    if (!doc["output"].is_string()) throw ValidationError("output must be a path string");
    cfg.output_path = resolve(base_dir, doc["output"].get<std::string>());
  }
  return cfg;
}

SolveConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

json to_json(const SolveConfig& cfg) {
  json a = {{"layers", cfg.architecture.layers},
            {"activation", to_string(cfg.architecture.activation)},
            {"output_activation_applied", cfg.architecture.output_activation_applied}};
  json doc = {{"schema_version", kSchemaVersion},
              {"architecture", a},
              {"search",
               {{"seed", cfg.search.seed},
                {"starts", cfg.search.starts},
                {"iters", cfg.search.iterations},
                {"tol", cfg.search.tolerance}}},
              {"regularization",
               {{"lambda0", cfg.regularization.lambda0},
                {"include_uncertified_signs", cfg.regularization.include_uncertified_signs}}},
              {"signs", {{"scaled_witnesses", cfg.scaled_witnesses}, {"cap", cfg.sign_cap}}}};
  if (cfg.decay_exponent) doc["decay_exponent"] = *cfg.decay_exponent;
  if (cfg.dataset_path) {
    doc["dataset"] = cfg.dataset_path->string();
  } else if (cfg.inline_dataset) {
    doc["dataset"] = {{"inputs", cfg.inline_dataset->inputs()},
                      {"outputs", cfg.inline_dataset->outputs()}};
  }
  if (cfg.output_path) doc["output"] = cfg.output_path->string();
  return doc;
}

Dataset parse_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  // header
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  if (line_no == 0 || line.find_first_not_of(" \t\r") == std::string::npos) {
    throw ValidationError("dataset file is empty; expected a header x1..xs,y1..yt");
  }
  std::size_t s = 0, t = 0;
  {
    const auto cols = split(line);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::string name(cols[c]);
      name.erase(0, name.find_first_not_of(" \t"));
      name.erase(name.find_last_not_of(" \t\r") + 1);
      const std::string want_x = "x" + std::to_string(s + 1);
      const std::string want_y = "y" + std::to_string(t + 1);
      if (t == 0 && name == want_x) {
        ++s;
      } else if (s > 0 && name == want_y) {
        ++t;
      } else {
        throw ValidationError("dataset header column " + std::to_string(c + 1) + " is '" + name +
                              "', expected '" + (t == 0 ? want_x + "' or '" + want_y : want_y) + "'");
      }
    }
    if (s == 0 || t == 0) throw ValidationError("dataset header needs at least one x and one y column");
  }

  std::vector<std::vector<double>> xs, ys;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    const auto cols = split(line);
    if (cols.size() != s + t) {
      throw ValidationError("dataset row " + std::to_string(row) + " (line " +
                            std::to_string(line_no) + ") has " + std::to_string(cols.size()) +
                            " fields, expected " + std::to_string(s + t));
    }
    std::vector<double> x(s), y(t);
    for (std::size_t c = 0; c < s; ++c) x[c] = parse_double(cols[c], row, c + 1);
    for (std::size_t c = 0; c < t; ++c) y[c] = parse_double(cols[s + c], row, s + c + 1);
    xs.push_back(std::move(x));
    ys.push_back(std::move(y));
  }
  return Dataset(std::move(xs), std::move(ys));
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset " + path.string());
  return parse_csv(in);
}

Dataset load_dataset(const SolveConfig& cfg) {
  if (cfg.inline_dataset) return *cfg.inline_dataset;
  if (cfg.dataset_path) return load_csv(*cfg.dataset_path);
  throw ValidationError("no dataset configured");
}

void apply(const Overrides& o, SolveConfig& cfg) {
  if (o.seed) cfg.search.seed = *o.seed;
  if (o.starts) cfg.search.starts = *o.starts;
  if (o.iterations) cfg.search.iterations = *o.iterations;
  if (o.tolerance) cfg.search.tolerance = *o.tolerance;
  if (o.lambda0) cfg.regularization.lambda0 = *o.lambda0;
  if (o.include_uncertified_signs) cfg.regularization.include_uncertified_signs = true;
  validate(cfg.search);
  validate(cfg.regularization);
}

}  // namespace rkbs::cli
