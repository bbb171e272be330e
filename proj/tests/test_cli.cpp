#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "rkbs/cli.hpp"
#include "rkbs/errors.hpp"
#include "rkbs/parallel.hpp"

using namespace rkbs;
using namespace rkbs::cli;
using nlohmann::json;

namespace {

const std::filesystem::path kRoot = RKBS_SOURCE_DIR;
const std::filesystem::path kData = kRoot / "tests" / "data";

Overrides quick() {
  Overrides o;
  o.starts = 32;
  o.iterations = 150;
  return o;
}

json minimal() {
  return json::parse(R"({"architecture": {"layers": [2, 2, 1]},
                         "dataset": {"inputs": [[1, -1]], "outputs": [[1]]}})");
}

struct Captured {
  std::ostringstream out, err;
  Output io() { return {out, err, false}; }
};

}  // namespace

TEST_CASE("parse_config: defaults and full documents") {
  const SolveConfig cfg = parse_config(minimal(), ".");
  CHECK(cfg.architecture.layers == std::vector<std::size_t>{2, 2, 1});
  CHECK(cfg.architecture.activation == Activation::ReLU);
  CHECK_FALSE(cfg.decay_exponent);
  CHECK(cfg.search.starts == 256);
  CHECK(cfg.regularization.lambda0 == 0.1);
  CHECK(cfg.context().decay().exponent == 3.0);
  REQUIRE(cfg.inline_dataset);
  CHECK(cfg.inline_dataset->size() == 1);

  const SolveConfig file = load_config(kRoot / "data" / "three_point.json");
  REQUIRE(file.dataset_path);
  CHECK(*file.dataset_path == kRoot / "data" / "three_point.csv");
  CHECK(load_dataset(file).size() == 3);

  // echo round trip
  const SolveConfig again = parse_config(to_json(cfg), ".");
  CHECK(to_json(again) == to_json(cfg));
}

TEST_CASE("parse_config rejects unknown keys and bad values") {
  auto bad = [](const char* patch) {
    json doc = minimal();
    doc.merge_patch(json::parse(patch));
    return doc;
  };
  CHECK_THROWS_AS(parse_config(bad(R"({"extra": 1})"), "."), ValidationError);
  CHECK_THROWS_AS(parse_config(bad(R"({"architecture": {"depth": 2}})"), "."), ValidationError);
  CHECK_THROWS_AS(parse_config(bad(R"({"search": {"restarts": 2}})"), "."), ValidationError);
  CHECK_THROWS_AS(parse_config(bad(R"({"search": {"starts": 0}})"), "."), ValidationError);
  CHECK_THROWS_AS(parse_config(bad(R"({"search": {"seed": -1}})"), "."), ValidationError);
  CHECK_THROWS_AS(parse_config(bad(R"({"search": {"tol": "small"}})"), "."), ValidationError);
  CHECK_THROWS_AS(parse_config(bad(R"({"regularization": {"lambda0": 0}})"), "."), ValidationError);
  CHECK_THROWS_AS(parse_config(bad(R"({"architecture": {"activation": "tanh"}})"), "."),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(bad(R"({"architecture": {"layers": [2]}})"), "."), ValidationError);
  CHECK_THROWS_AS(parse_config(bad(R"({"decay_exponent": -1})"), "."), ValidationError);
  CHECK_THROWS_AS(parse_config(bad(R"({"schema_version": 9})"), "."), ValidationError);
  CHECK_THROWS_AS(parse_config(bad(R"({"dataset": {"inputs": [[1, 2], [3]], "outputs": [[1], [2]]}})"), "."),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"dataset": "x.csv"})"), "."), ValidationError);
  CHECK_THROWS_AS(load_config(kData / "unknown_key.json"), ValidationError);
  CHECK_THROWS_AS(load_config(kData / "does_not_exist.json"), ValidationError);
}

TEST_CASE("parse_csv") {
  std::istringstream ok("x1,x2,y1,y2\n1.5,-2,3,4\n\n0,1e-3, -7 ,+2\n");
  const Dataset d = parse_csv(ok);
  CHECK(d.size() == 2);
  CHECK(d.input_dim() == 2);
  CHECK(d.output_dim() == 2);
  CHECK(d.inputs()[1] == std::vector<double>{0, 1e-3});
  CHECK(d.outputs()[1] == std::vector<double>{-7, 2});

  std::istringstream crlf("x1,y1\r\n0.25,1\r\n");
  CHECK(parse_csv(crlf).inputs()[0][0] == 0.25);

  std::istringstream ragged("x1,x2,y1\n1,2,3\n4,5\n");
  try {
    parse_csv(ragged);
    FAIL("ragged row accepted");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  std::istringstream comma_decimal("x1,y1\n\"1,5\",2\n");
  CHECK_THROWS_AS(parse_csv(comma_decimal), ValidationError);
  std::istringstream header("a,b\n1,2\n");
  CHECK_THROWS_AS(parse_csv(header), ValidationError);
  std::istringstream order("y1,x1\n1,2\n");
  CHECK_THROWS_AS(parse_csv(order), ValidationError);
  std::istringstream nan("x1,y1\nnan,2\n");
  CHECK_THROWS_AS(parse_csv(nan), ValidationError);
  std::istringstream empty("");
  CHECK_THROWS_AS(parse_csv(empty), ValidationError);
}

TEST_CASE("parse_term") {
  const auto t = parse_term("-0.5:3");
  CHECK(t.coefficient == -0.5);
  CHECK(t.index == 3);
  CHECK_THROWS_AS(parse_term("1"), ValidationError);
  CHECK_THROWS_AS(parse_term("1:0"), ValidationError);
  CHECK_THROWS_AS(parse_term("x:1"), ValidationError);
  CHECK_THROWS_AS(parse_term("1:2z"), ValidationError);
}

TEST_CASE("solve report: content, validation and round trip") {
  SolveConfig cfg = load_config(kRoot / "data" / "three_point.json");
  apply(quick(), cfg);
  const SolveResult result = run_solve(cfg);
  const json report = make_report(cfg, result, 0.0);
  CHECK(validate_report(report).empty());
  CHECK(json::parse(report.dump()) == report);

  const json& c = report["components"][0];
  CHECK(c["beta"] == json::array({2.0, -3.0, 0.5}));
  CHECK(c["norm"]["lower"] == 5.0);
  CHECK(c["norm"]["upper"] == 5.5);
  CHECK(c["norm"]["status"] == "candidate");
  CHECK(c["selection"]["decision"] == "unregularized");
  CHECK(c["sweep"].size() == 13);
  CHECK(c["admissible"].size() == 27);
  CHECK(report["provenance"]["version"] == RKBS_VERSION);

  json broken = report;
  broken["components"][0]["gram"][0] = json::array({1.0});
  CHECK_FALSE(validate_report(broken).empty());
  broken = report;
  broken.erase("provenance");
  CHECK_FALSE(validate_report(broken).empty());
  broken = report;
  broken["components"][0]["norm"]["lower"] = 9.0;
  CHECK_FALSE(validate_report(broken).empty());
}

TEST_CASE("cmd_solve reports are byte-identical across runs and thread counts") {
  CommonOptions opt;
  opt.config = kData / "quick.json";
  auto run = [&](std::size_t threads) {
    set_thread_count(threads);
    Captured cap;
    REQUIRE(cmd_solve(opt, cap.io()) == kOk);
    json doc = json::parse(cap.out.str());
    CHECK(doc["provenance"]["wall_clock_seconds"].is_number());
    doc["provenance"].erase("wall_clock_seconds");
    return doc.dump(2);
  };
  const std::string a = run(1), b = run(1), c = run(4);
  set_thread_count(0);
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("exit codes") {
  CommonOptions opt;
  opt.overrides = quick();
  auto code = [&](const char* name) {
    opt.config = kData / name;
    Captured cap;
    const int rc = cmd_solve(opt, cap.io());
    INFO(cap.err.str());
    return std::make_pair(rc, cap.err.str());
  };
  auto [rc, msg] = code("ragged.json");
  CHECK(rc == kValidation);
  CHECK(msg.find("row 2") != std::string::npos);
  std::tie(rc, msg) = code("duplicated_direction.json");
  CHECK(rc == kSolverFailure);
  CHECK(msg.find("no viable anchors") != std::string::npos);
  CHECK(msg.find("row 2") != std::string::npos);
  std::tie(rc, msg) = code("ill_conditioned.json");
  CHECK(rc == kIllConditioned);
  std::tie(rc, msg) = code("unknown_key.json");
  CHECK(rc == kValidation);
  std::tie(rc, msg) = code("does_not_exist.json");
  CHECK(rc == kValidation);

  opt.config = kData / "too_many_points.json";
  Captured cap;
  CHECK(cmd_admissible(opt, cap.io()) == kValidation);
  CHECK(cap.err.str().find("3^13") != std::string::npos);
}

TEST_CASE("cmd_admissible and cmd_supnorm output") {
  CommonOptions opt;
  opt.overrides = quick();
  opt.config = kData / "unit_point.json";
  {
    Captured cap;
    CHECK(cmd_admissible(opt, cap.io()) == kOk);
    CHECK(cap.out.str().find("3 of 3 sign vectors certified admissible") != std::string::npos);
  }
  opt.config = kRoot / "data" / "three_point.json";
  {
    Captured cap;
    CHECK(cmd_admissible(opt, cap.io()) == kOk);
    CHECK(cap.out.str().find("13 of 27") != std::string::npos);
    CHECK(cap.out.str().find("\033[") == std::string::npos);
  }
  {
    Captured cap;
    CHECK(cmd_supnorm(opt, {{1.0, 1}}, 1, cap.io()) == kOk);
    CHECK(cap.out.str().find("lower   1\nupper   1\nstatus  certified_exact") != std::string::npos);
  }
  {
    Captured cap;
    CHECK(cmd_supnorm(opt, {}, 1, cap.io()) == kOk);
    CHECK(cap.out.str().find("lower   0\nupper   0") != std::string::npos);
  }
  {
    Captured cap;
    CHECK(cmd_supnorm(opt, {{1.0, 1}, {-1.0, 2}, {1.0, 3}}, 1, cap.io()) == kOk);
    const std::string s = cap.out.str();
    const double lower = std::stod(s.substr(s.find("lower") + 5));
    CHECK(lower >= 1.1 - 1e-3);
  }
  {
    Captured cap;
    CHECK(cmd_supnorm(opt, {{1.0, 4}}, 1, cap.io()) == kValidation);
  }
}

TEST_CASE("reproduce: perturbed expectations fail, seeds do not change certified values") {
  ReproduceOptions opt;
  opt.overrides = quick();
  opt.perturb = 1e-3;
  Captured cap;
  CHECK(cmd_reproduce(opt, cap.io()) == kSolverFailure);
  CHECK(cap.out.str().find("MISMATCH") != std::string::npos);

  Overrides a = quick(), b = quick();
  a.seed = 1;
  b.seed = 99;
  const auto ra = reproduce_reference(a), rb = reproduce_reference(b);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i].pass());
    CHECK(ra[i].actual == rb[i].actual);
  }
}
