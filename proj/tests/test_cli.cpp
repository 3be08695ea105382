#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "centroaffine/cli.hpp"
#include "centroaffine/report.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace ca = centroaffine;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

/// Fresh per-case scratch directory under the system temp root.
fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "centroaffine_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "missing file " << path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

ca::RunConfig ellipse_config(const fs::path& out, const std::string& prefix = "t") {
  ca::RunConfig cfg = ca::parse_config_text(
      R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[2,1]}})");
  cfg.out_dir = out.string();
  cfg.prefix = prefix;
  return cfg;
}

}  // namespace

TEST_CASE("configuration parsing fills defaults and validates") {
  const ca::RunConfig cfg = ca::parse_config_text(
      R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[2,1]}})");
  CHECK(cfg.schema_version == 1);
  CHECK(cfg.body.family == "ellipsoid");
  CHECK(cfg.body.semi_axes == std::vector<double>{2.0, 1.0});
  CHECK(cfg.coarse == std::vector<int>{128});
  CHECK(cfg.fine == std::vector<int>{256});
  CHECK(cfg.p_list.empty());
  CHECK(cfg.p_max == 6);
  CHECK(cfg.tol_scale == 1.0);
  CHECK(cfg.seed == 20260814u);
  CHECK(cfg.out_dir == ".");
  CHECK(cfg.prefix == "cabody");
  CHECK(cfg.flow.dt == 0.0);
  CHECK(cfg.flow.steps == 100);

  const ca::RunConfig ball = ca::parse_config_text(
      R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[1,1,1]},)"
      R"("coarse":[10,20],"fine":[14,28],"seed":7,"p_max":12,"tol_scale":2.5,)"
      R"("p_list":[0.5,2.0],"out_dir":"somewhere","prefix":"run",)"
      R"("flow":{"dt":1e-6,"steps":10}})");
  CHECK(ca::body_dimension(ball.body) == 3);
  CHECK(ball.coarse == std::vector<int>{10, 20});
  CHECK(ball.fine == std::vector<int>{14, 28});
  CHECK(ball.seed == 7u);
  CHECK(ball.p_max == 12);
  CHECK(ball.tol_scale == 2.5);
  CHECK(ball.p_list == std::vector<double>{0.5, 2.0});
  CHECK(ball.flow.dt == 1e-6);
  CHECK(ball.flow.steps == 10);

  const ca::RunConfig wob = ca::parse_config_text(
      R"({"schema_version":1,"body":{"family":"fourier","radius":1.0,)"
      R"("fourier":[[3,0.02,0.0]]}})");
  CHECK(wob.body.fourier_terms.size() == 1);
  CHECK(wob.body.fourier_terms[0].degree == 3);
  const ca::Body body = ca::realize_body(wob.body);
  CHECK(body.dim() == 2);
  CHECK_FALSE(body.centered_ellipsoid());
}

TEST_CASE("configuration errors are rejected with ConfigError") {
  auto bad = [](const std::string& text) {
    CHECK_THROWS_AS(ca::parse_config_text(text), ca::ConfigError);
  };
  bad("not json at all");
  bad(R"([1,2,3])");
  bad(R"({"body":{"family":"ellipsoid","semi_axes":[2,1]}})");            // no schema_version
  bad(R"({"schema_version":2,"body":{"family":"ellipsoid","semi_axes":[2,1]}})");
  bad(R"({"schema_version":1})");                                          // no body
  bad(R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[2,1]},"bogus":1})");
  bad(R"({"schema_version":1,"body":{"family":"cube"}})");
  bad(R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[2,1,3,4]}})");
  bad(R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[2,-1]}})");
  bad(R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[2,1],"count":3}})");
  bad(R"({"schema_version":1,"body":{"family":"fourier","radius":1.0}})");  // no terms
  bad(R"({"schema_version":1,"body":{"family":"fourier","fourier":[[0,0.1,0]]}})");
  bad(R"({"schema_version":1,"body":{"family":"sphharm","sphharm":[[2,5,0.01]]}})");
  bad(R"({"schema_version":1,"body":{"family":"random_fourier","count":0}})");
  bad(R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[2,1]},)"
      R"("coarse":[256],"fine":[256]})");
  bad(R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[2,1]},)"
      R"("coarse":[4],"fine":[8]})");
  bad(R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[1,1,1]},)"
      R"("coarse":[128],"fine":[256]})");                                  // arity mismatch
  bad(R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[2,1]},"p_list":[-2.0]})");
  bad(R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[2,1]},"p_max":0})");
  bad(R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[2,1]},"p_max":49})");
  bad(R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[2,1]},"tol_scale":0})");
  bad(R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[2,1]},"seed":-4})");
  bad(R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[2,1]},"prefix":""})");
  bad(R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[2,1]},)"
      R"("flow":{"dt":-1e-7}})");
  bad(R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[2,1]},)"
      R"("flow":{"steps":0}})");

  CHECK_THROWS_AS(ca::load_config("/nonexistent/config.json"), ca::ConfigError);
  ca::BodySpec random_spec;
  random_spec.family = "random_fourier";
  CHECK_THROWS_AS(ca::realize_body(random_spec), ca::ConfigError);
}

TEST_CASE("deterministic serialization helpers") {
  CHECK(ca::format_double(0.25) == "0.25");
  CHECK(ca::format_double(16.0) == "16");
  CHECK(ca::format_double(2.0 * kPi) == "6.2831853071795862");
  CHECK(ca::format_double(std::nan("")) == "null");
  CHECK(ca::format_double(std::numeric_limits<double>::infinity()) == "null");

  nlohmann::ordered_json j;
  j["a"] = 0.5;
  j["b"] = nlohmann::ordered_json::array({1, 2.5});
  j["c"] = "x,\"y\"";
  CHECK(ca::dump_compact(j) == R"({"a":0.5,"b":[1,2.5],"c":"x,\"y\""})");
  CHECK(ca::dump_ordered(j) == "{\n  \"a\": 0.5,\n  \"b\": [\n    1,\n    2.5\n  ],\n"
                               "  \"c\": \"x,\\\"y\\\"\"\n}\n");

  const fs::path dir = scratch_dir("atomic");
  const fs::path nested = dir / "deep" / "file.txt";
  ca::write_text_atomic(nested.string(), "payload\n");
  CHECK(read_file(nested) == "payload\n");
  CHECK_FALSE(fs::exists(nested.string() + ".tmp"));
}

TEST_CASE("seeded wobble generators are reproducible and non-ellipsoidal") {
  const ca::Body a0 = ca::sample_fourier_body(99, 0);
  const ca::Body a0_again = ca::sample_fourier_body(99, 0);
  const ca::Body a1 = ca::sample_fourier_body(99, 1);
  CHECK(a0.label() == a0_again.label());
  CHECK(a0.label() != a1.label());
  CHECK(a0.dim() == 2);
  CHECK(a0.smooth());
  CHECK_FALSE(a0.centered_ellipsoid());

  const ca::Body b0 = ca::sample_sphharm_body(99, 0);
  const ca::Body b0_again = ca::sample_sphharm_body(99, 0);
  const ca::Body b1 = ca::sample_sphharm_body(99, 1);
  CHECK(b0.label() == b0_again.label());
  CHECK(b0.label() != b1.label());
  CHECK(b0.dim() == 3);
  CHECK(b0.smooth());
  CHECK_FALSE(b0.centered_ellipsoid());

  // Batches of either family construct without validation failures.
  for (int i = 0; i < 12; ++i) {
    CHECK_NOTHROW(ca::sample_fourier_body(20260814, i));
  }
  for (int i = 0; i < 6; ++i) {
    CHECK_NOTHROW(ca::sample_sphharm_body(20260814, i));
  }
  CHECK_THROWS_AS(ca::sample_fourier_body(1, -1), std::invalid_argument);
}

TEST_CASE("report command writes the invariant table") {
  const fs::path dir = scratch_dir("report");
  const ca::RunConfig cfg = ellipse_config(dir);
  REQUIRE(ca::cmd_report(cfg) == ca::kExitOk);

  const fs::path path = dir / "t_report.json";
  const std::string first = read_file(path);
  const json j = json::parse(first);
  CHECK(j.at("schema_version") == 1);
  CHECK(j.at("command") == "report");
  CHECK(j.at("seed") == 20260814);
  CHECK(j.at("dim") == 2);
  CHECK(j.at("body_label") == "ellipsoid(2,1)");
  const auto& inv = j.at("invariants");
  CHECK(inv.at("vol").get<double>() == doctest::Approx(2.0 * kPi).epsilon(1e-10));
  CHECK(inv.at("vol_polar").get<double>() == doctest::Approx(kPi / 2.0).epsilon(1e-10));
  CHECK(inv.at("omega_n").get<double>() == doctest::Approx(2.0 * kPi).epsilon(1e-10));
  CHECK(inv.at("omega_K_entropy").get<double>() == doctest::Approx(16.0).epsilon(1e-10));
  CHECK(inv.at("lambda").get<double>() == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(std::abs(inv.at("omega_2n").get<double>()) < 1e-10);
  CHECK(std::abs(inv.at("kl").get<double>()) < 1e-12);

  // The sequence block carries both orientations; on the ellipse the second
  // construction's as-stated tail sits far from the corrected one.
  const auto& alt1 = j.at("sequences").at("alt1");
  CHECK(alt1.at("corrected_tail").get<double>() == doctest::Approx(16.0).epsilon(1e-9));
  CHECK(alt1.at("paper_tail").get<double>() == doctest::Approx(4.0).epsilon(1e-9));

  for (const auto& [key, value] : j.at("drift").items()) {
    INFO("drift key " << key);
    CHECK(value.get<double>() < 1e-8);
  }

  REQUIRE(ca::cmd_report(cfg) == ca::kExitOk);
  CHECK(read_file(path) == first);
}

TEST_CASE("report drift stays small on a wobbly body") {
  const fs::path dir = scratch_dir("report_wobble");
  ca::RunConfig cfg = ca::parse_config_text(
      R"({"schema_version":1,"body":{"family":"fourier","radius":1.0,)"
      R"("fourier":[[3,0.05,0.0]]}})");
  cfg.out_dir = dir.string();
  cfg.prefix = "w";
  REQUIRE(ca::cmd_report(cfg) == ca::kExitOk);
  const json j = json::parse(read_file(dir / "w_report.json"));
  for (const auto& [key, value] : j.at("drift").items()) {
    INFO("drift key " << key);
    CHECK(value.get<double>() < 1e-6);
  }
}

TEST_CASE("suite command emits one row per check and an aggregate verdict") {
  const fs::path dir = scratch_dir("suite");
  const ca::RunConfig cfg = ellipse_config(dir);
  REQUIRE(ca::cmd_suite(cfg) == ca::kExitOk);

  const std::string csv = read_file(dir / "t_suite.csv");
  CHECK(count_lines(csv) == 12);  // header + 11 checks
  CHECK(csv.rfind("seed,body,check,resolution,order,lhs,rhs,slack,slack_coarse,max_gap,tol,"
                  "applicable,pass,equality_expected,equality_observed,resolution_stable,"
                  "hypotheses,note\n",
                  0) == 0);
  for (const char* id : {"holder_lower", "monotonicity_bounds", "omega2_bounds",
                         "volume_product_sandwich", "golden_ratio_bound",
                         "p_affine_interpolation", "affine_ratio_bounds", "isoperimetric_like",
                         "paouris_upper", "sequence_chains", "omega_K_sequence_bounds"}) {
    CHECK_MESSAGE(csv.find(std::string(",") + id + ",") != std::string::npos, id);
  }
  // Every data row of the centered ellipse run: applicable, passing, an
  // expected equality that is observed, and resolution-stable.
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    CHECK_MESSAGE(line.find(",true,true,true,true,true,") != std::string::npos, line);
  }

  const json j = json::parse(read_file(dir / "t_suite.json"));
  CHECK(j.at("command") == "suite");
  CHECK(j.at("all_pass") == true);
  CHECK(j.at("checks_total") == 11);
  CHECK(j.at("checks_applicable") == 11);
  CHECK(j.at("checks_passed") == 11);
  REQUIRE(j.at("bodies").size() == 1);
  CHECK(j.at("bodies").at(0).at("checks").size() == 11);

  const std::string csv_again_path = (dir / "t_suite.csv").string();
  REQUIRE(ca::cmd_suite(cfg) == ca::kExitOk);
  CHECK(read_file(csv_again_path) == csv);
}

TEST_CASE("suite command runs seeded batches") {
  const fs::path dir = scratch_dir("suite_batch");
  ca::RunConfig cfg = ca::parse_config_text(
      R"({"schema_version":1,"body":{"family":"random_fourier","count":3}})");
  cfg.out_dir = dir.string();
  cfg.prefix = "b";
  REQUIRE(ca::cmd_suite(cfg) == ca::kExitOk);
  const std::string csv = read_file(dir / "b_suite.csv");
  CHECK(count_lines(csv) == 1 + 3 * 11);
  const json j = json::parse(read_file(dir / "b_suite.json"));
  CHECK(j.at("bodies").size() == 3);
  CHECK(j.at("all_pass") == true);
}

TEST_CASE("converge command tabulates ladders against entropy targets") {
  const fs::path dir = scratch_dir("converge");
  ca::RunConfig cfg = ellipse_config(dir);
  cfg.p_max = 12;
  REQUIRE(ca::cmd_converge(cfg) == ca::kExitOk);
  const std::string csv = read_file(dir / "t_converge.csv");
  CHECK(csv.rfind("seed,kind,p,paper_term,corrected_term,paper_tail,corrected_tail,target,"
                  "relative_gap\n",
                  0) == 0);
  // The subscript ladder runs over 2^0 .. 2^p_max (p_max + 1 rows), the
  // three dyadic-index ladders over 1 .. p_max each.
  CHECK(count_lines(csv) == 1 + (12 + 1) + 3 * 12);

  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  bool saw_alt1 = false;
  while (std::getline(lines, line)) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream row(line);
    while (std::getline(row, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 9);
    // The dyadic lambda ladder converges like 4^{-p}; at depth 12 the
    // extrapolated tail still carries a few 1e-8 of residual.
    const double gap = std::stod(fields[8]);
    CHECK_MESSAGE(gap < 1e-6, line);
    if (fields[1] == "alt1") {
      saw_alt1 = true;
      CHECK(std::stod(fields[5]) == doctest::Approx(4.0).epsilon(1e-9));   // as printed
      CHECK(std::stod(fields[6]) == doctest::Approx(16.0).epsilon(1e-9));  // corrected
    }
    if (fields[1] == "lambda") {
      CHECK(std::stod(fields[7]) == doctest::Approx(0.25).epsilon(1e-9));
    }
  }
  CHECK(saw_alt1);
}

TEST_CASE("converge command on the unit ball keeps every target at one") {
  const fs::path dir = scratch_dir("converge_ball");
  ca::RunConfig cfg = ca::parse_config_text(
      R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[1,1,1]}})");
  cfg.out_dir = dir.string();
  cfg.prefix = "ball";
  REQUIRE(ca::cmd_converge(cfg) == ca::kExitOk);
  const std::string csv = read_file(dir / "ball_converge.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream row(line);
    while (std::getline(row, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 9);
    CHECK(std::stod(fields[7]) == doctest::Approx(1.0).epsilon(1e-8));  // target
    CHECK(std::stod(fields[6]) == doctest::Approx(1.0).epsilon(1e-6));  // corrected tail
  }
}

TEST_CASE("flow command records the volume trace and variation check") {
  const fs::path dir = scratch_dir("flow");
  ca::RunConfig cfg = ca::parse_config_text(
      R"({"schema_version":1,"body":{"family":"fourier","radius":1.0,)"
      R"("fourier":[[3,0.02,0.01],[5,0.004,0.0]]},"flow":{"steps":40}})");
  cfg.out_dir = dir.string();
  cfg.prefix = "f";
  REQUIRE(ca::cmd_flow(cfg) == ca::kExitOk);

  const std::string csv = read_file(dir / "f_flow.csv");
  CHECK(count_lines(csv) == 1 + 41);  // header + initial state + 40 steps
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "seed,t,volume,valid");
  double prev_volume = std::numeric_limits<double>::infinity();
  while (std::getline(lines, line)) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream row(line);
    while (std::getline(row, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 4);
    const double volume = std::stod(fields[2]);
    CHECK(volume < prev_volume);
    prev_volume = volume;
    CHECK(fields[3] == "true");
  }

  const json j = json::parse(read_file(dir / "f_flow.json"));
  CHECK(j.at("steps_completed") == 40);
  CHECK(j.at("truncated") == false);
  const auto& var = j.at("variation");
  CHECK(var.at("dv_error_rel").get<double>() < 1e-5);
  const double ratio = var.at("dv_halving_ratio").get<double>();
  CHECK(ratio > 3.2);
  CHECK(ratio < 4.8);
}

TEST_CASE("flow command rejects bad time steps and non-planar bodies") {
  const fs::path dir = scratch_dir("flow_bad");
  ca::RunConfig cfg = ellipse_config(dir);
  cfg.flow.dt = 0.5;
  CHECK_THROWS_AS(ca::cmd_flow(cfg), ca::ConfigError);
  try {
    ca::cmd_flow(cfg);
  } catch (const ca::ConfigError& e) {
    // The message carries the computed stability bound for the retry.
    CHECK(std::string(e.what()).find("stability bound") != std::string::npos);
  }
  CHECK(ca::dispatch("flow", cfg) == ca::kExitUsage);

  ca::RunConfig ball = ca::parse_config_text(
      R"({"schema_version":1,"body":{"family":"ellipsoid","semi_axes":[1,1,1]}})");
  ball.out_dir = dir.string();
  CHECK(ca::dispatch("flow", ball) == ca::kExitUsage);
}

TEST_CASE("falsify command logs equality cases and stays quiet on wobble batches") {
  const fs::path dir = scratch_dir("falsify");
  ca::RunConfig cfg = ca::parse_config_text(
      R"({"schema_version":1,"body":{"family":"random_fourier","count":4}})");
  cfg.out_dir = dir.string();
  cfg.prefix = "rf";
  REQUIRE(ca::cmd_falsify(cfg) == ca::kExitOk);
  CHECK(read_file(dir / "rf_candidates.jsonl").empty());
  const json summary = json::parse(read_file(dir / "rf_falsify.json"));
  CHECK(summary.at("bodies") == 4);
  CHECK(summary.at("violations") == 0);
  CHECK(summary.at("equality_cases") == 0);
  CHECK(summary.at("near_equalities") == 0);

  ca::RunConfig eq = ellipse_config(dir, "eq");
  REQUIRE(ca::cmd_falsify(eq) == ca::kExitOk);
  const std::string log = read_file(dir / "eq_candidates.jsonl");
  const json eq_summary = json::parse(read_file(dir / "eq_falsify.json"));
  CHECK(eq_summary.at("equality_cases").get<int>() > 0);
  CHECK(eq_summary.at("violations") == 0);
  std::istringstream lines(log);
  std::string line;
  int parsed = 0;
  while (std::getline(lines, line)) {
    const json entry = json::parse(line);
    CHECK(entry.at("kind") == "equality_case");
    CHECK(entry.at("seed") == 20260814);
    CHECK(entry.at("body") == "ellipsoid(2,1)");
    CHECK(entry.at("slack").is_number());
    ++parsed;
  }
  CHECK(parsed == eq_summary.at("equality_cases").get<int>());
}

TEST_CASE("dispatch maps exceptions onto the exit-code contract") {
  const fs::path dir = scratch_dir("dispatch");
  const ca::RunConfig cfg = ellipse_config(dir);
  CHECK(ca::dispatch("no_such_command", cfg) == ca::kExitUsage);

  // A random family reaches realize_body inside cmd_report and is folded
  // into the usage exit code.
  ca::RunConfig random_cfg = ca::parse_config_text(
      R"({"schema_version":1,"body":{"family":"random_fourier","count":2}})");
  random_cfg.out_dir = dir.string();
  CHECK(ca::dispatch("report", random_cfg) == ca::kExitUsage);

  CHECK(ca::dispatch("report", cfg) == ca::kExitOk);
}
