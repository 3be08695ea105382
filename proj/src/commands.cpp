/// Run configuration parsing and the five subcommands behind the cabody tool.
/// Every command reads one validated RunConfig, writes its artifacts through
/// the atomic text writer, prints a short deterministic summary on stdout and
/// reports through the shared exit codes.

#include "centroaffine/cli.hpp"

#include "centroaffine/flow.hpp"
#include "centroaffine/geometry.hpp"
#include "centroaffine/invariants.hpp"
#include "centroaffine/report.hpp"
#include "centroaffine/rng.hpp"
#include "centroaffine/suite.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace centroaffine {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kPi = std::numbers::pi;

/// Ladder depth cap of the suite sequence checks; deeper configured ladders
/// are clamped there (the convergence tables keep the full depth).
constexpr int kSuiteChainCap = 16;

/// Near-equality margin of the falsification log: applicable checks whose
/// normalized slack sits below margin * tolerance are recorded.
constexpr double kFalsifyMargin = 10.0;

// -------------------------------------------------------------------------
// configuration parsing

void require_known_keys(const ordered_json& node, const char* where,
                        std::initializer_list<const char*> allowed) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

double as_finite_number(const ordered_json& node, const std::string& what) {
  if (!node.is_number()) throw ConfigError(what + " must be a number");
  const double value = node.get<double>();
  if (!std::isfinite(value)) throw ConfigError(what + " must be finite");
  return value;
}

int as_integer(const ordered_json& node, const std::string& what) {
  if (!node.is_number_integer()) throw ConfigError(what + " must be an integer");
  return static_cast<int>(node.get<std::int64_t>());
}

std::string as_text(const ordered_json& node, const std::string& what) {
  if (!node.is_string()) throw ConfigError(what + " must be a string");
  return node.get<std::string>();
}

std::vector<int> as_integer_list(const ordered_json& node, const std::string& what) {
  if (!node.is_array()) throw ConfigError(what + " must be an array of integers");
  std::vector<int> out;
  for (const auto& item : node) out.push_back(as_integer(item, what + " entry"));
  return out;
}

std::vector<double> as_number_list(const ordered_json& node, const std::string& what) {
  if (!node.is_array()) throw ConfigError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& item : node) out.push_back(as_finite_number(item, what + " entry"));
  return out;
}

BodySpec parse_body_spec(const ordered_json& node) {
  if (!node.is_object()) throw ConfigError("body must be an object");
  require_known_keys(node, "body", {"family", "semi_axes", "radius", "fourier", "sphharm", "count"});
  if (!node.contains("family")) throw ConfigError("body.family is required");

  BodySpec spec;
  spec.family = as_text(node.at("family"), "body.family");
  const bool is_ellipsoid = spec.family == "ellipsoid";
  const bool is_fourier = spec.family == "fourier";
  const bool is_sphharm = spec.family == "sphharm";
  const bool is_random = spec.family == "random_fourier" || spec.family == "random_sphharm";
  if (!is_ellipsoid && !is_fourier && !is_sphharm && !is_random) {
    throw ConfigError("unknown body family \"" + spec.family + "\"");
  }

  if (node.contains("semi_axes")) {
    if (!is_ellipsoid) throw ConfigError("body.semi_axes is only valid for family ellipsoid");
    spec.semi_axes = as_number_list(node.at("semi_axes"), "body.semi_axes");
  }
  if (is_ellipsoid) {
    if (spec.semi_axes.size() != 2 && spec.semi_axes.size() != 3) {
      throw ConfigError("body.semi_axes must list 2 or 3 positive values");
    }
    for (double a : spec.semi_axes) {
      if (!(a > 0.0)) throw ConfigError("body.semi_axes must list 2 or 3 positive values");
    }
  }

  if (node.contains("radius")) {
    if (!is_fourier && !is_sphharm) {
      throw ConfigError("body.radius is only valid for the fourier and sphharm families");
    }
    spec.radius = as_finite_number(node.at("radius"), "body.radius");
    if (!(spec.radius > 0.0)) throw ConfigError("body.radius must be positive");
  }

  if (node.contains("fourier")) {
    if (!is_fourier) throw ConfigError("body.fourier is only valid for family fourier");
    const auto& list = node.at("fourier");
    if (!list.is_array() || list.empty()) {
      throw ConfigError("body.fourier must be a non-empty array of [degree, cos, sin] triples");
    }
    for (const auto& item : list) {
      if (!item.is_array() || item.size() != 3) {
        throw ConfigError("body.fourier entries must be [degree, cos, sin] triples");
      }
      FourierTerm term;
      term.degree = as_integer(item.at(0), "body.fourier degree");
      if (term.degree < 1) throw ConfigError("body.fourier degrees must be >= 1");
      term.cos_coef = as_finite_number(item.at(1), "body.fourier cosine coefficient");
      term.sin_coef = as_finite_number(item.at(2), "body.fourier sine coefficient");
      spec.fourier_terms.push_back(term);
    }
  } else if (is_fourier) {
    throw ConfigError("body.fourier is required for family fourier");
  }

  if (node.contains("sphharm")) {
    if (!is_sphharm) throw ConfigError("body.sphharm is only valid for family sphharm");
    const auto& list = node.at("sphharm");
    if (!list.is_array() || list.empty()) {
      throw ConfigError("body.sphharm must be a non-empty array of [l, m, coef] triples");
    }
    for (const auto& item : list) {
      if (!item.is_array() || item.size() != 3) {
        throw ConfigError("body.sphharm entries must be [l, m, coef] triples");
      }
      SphHarmTerm term;
      term.l = as_integer(item.at(0), "body.sphharm degree l");
      term.m = as_integer(item.at(1), "body.sphharm order m");
      if (term.l < 1) throw ConfigError("body.sphharm degrees must be >= 1");
      if (std::abs(term.m) > term.l) throw ConfigError("body.sphharm needs |m| <= l");
      term.coef = as_finite_number(item.at(2), "body.sphharm coefficient");
      spec.sphharm_terms.push_back(term);
    }
  } else if (is_sphharm) {
    throw ConfigError("body.sphharm is required for family sphharm");
  }

  if (node.contains("count")) {
    if (!is_random) throw ConfigError("body.count is only valid for the random families");
    spec.count = as_integer(node.at("count"), "body.count");
    if (spec.count < 1 || spec.count > 100000) {
      throw ConfigError("body.count must lie in [1, 100000]");
    }
  }
  return spec;
}

FlowConfig parse_flow_config(const ordered_json& node) {
  if (!node.is_object()) throw ConfigError("flow must be an object");
  require_known_keys(node, "flow", {"dt", "steps"});
  FlowConfig flow;
  if (node.contains("dt")) {
    flow.dt = as_finite_number(node.at("dt"), "flow.dt");
    if (flow.dt < 0.0) throw ConfigError("flow.dt must be >= 0 (0 requests the stability bound)");
  }
  if (node.contains("steps")) {
    flow.steps = as_integer(node.at("steps"), "flow.steps");
    if (flow.steps < 1 || flow.steps > 100000) throw ConfigError("flow.steps must lie in [1, 100000]");
  }
  return flow;
}

void validate_grids(const RunConfig& config, int dim) {
  const std::size_t arity = dim == 2 ? 1 : 2;
  if (config.coarse.size() != arity || config.fine.size() != arity) {
    throw ConfigError("coarse and fine must list " + std::to_string(arity) +
                      " resolution component(s) for a dim-" + std::to_string(dim) + " body");
  }
  for (std::size_t i = 0; i < arity; ++i) {
    if (config.coarse[i] < 8 || config.fine[i] < 8) {
      throw ConfigError("resolution components must be >= 8");
    }
    if (config.coarse[i] >= config.fine[i]) {
      throw ConfigError("each coarse resolution component must be below the fine one");
    }
  }
}

// -------------------------------------------------------------------------
// shared output helpers

std::string output_path(const RunConfig& config, const std::string& suffix) {
  return (std::filesystem::path(config.out_dir) / (config.prefix + "_" + suffix)).string();
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string bool_text(bool value) { return value ? "true" : "false"; }

std::string resolution_text(const std::vector<int>& resolution) {
  std::string out;
  for (std::size_t i = 0; i < resolution.size(); ++i) {
    if (i) out.push_back('x');
    out += std::to_string(resolution[i]);
  }
  return out;
}

ordered_json body_spec_json(const BodySpec& spec) {
  ordered_json j;
  j["family"] = spec.family;
  if (spec.family == "ellipsoid") {
    j["semi_axes"] = spec.semi_axes;
  }
  if (spec.family == "fourier") {
    j["radius"] = spec.radius;
    ordered_json terms = ordered_json::array();
    for (const auto& t : spec.fourier_terms) {
      terms.push_back(ordered_json::array({t.degree, t.cos_coef, t.sin_coef}));
    }
    j["fourier"] = std::move(terms);
  }
  if (spec.family == "sphharm") {
    j["radius"] = spec.radius;
    ordered_json terms = ordered_json::array();
    for (const auto& t : spec.sphharm_terms) {
      terms.push_back(ordered_json::array({t.l, t.m, t.coef}));
    }
    j["sphharm"] = std::move(terms);
  }
  if (spec.family == "random_fourier" || spec.family == "random_sphharm") {
    j["count"] = spec.count;
  }
  return j;
}

ordered_json run_header_json(const RunConfig& config, const std::string& command, int dim) {
  ordered_json j;
  j["schema_version"] = config.schema_version;
  j["command"] = command;
  j["seed"] = config.seed;
  j["body"] = body_spec_json(config.body);
  j["dim"] = dim;
  ordered_json res;
  res["coarse"] = config.coarse;
  res["fine"] = config.fine;
  j["resolution"] = std::move(res);
  return j;
}

std::vector<double> default_report_p_list(int dim) {
  if (dim == 2) return {-0.5, 0.0, 0.5, 1.0, 2.0, 4.0};
  return {-0.5, 0.0, 0.5, 1.0, 2.0, 3.0, 6.0};
}

/// Interpolation exponents probed by the falsification sweep: the default
/// suite list without the p = 1 anchor, which is an identity and would
/// otherwise flag every body as a near-equality.
std::vector<double> falsify_p_list(int dim) {
  const double n = dim;
  return {-0.5, 0.0, 0.5, n, 2.0 * n};
}

/// Concrete bodies behind one run: a single realized body, or the seeded
/// batch when the family is one of the random ones.
std::vector<Body> batch_bodies(const RunConfig& config) {
  std::vector<Body> bodies;
  if (config.body.family == "random_fourier") {
    bodies.reserve(static_cast<std::size_t>(config.body.count));
    for (int i = 0; i < config.body.count; ++i) bodies.push_back(sample_fourier_body(config.seed, i));
  } else if (config.body.family == "random_sphharm") {
    bodies.reserve(static_cast<std::size_t>(config.body.count));
    for (int i = 0; i < config.body.count; ++i) bodies.push_back(sample_sphharm_body(config.seed, i));
  } else {
    bodies.push_back(realize_body(config.body));
  }
  return bodies;
}

SuiteConfig suite_config_from(const RunConfig& config, bool falsify_exponents, int dim) {
  SuiteConfig sc;
  sc.coarse = config.coarse;
  sc.fine = config.fine;
  sc.p_list = config.p_list;
  if (sc.p_list.empty() && falsify_exponents) sc.p_list = falsify_p_list(dim);
  sc.p_max = std::min(config.p_max, kSuiteChainCap);
  sc.tol_scale = config.tol_scale;
  return sc;
}

ordered_json check_result_json(const CheckResult& r) {
  ordered_json j;
  j["id"] = r.id;
  j["order"] = r.order == ChainOrder::ascending ? "ascending" : "descending";
  j["applicable"] = r.applicable;
  j["pass"] = r.pass;
  j["equality_expected"] = r.equality_expected;
  j["equality_observed"] = r.equality_observed;
  j["resolution_stable"] = r.resolution_stable;
  j["slack"] = r.slack;
  j["slack_coarse"] = r.slack_coarse;
  j["max_gap"] = r.max_gap;
  j["tol"] = r.tol;
  j["chain"] = r.chain;
  ordered_json starts = ordered_json::array();
  for (std::size_t s : r.segment_starts) starts.push_back(static_cast<std::uint64_t>(s));
  j["segment_starts"] = std::move(starts);
  ordered_json hyps = ordered_json::array();
  for (const auto& h : r.hypotheses) {
    ordered_json one;
    one["name"] = h.name;
    one["value"] = h.value;
    one["satisfied"] = h.satisfied;
    hyps.push_back(std::move(one));
  }
  j["hypotheses"] = std::move(hyps);
  ordered_json details;
  for (const auto& [name, value] : r.details) details[name] = value;
  j["details"] = std::move(details);
  j["note"] = r.note;
  return j;
}

std::string check_result_csv_row(std::uint64_t seed, const CheckResult& r) {
  std::string hyps;
  for (std::size_t i = 0; i < r.hypotheses.size(); ++i) {
    if (i) hyps.push_back('|');
    hyps += r.hypotheses[i].name + "=" + format_double(r.hypotheses[i].value) +
            (r.hypotheses[i].satisfied ? "(ok)" : "(fail)");
  }
  std::string row;
  row += std::to_string(seed);
  row += "," + csv_field(r.body_label);
  row += "," + r.id;
  row += "," + resolution_text(r.resolution);
  row += std::string(",") + (r.order == ChainOrder::ascending ? "ascending" : "descending");
  row += "," + format_double(r.chain.front());
  row += "," + format_double(r.chain.back());
  row += "," + format_double(r.slack);
  row += "," + format_double(r.slack_coarse);
  row += "," + format_double(r.max_gap);
  row += "," + format_double(r.tol);
  row += "," + bool_text(r.applicable);
  row += "," + bool_text(r.pass);
  row += "," + bool_text(r.equality_expected);
  row += "," + bool_text(r.equality_observed);
  row += "," + bool_text(r.resolution_stable);
  row += "," + csv_field(hyps);
  row += "," + csv_field(r.note);
  return row;
}

ordered_json invariant_report_json(const InvariantReport& r) {
  ordered_json j;
  j["resolution"] = r.resolution;
  j["vol"] = r.vol;
  j["vol_polar"] = r.vol_polar;
  j["surface"] = r.surface;
  j["omega_1"] = r.omega_1;
  j["omega_n"] = r.omega_n;
  j["omega_2n"] = r.omega_2n;
  j["isoperimetric_ratio"] = r.isoperimetric_ratio;
  j["k0_min"] = r.k0_min;
  j["k0_max"] = r.k0_max;
  j["omega_K_entropy"] = r.omega_K_entropy;
  j["omega_K_paouris"] = r.omega_K_paouris;
  j["omega_K_alt1"] = r.omega_K_alt1;
  j["omega_K_alt2"] = r.omega_K_alt2;
  j["lambda"] = r.lambda_entropy;
  j["lambda_limit"] = r.lambda_limit;
  j["kl"] = r.kl;
  ordered_json table = ordered_json::array();
  for (const auto& [p, value] : r.omega_table) {
    table.push_back(ordered_json::array({p, value}));
  }
  j["omega_table"] = std::move(table);
  return j;
}

const char* sequence_kind_name(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::paouris: return "paouris";
    case SequenceKind::alt1: return "alt1";
    case SequenceKind::alt2: return "alt2";
    case SequenceKind::lambda: return "lambda";
  }
  return "unknown";
}

double relative_delta(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(a));
}

}  // namespace

// -------------------------------------------------------------------------
// configuration entry points

RunConfig parse_config_text(const std::string& json_text) {
  ordered_json root;
  try {
    root = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("configuration root must be an object");
  require_known_keys(root, "configuration",
                     {"schema_version", "body", "coarse", "fine", "p_list", "p_max", "tol_scale",
                      "seed", "out_dir", "prefix", "flow"});

  if (!root.contains("schema_version")) throw ConfigError("schema_version is required");
  RunConfig config;
  config.schema_version = as_integer(root.at("schema_version"), "schema_version");
  if (config.schema_version != 1) {
    throw ConfigError("unsupported schema_version " + std::to_string(config.schema_version));
  }

  if (!root.contains("body")) throw ConfigError("body is required");
  config.body = parse_body_spec(root.at("body"));
  const int dim = body_dimension(config.body);

  if (root.contains("coarse")) config.coarse = as_integer_list(root.at("coarse"), "coarse");
  if (root.contains("fine")) config.fine = as_integer_list(root.at("fine"), "fine");
  const SuiteConfig defaults = default_suite_config(dim);
  if (config.coarse.empty()) config.coarse = defaults.coarse;
  if (config.fine.empty()) config.fine = defaults.fine;
  validate_grids(config, dim);

  if (root.contains("p_list")) {
    config.p_list = as_number_list(root.at("p_list"), "p_list");
    for (double p : config.p_list) {
      if (p == -static_cast<double>(dim)) {
        throw ConfigError("p_list must not contain -dim (the exponent is inadmissible)");
      }
    }
  }

  if (root.contains("p_max")) {
    config.p_max = as_integer(root.at("p_max"), "p_max");
    if (config.p_max < 1 || config.p_max > 48) throw ConfigError("p_max must lie in [1, 48]");
  }

  if (root.contains("tol_scale")) {
    config.tol_scale = as_finite_number(root.at("tol_scale"), "tol_scale");
    if (!(config.tol_scale > 0.0)) throw ConfigError("tol_scale must be positive");
  }

  if (root.contains("seed")) {
    const auto& s = root.at("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      throw ConfigError("seed must be a nonnegative integer");
    }
    config.seed = s.get<std::uint64_t>();
  }

  if (root.contains("out_dir")) {
    config.out_dir = as_text(root.at("out_dir"), "out_dir");
    if (config.out_dir.empty()) throw ConfigError("out_dir must be non-empty");
  }
  if (root.contains("prefix")) {
    config.prefix = as_text(root.at("prefix"), "prefix");
    if (config.prefix.empty()) throw ConfigError("prefix must be non-empty");
  }
  if (root.contains("flow")) config.flow = parse_flow_config(root.at("flow"));
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

int body_dimension(const BodySpec& spec) {
  if (spec.family == "ellipsoid") {
    if (spec.semi_axes.size() != 2 && spec.semi_axes.size() != 3) {
      throw ConfigError("body.semi_axes must list 2 or 3 positive values");
    }
    return static_cast<int>(spec.semi_axes.size());
  }
  if (spec.family == "fourier" || spec.family == "random_fourier") return 2;
  if (spec.family == "sphharm" || spec.family == "random_sphharm") return 3;
  throw ConfigError("unknown body family \"" + spec.family + "\"");
}

Body realize_body(const BodySpec& spec) {
  if (spec.family == "ellipsoid") return Body::ellipsoid(spec.semi_axes);
  if (spec.family == "fourier") return Body::fourier(spec.radius, spec.fourier_terms);
  if (spec.family == "sphharm") return Body::sphharm(spec.radius, spec.sphharm_terms);
  if (spec.family == "random_fourier" || spec.family == "random_sphharm") {
    throw ConfigError("family " + spec.family +
                      " describes a seeded batch; only the suite and falsify commands accept it");
  }
  throw ConfigError("unknown body family \"" + spec.family + "\"");
}

// -------------------------------------------------------------------------
// seeded wobble-body generators

Body sample_fourier_body(std::uint64_t seed, int index) {
  if (index < 0) throw std::invalid_argument("sample index must be nonnegative");
  Rng rng = Rng(seed).fork(static_cast<std::uint64_t>(index) * 2u);

  const int n_terms = 2 + static_cast<int>(rng.next_u64() % 3);
  int pool[5] = {2, 3, 4, 5, 6};
  for (int i = 0; i < n_terms; ++i) {
    const int j = i + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(5 - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<int> degrees(pool, pool + n_terms);
  std::sort(degrees.begin(), degrees.end());

  // The curvature factor of 1 + sum a_k cos(k t - psi_k) is, at first order,
  // 1 - sum (k^2 - 1) a_k cos(...); capping sum (k^2 - 1) a_k at 0.6 keeps
  // it bounded away from zero, while the 0.4 cap floor keeps every sample
  // far from the ellipsoid equality cases.
  std::vector<FourierTerm> terms;
  for (int k : degrees) {
    const double cap = std::min(0.05, 0.6 / (n_terms * static_cast<double>(k * k - 1)));
    const double amplitude = rng.uniform(0.4 * cap, cap);
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    terms.push_back({k, amplitude * std::cos(phase), amplitude * std::sin(phase)});
  }
  return Body::fourier(1.0, terms);
}

Body sample_sphharm_body(std::uint64_t seed, int index) {
  if (index < 0) throw std::invalid_argument("sample index must be nonnegative");
  Rng rng = Rng(seed).fork(static_cast<std::uint64_t>(index) * 2u + 1u);

  const int n_terms = 1 + static_cast<int>(rng.next_u64() % 3);
  std::vector<SphHarmTerm> terms;
  for (int t = 0; t < n_terms; ++t) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      // The first term always has degree >= 3 so that no sample is an
      // ellipsoid perturbation at first order.
      const int l = t == 0 ? 3 + static_cast<int>(rng.next_u64() % 2)
                           : 2 + static_cast<int>(rng.next_u64() % 3);
      const int m = -l + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(2 * l + 1));
      bool duplicate = false;
      for (const auto& existing : terms) {
        if (existing.l == l && existing.m == m) duplicate = true;
      }
      if (duplicate) continue;
      terms.push_back({l, m, 0.0});
      break;
    }
  }

  // Eigenvalue of the spherical Hessian + identity on degree l is l(l+1) - 2;
  // the cap keeps the summed perturbation of the curvature factor below 0.5.
  const double share = static_cast<double>(terms.size());
  for (auto& term : terms) {
    const double cap =
        std::min(0.05, 0.5 / (share * static_cast<double>(term.l * (term.l + 1) - 2)));
    const double magnitude = rng.uniform(0.5 * cap, cap);
    term.coef = (rng.next_u64() & 1u) ? magnitude : -magnitude;
  }
  std::sort(terms.begin(), terms.end(), [](const SphHarmTerm& a, const SphHarmTerm& b) {
    return a.l != b.l ? a.l < b.l : a.m < b.m;
  });
  return Body::sphharm(1.0, terms);
}

// -------------------------------------------------------------------------
// commands

int cmd_report(const RunConfig& config) {
  const Body body = realize_body(config.body);
  const int dim = body.dim();
  const Grid coarse = Grid::build(dim, config.coarse);
  const Grid fine = Grid::build(dim, config.fine);
  const std::vector<double> p_list =
      config.p_list.empty() ? default_report_p_list(dim) : config.p_list;

  const InvariantReport fine_report = compute_report(body, fine, p_list, config.p_max);
  const InvariantReport coarse_report = compute_report(body, coarse, p_list, config.p_max);
  const FieldTable fields = evaluate_fields(body, fine);

  ordered_json j = run_header_json(config, "report", dim);
  j["body_label"] = body.label();
  j["p_max"] = config.p_max;
  j["invariants"] = invariant_report_json(fine_report);
  j["coarse_invariants"] = invariant_report_json(coarse_report);

  ordered_json sequences;
  for (SequenceKind kind :
       {SequenceKind::paouris, SequenceKind::alt1, SequenceKind::alt2, SequenceKind::lambda}) {
    const LimitSequence seq = limit_sequence(fields, kind, config.p_max);
    ordered_json one;
    one["paper_tail"] = seq.paper_tail;
    one["corrected_tail"] = seq.corrected_tail;
    ordered_json table = ordered_json::array();
    for (const auto& term : seq.terms) {
      table.push_back(ordered_json::array({term.p, term.paper, term.corrected}));
    }
    one["terms"] = std::move(table);
    sequences[sequence_kind_name(kind)] = std::move(one);
  }
  j["sequences"] = std::move(sequences);

  ordered_json drift;
  drift["vol"] = relative_delta(fine_report.vol, coarse_report.vol);
  drift["vol_polar"] = relative_delta(fine_report.vol_polar, coarse_report.vol_polar);
  drift["surface"] = relative_delta(fine_report.surface, coarse_report.surface);
  drift["omega_1"] = relative_delta(fine_report.omega_1, coarse_report.omega_1);
  drift["omega_n"] = relative_delta(fine_report.omega_n, coarse_report.omega_n);
  drift["omega_2n"] = std::abs(fine_report.omega_2n - coarse_report.omega_2n);
  drift["isoperimetric_ratio"] =
      relative_delta(fine_report.isoperimetric_ratio, coarse_report.isoperimetric_ratio);
  drift["omega_K_entropy"] =
      relative_delta(fine_report.omega_K_entropy, coarse_report.omega_K_entropy);
  drift["lambda"] = relative_delta(fine_report.lambda_entropy, coarse_report.lambda_entropy);
  drift["kl"] = std::abs(fine_report.kl - coarse_report.kl);
  j["drift"] = std::move(drift);

  const std::string path = output_path(config, "report.json");
  write_text_atomic(path, dump_ordered(j));
  std::printf("report: %s at %s -> %s\n", body.label().c_str(),
              fine.resolution_label().c_str(), path.c_str());
  return kExitOk;
}

int cmd_suite(const RunConfig& config) {
  const int dim = body_dimension(config.body);
  const std::vector<Body> bodies = batch_bodies(config);
  const SuiteConfig sc = suite_config_from(config, false, dim);

  std::string csv =
      "seed,body,check,resolution,order,lhs,rhs,slack,slack_coarse,max_gap,tol,"
      "applicable,pass,equality_expected,equality_observed,resolution_stable,hypotheses,note\n";
  ordered_json body_array = ordered_json::array();
  int applicable_total = 0;
  int passed_total = 0;
  int checks_total = 0;
  bool all_pass = true;

  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const std::vector<CheckResult> results = run_suite(bodies[i], sc);
    ordered_json checks = ordered_json::array();
    for (const CheckResult& r : results) {
      ++checks_total;
      if (r.applicable) {
        ++applicable_total;
        if (r.pass) ++passed_total;
        else all_pass = false;
      }
      csv += check_result_csv_row(config.seed, r) + "\n";
      checks.push_back(check_result_json(r));
    }
    ordered_json entry;
    entry["index"] = static_cast<std::uint64_t>(i);
    entry["label"] = bodies[i].label();
    entry["checks"] = std::move(checks);
    body_array.push_back(std::move(entry));
  }

  ordered_json j = run_header_json(config, "suite", dim);
  j["p_max"] = sc.p_max;
  ordered_json tolerance;
  tolerance["base"] = suite_base_tolerance(dim);
  tolerance["scale"] = config.tol_scale;
  j["tolerance"] = std::move(tolerance);
  j["bodies"] = std::move(body_array);
  j["checks_total"] = checks_total;
  j["checks_applicable"] = applicable_total;
  j["checks_passed"] = passed_total;
  j["all_pass"] = all_pass;

  const std::string csv_path = output_path(config, "suite.csv");
  const std::string json_path = output_path(config, "suite.json");
  write_text_atomic(csv_path, csv);
  write_text_atomic(json_path, dump_ordered(j));
  std::printf("suite: %zu bodies, %d/%d applicable checks passed -> %s\n", bodies.size(),
              passed_total, applicable_total, csv_path.c_str());
  return all_pass ? kExitOk : kExitCheckFailed;
}

int cmd_converge(const RunConfig& config) {
  const Body body = realize_body(config.body);
  const int dim = body.dim();
  const Grid fine = Grid::build(dim, config.fine);
  const FieldTable fields = evaluate_fields(body, fine);
  const double target_omega = entropy_omega_K(fields);
  const double target_lambda = lambda_K(fields);

  std::string csv =
      "seed,kind,p,paper_term,corrected_term,paper_tail,corrected_tail,target,relative_gap\n";
  for (SequenceKind kind :
       {SequenceKind::paouris, SequenceKind::alt1, SequenceKind::alt2, SequenceKind::lambda}) {
    const LimitSequence seq = limit_sequence(fields, kind, config.p_max);
    const double target = kind == SequenceKind::lambda ? target_lambda : target_omega;
    const double gap =
        std::abs(seq.corrected_tail - target) / std::max(1.0, std::abs(target));
    for (const auto& term : seq.terms) {
      csv += std::to_string(config.seed);
      csv += std::string(",") + sequence_kind_name(kind);
      csv += "," + std::to_string(term.p);
      csv += "," + format_double(term.paper);
      csv += "," + format_double(term.corrected);
      csv += "," + format_double(seq.paper_tail);
      csv += "," + format_double(seq.corrected_tail);
      csv += "," + format_double(target);
      csv += "," + format_double(gap);
      csv += "\n";
    }
    std::printf("converge %s: corrected tail %s, target %s, relative gap %s\n",
                sequence_kind_name(kind), format_double(seq.corrected_tail).c_str(),
                format_double(target).c_str(), format_double(gap).c_str());
  }

  const std::string path = output_path(config, "converge.csv");
  write_text_atomic(path, csv);
  std::printf("converge: %s -> %s\n", body.label().c_str(), path.c_str());
  return kExitOk;
}

int cmd_flow(const RunConfig& config) {
  const Body body = realize_body(config.body);
  if (body.dim() != 2) {
    throw ConfigError("the support flow integration is planar; configure a dim-2 body");
  }
  const Grid grid = Grid::build(2, config.fine);
  const double bound = stable_dt(body, grid);
  const double dt = config.flow.dt == 0.0 ? bound : config.flow.dt;
  if (dt > bound) {
    throw ConfigError("flow.dt " + format_double(config.flow.dt) +
                      " exceeds the stability bound " + format_double(bound));
  }

  const FlowTrace trace = integrate_flow(body, grid, dt, config.flow.steps);
  const VariationCheck var = variation_check(body, grid);

  std::string csv = "seed,t,volume,valid\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    csv += std::to_string(config.seed);
    csv += "," + format_double(trace.times[i]);
    csv += "," + format_double(trace.volumes[i]);
    csv += "," + bool_text(trace.valid[i]);
    csv += "\n";
  }

  ordered_json j = run_header_json(config, "flow", 2);
  j["body_label"] = body.label();
  j["dt"] = dt;
  j["stable_dt"] = bound;
  j["steps_requested"] = trace.steps_requested;
  j["steps_completed"] = trace.steps_completed;
  j["truncated"] = trace.truncated;
  j["diagnostic"] = trace.diagnostic;
  j["volume_initial"] = trace.volumes.empty() ? 0.0 : trace.volumes.front();
  j["volume_final"] = trace.volumes.empty() ? 0.0 : trace.volumes.back();

  ordered_json variation;
  variation["dv_measured"] = var.dv_measured;
  variation["dv_predicted"] = var.dv_predicted;
  variation["dv_error_rel"] =
      std::abs(var.dv_measured - var.dv_predicted) / std::max(1.0, std::abs(var.dv_predicted));
  variation["d2v_measured"] = var.d2v_measured;
  variation["d2v_predicted"] = var.d2v_predicted;
  variation["d2v_error_abs"] = std::abs(var.d2v_measured - var.d2v_predicted);
  variation["dv_coarse"] = var.dv_coarse;
  variation["dv_fine"] = var.dv_fine;
  variation["d2v_coarse"] = var.d2v_coarse;
  variation["d2v_fine"] = var.d2v_fine;
  variation["dv_halving_ratio"] = std::abs(var.dv_coarse - var.dv_predicted) /
                                  std::abs(var.dv_fine - var.dv_predicted);
  variation["d2v_halving_ratio"] = std::abs(var.d2v_coarse - var.d2v_predicted) /
                                   std::abs(var.d2v_fine - var.d2v_predicted);
  j["variation"] = std::move(variation);

  const std::string csv_path = output_path(config, "flow.csv");
  const std::string json_path = output_path(config, "flow.json");
  write_text_atomic(csv_path, csv);
  write_text_atomic(json_path, dump_ordered(j));
  const double v0 = trace.volumes.empty() ? 0.0 : trace.volumes.front();
  const double v1 = trace.volumes.empty() ? 0.0 : trace.volumes.back();
  std::printf("flow: %d step(s) at dt %s, volume %s -> %s, written to %s\n",
              trace.steps_completed, format_double(dt).c_str(), format_double(v0).c_str(),
              format_double(v1).c_str(), csv_path.c_str());
  if (trace.truncated) {
    std::fprintf(stderr, "flow truncated: %s\n", trace.diagnostic.c_str());
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_falsify(const RunConfig& config) {
  const int dim = body_dimension(config.body);
  const std::vector<Body> bodies = batch_bodies(config);
  const SuiteConfig sc = suite_config_from(config, true, dim);

  std::string log;
  int applicable_total = 0;
  int violations = 0;
  int equality_cases = 0;
  int near_equalities = 0;

  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const std::vector<CheckResult> results = run_suite(bodies[i], sc);
    for (const CheckResult& r : results) {
      if (!r.applicable) continue;
      ++applicable_total;
      if (!(r.slack < kFalsifyMargin * r.tol)) continue;
      std::string kind;
      if (!r.pass) {
        kind = "violation";
        ++violations;
      } else if (r.equality_expected && r.equality_observed) {
        kind = "equality_case";
        ++equality_cases;
      } else {
        kind = "near_equality";
        ++near_equalities;
      }
      ordered_json entry;
      entry["kind"] = kind;
      entry["seed"] = config.seed;
      entry["body_index"] = static_cast<std::uint64_t>(i);
      entry["body"] = r.body_label;
      entry["check"] = r.id;
      entry["slack"] = r.slack;
      entry["slack_coarse"] = r.slack_coarse;
      entry["max_gap"] = r.max_gap;
      entry["tol"] = r.tol;
      entry["resolution"] = resolution_text(r.resolution);
      log += dump_compact(entry) + "\n";
    }
  }

  ordered_json j = run_header_json(config, "falsify", dim);
  j["bodies"] = static_cast<std::uint64_t>(bodies.size());
  j["checks_applicable"] = applicable_total;
  j["violations"] = violations;
  j["equality_cases"] = equality_cases;
  j["near_equalities"] = near_equalities;
  j["margin"] = kFalsifyMargin;

  const std::string log_path = output_path(config, "candidates.jsonl");
  const std::string json_path = output_path(config, "falsify.json");
  write_text_atomic(log_path, log);
  write_text_atomic(json_path, dump_ordered(j));
  std::printf(
      "falsify: %zu bodies, %d applicable checks, %d violation(s), %d equality case(s), "
      "%d near equalities -> %s\n",
      bodies.size(), applicable_total, violations, equality_cases, near_equalities,
      log_path.c_str());
  return kExitOk;
}

int dispatch(const std::string& command, const RunConfig& config) {
  try {
    if (command == "report") return cmd_report(config);
    if (command == "suite") return cmd_suite(config);
    if (command == "converge") return cmd_converge(config);
    if (command == "flow") return cmd_flow(config);
    if (command == "falsify") return cmd_falsify(config);
    std::fprintf(stderr, "unknown command \"%s\"\n", command.c_str());
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitNumeric;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "convergence error: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
}

}  // namespace centroaffine
