#pragma once

#include "centroaffine/body.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace centroaffine {

/// Malformed or inconsistent run configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

/// Body description from the configuration file.  Families: "ellipsoid",
/// "fourier", "sphharm" describe one concrete body; "random_fourier" and
/// "random_sphharm" describe a seeded batch of `count` wobble bodies.
struct BodySpec {
  std::string family;
  std::vector<double> semi_axes;
  double radius = 1.0;
  std::vector<FourierTerm> fourier_terms;
  std::vector<SphHarmTerm> sphharm_terms;
  int count = 1;
};

struct FlowConfig {
  double dt = 0.0;  ///< 0 requests the stability bound
  int steps = 100;
};

/// One run: body, grids, ladder depth, tolerances, seed, and output slots.
struct RunConfig {
  int schema_version = 1;
  BodySpec body;
  std::vector<int> coarse;
  std::vector<int> fine;
  std::vector<double> p_list;
  int p_max = 6;
  double tol_scale = 1.0;
  std::uint64_t seed = 20260814;
  std::string out_dir = ".";
  std::string prefix = "cabody";
  FlowConfig flow;
};

/// Parse and validate a configuration document; throws ConfigError on any
/// structural problem (unknown keys, wrong types, inconsistent grids).
RunConfig parse_config_text(const std::string& json_text);
RunConfig load_config(const std::string& path);

int body_dimension(const BodySpec& spec);

/// Construct the configured body; random families are rejected here (they
/// are only meaningful to the sampling commands).
Body realize_body(const BodySpec& spec);

/// Deterministic wobble-body generators behind the random families.  The
/// stream depends only on (seed, index), so batches are reproducible and
/// insensitive to evaluation order.  Amplitudes are degree-capped to keep
/// the curvature bounded away from zero, with floors that keep every sample
/// visibly non-ellipsoidal.
Body sample_fourier_body(std::uint64_t seed, int index);
Body sample_sphharm_body(std::uint64_t seed, int index);

int cmd_report(const RunConfig& config);
int cmd_suite(const RunConfig& config);
int cmd_converge(const RunConfig& config);
int cmd_flow(const RunConfig& config);
int cmd_falsify(const RunConfig& config);

/// Run one subcommand by name with exceptions folded into exit codes:
/// ConfigError / invalid_argument give 2, validation or convergence
/// failures give 3.
int dispatch(const std::string& command, const RunConfig& config);

}  // namespace centroaffine
