#pragma once

#include <chrono>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "d2d/errors.hpp"
#include "d2d/planner.hpp"
#include "d2d/simkit.hpp"

namespace d2d {

/// Invalid configuration; `field()` names the offending key.
class ConfigError : public ParameterError {
public:
  ConfigError(std::string field, const std::string& what)
      : ParameterError(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Everything a run needs. Thresholds are kept in dB as written so that
/// parse -> serialize -> parse is exact; `experiment.system` holds the
/// linear values derived from them.
struct RunConfig {
  ExperimentConfig experiment;
  ConstraintSpec constraint;
  double beta_db = 5.0;
  double gamma_db = 0.0;
  std::optional<double> g_db;
  /// Take scheme parameters from the planner instead of the file.
  bool tune_scheme = true;
  /// Realizations per candidate when tuning the channel-aware baseline.
  Index tune_realizations = 500;

  void validate() const;

  friend bool operator==(const RunConfig& a, const RunConfig& b);
};

/// Flat `key = value` text; `#` starts a comment. Unknown or repeated keys,
/// and values that do not parse, raise ConfigError.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Canonical text form, every key present, doubles at full precision.
std::string serialize_config(const RunConfig& config);

/// SHA-1 of `text` as a git blob object, hex encoded.
std::string git_blob_hash(const std::string& text);

struct RunManifest {
  std::string config_path;
  std::string subcommand;
  std::string output_dir;
  std::vector<std::string> files;
  std::string config_hash;
  double duration_s = 0.0;
};

void write_manifest_json(std::ostream& out, const RunManifest& manifest, const RunConfig& config);

}  // namespace d2d
