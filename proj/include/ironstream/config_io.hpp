// SPDX-License-Identifier: Apache-2.0
#pragma once

// Text-based key/value documents (scenario, montage, sensor profile, run
// config; schema in docs/formats.md) plus the built-in presets reachable as
// "builtin:<name>".

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ironstream/ads1299.hpp"
#include "ironstream/pipeline.hpp"
#include "ironstream/scenario.hpp"
#include "ironstream/sensors.hpp"
#include "ironstream/server.hpp"
#include "ironstream/wire.hpp"

namespace ironstream {

/// Ordered `key = value` document. '#' starts a comment; repeated keys are
/// allowed (events, ramps, channels).
class KeyValueDoc {
 public:
  static KeyValueDoc parse_file(const std::string& path);
  static KeyValueDoc parse_text(const std::string& text, const std::string& origin = "<text>");

  std::optional<std::string> get(const std::string& key) const;  // last wins
  std::vector<std::string> get_all(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

  double number(const std::string& key, double fallback) const;
  std::uint64_t unsigned_number(const std::string& key, std::uint64_t fallback) const;
  bool boolean(const std::string& key, bool fallback) const;

 private:
  std::vector<std::pair<std::string, std::string>> items_;
  std::string origin_;
};

// loaders accept a filesystem path or "builtin:<preset>"
SignalScenario load_scenario(const std::string& path_or_builtin);
Montage load_montage(const std::string& path_or_builtin);
SensorProfile load_profile(const std::string& path_or_builtin);

std::vector<std::string> builtin_scenarios();
std::vector<std::string> builtin_montages();
std::vector<std::string> builtin_profiles();

/// Everything a subcommand needs to run the full chain.
struct RunConfig {
  SignalScenario scenario;
  Montage montage = Montage::standard(8, ElectrodeKind::gel);
  AcquisitionConfig acq;
  ChainSpec chain;
  SensorProfile profile;
  ServeOptions serve;
  std::string out_dir = "out";

  /// Cross-field validation; collects every failure before throwing one
  /// ConfigError listing them all.
  void validate() const;
};

/// Applies `key = value` settings from a run-config document (see
/// docs/formats.md) on top of existing values.
void apply_run_config(RunConfig& rc, const KeyValueDoc& doc);

/// Stream metadata describing a run; recorded as the session meta packet.
wire::MetaPayload build_meta(const RunConfig& rc);

}  // namespace ironstream
