// SPDX-License-Identifier: Apache-2.0
#pragma once

// Offline faster-than-real-time run of the full chain into a session file:
// data packets chunked at frames_per_packet, sensor packets interleaved at
// their poll times, everything timestamped from the sample clock so equal
// configs and seeds give byte-identical files.

#include <cstdint>
#include <string>
#include <vector>

#include "ironstream/config_io.hpp"

namespace ironstream {

struct SimulateResult {
  std::uint64_t frames = 0;
  std::uint64_t data_packets = 0;
  std::uint64_t sensor_packets = 0;
  std::uint64_t saturated_samples = 0;
  std::vector<std::string> warnings;
};

SimulateResult simulate_to_session(const RunConfig& config, double duration_s,
                                   const std::string& session_path);

}  // namespace ironstream
