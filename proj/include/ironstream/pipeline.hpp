// SPDX-License-Identifier: Apache-2.0
#pragma once

// Acquisition engine: drives the fixed pipeline
//
//   subject_synth -> electrode_divider -> inject_lead_off
//                 -> RC low-pass -> bias loop -> PGA/convert -> frames
//
// The engine is single-owner mutable state; frames it emits are immutable
// values. Chunked acquisition is bit-identical to one monolithic call.

#include <cstdint>
#include <memory>
#include <vector>

#include "ironstream/ads1299.hpp"
#include "ironstream/afe.hpp"
#include "ironstream/scenario.hpp"
#include "ironstream/synth.hpp"

namespace ironstream {

struct ChainSpec {
  RcFilterSpec rc;
  BiasLoopSpec bias;                          // sensed_channels empty = sense all
  double input_impedance_ohms = 1000e6;       // amplifier input impedance
  double lead_off_threshold_v = kDefaultLeadOffThresholdV;
  double series_resistance_ohms = 0.0;        // R2-style input series resistance, near 0
};

class AcquisitionEngine {
 public:
  AcquisitionEngine(SignalScenario scenario, Montage montage, AcquisitionConfig cfg,
                    ChainSpec chain = {});
  ~AcquisitionEngine();
  AcquisitionEngine(AcquisitionEngine&&) noexcept;
  AcquisitionEngine& operator=(AcquisitionEngine&&) noexcept;

  /// Produces the next n frames (empty for n = 0). The synthesized subject
  /// loops when the scenario runs out, so servers can stream indefinitely.
  std::vector<SampleFrame> acquire(std::size_t n_frames);

  const AcquisitionConfig& config() const;
  const Montage& montage() const;
  const SignalScenario& scenario() const;
  const ChainSpec& chain() const;

  /// Device register files (devices() entries, broadcast-configured).
  RegisterFile& registers(int device = 0);
  const RegisterFile& registers(int device = 0) const;

  /// Broadcast register access across the daisy chain.
  void write_register(std::uint8_t addr, std::uint8_t value);
  std::uint8_t read_register(std::uint8_t addr, int device = 0) const;

  // Runtime control; each restarts the frame run (index back to 0) with
  // fresh deterministic state.
  void set_rate(int rate);
  void set_gain(int gain);
  void set_lead_off_enabled(bool all_channels_on);
  void set_bias_enabled(bool on);
  void restart();

  bool lead_off_all_enabled() const;

  std::uint64_t frames_produced() const;   // within the current run
  std::uint64_t saturated_samples() const;
  const std::vector<std::string>& warnings() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ironstream
