// SPDX-License-Identifier: Apache-2.0
#pragma once

// Deterministic multichannel scalp-potential synthesizer. Output is the
// referential electrode-side potential per montage channel, in volts:
//
//   channel = alpha (occipital, during eyes_closed)
//           + chew burst (all channels, per-channel random phases)
//           + blink pulses (full amplitude on frontal sites)
//           + background white noise (per-channel independent streams)
//           + mains and probe tones (common-mode: identical on all channels)
//
// Everything is a pure function of (scenario, montage, rate, seed); the
// incremental state exists so an acquisition can pull arbitrary chunk sizes
// and still produce bit-identical samples.

#include <cstdint>
#include <memory>

#include "ironstream/scenario.hpp"

namespace ironstream {

class SynthState {
 public:
  SynthState(const SignalScenario& scenario, const Montage& montage, double rate);
  ~SynthState();
  SynthState(SynthState&&) noexcept;
  SynthState& operator=(SynthState&&) noexcept;

  /// Renders the next n samples for every channel and advances the cursor.
  MultiSeries render(std::size_t n_samples);

  std::uint64_t cursor() const;
  std::uint64_t total_samples() const;
  double rate() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot synthesis of the full scenario duration.
MultiSeries synthesize(const SignalScenario& scenario, const Montage& montage, double rate);

/// Source attenuation through the electrode contact into the amplifier
/// input: source * Rin / (Rin + Z) + half-cell offset.
double electrode_divider(double source_v, const ElectrodeModel& electrode,
                         double input_impedance_ohms);

}  // namespace ironstream
