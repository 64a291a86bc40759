// SPDX-License-Identifier: Apache-2.0
#pragma once

// Electrode-skin impedance estimation from acquired frames: the injected
// lead-off current I is known, so Z = V / I with V recovered either as the
// mean decoded offset (DC excitation) or by square-wave synchronous
// demodulation at rate/4 (AC excitation).

#include <span>
#include <string>
#include <vector>

#include "ironstream/ads1299.hpp"

namespace ironstream {

enum class ImpedanceMethod { dc, synchronous };
enum class ContactQuality { good, acceptable, poor, open };

const char* to_string(ImpedanceMethod m);
const char* to_string(ContactQuality q);

struct QualityThresholds {
  double good_below_ohms = 10e3;
  double acceptable_below_ohms = 50e3;
  double poor_below_ohms = 1e6;  // >= this is open
};

ContactQuality classify(double ohms, const QualityThresholds& thresholds = {});

struct ImpedanceReport {
  std::string channel;
  double ohms = 0.0;
  ImpedanceMethod method = ImpedanceMethod::dc;
  ContactQuality quality = ContactQuality::open;
  double excitation_current_a = 0.0;
};

/// Estimates one channel's contact impedance over >= 1 s of frames acquired
/// with lead-off excitation enabled on that channel.
///
/// DC mode: Z = mean(decoded) / I. Synchronous mode: in-phase square-wave
/// correlation over the largest whole number of excitation cycles,
/// Z = amplitude / I. Configured series resistance is subtracted from both.
ImpedanceReport estimate_impedance(std::span<const SampleFrame> frames,
                                   const AcquisitionConfig& cfg, std::size_t channel_index,
                                   const std::string& channel_label, bool excitation_enabled,
                                   double series_resistance_ohms = 0.0,
                                   const QualityThresholds& thresholds = {});

}  // namespace ironstream
