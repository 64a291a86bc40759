// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ironstream/errors.hpp"

namespace ironstream {

using Series = std::vector<double>;
using MultiSeries = std::vector<Series>;

enum class ElectrodeKind { dry, gel, shorted };

const char* to_string(ElectrodeKind k);
ElectrodeKind electrode_kind_from_string(const std::string& s);

struct ElectrodeModel {
  std::string label;
  ElectrodeKind kind = ElectrodeKind::gel;
  double contact_impedance_ohms = 5000.0;
  double half_cell_offset_v = 0.0;

  static ElectrodeModel dry(std::string label, double ohms = 200000.0);
  static ElectrodeModel gel(std::string label, double ohms = 5000.0);
  static ElectrodeModel shorted(std::string label);

  /// Throws ConfigError when impedance is inconsistent with the kind
  /// (shorted must be exactly 0, everything else strictly positive).
  void validate() const;
};

enum class SubjectEvent { eyes_closed, chewing, blinking };

const char* to_string(SubjectEvent e);
SubjectEvent subject_event_from_string(const std::string& s);

struct ScenarioEvent {
  SubjectEvent kind;
  double start_s;
  double end_s;
};

/// Timeline of subject events plus the electrode-side signal parameters.
/// Amplitudes are volts at the electrode; the defaults are the documented
/// conventions for artifact morphology (the scenario file can override all
/// of them).
struct SignalScenario {
  double duration_s = 10.0;
  std::vector<ScenarioEvent> events;
  int mains_hz = 50;                     // menu {50, 60}
  double mains_amplitude_v = 0.0;        // injected common-mode
  double noise_density_v_rthz = 9.2e-8;  // calibrated so the 1-40 Hz chain reads ~0.5 uV RMS
  double alpha_amplitude_v = 20e-6;
  double alpha_hz = 10.0;  // [8, 14]
  std::uint64_t seed = 1;

  // Artifact conventions.
  double chew_rms_v = 200e-6;        // >= 10x alpha amplitude
  double blink_amplitude_v = 100e-6; // peak, frontal channels
  double blink_period_s = 1.0;       // pulse repetition inside a blinking event
  double blink_offsite_fraction = 0.1;
  double event_ramp_s = 0.25;        // raised-cosine on/off ramp for alpha and chew

  // Diagnostic common-mode probe (0 = off). Injected exactly like mains,
  // at an arbitrary frequency; used for rejection-ratio measurements.
  double cm_probe_hz = 0.0;
  double cm_probe_amplitude_v = 0.0;

  void validate() const;
};

struct MontageChannel {
  std::string label;  // scalp site, e.g. "O1"
  ElectrodeModel electrode;
};

struct Montage {
  std::vector<MontageChannel> channels;
  ElectrodeModel reference;  // single dedicated electrode, not an average
  ElectrodeModel bias;
  std::vector<std::string> occipital;
  std::vector<std::string> frontal;

  std::size_t index_of(const std::string& label) const;  // throws ConfigError
  std::vector<std::size_t> indices_of(const std::vector<std::string>& labels) const;
  std::vector<std::string> labels() const;

  void validate() const;

  /// Standard 10-20 style montage of 8, 16 or 24 channels with uniform
  /// electrodes; occipital = {O1, O2}, frontal = {Fp1, Fp2}.
  static Montage standard(int n_channels, ElectrodeKind kind);
  static Montage standard(int n_channels, ElectrodeKind kind, double contact_ohms);
};

}  // namespace ironstream
