// SPDX-License-Identifier: Apache-2.0

#include "ironstream/scenario.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace ironstream {

const char* to_string(ElectrodeKind k) {
  switch (k) {
    case ElectrodeKind::dry: return "dry";
    case ElectrodeKind::gel: return "gel";
    case ElectrodeKind::shorted: return "shorted";
  }
  return "?";
}

ElectrodeKind electrode_kind_from_string(const std::string& s) {
  if (s == "dry") return ElectrodeKind::dry;
  if (s == "gel") return ElectrodeKind::gel;
  if (s == "shorted") return ElectrodeKind::shorted;
  throw ConfigError("unknown electrode kind '" + s + "' (expected dry|gel|shorted)");
}

ElectrodeModel ElectrodeModel::dry(std::string label, double ohms) {
  return {std::move(label), ElectrodeKind::dry, ohms, 0.0};
}

ElectrodeModel ElectrodeModel::gel(std::string label, double ohms) {
  return {std::move(label), ElectrodeKind::gel, ohms, 0.0};
}

ElectrodeModel ElectrodeModel::shorted(std::string label) {
  return {std::move(label), ElectrodeKind::shorted, 0.0, 0.0};
}

void ElectrodeModel::validate() const {
  if (kind == ElectrodeKind::shorted) {
    if (contact_impedance_ohms != 0.0)
      throw ConfigError("electrode '" + label + "': shorted kind requires 0 ohm contact");
  } else if (!(contact_impedance_ohms > 0.0)) {
    throw ConfigError("electrode '" + label + "': contact impedance must be > 0");
  }
}

const char* to_string(SubjectEvent e) {
  switch (e) {
    case SubjectEvent::eyes_closed: return "eyes_closed";
    case SubjectEvent::chewing: return "chewing";
    case SubjectEvent::blinking: return "blinking";
  }
  return "?";
}

SubjectEvent subject_event_from_string(const std::string& s) {
  if (s == "eyes_closed") return SubjectEvent::eyes_closed;
  if (s == "chewing") return SubjectEvent::chewing;
  if (s == "blinking") return SubjectEvent::blinking;
  throw ConfigError("unknown event kind '" + s + "' (expected eyes_closed|chewing|blinking)");
}

void SignalScenario::validate() const {
  if (duration_s < 0.0) throw ConfigError("scenario: duration must be >= 0");
  if (mains_hz != 50 && mains_hz != 60) throw ConfigError("scenario: mains_hz must be 50 or 60");
  if (alpha_hz < 8.0 || alpha_hz > 14.0)
    throw ConfigError("scenario: alpha_hz must lie in [8, 14]");
  if (noise_density_v_rthz < 0.0) throw ConfigError("scenario: noise density must be >= 0");
  if (mains_amplitude_v < 0.0 || alpha_amplitude_v < 0.0 || chew_rms_v < 0.0 ||
      blink_amplitude_v < 0.0 || cm_probe_amplitude_v < 0.0)
    throw ConfigError("scenario: amplitudes must be >= 0");
  if (blink_period_s <= 0.0) throw ConfigError("scenario: blink_period_s must be > 0");
  for (const auto& e : events) {
    if (!(0.0 <= e.start_s && e.start_s < e.end_s && e.end_s <= duration_s)) {
      std::ostringstream os;
      os << "scenario: event " << to_string(e.kind) << " [" << e.start_s << ", " << e.end_s
         << "] must satisfy 0 <= start < end <= duration (" << duration_s << ")";
      throw ConfigError(os.str());
    }
  }
  // Events of the same kind must not overlap.
  for (std::size_t i = 0; i < events.size(); ++i) {
    for (std::size_t j = i + 1; j < events.size(); ++j) {
      if (events[i].kind != events[j].kind) continue;
      const auto& a = events[i];
      const auto& b = events[j];
      if (a.start_s < b.end_s && b.start_s < a.end_s) {
        throw ConfigError(std::string("scenario: overlapping ") + to_string(a.kind) + " events");
      }
    }
  }
}

std::size_t Montage::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i].label == label) return i;
  throw ConfigError("montage: unknown channel label '" + label + "'");
}

std::vector<std::size_t> Montage::indices_of(const std::vector<std::string>& labels) const {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(index_of(l));
  return out;
}

std::vector<std::string> Montage::labels() const {
  std::vector<std::string> out;
  out.reserve(channels.size());
  for (const auto& c : channels) out.push_back(c.label);
  return out;
}

void Montage::validate() const {
  if (channels.empty()) throw ConfigError("montage: no channels");
  std::set<std::string> seen;
  for (const auto& c : channels) {
    if (!seen.insert(c.label).second)
      throw ConfigError("montage: duplicate channel label '" + c.label + "'");
    c.electrode.validate();
  }
  reference.validate();
  bias.validate();
  indices_of(occipital);  // throws on unknown labels
  indices_of(frontal);
}

static const char* k1020Labels[24] = {
    "Fp1", "Fp2", "C3", "C4", "P3", "P4", "O1", "O2",          // 8
    "F3",  "F4",  "F7", "F8", "T3", "T4", "T5", "T6",          // 16
    "Fz",  "Cz",  "Pz", "P7", "P8", "Oz", "F9", "F10",         // 24
};

Montage Montage::standard(int n_channels, ElectrodeKind kind) {
  const double ohms = kind == ElectrodeKind::dry   ? 200000.0
                      : kind == ElectrodeKind::gel ? 5000.0
                                                   : 0.0;
  return standard(n_channels, kind, ohms);
}

Montage Montage::standard(int n_channels, ElectrodeKind kind, double contact_ohms) {
  if (n_channels != 8 && n_channels != 16 && n_channels != 24)
    throw ConfigError("standard montage supports 8, 16 or 24 channels");
  Montage m;
  for (int i = 0; i < n_channels; ++i) {
    ElectrodeModel e{k1020Labels[i], kind, contact_ohms, 0.0};
    m.channels.push_back({k1020Labels[i], e});
  }
  m.reference = ElectrodeModel{"REF", kind, contact_ohms, 0.0};
  m.bias = ElectrodeModel{"BIAS", kind, contact_ohms, 0.0};
  m.occipital = {"O1", "O2"};
  m.frontal = {"Fp1", "Fp2"};
  m.validate();
  return m;
}

}  // namespace ironstream
