// SPDX-License-Identifier: Apache-2.0

#include "ironstream/impedance.hpp"

#include <cmath>

#include "ironstream/kernels.hpp"

namespace ironstream {

const char* to_string(ImpedanceMethod m) {
  return m == ImpedanceMethod::dc ? "dc" : "synchronous";
}

const char* to_string(ContactQuality q) {
  switch (q) {
    case ContactQuality::good: return "good";
    case ContactQuality::acceptable: return "acceptable";
    case ContactQuality::poor: return "poor";
    case ContactQuality::open: return "open";
  }
  return "?";
}

ContactQuality classify(double ohms, const QualityThresholds& t) {
  if (ohms < 0.0) throw DomainError("classify: impedance must be >= 0");
  if (ohms < t.good_below_ohms) return ContactQuality::good;
  if (ohms < t.acceptable_below_ohms) return ContactQuality::acceptable;
  if (ohms < t.poor_below_ohms) return ContactQuality::poor;
  return ContactQuality::open;
}

ImpedanceReport estimate_impedance(std::span<const SampleFrame> frames,
                                   const AcquisitionConfig& cfg, std::size_t channel_index,
                                   const std::string& channel_label, bool excitation_enabled,
                                   double series_resistance_ohms,
                                   const QualityThresholds& thresholds) {
  if (!excitation_enabled)
    throw ProtocolError("estimate_impedance: lead-off excitation was not enabled on channel '" +
                        channel_label + "'");
  const double current = cfg.lead_off_amps();
  if (!(current > 0.0)) throw DomainError("estimate_impedance: excitation current must be > 0");
  if (frames.size() < static_cast<std::size_t>(cfg.rate))
    throw ProtocolError("estimate_impedance: need at least 1 s of frames");

  Series v(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (channel_index >= frames[i].codes.size())
      throw ConfigError("estimate_impedance: channel index outside frame");
    v[i] = decode(frames[i].codes[channel_index], cfg.gain, cfg.vref);
  }

  ImpedanceReport report;
  report.channel = channel_label;
  report.excitation_current_a = current;

  if (cfg.lead_off_freq == LeadOffFreq::dc) {
    report.method = ImpedanceMethod::dc;
    const double mean = kernels::sum(v.data(), v.size()) / static_cast<double>(v.size());
    report.ohms = std::fabs(mean) / current - series_resistance_ohms;
  } else {
    report.method = ImpedanceMethod::synchronous;
    // whole excitation cycles only (period = 4 samples), phased to the
    // absolute frame index so window placement does not matter
    const std::size_t usable = frames.size() - frames.size() % 4;
    Series ref(usable);
    for (std::size_t i = 0; i < usable; ++i)
      ref[i] = (frames[i].index % 4) < 2 ? 1.0 : -1.0;
    const double mean = kernels::sum(v.data(), usable) / static_cast<double>(usable);
    Series centered(usable);
    kernels::affine(1.0, v.data(), -mean, centered.data(), usable);
    const double amplitude =
        std::fabs(kernels::dot(centered.data(), ref.data(), usable)) / static_cast<double>(usable);
    report.ohms = amplitude / current - series_resistance_ohms;
  }
  if (report.ohms < 0.0) report.ohms = 0.0;
  report.quality = classify(report.ohms, thresholds);
  return report;
}

}  // namespace ironstream
