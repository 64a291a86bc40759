// SPDX-License-Identifier: Apache-2.0
#pragma once

// Session analysis: the 1-40 Hz verification chain, detectors, rejection
// metrics and gap accounting, reused by the CLI and the acceptance suite.

#include <optional>
#include <string>
#include <vector>

#include "ironstream/dsp.hpp"
#include "ironstream/session.hpp"
#include "ironstream/wire.hpp"

namespace ironstream {

struct AnalysisOptions {
  BandpassSpec bandpass{1.0, 40.0, 4};
  bool apply_notch = false;  // mains notch before metrics
  double notch_q = 30.0;
  DetectorConfig detectors;
  double edge_trim_s = 1.0;  // trimmed from both ends for RMS metrics
};

struct ChannelMetrics {
  std::string label;
  double rms_v = 0.0;          // post-bandpass, edge-trimmed
  double alpha_power = 0.0;    // 8-14 Hz, whole series
};

struct AnalysisReport {
  int rate = 0;
  std::size_t n_frames = 0;
  std::size_t n_channels = 0;
  std::vector<ChannelMetrics> channels;
  std::vector<AlphaWindow> alpha_windows;
  std::vector<Interval> chew_events;
  std::vector<Interval> blink_events;
  std::optional<CmrrResult> cmrr;
  double cm_probe_hz = 0.0;
  double mains_hz = 0.0;
  double mains_residual_rms_v = 0.0;  // single-bin estimate at mains_hz
  wire::GapReport data_gaps;
  std::size_t sensor_frames = 0;
  bool alpha_available = false;  // montage carries an occipital set
};

struct AnalysisOutput {
  AnalysisReport report;
  DecodedSession decoded;
  MultiSeries filtered;  // post-bandpass volts
};

AnalysisOutput analyze_session(const SessionData& session, const AnalysisOptions& options = {});

std::string report_to_json(const AnalysisReport& report);
void write_report_json(const AnalysisReport& report, const std::string& path);

/// Fig.-style plot data: t_seconds plus one filtered microvolt column per
/// channel.
void write_traces(const AnalysisOutput& out, const std::string& path);

/// Welch PSD per channel: freq_hz plus one V^2/Hz column per channel.
void write_psd(const AnalysisOutput& out, const std::string& path);

/// Time-aligned sensor record: t_seconds plus the physical columns.
void write_sensor_table(const DecodedSession& decoded, const std::string& path);

}  // namespace ironstream
