// SPDX-License-Identifier: Apache-2.0

#include "ironstream/analysis.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ironstream/ads1299.hpp"
#include "ironstream/columnar.hpp"

namespace ironstream {

AnalysisOutput analyze_session(const SessionData& session, const AnalysisOptions& options) {
  AnalysisOutput out;
  out.decoded = decode_session(session);
  const DecodedSession& d = out.decoded;
  AnalysisReport& r = out.report;

  r.rate = d.rate;
  r.n_channels = d.volts.size();
  r.n_frames = r.n_channels == 0 ? 0 : d.volts.front().size();
  r.sensor_frames = d.sensors.size();
  r.mains_hz = d.mains_hz;
  r.cm_probe_hz = d.cm_probe_hz;

  // stream integrity from the data packets' sequence numbers
  std::vector<std::uint32_t> seqs;
  for (const auto* p : session.of_type(wire::PacketType::data)) seqs.push_back(p->seq);
  r.data_gaps = wire::detect_gaps(seqs);

  if (r.n_frames == 0) return out;
  const double rate = static_cast<double>(d.rate);

  out.filtered.reserve(r.n_channels);
  for (std::size_t c = 0; c < r.n_channels; ++c) {
    Series f = bandpass(d.volts[c], options.bandpass, rate);
    if (options.apply_notch && d.mains_hz > 0.0)
      f = notch(f, d.mains_hz, options.notch_q, rate);
    out.filtered.push_back(std::move(f));
  }

  const auto trim = static_cast<std::size_t>(options.edge_trim_s * rate);
  for (std::size_t c = 0; c < r.n_channels; ++c) {
    ChannelMetrics m;
    m.label = c < d.labels.size() ? d.labels[c] : "ch" + std::to_string(c + 1);
    const Series& f = out.filtered[c];
    if (f.size() > 2 * trim + 1) {
      Series interior(f.begin() + static_cast<std::ptrdiff_t>(trim),
                      f.end() - static_cast<std::ptrdiff_t>(trim));
      m.rms_v = rms(interior);
    } else {
      m.rms_v = rms(f);
    }
    if (f.size() >= static_cast<std::size_t>(rate)) {
      m.alpha_power = band_power(psd(f, rate), 8.0, 14.0);
    }
    r.channels.push_back(std::move(m));
  }

  // detectors: alpha on the verification band, chew/blink on raw series
  std::vector<std::size_t> occipital_idx, frontal_idx;
  for (const auto& l : d.occipital)
    for (std::size_t c = 0; c < d.labels.size(); ++c)
      if (d.labels[c] == l) occipital_idx.push_back(c);
  for (const auto& l : d.frontal)
    for (std::size_t c = 0; c < d.labels.size(); ++c)
      if (d.labels[c] == l) frontal_idx.push_back(c);

  if (!occipital_idx.empty()) {
    r.alpha_available = true;
    r.alpha_windows = detect_alpha(out.filtered, rate, occipital_idx, options.detectors);
  }
  r.chew_events = detect_chew(d.volts, rate, options.detectors);
  if (!frontal_idx.empty())
    r.blink_events = detect_blink(d.volts, rate, frontal_idx, options.detectors);

  if (d.mains_hz > 0.0 && d.mains_amplitude > 0.0) {
    double acc = 0.0;
    for (const auto& ch : d.volts) acc += tone_amplitude(ch, d.mains_hz, rate);
    r.mains_residual_rms_v = acc / static_cast<double>(d.volts.size()) / std::sqrt(2.0);
  }

  if (d.cm_probe_hz > 0.0 && d.cm_probe_amplitude > 0.0) {
    const double lsb = d.vref / (d.gain * 8388607.0);
    r.cmrr = cmrr_estimate(d.volts, rate, d.cm_probe_amplitude, d.cm_probe_hz, lsb);
  }

  return out;
}

std::string report_to_json(const AnalysisReport& r) {
  nlohmann::json j;
  j["rate"] = r.rate;
  j["frames"] = r.n_frames;
  j["channels"] = r.n_channels;
  j["sensor_frames"] = r.sensor_frames;
  for (const auto& c : r.channels) {
    j["rms_uV"][c.label] = c.rms_v * 1e6;
    j["alpha_power_uV2"][c.label] = c.alpha_power * 1e12;
  }
  j["alpha_windows"] = nlohmann::json::array();
  for (const auto& w : r.alpha_windows)
    j["alpha_windows"].push_back(
        {{"start_s", w.start_s}, {"end_s", w.end_s}, {"ratio", w.ratio}, {"alpha", w.alpha}});
  j["chew_events"] = nlohmann::json::array();
  for (const auto& e : r.chew_events)
    j["chew_events"].push_back({{"start_s", e.start_s}, {"end_s", e.end_s}});
  j["blink_events"] = nlohmann::json::array();
  for (const auto& e : r.blink_events)
    j["blink_events"].push_back({{"start_s", e.start_s}, {"end_s", e.end_s}});
  if (r.cmrr) {
    j["cmrr_db"] = r.cmrr->db;
    j["cmrr_floor_limited"] = r.cmrr->floor_limited;
    j["cm_probe_hz"] = r.cm_probe_hz;
  }
  if (r.mains_hz > 0.0) {
    j["mains_hz"] = r.mains_hz;
    j["mains_residual_rms_uV"] = r.mains_residual_rms_v * 1e6;
  }
  j["gaps"] = nlohmann::json::array();
  for (const auto& [from, count] : r.data_gaps.gaps)
    j["gaps"].push_back({{"missing_from_seq", from}, {"count", count}});
  j["duplicate_seqs"] = r.data_gaps.duplicates;
  return j.dump(2);
}

void write_report_json(const AnalysisReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("report: cannot open '" + path + "'");
  out << report_to_json(report) << "\n";
  if (!out) throw IoError("report: write failed");
}

void write_traces(const AnalysisOutput& out, const std::string& path) {
  ColumnarTable t;
  t.names.push_back("t_seconds");
  for (std::size_t c = 0; c < out.filtered.size(); ++c) {
    const std::string label =
        c < out.decoded.labels.size() ? out.decoded.labels[c] : "ch" + std::to_string(c + 1);
    t.names.push_back(label + "_uV");
  }
  t.columns.resize(t.names.size());
  const std::size_t n = out.filtered.empty() ? 0 : out.filtered.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    t.columns[0].push_back(static_cast<double>(i) / out.report.rate);
    for (std::size_t c = 0; c < out.filtered.size(); ++c)
      t.columns[c + 1].push_back(out.filtered[c][i] * 1e6);
  }
  write_columnar(path, t);
}

void write_psd(const AnalysisOutput& out, const std::string& path) {
  ColumnarTable t;
  t.names.push_back("freq_hz");
  std::vector<Psd> psds;
  for (std::size_t c = 0; c < out.filtered.size(); ++c) {
    const std::string label =
        c < out.decoded.labels.size() ? out.decoded.labels[c] : "ch" + std::to_string(c + 1);
    t.names.push_back(label + "_V2_per_Hz");
    psds.push_back(psd(out.filtered[c], static_cast<double>(out.report.rate)));
  }
  t.columns.resize(t.names.size());
  if (!psds.empty()) {
    t.columns[0] = psds.front().freqs_hz;
    for (std::size_t c = 0; c < psds.size(); ++c) t.columns[c + 1] = psds[c].power;
  }
  write_columnar(path, t);
}

void write_sensor_table(const DecodedSession& decoded, const std::string& path) {
  ColumnarTable t;
  t.names = {"t_seconds", "co2_ppm", "temp_c",  "rh_pct",  "sound_db", "spo2_pct", "pulse_bpm",
             "accel_x_g", "accel_y_g", "accel_z_g", "gyro_x_dps", "gyro_y_dps", "gyro_z_dps",
             "validity"};
  t.columns.resize(t.names.size());
  for (const auto& s : decoded.sensors) {
    std::size_t c = 0;
    t.columns[c++].push_back(s.t);
    t.columns[c++].push_back(s.co2_ppm);
    t.columns[c++].push_back(s.temp_c);
    t.columns[c++].push_back(s.rh_pct);
    t.columns[c++].push_back(s.sound_db_spl);
    t.columns[c++].push_back(s.spo2_pct);
    t.columns[c++].push_back(s.pulse_bpm);
    for (double v : s.accel_g) t.columns[c++].push_back(v);
    for (double v : s.gyro_dps) t.columns[c++].push_back(v);
    t.columns[c++].push_back(static_cast<double>(s.validity));
  }
  write_columnar(path, t);
}

}  // namespace ironstream
