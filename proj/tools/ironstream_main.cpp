// SPDX-License-Identifier: Apache-2.0
//
// ironstream CLI: simulate | serve | record | analyze | impedance | export |
// budget. Exit codes: 0 ok, 2 configuration/validation error, 3 runtime
// error, 4 I/O error.

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ironstream/analysis.hpp"
#include "ironstream/budget.hpp"
#include "ironstream/config_io.hpp"
#include "ironstream/impedance.hpp"
#include "ironstream/kernels.hpp"
#include "ironstream/server.hpp"
#include "ironstream/session.hpp"
#include "ironstream/simulate.hpp"

namespace fs = std::filesystem;
using namespace ironstream;

namespace {

std::atomic<bool> g_interrupted{false};

void on_sigint(int) { g_interrupted = true; }

struct CommonFlags {
  std::string scenario = "builtin:eyes-closed";
  std::string montage_path;  // empty = standard montage sized to devices
  std::string profile = "builtin:rest";
  std::string config_path;
  int rate = 250;
  int gain = 24;
  int devices = 1;
  double vref = 4.5;
  std::uint64_t seed = 0;  // 0 = keep scenario's own seed
  bool bias_off = false;
  std::string out_dir = "out";
  std::uint16_t port = 9350;
  bool fast = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--scenario", f.scenario, "scenario file or builtin:<name>");
  cmd->add_option("--montage", f.montage_path, "montage file or builtin:<name>");
  cmd->add_option("--profile", f.profile, "sensor profile file or builtin:<name>");
  cmd->add_option("--config", f.config_path,
                  "run-config file (default: $IRONSTREAM_CONFIG when set)");
  cmd->add_option("--rate", f.rate, "samples per second {250,500,1000}");
  cmd->add_option("--gain", f.gain, "PGA gain {1,2,4,6,8,12,24}");
  cmd->add_option("--devices", f.devices, "daisy-chained converters 1..3 (8 channels each)");
  cmd->add_option("--vref", f.vref, "reference voltage");
  cmd->add_option("--seed", f.seed, "override the scenario seed");
  cmd->add_flag("--bias-off", f.bias_off, "disable the bias feedback loop");
  cmd->add_option("--out", f.out_dir, "output directory");
  cmd->add_option("--port", f.port, "TCP port");
  cmd->add_flag("--fast", f.fast, "stream as fast as possible (no real-time pacing)");
}

RunConfig make_run_config(const CommonFlags& f) {
  RunConfig rc;
  // defaults from $IRONSTREAM_CONFIG / --config first, explicit flags after
  std::string config_path = f.config_path;
  if (config_path.empty()) {
    if (const char* env = std::getenv("IRONSTREAM_CONFIG")) config_path = env;
  }
  if (!config_path.empty() && fs::exists(config_path))
    apply_run_config(rc, KeyValueDoc::parse_file(config_path));

  rc.scenario = load_scenario(f.scenario);
  if (f.seed != 0) rc.scenario.seed = f.seed;
  rc.acq.rate = f.rate;
  rc.acq.gain = f.gain;
  rc.acq.devices = f.devices;
  rc.acq.vref = f.vref;
  if (!f.montage_path.empty())
    rc.montage = load_montage(f.montage_path);
  else
    rc.montage = Montage::standard(rc.acq.channels(), ElectrodeKind::gel);
  rc.profile = load_profile(f.profile);
  if (f.bias_off) rc.chain.bias.enabled = false;
  rc.out_dir = f.out_dir;
  rc.serve.port = f.port;
  rc.serve.fast = f.fast;
  rc.validate();
  return rc;
}

std::string session_path(const RunConfig& rc) {
  fs::create_directories(rc.out_dir);
  return (fs::path(rc.out_dir) / "session.ibci").string();
}

int cmd_simulate(const CommonFlags& flags, double duration) {
  const RunConfig rc = make_run_config(flags);
  const std::string path = session_path(rc);
  const SimulateResult r = simulate_to_session(rc, duration, path);
  std::cout << "session: " << path << "\n"
            << "frames: " << r.frames << " (" << rc.acq.channels() << " channels @ "
            << rc.acq.rate << " SPS)\n"
            << "data packets: " << r.data_packets << "\n"
            << "sensor packets: " << r.sensor_packets << "\n";
  if (r.saturated_samples > 0)
    std::cout << "warning: " << r.saturated_samples << " saturated samples\n";
  for (const auto& w : r.warnings) std::cout << "warning: " << w << "\n";
  return 0;
}

int cmd_serve(const CommonFlags& flags, double duration) {
  RunConfig rc = make_run_config(flags);
  AcquisitionEngine engine(rc.scenario, rc.montage, rc.acq, rc.chain);
  SensorBoard board(rc.profile, rc.scenario.seed);
  StreamServer server(std::move(engine), std::move(board), build_meta(rc), rc.serve);
  server.start();
  std::cout << "serving on " << rc.serve.host << ":" << server.bound_port()
            << (rc.serve.fast ? " (fast)" : " (real-time)") << "\n"
            << "clients command the stream: START begins acquisition\n";
  std::signal(SIGINT, on_sigint);
  const auto t0 = std::chrono::steady_clock::now();
  while (!g_interrupted) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    if (duration > 0.0) {
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;
      if (elapsed.count() >= duration) break;
    }
  }
  server.stop();
  const auto st = server.stats();
  std::cout << "clients accepted: " << st.clients_accepted
            << ", overflow disconnects: " << st.overflow_disconnects
            << ", data packets: " << st.data_packets << "\n";
  return 0;
}

int cmd_record(const CommonFlags& flags, const std::string& host, double duration,
               std::uint64_t max_packets, bool send_start) {
  fs::create_directories(flags.out_dir);
  const std::string path = (fs::path(flags.out_dir) / "recorded.ibci").string();

  WireClient client(host, flags.port);
  if (send_start) client.send_command(wire::Opcode::start);
  std::signal(SIGINT, on_sigint);

  std::optional<SessionWriter> writer;
  wire::MetaPayload meta;
  std::uint64_t packets = 0;
  const auto t0 = std::chrono::steady_clock::now();
  while (!g_interrupted) {
    if (duration > 0.0) {
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;
      if (elapsed.count() >= duration) break;
    }
    if (max_packets > 0 && packets >= max_packets) break;
    std::vector<std::uint8_t> raw;
    auto p = client.read_packet(200, &raw);
    if (!p) continue;
    if (p->type == wire::PacketType::meta && meta.kv.empty())
      meta = wire::MetaPayload::parse(p->payload);
    if (!writer) writer.emplace(path, meta, /*write_meta_packet=*/false);
    writer->write_raw(raw);
    ++packets;
  }
  if (writer) writer->close();
  std::cout << "recorded " << packets << " packets to " << path << "\n";
  return 0;
}

int cmd_impedance(const CommonFlags& flags, double duration, const std::string& method) {
  RunConfig rc = make_run_config(flags);
  if (method == "dc")
    rc.acq.lead_off_freq = LeadOffFreq::dc;
  else if (method == "sync")
    rc.acq.lead_off_freq = LeadOffFreq::fs_over_4;
  else if (!method.empty())
    throw ConfigError("--method must be dc or sync");

  // lead-off excitation on every channel; identical excitation is
  // common-mode, so the bias loop stays off for the measurement
  rc.chain.bias.enabled = false;
  AcquisitionEngine engine(rc.scenario, rc.montage, rc.acq, rc.chain);
  engine.set_lead_off_enabled(true);
  const auto frames = engine.acquire(static_cast<std::size_t>(duration * rc.acq.rate));

  nlohmann::json j = nlohmann::json::array();
  std::cout << std::left << std::setw(8) << "channel" << std::setw(14) << "ohms"
            << std::setw(13) << "method" << std::setw(12) << "quality"
            << "current_nA\n";
  for (std::size_t c = 0; c < rc.montage.channels.size(); ++c) {
    const auto rep = estimate_impedance(frames, rc.acq, c, rc.montage.channels[c].label,
                                        /*excitation_enabled=*/true,
                                        rc.chain.series_resistance_ohms);
    std::cout << std::left << std::setw(8) << rep.channel << std::setw(14) << std::fixed
              << std::setprecision(1) << rep.ohms << std::setw(13) << to_string(rep.method)
              << std::setw(12) << to_string(rep.quality) << rep.excitation_current_a * 1e9
              << "\n";
    j.push_back({{"channel", rep.channel},
                 {"ohms", rep.ohms},
                 {"method", to_string(rep.method)},
              {"quality", to_string(rep.quality)},
                 {"excitation_current_a", rep.excitation_current_a}});
  }
  fs::create_directories(rc.out_dir);
  const std::string path = (fs::path(rc.out_dir) / "impedance.json").string();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "'");
  out << j.dump(2) << "\n";
  std::cout << "report: " << path << "\n";
  return 0;
}

int cmd_analyze(const std::string& session_file, const std::string& out_dir,
                const std::vector<std::string>& kinds, bool apply_notch) {
  if (!fs::exists(session_file)) throw IoError("missing session file '" + session_file + "'");
  for (const auto& k : kinds)
    if (k != "all" && k != "metrics" && k != "traces" && k != "psd" && k != "sensors")
      throw ConfigError("unknown report kind '" + k +
                        "' (expected all|metrics|traces|psd|sensors)");
  auto want = [&kinds](const char* k) {
    for (const auto& x : kinds)
      if (x == "all" || x == k) return true;
    return false;
  };

  const SessionData session = replay(session_file);
  AnalysisOptions opt;
  opt.apply_notch = apply_notch;
  const AnalysisOutput out = analyze_session(session, opt);
  const AnalysisReport& r = out.report;

  std::cout << "frames: " << r.n_frames << " @ " << r.rate << " SPS, " << r.n_channels
            << " channels, " << r.sensor_frames << " sensor frames\n";
  if (session.truncated) std::cout << "note: session file had a truncated tail\n";
  std::cout << std::left << std::setw(8) << "channel" << std::setw(14) << "rms_uV"
            << "alpha_power_uV2\n";
  for (const auto& c : r.channels)
    std::cout << std::left << std::setw(8) << c.label << std::setw(14) << std::fixed
              << std::setprecision(4) << c.rms_v * 1e6 << std::setprecision(3)
              << c.alpha_power * 1e12 << "\n";
  if (r.alpha_available) {
    std::size_t hits = 0;
    for (const auto& w : r.alpha_windows) hits += w.alpha ? 1 : 0;
    std::cout << "alpha windows: " << hits << "/" << r.alpha_windows.size() << " flagged\n";
  }
  std::cout << "chew events: " << r.chew_events.size()
            << ", blink events: " << r.blink_events.size() << "\n";
  if (r.cmrr)
    std::cout << "cmrr @ " << r.cm_probe_hz << " Hz: " << std::setprecision(1) << r.cmrr->db
              << " dB" << (r.cmrr->floor_limited ? " (floor-limited)" : "") << "\n";
  if (r.mains_hz > 0.0 && r.mains_residual_rms_v > 0.0)
    std::cout << "mains residual @ " << r.mains_hz << " Hz: " << std::setprecision(4)
              << r.mains_residual_rms_v * 1e6 << " uV rms\n";
  if (!r.data_gaps.gaps.empty()) {
    std::cout << "gaps:";
    for (const auto& [from, count] : r.data_gaps.gaps)
      std::cout << " [" << from << "+" << count << "]";
    std::cout << "\n";
  }

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  if (want("metrics")) write_report_json(r, (dir / "report.json").string());
  if (want("traces")) write_traces(out, (dir / "traces.tsv").string());
  if (want("psd")) write_psd(out, (dir / "psd.tsv").string());
  if (want("sensors")) write_sensor_table(out.decoded, (dir / "sensors.tsv").string());
  std::cout << "reports in " << out_dir << "\n";
  return 0;
}

int cmd_export(const std::string& session_file, const std::string& out_file) {
  if (!fs::exists(session_file)) throw IoError("missing session file '" + session_file + "'");
  const SessionData session = replay(session_file);
  export_columnar(session, out_file);
  std::size_t frames = 0;
  for (const auto* p : session.of_type(wire::PacketType::data))
    frames += wire::DataPayload::parse(p->payload).frames_in_packet;
  std::cout << "exported " << frames << " frames to " << out_file << "\n";
  return 0;
}

int cmd_budget(double capacity_mah, double draw_ma, int devices) {
  PowerBreakdown breakdown;
  const double draw = draw_ma > 0.0 ? draw_ma : breakdown.total_ma(devices);
  const double hours = battery_hours(capacity_mah, draw);
  std::cout << std::fixed << std::setprecision(2);
  std::cout << "component draw (defaults are illustrative):\n"
            << "  adc   " << breakdown.adc_ma_per_device << " mA x " << devices << "\n"
            << "  mcu   " << breakdown.mcu_ma << " mA\n"
            << "  radio " << breakdown.radio_ma << " mA\n"
            << "  total " << breakdown.total_ma(devices) << " mA"
            << (draw_ma > 0.0 ? " (overridden by --draw)" : "") << "\n";
  std::cout << "capacity " << capacity_mah << " mAh / draw " << draw << " mA = "
            << std::setprecision(3) << hours << " h\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ironstream: EEG acquisition system emulator and stream tools"};
  app.require_subcommand(1);

  CommonFlags flags;
  double duration = 10.0;

  auto* simulate = app.add_subcommand("simulate", "run the full chain into a session file");
  add_common(simulate, flags);
  simulate->add_option("--duration", duration, "seconds to acquire");

  auto* serve = app.add_subcommand("serve", "stream over TCP");
  add_common(serve, flags);
  double serve_duration = 0.0;
  serve->add_option("--duration", serve_duration, "stop after this many seconds (0 = run)");

  auto* record = app.add_subcommand("record", "capture a live stream into a session file");
  std::string host = "127.0.0.1";
  double rec_duration = 0.0;
  std::uint64_t rec_packets = 0;
  bool rec_start = true;
  record->add_option("--host", host, "server host");
  record->add_option("--port", flags.port, "server port");
  record->add_option("--out", flags.out_dir, "output directory");
  record->add_option("--duration", rec_duration, "seconds to record (0 = until SIGINT)");
  record->add_option("--packets", rec_packets, "stop after this many packets (0 = no limit)");
  record->add_flag("--no-start", "do not send START on connect");

  auto* analyze = app.add_subcommand("analyze", "metrics and plot data from a session file");
  std::string session_file;
  std::string analyze_out = "out";
  std::vector<std::string> kinds{"all"};
  bool apply_notch = false;
  analyze->add_option("session", session_file, "session file")->required();
  analyze->add_option("--out", analyze_out, "output directory");
  analyze->add_option("--report", kinds, "report kinds: all|metrics|traces|psd|sensors");
  analyze->add_flag("--notch", apply_notch, "apply the mains notch before metrics");

  auto* impedance = app.add_subcommand("impedance", "lead-off acquisition and estimates");
  add_common(impedance, flags);
  double imp_duration = 2.0;
  std::string method;
  impedance->add_option("--duration", imp_duration, "seconds of lead-off acquisition");
  impedance->add_option("--method", method, "dc or sync (default: config lead_off_freq)");

  auto* exp = app.add_subcommand("export", "render a session's frames to columnar text");
  std::string export_session, export_out = "export.tsv";
  exp->add_option("session", export_session, "session file")->required();
  exp->add_option("--out", export_out, "output file");

  auto* budget = app.add_subcommand("budget", "battery life from capacity and draw");
  double capacity = 1200.0, draw = 0.0;
  int budget_devices = 1;
  budget->add_option("--capacity", capacity, "battery capacity in mAh")->required();
  budget->add_option("--draw", draw, "total draw in mA (default: component breakdown)");
  budget->add_option("--devices", budget_devices, "converters for the breakdown");

  auto* backend = app.add_subcommand("backend", "print the active compute backend");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(flags, duration);
    if (serve->parsed()) return cmd_serve(flags, serve_duration);
    if (record->parsed())
      return cmd_record(flags, host, rec_duration, rec_packets,
                        record->count("--no-start") == 0);
    if (analyze->parsed()) return cmd_analyze(session_file, analyze_out, kinds, apply_notch);
    if (impedance->parsed()) return cmd_impedance(flags, imp_duration, method);
    if (exp->parsed()) return cmd_export(export_session, export_out);
    if (budget->parsed()) return cmd_budget(capacity, draw, budget_devices);
    if (backend->parsed()) {
      std::cout << kernels::backend_name() << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
