// SPDX-License-Identifier: Apache-2.0

#include "ironstream/config_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace ironstream {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_number(const std::string& v, const std::string& context) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(context + ": not a number: '" + v + "'");
  }
}

}  // namespace

KeyValueDoc KeyValueDoc::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

KeyValueDoc KeyValueDoc::parse_text(const std::string& text, const std::string& origin) {
  KeyValueDoc doc;
  doc.origin_ = origin;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    doc.items_.emplace_back(key, value);
  }
  return doc;
}

std::optional<std::string> KeyValueDoc::get(const std::string& key) const {
  std::optional<std::string> out;
  for (const auto& [k, v] : items_)
    if (k == key) out = v;
  return out;
}

std::vector<std::string> KeyValueDoc::get_all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : items_)
    if (k == key) out.push_back(v);
  return out;
}

double KeyValueDoc::number(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  return parse_number(*v, origin_ + ": key '" + key + "'");
}

std::uint64_t KeyValueDoc::unsigned_number(const std::string& key, std::uint64_t fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    return std::stoull(*v);
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key '" + key + "': not an unsigned integer: '" + *v + "'");
  }
}

bool KeyValueDoc::boolean(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "on" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "off" || *v == "no") return false;
  throw ConfigError(origin_ + ": key '" + key + "': not a boolean: '" + *v + "'");
}

namespace {

SignalScenario scenario_from_doc(const KeyValueDoc& doc) {
  SignalScenario sc;
  sc.duration_s = doc.number("duration", sc.duration_s);
  sc.mains_hz = static_cast<int>(doc.number("mains_hz", sc.mains_hz));
  sc.mains_amplitude_v = doc.number("mains_amplitude", sc.mains_amplitude_v);
  sc.noise_density_v_rthz = doc.number("noise_density", sc.noise_density_v_rthz);
  sc.alpha_amplitude_v = doc.number("alpha_amplitude", sc.alpha_amplitude_v);
  sc.alpha_hz = doc.number("alpha_hz", sc.alpha_hz);
  sc.seed = doc.unsigned_number("seed", sc.seed);
  sc.chew_rms_v = doc.number("chew_rms", sc.chew_rms_v);
  sc.blink_amplitude_v = doc.number("blink_amplitude", sc.blink_amplitude_v);
  sc.blink_period_s = doc.number("blink_period", sc.blink_period_s);
  sc.blink_offsite_fraction = doc.number("blink_offsite_fraction", sc.blink_offsite_fraction);
  sc.event_ramp_s = doc.number("event_ramp", sc.event_ramp_s);
  sc.cm_probe_hz = doc.number("cm_probe_hz", sc.cm_probe_hz);
  sc.cm_probe_amplitude_v = doc.number("cm_probe_amplitude", sc.cm_probe_amplitude_v);
  for (const auto& ev : doc.get_all("event")) {
    const auto tok = split_ws(ev);
    if (tok.size() != 3)
      throw ConfigError("scenario: event needs 'kind start end', got '" + ev + "'");
    ScenarioEvent e;
    e.kind = subject_event_from_string(tok[0]);
    e.start_s = parse_number(tok[1], "event start");
    e.end_s = parse_number(tok[2], "event end");
    sc.events.push_back(e);
  }
  sc.validate();
  return sc;
}

ElectrodeModel electrode_from_tokens(const std::vector<std::string>& tok,
                                     const std::string& context) {
  if (tok.size() < 2 || tok.size() > 4)
    throw ConfigError(context + ": expected 'label kind [ohms] [offset]'");
  ElectrodeModel e;
  e.label = tok[0];
  e.kind = electrode_kind_from_string(tok[1]);
  e.contact_impedance_ohms = e.kind == ElectrodeKind::dry       ? 200000.0
                             : e.kind == ElectrodeKind::gel     ? 5000.0
                                                                : 0.0;
  if (tok.size() >= 3) e.contact_impedance_ohms = parse_number(tok[2], context + " ohms");
  e.half_cell_offset_v = tok.size() >= 4 ? parse_number(tok[3], context + " offset") : 0.0;
  e.validate();
  return e;
}

Montage montage_from_doc(const KeyValueDoc& doc) {
  Montage m;
  for (const auto& ch : doc.get_all("channel")) {
    const auto e = electrode_from_tokens(split_ws(ch), "montage channel");
    m.channels.push_back({e.label, e});
  }
  if (auto r = doc.get("reference"))
    m.reference = electrode_from_tokens(split_ws(*r), "montage reference");
  else
    throw ConfigError("montage: missing 'reference'");
  if (auto b = doc.get("bias"))
    m.bias = electrode_from_tokens(split_ws(*b), "montage bias");
  else
    throw ConfigError("montage: missing 'bias'");
  if (auto o = doc.get("occipital")) m.occipital = split_ws(*o);
  if (auto f = doc.get("frontal")) m.frontal = split_ws(*f);
  m.validate();
  return m;
}

SensorProfile profile_from_doc(const KeyValueDoc& doc) {
  SensorProfile p;
  for (const auto& [key, value] : doc.items()) {
    const auto tok = split_ws(value);
    if (key.size() > 6 && key.substr(key.size() - 6) == "_noise") {
      p.set_noise_sigma(key.substr(0, key.size() - 6),
                        parse_number(value, "profile " + key));
      continue;
    }
    if (tok.empty()) throw ConfigError("profile: empty value for '" + key + "'");
    if (tok[0] == "constant") {
      if (tok.size() != 2) throw ConfigError("profile: 'constant <value>' for '" + key + "'");
      p.set_constant(key, parse_number(tok[1], "profile " + key));
    } else if (tok[0] == "ramp") {
      if (tok.size() != 5)
        throw ConfigError("profile: 'ramp <v0> <v1> <t0> <t1>' for '" + key + "'");
      p.add_ramp(key, parse_number(tok[1], key), parse_number(tok[2], key),
                 parse_number(tok[3], key), parse_number(tok[4], key));
    } else {
      throw ConfigError("profile: unknown directive '" + tok[0] + "' for '" + key + "'");
    }
  }
  return p;
}

constexpr char kEyesClosedScn[] = R"(# default device-check: alpha with eyes closed
duration = 10
alpha_hz = 10
alpha_amplitude = 20e-6
seed = 42
event = eyes_closed 1 9
)";

constexpr char kEyesOpenScn[] = R"(# baseline: no events
duration = 10
seed = 42
)";

constexpr char kArtifactsScn[] = R"(# chew + blink bursts
duration = 12
seed = 42
event = eyes_closed 1 5
event = chewing 6 7
event = blinking 8.5 10.5
)";

constexpr char kShortedScn[] = R"(# inputs shorted; only the noise floor remains
duration = 10
seed = 42
)";

// 22.4 mV common-mode leaves ~0.05 uV RMS at 50 Hz through a 110 dB loop
constexpr char kShortedMainsScn[] = R"(# shorted inputs with mains pickup on the cables
duration = 10
seed = 42
mains_hz = 50
mains_amplitude = 22.4e-3
)";

constexpr char kImpedanceScn[] = R"(# quiet subject for lead-off measurements
duration = 4
seed = 42
)";

std::string cmrr_probe_scn(double hz) {
  std::ostringstream os;
  os << "duration = 10\nseed = 42\ncm_probe_hz = " << hz << "\ncm_probe_amplitude = 1.0\n";
  return os.str();
}

std::string standard_montage_text(int n, const std::string& kind, double ohms) {
  Montage m = Montage::standard(n, electrode_kind_from_string(kind));
  std::ostringstream os;
  for (const auto& c : m.channels)
    os << "channel = " << c.label << " " << kind << " " << ohms << "\n";
  os << "reference = REF " << kind << " " << ohms << "\n";
  os << "bias = BIAS " << kind << " " << ohms << "\n";
  os << "occipital = O1 O2\nfrontal = Fp1 Fp2\n";
  return os.str();
}

std::string shorted_montage_text(int n) {
  Montage m = Montage::standard(n, ElectrodeKind::gel);
  std::ostringstream os;
  for (const auto& c : m.channels) os << "channel = " << c.label << " shorted 0\n";
  os << "reference = REF shorted 0\nbias = BIAS shorted 0\n";
  os << "occipital = O1 O2\nfrontal = Fp1 Fp2\n";
  return os.str();
}

constexpr char kRestProf[] = R"(# resting subject, quiet room
temp = constant 24.5
temp_noise = 0.02
rh = constant 42
rh_noise = 0.1
co2 = constant 420
co2_noise = 2
sound = constant 36
sound_noise = 0.5
pulse = constant 64
spo2 = constant 98
accel_x_noise = 0.002
)";

constexpr char kCo2RampProf[] = R"(# closed room filling with CO2 over 10 minutes
co2 = ramp 400 1000 0 600
temp = ramp 24 26 0 600
)";

std::optional<std::string> builtin_text(const std::string& name, const char* kind) {
  const std::string k(kind);
  if (k == "scenario") {
    if (name == "eyes-closed") return kEyesClosedScn;
    if (name == "eyes-open") return kEyesOpenScn;
    if (name == "artifacts") return kArtifactsScn;
    if (name == "shorted") return kShortedScn;
    if (name == "shorted-mains") return kShortedMainsScn;
    if (name == "impedance") return kImpedanceScn;
    if (name == "cmrr-probe-10") return cmrr_probe_scn(10);
    if (name == "cmrr-probe-30") return cmrr_probe_scn(30);
    if (name == "cmrr-probe-50") return cmrr_probe_scn(50);
  } else if (k == "montage") {
    if (name == "gel8") return standard_montage_text(8, "gel", 5000);
    if (name == "gel16") return standard_montage_text(16, "gel", 5000);
    if (name == "gel24") return standard_montage_text(24, "gel", 5000);
    if (name == "dry8") return standard_montage_text(8, "dry", 200000);
    if (name == "test6k8") return standard_montage_text(8, "gel", 6000);
    if (name == "shorted8") return shorted_montage_text(8);
    if (name == "shorted16") return shorted_montage_text(16);
    if (name == "shorted24") return shorted_montage_text(24);
  } else if (k == "profile") {
    if (name == "rest") return kRestProf;
    if (name == "co2-ramp") return kCo2RampProf;
  }
  return std::nullopt;
}

KeyValueDoc doc_from(const std::string& path_or_builtin, const char* kind) {
  constexpr const char* kPrefix = "builtin:";
  if (path_or_builtin.rfind(kPrefix, 0) == 0) {
    const std::string name = path_or_builtin.substr(8);
    const auto text = builtin_text(name, kind);
    if (!text)
      throw ConfigError(std::string("unknown builtin ") + kind + " '" + name + "'");
    return KeyValueDoc::parse_text(*text, path_or_builtin);
  }
  return KeyValueDoc::parse_file(path_or_builtin);
}

}  // namespace

SignalScenario load_scenario(const std::string& p) {
  return scenario_from_doc(doc_from(p, "scenario"));
}
Montage load_montage(const std::string& p) { return montage_from_doc(doc_from(p, "montage")); }
SensorProfile load_profile(const std::string& p) {
  return profile_from_doc(doc_from(p, "profile"));
}

std::vector<std::string> builtin_scenarios() {
  return {"eyes-closed", "eyes-open",     "artifacts",     "shorted",      "shorted-mains",
          "impedance",   "cmrr-probe-10", "cmrr-probe-30", "cmrr-probe-50"};
}
std::vector<std::string> builtin_montages() {
  return {"gel8", "gel16", "gel24", "dry8", "test6k8", "shorted8", "shorted16", "shorted24"};
}
std::vector<std::string> builtin_profiles() { return {"rest", "co2-ramp"}; }

void RunConfig::validate() const {
  std::vector<std::string> problems;
  auto attempt = [&problems](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      problems.push_back(e.what());
    }
  };
  attempt([&] { scenario.validate(); });
  attempt([&] { montage.validate(); });
  attempt([&] { acq.validate(); });
  attempt([&] { chain.rc.validate(); });
  if (static_cast<int>(montage.channels.size()) != acq.channels()) {
    std::ostringstream os;
    os << "montage has " << montage.channels.size() << " channels but devices=" << acq.devices
       << " implies " << acq.channels();
    problems.push_back(os.str());
  }
  if (!problems.empty()) {
    std::string all = "invalid configuration:";
    for (const auto& p : problems) all += "\n  - " + p;
    throw ConfigError(all);
  }
}

void apply_run_config(RunConfig& rc, const KeyValueDoc& doc) {
  rc.acq.rate = static_cast<int>(doc.number("rate", rc.acq.rate));
  rc.acq.gain = static_cast<int>(doc.number("gain", rc.acq.gain));
  rc.acq.vref = doc.number("vref", rc.acq.vref);
  rc.acq.devices = static_cast<int>(doc.number("devices", rc.acq.devices));
  if (auto v = doc.get("lead_off_current"))
    rc.acq.lead_off_current = lead_off_current_from_amps(parse_number(*v, "lead_off_current"));
  if (auto v = doc.get("lead_off_freq")) {
    if (*v == "dc")
      rc.acq.lead_off_freq = LeadOffFreq::dc;
    else if (*v == "fs_over_4")
      rc.acq.lead_off_freq = LeadOffFreq::fs_over_4;
    else
      throw ConfigError("lead_off_freq must be dc or fs_over_4");
  }
  rc.chain.bias.enabled = doc.boolean("bias_enabled", rc.chain.bias.enabled);
  rc.chain.bias.loop_rejection_db =
      doc.number("bias_rejection_db", rc.chain.bias.loop_rejection_db);
  rc.chain.rc.cutoff_hz = doc.number("rc_cutoff", rc.chain.rc.cutoff_hz);
  rc.chain.input_impedance_ohms = doc.number("input_impedance", rc.chain.input_impedance_ohms);
  rc.chain.lead_off_threshold_v =
      doc.number("lead_off_threshold", rc.chain.lead_off_threshold_v);
  rc.chain.series_resistance_ohms =
      doc.number("series_resistance", rc.chain.series_resistance_ohms);
  rc.serve.port = static_cast<std::uint16_t>(doc.number("port", rc.serve.port));
  rc.serve.frames_per_packet = static_cast<std::size_t>(
      doc.number("frames_per_packet", static_cast<double>(rc.serve.frames_per_packet)));
  rc.serve.env_poll_hz = doc.number("env_poll_hz", rc.serve.env_poll_hz);
  rc.serve.imu_poll_hz = doc.number("imu_poll_hz", rc.serve.imu_poll_hz);
  rc.serve.client_queue_packets = static_cast<std::size_t>(doc.number(
      "client_queue_packets", static_cast<double>(rc.serve.client_queue_packets)));
  if (auto v = doc.get("scenario")) rc.scenario = load_scenario(*v);
  if (auto v = doc.get("montage")) rc.montage = load_montage(*v);
  if (auto v = doc.get("profile")) rc.profile = load_profile(*v);
  if (auto v = doc.get("out")) rc.out_dir = *v;
  if (auto v = doc.get("seed")) rc.scenario.seed = std::stoull(*v);
}

wire::MetaPayload build_meta(const RunConfig& rc) {
  wire::MetaPayload m;
  auto num = [](double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };
  m.kv["rate"] = std::to_string(rc.acq.rate);
  m.kv["gain"] = std::to_string(rc.acq.gain);
  m.kv["vref"] = num(rc.acq.vref);
  m.kv["devices"] = std::to_string(rc.acq.devices);
  m.kv["seed"] = std::to_string(rc.scenario.seed);
  m.kv["mains_hz"] = std::to_string(rc.scenario.mains_hz);
  m.kv["mains_amplitude"] = num(rc.scenario.mains_amplitude_v);
  m.kv["cm_probe_hz"] = num(rc.scenario.cm_probe_hz);
  m.kv["cm_probe_amplitude"] = num(rc.scenario.cm_probe_amplitude_v);
  m.kv["bias_enabled"] = rc.chain.bias.enabled ? "1" : "0";
  m.kv["bias_rejection_db"] = num(rc.chain.bias.loop_rejection_db);
  std::string labels, occ, fro;
  for (const auto& c : rc.montage.channels) {
    if (!labels.empty()) labels += ",";
    labels += c.label;
  }
  for (const auto& l : rc.montage.occipital) {
    if (!occ.empty()) occ += ",";
    occ += l;
  }
  for (const auto& l : rc.montage.frontal) {
    if (!fro.empty()) fro += ",";
    fro += l;
  }
  m.kv["labels"] = labels;
  m.kv["occipital"] = occ;
  m.kv["frontal"] = fro;
  return m;
}

}  // namespace ironstream
