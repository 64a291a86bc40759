// SPDX-License-Identifier: Apache-2.0

#include "ironstream/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ironstream/kernels.hpp"

namespace ironstream {

namespace {

// Lead-off comparator refresh window: ~1 s, forced to a multiple of 4
// samples so fs/4 excitation always sees whole cycles.
std::size_t comparator_window(int rate) {
  return static_cast<std::size_t>(rate - rate % 4);
}

}  // namespace

struct AcquisitionEngine::Impl {
  SignalScenario scenario;
  Montage mont;
  AcquisitionConfig cfg;
  ChainSpec chain;

  std::vector<RegisterFile> devices;
  std::unique_ptr<SynthState> synth;
  std::vector<OnePoleLowpass> rc;
  std::vector<double> divider_gain, divider_offset;

  std::uint64_t frame_index = 0;     // within the current run
  std::uint64_t synth_consumed = 0;  // within the current scenario pass
  std::uint64_t saturated = 0;
  std::vector<std::string> warnings;

  // comparator state
  std::size_t window = 0;
  std::size_t window_fill = 0;
  std::vector<double> acc_dc, acc_ac;
  std::uint8_t cur_statp = 0, cur_statn = 0;  // OR across devices

  std::vector<std::string> labels;

  Impl(SignalScenario sc, Montage m, AcquisitionConfig c, ChainSpec ch)
      : scenario(std::move(sc)), mont(std::move(m)), cfg(c), chain(ch) {
    cfg.validate();
    scenario.validate();
    mont.validate();
    chain.rc.validate();
    if (static_cast<int>(mont.channels.size()) != cfg.channels()) {
      std::ostringstream os;
      os << "montage has " << mont.channels.size() << " channels but devices=" << cfg.devices
         << " implies " << cfg.channels();
      throw ConfigError(os.str());
    }
    if (!(chain.input_impedance_ohms > 0.0))
      throw ConfigError("chain: input impedance must be > 0");
    labels = mont.labels();

    devices.resize(cfg.devices);
    for (auto& d : devices) {
      apply_config(d, cfg);
      d.set_bias_enabled(chain.bias.enabled);
    }

    const std::size_t n_ch = mont.channels.size();
    divider_gain.resize(n_ch);
    divider_offset.resize(n_ch);
    for (std::size_t i = 0; i < n_ch; ++i) {
      const auto& e = mont.channels[i].electrode;
      divider_gain[i] =
          chain.input_impedance_ohms / (chain.input_impedance_ohms + e.contact_impedance_ohms);
      divider_offset[i] = e.half_cell_offset_v;
    }

    start_run();
  }

  void start_run() {
    frame_index = 0;
    synth_consumed = 0;
    saturated = 0;
    synth = std::make_unique<SynthState>(scenario, mont, static_cast<double>(cfg.rate));
    const std::size_t n_ch = mont.channels.size();
    rc.clear();
    bool aliasing = false;
    for (std::size_t i = 0; i < n_ch; ++i) {
      rc.emplace_back(chain.rc, static_cast<double>(cfg.rate));
      aliasing = aliasing || rc.back().aliasing();
    }
    warnings.clear();
    if (aliasing) {
      std::ostringstream os;
      os << "afe: cutoff " << chain.rc.cutoff_hz << " Hz at or above Nyquist (" << cfg.rate / 2.0
         << " Hz); aliasing regime";
      warnings.push_back(os.str());
    }
    window = comparator_window(cfg.rate);
    window_fill = 0;
    acc_dc.assign(n_ch, 0.0);
    acc_ac.assign(n_ch, 0.0);
    cur_statp = cur_statn = 0;
    for (auto& d : devices) d.set_lead_off_status(0, 0);
  }

  // Snapshot of register-backed settings, taken once per acquire() call.
  struct Snapshot {
    int rate;
    std::vector<int> gains;         // per channel
    std::vector<char> loff_mask;    // per channel
    std::vector<char> zeroed;       // powered down or mux-shorted
    LeadOffFreq freq;
    double current_a;
    bool bias_on;
    bool any_sensn;
  };

  Snapshot snapshot() {
    Snapshot s;
    s.rate = devices[0].data_rate();
    cfg.rate = s.rate;
    const std::size_t n_ch = mont.channels.size();
    s.gains.resize(n_ch);
    s.loff_mask.resize(n_ch);
    s.zeroed.resize(n_ch);
    s.any_sensn = false;
    for (std::size_t i = 0; i < n_ch; ++i) {
      RegisterFile& d = devices[i / 8];
      const int ch = static_cast<int>(i % 8);
      s.gains[i] = d.channel_gain(ch);
      s.loff_mask[i] = (d.loff_sensp() >> ch) & 1;
      s.zeroed[i] = d.channel_powered_down(ch) || d.channel_input_shorted(ch);
    }
    for (auto& d : devices) s.any_sensn = s.any_sensn || d.loff_sensn() != 0;
    s.freq = devices[0].lead_off_freq();
    s.current_a = lead_off_current_amps(devices[0].lead_off_current());
    s.bias_on = devices[0].bias_enabled();
    return s;
  }

  void refresh_comparator(const Snapshot& s) {
    const double w = static_cast<double>(window);
    const double ref_amp = s.current_a * mont.reference.contact_impedance_ohms;
    std::uint8_t orp = 0, orn = 0;
    for (std::size_t d = 0; d < devices.size(); ++d) {
      std::vector<double> amps(8, 0.0);
      for (int ch = 0; ch < 8; ++ch) {
        const std::size_t i = d * 8 + ch;
        if (i >= acc_dc.size()) break;
        amps[ch] = s.freq == LeadOffFreq::dc ? std::fabs(acc_dc[i] / w)
                                             : std::fabs(acc_ac[i] / w);
      }
      lead_off_comparator(devices[d], amps, ref_amp, chain.lead_off_threshold_v);
      orp |= devices[d].read(reg::LOFF_STATP);
      orn |= devices[d].read(reg::LOFF_STATN);
    }
    cur_statp = orp;
    cur_statn = orn;
    std::fill(acc_dc.begin(), acc_dc.end(), 0.0);
    std::fill(acc_ac.begin(), acc_ac.end(), 0.0);
    window_fill = 0;
  }

  std::vector<SampleFrame> acquire(std::size_t n_frames) {
    std::vector<SampleFrame> frames;
    if (n_frames == 0) return frames;
    frames.reserve(n_frames);
    const Snapshot snap = snapshot();

    std::size_t remaining = n_frames;
    while (remaining > 0) {
      std::size_t m = remaining;
      const std::uint64_t total = synth->total_samples();
      if (total > 0) {
        if (synth_consumed == total) {
          // scenario exhausted: the subject repeats deterministically
          synth = std::make_unique<SynthState>(scenario, mont, static_cast<double>(cfg.rate));
          synth_consumed = 0;
        }
        m = static_cast<std::size_t>(
            std::min<std::uint64_t>(m, total - synth_consumed));
      }
      process_chunk(m, snap, frames);
      remaining -= m;
      if (total > 0) synth_consumed += m;
    }
    return frames;
  }

  void process_chunk(std::size_t m, const Snapshot& snap, std::vector<SampleFrame>& frames) {
    const std::size_t n_ch = mont.channels.size();
    MultiSeries sig;
    if (synth->total_samples() > 0) {
      sig = synth->render(m);
    } else {
      sig.assign(n_ch, Series(m, 0.0));
    }

    const std::uint64_t i0 = frame_index;

    for (std::size_t c = 0; c < n_ch; ++c) {
      Series& x = sig[c];
      // electrode divider
      kernels::affine(divider_gain[c], x.data(), divider_offset[c], x.data(), m);
      // lead-off excitation
      if (snap.loff_mask[c]) {
        const double a = snap.current_a * mont.channels[c].electrode.contact_impedance_ohms;
        if (snap.freq == LeadOffFreq::dc) {
          for (std::size_t i = 0; i < m; ++i) x[i] += a;
        } else {
          for (std::size_t i = 0; i < m; ++i)
            x[i] += ((i0 + i) % 4) < 2 ? a : -a;
        }
      }
      // RC low-pass (stateful across chunks)
      rc[c].process(x.data(), x.data(), m);
    }

    // Comparator accumulation on the post-RC, pre-bias tap; status bytes
    // refresh at absolute-index window boundaries.
    std::vector<std::pair<std::uint8_t, std::uint8_t>> stat(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t c = 0; c < n_ch; ++c) {
        acc_dc[c] += sig[c][i];
        acc_ac[c] += ((i0 + i) % 4) < 2 ? sig[c][i] : -sig[c][i];
      }
      ++window_fill;
      if (window_fill == window) refresh_comparator(snap);
      stat[i] = {cur_statp, cur_statn};
    }

    // bias loop
    if (snap.bias_on) {
      BiasLoopSpec eff = chain.bias;
      eff.enabled = true;
      if (eff.sensed_channels.empty()) eff.sensed_channels = labels;
      sig = bias_feedback(sig, eff, labels).corrected;
    }

    // PGA + conversion
    std::vector<std::vector<std::int32_t>> codes(n_ch);
    std::vector<std::vector<std::uint8_t>> sat(n_ch);
    for (std::size_t c = 0; c < n_ch; ++c) {
      codes[c].resize(m);
      sat[c].resize(m);
      if (snap.zeroed[c]) std::fill(sig[c].begin(), sig[c].end(), 0.0);
      kernels::convert_codes(sig[c].data(), codes[c].data(), sat[c].data(), m,
                             static_cast<double>(snap.gains[c]), cfg.vref);
    }

    for (std::size_t i = 0; i < m; ++i) {
      SampleFrame f;
      f.index = i0 + i;
      f.t = static_cast<double>(f.index) / snap.rate;
      f.status = make_status_word(stat[i].first, stat[i].second);
      f.codes.resize(n_ch);
      for (std::size_t c = 0; c < n_ch; ++c) {
        f.codes[c] = codes[c][i];
        if (sat[c][i]) {
          f.saturated_mask |= 1u << c;
          ++saturated;
        }
      }
      frames.push_back(std::move(f));
    }
    frame_index += m;
  }
};

AcquisitionEngine::AcquisitionEngine(SignalScenario scenario, Montage montage,
                                     AcquisitionConfig cfg, ChainSpec chain)
    : impl_(std::make_unique<Impl>(std::move(scenario), std::move(montage), cfg, chain)) {}
AcquisitionEngine::~AcquisitionEngine() = default;
AcquisitionEngine::AcquisitionEngine(AcquisitionEngine&&) noexcept = default;
AcquisitionEngine& AcquisitionEngine::operator=(AcquisitionEngine&&) noexcept = default;

std::vector<SampleFrame> AcquisitionEngine::acquire(std::size_t n) { return impl_->acquire(n); }

const AcquisitionConfig& AcquisitionEngine::config() const { return impl_->cfg; }
const Montage& AcquisitionEngine::montage() const { return impl_->mont; }
const SignalScenario& AcquisitionEngine::scenario() const { return impl_->scenario; }
const ChainSpec& AcquisitionEngine::chain() const { return impl_->chain; }

RegisterFile& AcquisitionEngine::registers(int device) { return impl_->devices.at(device); }
const RegisterFile& AcquisitionEngine::registers(int device) const {
  return impl_->devices.at(device);
}

void AcquisitionEngine::write_register(std::uint8_t addr, std::uint8_t value) {
  for (auto& d : impl_->devices) d.write(addr, value);
}

std::uint8_t AcquisitionEngine::read_register(std::uint8_t addr, int device) const {
  return impl_->devices.at(device).read(addr);
}

void AcquisitionEngine::set_rate(int rate) {
  for (auto& d : impl_->devices) d.set_data_rate(rate);
  impl_->cfg.rate = rate;
  impl_->start_run();
}

void AcquisitionEngine::set_gain(int gain) {
  for (auto& d : impl_->devices)
    for (int ch = 0; ch < 8; ++ch) d.set_channel_gain(ch, gain);
  impl_->cfg.gain = gain;
  impl_->start_run();
}

void AcquisitionEngine::set_lead_off_enabled(bool on) {
  for (auto& d : impl_->devices) {
    d.write(reg::LOFF_SENSP, on ? 0xFF : 0x00);
    d.write(reg::LOFF_SENSN, on ? 0xFF : 0x00);
  }
  impl_->start_run();
}

void AcquisitionEngine::set_bias_enabled(bool on) {
  for (auto& d : impl_->devices) d.set_bias_enabled(on);
  impl_->start_run();
}

void AcquisitionEngine::restart() { impl_->start_run(); }

bool AcquisitionEngine::lead_off_all_enabled() const {
  for (const auto& d : impl_->devices)
    if (d.loff_sensp() != 0xFF) return false;
  return true;
}

std::uint64_t AcquisitionEngine::frames_produced() const { return impl_->frame_index; }
std::uint64_t AcquisitionEngine::saturated_samples() const { return impl_->saturated; }
const std::vector<std::string>& AcquisitionEngine::warnings() const { return impl_->warnings; }

}  // namespace ironstream
