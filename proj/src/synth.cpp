// SPDX-License-Identifier: Apache-2.0

#include "ironstream/synth.hpp"

#include <cmath>
#include <cstring>

#include "ironstream/kernels.hpp"
#include "ironstream/rng.hpp"

namespace ironstream {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kBlinkPulseS = 0.5;

// Raised-cosine on/off envelope inside [start, end]; ramp clipped to half
// the event length so short events still peak at 1.
double event_envelope(double t, double start, double end, double ramp) {
  if (t < start || t >= end) return 0.0;
  const double r = std::min(ramp, 0.5 * (end - start));
  if (r <= 0.0) return 1.0;
  if (t < start + r) return 0.5 * (1.0 - std::cos(M_PI * (t - start) / r));
  if (t > end - r) return 0.5 * (1.0 - std::cos(M_PI * (end - t) / r));
  return 1.0;
}

// Biphasic blink pulse on [0, T]: one positive then one negative lobe,
// spectral content at 2 and 4 Hz for T = 0.5 s.
double blink_shape(double tau, double T) {
  if (tau < 0.0 || tau >= T) return 0.0;
  const double x = tau / T;
  return std::sin(kTwoPi * x) * std::sin(M_PI * x) * std::sin(M_PI * x);
}

double blink_shape_peak() {
  // max |blink_shape| over the pulse, computed once on a fine grid.
  static const double peak = [] {
    double m = 0.0;
    for (int i = 0; i < 20000; ++i) {
      const double v = std::fabs(blink_shape(0.5 * i / 20000.0, 0.5));
      if (v > m) m = v;
    }
    return m;
  }();
  return peak;
}

// Random-phase sinusoid bank spanning 30-100 Hz; one bank per
// (chewing event, channel) keeps channels decorrelated.
struct ChewBank {
  std::vector<double> freq, amp, phase;
};

ChewBank make_chew_bank(std::uint64_t seed, std::size_t event_index, std::size_t channel,
                        double target_rms) {
  std::mt19937_64 rng(stream_key(seed, 0xC4E30000ULL + event_index * 4096 + channel));
  ChewBank bank;
  double power = 0.0;
  for (double f = 30.0; f <= 100.0; f += 2.0) {
    const double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    const double a = std::sqrt(-2.0 * std::log(u1));  // Rayleigh amplitude
    bank.freq.push_back(f);
    bank.amp.push_back(a);
    bank.phase.push_back(kTwoPi * u2);
    power += 0.5 * a * a;
  }
  const double s = power > 0.0 ? target_rms / std::sqrt(power) : 0.0;
  for (auto& a : bank.amp) a *= s;
  return bank;
}

}  // namespace

struct SynthState::Impl {
  SignalScenario sc;
  Montage montage;
  double rate;
  std::uint64_t total = 0;
  std::uint64_t cursor = 0;

  std::vector<char> is_occipital, is_frontal;
  std::vector<NormalStream> noise;
  double noise_sigma = 0.0;

  // chew_banks[e][c] for the e-th chewing event in scenario order.
  std::vector<const ScenarioEvent*> chew_events;
  std::vector<std::vector<ChewBank>> chew_banks;
  std::vector<const ScenarioEvent*> blink_events;
  std::vector<const ScenarioEvent*> alpha_events;

  Impl(const SignalScenario& scenario, const Montage& m, double r)
      : sc(scenario), montage(m), rate(r) {
    sc.validate();
    montage.validate();
    if (rate != 250.0 && rate != 500.0 && rate != 1000.0)
      throw ConfigError("synth: rate must be one of {250, 500, 1000}");
    const double count = sc.duration_s * rate;
    const double rounded = std::round(count);
    if (std::fabs(count - rounded) > 1e-6)
      throw ConfigError("synth: duration * rate must be an integer sample count");
    total = static_cast<std::uint64_t>(rounded);

    const std::size_t n_ch = montage.channels.size();
    is_occipital.assign(n_ch, 0);
    is_frontal.assign(n_ch, 0);
    for (auto i : montage.indices_of(montage.occipital)) is_occipital[i] = 1;
    for (auto i : montage.indices_of(montage.frontal)) is_frontal[i] = 1;

    noise_sigma = sc.noise_density_v_rthz * std::sqrt(rate / 2.0);
    noise.reserve(n_ch);
    for (std::size_t c = 0; c < n_ch; ++c) noise.emplace_back(sc.seed, c);

    for (const auto& e : sc.events) {
      if (e.kind == SubjectEvent::chewing) chew_events.push_back(&e);
      if (e.kind == SubjectEvent::blinking) blink_events.push_back(&e);
      if (e.kind == SubjectEvent::eyes_closed) alpha_events.push_back(&e);
    }
    chew_banks.resize(chew_events.size());
    for (std::size_t e = 0; e < chew_events.size(); ++e) {
      chew_banks[e].reserve(n_ch);
      for (std::size_t c = 0; c < n_ch; ++c)
        chew_banks[e].push_back(make_chew_bank(sc.seed, e, c, sc.chew_rms_v));
    }
  }

  MultiSeries render(std::size_t n) {
    const std::size_t n_ch = montage.channels.size();
    MultiSeries out(n_ch, Series(n, 0.0));
    if (n == 0) return out;

    // Common-mode tones, shared by every channel (identical phase/amplitude).
    Series common(n, 0.0);
    if (sc.mains_amplitude_v > 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(cursor + i) / rate;
        common[i] += sc.mains_amplitude_v * std::sin(kTwoPi * sc.mains_hz * t);
      }
    }
    if (sc.cm_probe_amplitude_v > 0.0 && sc.cm_probe_hz > 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(cursor + i) / rate;
        common[i] += sc.cm_probe_amplitude_v * std::sin(kTwoPi * sc.cm_probe_hz * t);
      }
    }

    // Alpha, gated to eyes_closed windows, occipital sites only.
    Series alpha;
    if (!alpha_events.empty() && sc.alpha_amplitude_v > 0.0) {
      alpha.assign(n, 0.0);
      for (const auto* e : alpha_events) {
        for (std::size_t i = 0; i < n; ++i) {
          const double t = static_cast<double>(cursor + i) / rate;
          const double env = event_envelope(t, e->start_s, e->end_s, sc.event_ramp_s);
          if (env > 0.0)
            alpha[i] += sc.alpha_amplitude_v * env * std::sin(kTwoPi * sc.alpha_hz * t);
        }
      }
    }

    const double blink_scale = sc.blink_amplitude_v / blink_shape_peak();

    for (std::size_t c = 0; c < n_ch; ++c) {
      Series& ch = out[c];

      if (!alpha.empty() && is_occipital[c]) kernels::add(ch.data(), alpha.data(), ch.data(), n);

      for (std::size_t e = 0; e < chew_events.size(); ++e) {
        const auto* ev = chew_events[e];
        const auto& bank = chew_banks[e][c];
        for (std::size_t i = 0; i < n; ++i) {
          const double t = static_cast<double>(cursor + i) / rate;
          const double env = event_envelope(t, ev->start_s, ev->end_s, sc.event_ramp_s);
          if (env <= 0.0) continue;
          double v = 0.0;
          for (std::size_t k = 0; k < bank.freq.size(); ++k)
            v += bank.amp[k] * std::sin(kTwoPi * bank.freq[k] * t + bank.phase[k]);
          ch[i] += env * v;
        }
      }

      if (!blink_events.empty() && sc.blink_amplitude_v > 0.0) {
        const double site = is_frontal[c] ? 1.0 : sc.blink_offsite_fraction;
        for (const auto* ev : blink_events) {
          for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(cursor + i) / rate;
            if (t < ev->start_s || t >= ev->end_s) continue;
            const double local = std::fmod(t - ev->start_s, sc.blink_period_s);
            const double tau = local;  // pulse occupies the first 0.5 s of each period
            // suppress a pulse that would not fit before the event ends
            const double pulse_start = t - tau;
            if (pulse_start + kBlinkPulseS > ev->end_s + 1e-12) continue;
            ch[i] += site * blink_scale * blink_shape(tau, kBlinkPulseS);
          }
        }
      }

      if (noise_sigma > 0.0) {
        for (std::size_t i = 0; i < n; ++i) ch[i] += noise_sigma * noise[c].next();
      }

      kernels::add(ch.data(), common.data(), ch.data(), n);
    }

    cursor += n;
    return out;
  }
};

SynthState::SynthState(const SignalScenario& scenario, const Montage& montage, double rate)
    : impl_(std::make_unique<Impl>(scenario, montage, rate)) {}
SynthState::~SynthState() = default;
SynthState::SynthState(SynthState&&) noexcept = default;
SynthState& SynthState::operator=(SynthState&&) noexcept = default;

MultiSeries SynthState::render(std::size_t n) { return impl_->render(n); }
std::uint64_t SynthState::cursor() const { return impl_->cursor; }
std::uint64_t SynthState::total_samples() const { return impl_->total; }
double SynthState::rate() const { return impl_->rate; }

MultiSeries synthesize(const SignalScenario& scenario, const Montage& montage, double rate) {
  SynthState state(scenario, montage, rate);
  return state.render(state.total_samples());
}

double electrode_divider(double source_v, const ElectrodeModel& electrode,
                         double input_impedance_ohms) {
  if (!(input_impedance_ohms > 0.0)) throw DomainError("electrode_divider: input impedance <= 0");
  return source_v * input_impedance_ohms /
             (input_impedance_ohms + electrode.contact_impedance_ohms) +
         electrode.half_cell_offset_v;
}

}  // namespace ironstream
