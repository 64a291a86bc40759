// SPDX-License-Identifier: Apache-2.0
#pragma once

// Host-side processing: Butterworth-style bandpass (bilinear transform,
// prewarped edges), mains notch, zero-phase application, Welch PSD, band
// power, RMS and the detectors used to reproduce the device-check plots.

#include <cstdint>
#include <string>
#include <vector>

#include "ironstream/scenario.hpp"

namespace ironstream {

struct BandpassSpec {
  double low_hz = 1.0;
  double high_hz = 40.0;
  int order = 4;  // prototype order; the bandpass has 2*order poles
};

struct Biquad {
  double b0, b1, b2;  // numerator
  double a1, a2;      // denominator (a0 normalized to 1)
};

/// Butterworth bandpass as second-order sections. Edges land exactly on the
/// -3 dB points (bilinear transform with prewarping).
std::vector<Biquad> design_bandpass(const BandpassSpec& spec, double rate);

/// RBJ-style notch centered on f0 with quality q.
std::vector<Biquad> design_notch(double f0_hz, double q, double rate);

/// Cascade magnitude response at frequency f (single pass).
double cascade_gain(const std::vector<Biquad>& sections, double f_hz, double rate);

/// Single-pass direct-form-II-transposed run with step-matched initial
/// conditions (scaled to the first sample).
Series sosfilt(const std::vector<Biquad>& sections, const Series& x);

/// Zero-phase (forward-backward) filtering with odd-reflection padding.
Series filtfilt(const std::vector<Biquad>& sections, const Series& x, std::size_t padlen);

/// Zero-phase 1-40 Hz style bandpass; -3 dB single-pass points at the edges.
Series bandpass(const Series& x, const BandpassSpec& spec, double rate);

/// Zero-phase mains notch (>= 40 dB single-pass center attenuation).
Series notch(const Series& x, double mains_hz, double q, double rate);
inline Series notch(const Series& x, double mains_hz, double rate) {
  return notch(x, mains_hz, 30.0, rate);
}

struct Psd {
  std::vector<double> freqs_hz;
  std::vector<double> power;  // V^2/Hz, one-sided
  std::size_t segment_len = 0;
  double overlap = 0.5;
  std::string window = "hann";
};

/// Welch averaged periodogram: 2 s segments (or the whole series when
/// shorter), 50% overlap, periodic Hann window, per-segment mean removal.
Psd psd(const Series& x, double rate);

/// Integrated power over [lo, hi] (inclusive bin centers).
double band_power(const Psd& p, double lo_hz, double hi_hz);

/// RMS after mean removal.
double rms(const Series& x);

/// Amplitude of the component at frequency f via full-length synchronous
/// correlation (single-bin estimate; robust against broadband noise).
double tone_amplitude(const Series& x, double f_hz, double rate);

struct CmrrResult {
  double db = 0.0;
  bool floor_limited = false;  // residual below the measurement floor
};

/// 20*log10(injected common-mode amplitude / mean residual amplitude at the
/// probe frequency across channels); residual measured via psd().
CmrrResult cmrr_estimate(const MultiSeries& decoded, double rate, double cm_amplitude_v,
                         double cm_hz, double floor_amplitude_v);

struct DetectorConfig {
  double alpha_window_s = 2.0;
  double alpha_ratio_threshold = 2.0;
  double chew_k = 5.0;
  double chew_window_s = 0.25;
  double chew_min_s = 0.25;
  double chew_merge_s = 0.25;
  double blink_threshold_v = 40e-6;
  double blink_refractory_s = 0.3;
};

struct AlphaWindow {
  double start_s, end_s;
  double ratio;
  bool alpha;
};

struct Interval {
  double start_s, end_s;
};

/// Per-window alpha decision over consecutive alpha_window_s windows:
/// occipital band power 8-14 Hz against 4-30 Hz (8-14 excluded).
std::vector<AlphaWindow> detect_alpha(const MultiSeries& channels, double rate,
                                      const std::vector<std::size_t>& occipital_idx,
                                      const DetectorConfig& cfg = {});

/// Broadband EMG burst detector: moving RMS of the 30-100 Hz band against
/// k times its median baseline.
std::vector<Interval> detect_chew(const MultiSeries& channels, double rate,
                                  const DetectorConfig& cfg = {});

/// Low-frequency deflection detector on the frontal set.
std::vector<Interval> detect_blink(const MultiSeries& channels, double rate,
                                   const std::vector<std::size_t>& frontal_idx,
                                   const DetectorConfig& cfg = {});

}  // namespace ironstream
