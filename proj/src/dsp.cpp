// SPDX-License-Identifier: Apache-2.0

#include "ironstream/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "ironstream/kernels.hpp"

namespace ironstream {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

using cplx = std::complex<double>;

// Denominator/numerator of a biquad from a z-plane pole pair and the
// (1 - z^-1)(1 + z^-1) zero pair.
Biquad biquad_from_pole_pair(cplx z1, cplx z2) {
  Biquad s{};
  s.b0 = 1.0;
  s.b1 = 0.0;
  s.b2 = -1.0;
  s.a1 = -(z1 + z2).real();
  s.a2 = (z1 * z2).real();
  return s;
}

}  // namespace

std::vector<Biquad> design_bandpass(const BandpassSpec& spec, double rate) {
  const double nyq = rate / 2.0;
  if (!(spec.low_hz > 0.0) || !(spec.low_hz < spec.high_hz) || !(spec.high_hz < nyq))
    throw ConfigError("bandpass: need 0 < low < high < rate/2");
  if (spec.order < 1 || spec.order > 8) throw ConfigError("bandpass: order must be 1..8");

  // prewarped analog edges
  const double w1 = std::tan(M_PI * spec.low_hz / rate);
  const double w2 = std::tan(M_PI * spec.high_hz / rate);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  // analog prototype poles (unit Butterworth circle, left half-plane)
  std::vector<cplx> proto;
  for (int k = 0; k < spec.order; ++k) {
    const double theta = M_PI * (2.0 * k + 1.0) / (2.0 * spec.order);
    proto.emplace_back(-std::sin(theta), std::cos(theta));
  }

  // low-pass -> band-pass: each prototype pole yields two analog poles
  std::vector<cplx> zpoles;
  for (const auto& p : proto) {
    const cplx pb = p * bw * 0.5;
    const cplx d = std::sqrt(pb * pb - w0sq);
    for (const cplx s : {pb + d, pb - d}) {
      zpoles.push_back((1.0 + s) / (1.0 - s));  // bilinear, tan convention
    }
  }

  // pair conjugates into sections
  std::vector<Biquad> sections;
  std::vector<cplx> reals;
  for (const auto& z : zpoles) {
    if (std::fabs(z.imag()) < 1e-12) {
      reals.push_back(z);
    } else if (z.imag() > 0.0) {
      sections.push_back(biquad_from_pole_pair(z, std::conj(z)));
    }
  }
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2)
    sections.push_back(biquad_from_pole_pair(reals[i], reals[i + 1]));

  // unity gain at the geometric center of the passband
  const double f_center = rate / M_PI * std::atan(std::sqrt(w0sq));
  const double g = cascade_gain(sections, f_center, rate);
  if (!(g > 0.0)) throw ConfigError("bandpass: degenerate design");
  const double fix = 1.0 / g;
  sections.front().b0 *= fix;
  sections.front().b1 *= fix;
  sections.front().b2 *= fix;
  return sections;
}

std::vector<Biquad> design_notch(double f0_hz, double q, double rate) {
  if (!(f0_hz > 0.0) || !(f0_hz < rate / 2.0))
    throw ConfigError("notch: center must lie below Nyquist");
  if (!(q > 0.0)) throw ConfigError("notch: q must be > 0");
  const double w0 = kTwoPi * f0_hz / rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  Biquad s{};
  s.b0 = 1.0 / a0;
  s.b1 = -2.0 * c / a0;
  s.b2 = 1.0 / a0;
  s.a1 = -2.0 * c / a0;
  s.a2 = (1.0 - alpha) / a0;
  return {s};
}

double cascade_gain(const std::vector<Biquad>& sections, double f_hz, double rate) {
  const double w = kTwoPi * f_hz / rate;
  const cplx z1 = std::polar(1.0, -w);
  const cplx z2 = z1 * z1;
  cplx h = 1.0;
  for (const auto& s : sections)
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return std::abs(h);
}

namespace {

struct SectionState {
  double s1 = 0.0, s2 = 0.0;
};

// step-matched initial state per unit input (lfilter_zi equivalent)
SectionState unit_step_state(const Biquad& q) {
  const double den = 1.0 + q.a1 + q.a2;
  const double g = den != 0.0 ? (q.b0 + q.b1 + q.b2) / den : 0.0;
  SectionState st;
  st.s2 = q.b2 - q.a2 * g;
  st.s1 = q.b1 - q.a1 * g + st.s2;
  return st;
}

void run_sos(const std::vector<Biquad>& sections, Series& x) {
  std::vector<SectionState> st(sections.size());
  for (std::size_t s = 0; s < sections.size(); ++s) {
    st[s] = unit_step_state(sections[s]);
    const double x0 = x.empty() ? 0.0 : x.front();
    st[s].s1 *= x0;
    st[s].s2 *= x0;
    const Biquad& q = sections[s];
    double s1 = st[s].s1, s2 = st[s].s2;
    for (auto& v : x) {
      const double y = q.b0 * v + s1;
      s1 = q.b1 * v - q.a1 * y + s2;
      s2 = q.b2 * v - q.a2 * y;
      v = y;
    }
  }
}

}  // namespace

Series sosfilt(const std::vector<Biquad>& sections, const Series& x) {
  Series y = x;
  run_sos(sections, y);
  return y;
}

Series filtfilt(const std::vector<Biquad>& sections, const Series& x, std::size_t padlen) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  padlen = std::min(padlen, n - 1);

  Series ext;
  ext.reserve(n + 2 * padlen);
  for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= padlen; ++i) ext.push_back(2.0 * x.back() - x[n - 1 - i]);

  run_sos(sections, ext);
  std::reverse(ext.begin(), ext.end());
  run_sos(sections, ext);
  std::reverse(ext.begin(), ext.end());

  return Series(ext.begin() + static_cast<std::ptrdiff_t>(padlen),
                ext.begin() + static_cast<std::ptrdiff_t>(padlen + n));
}

namespace {

std::size_t bandpass_padlen(double low_hz, double rate) {
  return static_cast<std::size_t>(std::lround(3.0 * rate / low_hz));
}

}  // namespace

Series bandpass(const Series& x, const BandpassSpec& spec, double rate) {
  const auto sections = design_bandpass(spec, rate);
  return filtfilt(sections, x, bandpass_padlen(spec.low_hz, rate));
}

Series notch(const Series& x, double mains_hz, double q, double rate) {
  const auto sections = design_notch(mains_hz, q, rate);
  const auto padlen = static_cast<std::size_t>(std::lround(3.0 * q * rate / mains_hz));
  return filtfilt(sections, x, padlen);
}

Psd psd(const Series& x, double rate) {
  if (x.empty()) throw DomainError("psd: empty series");
  if (!(rate > 0.0)) throw DomainError("psd: rate must be > 0");

  std::size_t seg = std::min<std::size_t>(x.size(), static_cast<std::size_t>(2.0 * rate));
  seg -= seg % 2;
  if (seg < 8) seg = std::min<std::size_t>(x.size() - x.size() % 2, 8);
  if (seg < 2) throw DomainError("psd: series too short");
  const std::size_t hop = seg / 2;
  const std::size_t nsegs = 1 + (x.size() - seg) / hop;

  // periodic Hann
  Series w(seg);
  for (std::size_t i = 0; i < seg; ++i)
    w[i] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(seg)));
  const double u = kernels::sum_squares(w.data(), seg);

  const std::size_t bins = seg / 2 + 1;

  // per-bin quadrature tables; the dot products below are the hot path
  std::vector<Series> cos_t(bins, Series(seg)), sin_t(bins, Series(seg));
  for (std::size_t k = 0; k < bins; ++k) {
    const double wk = kTwoPi * static_cast<double>(k) / static_cast<double>(seg);
    for (std::size_t i = 0; i < seg; ++i) {
      cos_t[k][i] = std::cos(wk * static_cast<double>(i));
      sin_t[k][i] = std::sin(wk * static_cast<double>(i));
    }
  }

  Psd out;
  out.segment_len = seg;
  out.freqs_hz.resize(bins);
  out.power.assign(bins, 0.0);
  for (std::size_t k = 0; k < bins; ++k)
    out.freqs_hz[k] = static_cast<double>(k) * rate / static_cast<double>(seg);

  Series windowed(seg);
  for (std::size_t s = 0; s < nsegs; ++s) {
    const double* seg_data = x.data() + s * hop;
    const double mean = kernels::sum(seg_data, seg) / static_cast<double>(seg);
    kernels::affine(1.0, seg_data, -mean, windowed.data(), seg);
    kernels::mul(windowed.data(), w.data(), windowed.data(), seg);
    for (std::size_t k = 0; k < bins; ++k) {
      const double re = kernels::dot(windowed.data(), cos_t[k].data(), seg);
      const double im = kernels::dot(windowed.data(), sin_t[k].data(), seg);
      out.power[k] += re * re + im * im;
    }
  }

  const double norm = 1.0 / (rate * u * static_cast<double>(nsegs));
  for (std::size_t k = 0; k < bins; ++k) {
    const bool edge = k == 0 || (seg % 2 == 0 && k == bins - 1);
    out.power[k] *= norm * (edge ? 1.0 : 2.0);
  }
  return out;
}

double band_power(const Psd& p, double lo_hz, double hi_hz) {
  if (!(lo_hz < hi_hz)) throw DomainError("band_power: need lo < hi");
  if (p.freqs_hz.empty()) throw DomainError("band_power: empty psd");
  if (hi_hz > p.freqs_hz.back() + 1e-9)
    throw DomainError("band_power: band extends past the psd range");
  const double df = p.freqs_hz.size() > 1 ? p.freqs_hz[1] - p.freqs_hz[0] : 0.0;
  double acc = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < p.freqs_hz.size(); ++k) {
    if (p.freqs_hz[k] >= lo_hz - 1e-12 && p.freqs_hz[k] <= hi_hz + 1e-12) {
      acc += p.power[k] * df;
      any = true;
    }
  }
  if (!any) throw DomainError("band_power: no psd bins inside the band");
  return acc;
}

double rms(const Series& x) {
  if (x.empty()) throw DomainError("rms: empty series");
  const double mean = kernels::sum(x.data(), x.size()) / static_cast<double>(x.size());
  Series centered(x.size());
  kernels::affine(1.0, x.data(), -mean, centered.data(), x.size());
  return std::sqrt(kernels::sum_squares(centered.data(), centered.size()) /
                   static_cast<double>(centered.size()));
}

double tone_amplitude(const Series& x, double f_hz, double rate) {
  if (x.empty()) throw DomainError("tone_amplitude: empty series");
  const double mean = kernels::sum(x.data(), x.size()) / static_cast<double>(x.size());
  const std::size_t n = x.size();
  Series c(n), s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = kTwoPi * f_hz * static_cast<double>(i) / rate;
    c[i] = std::cos(w);
    s[i] = std::sin(w);
  }
  Series centered(n);
  kernels::affine(1.0, x.data(), -mean, centered.data(), n);
  const double re = kernels::dot(centered.data(), c.data(), n);
  const double im = kernels::dot(centered.data(), s.data(), n);
  return 2.0 * std::sqrt(re * re + im * im) / static_cast<double>(n);
}

CmrrResult cmrr_estimate(const MultiSeries& decoded, double rate, double cm_amplitude_v,
                         double cm_hz, double floor_amplitude_v) {
  if (decoded.empty()) throw DomainError("cmrr_estimate: no channels");
  if (!(cm_amplitude_v > 0.0)) throw DomainError("cmrr_estimate: common-mode amplitude unknown");

  double acc = 0.0;
  for (const auto& ch : decoded) {
    const Psd p = psd(ch, rate);
    const double lo = std::max(0.0, cm_hz - 2.0);
    const double hi = std::min(p.freqs_hz.back(), cm_hz + 2.0);
    const double amp = std::sqrt(2.0 * band_power(p, lo, hi));
    acc += amp;
  }
  const double residual = acc / static_cast<double>(decoded.size());

  CmrrResult r;
  if (residual <= floor_amplitude_v) {
    r.floor_limited = true;
    r.db = 20.0 * std::log10(cm_amplitude_v / std::max(floor_amplitude_v, 1e-300));
  } else {
    r.db = 20.0 * std::log10(cm_amplitude_v / residual);
  }
  return r;
}

std::vector<AlphaWindow> detect_alpha(const MultiSeries& channels, double rate,
                                      const std::vector<std::size_t>& occipital_idx,
                                      const DetectorConfig& cfg) {
  if (occipital_idx.empty()) throw ConfigError("detect_alpha: montage has no occipital set");
  if (channels.empty()) throw DomainError("detect_alpha: no channels");
  const std::size_t n = channels.front().size();
  const auto win = static_cast<std::size_t>(std::lround(cfg.alpha_window_s * rate));
  std::vector<AlphaWindow> out;
  if (win == 0 || n < win) return out;

  for (std::size_t start = 0; start + win <= n; start += win) {
    double alpha_p = 0.0, base_p = 0.0;
    for (auto idx : occipital_idx) {
      if (idx >= channels.size()) throw ConfigError("detect_alpha: occipital index out of range");
      Series slice(channels[idx].begin() + static_cast<std::ptrdiff_t>(start),
                   channels[idx].begin() + static_cast<std::ptrdiff_t>(start + win));
      const Psd p = psd(slice, rate);
      alpha_p += band_power(p, 8.0, 14.0);
      base_p += band_power(p, 4.0, 30.0) - band_power(p, 8.0, 14.0);
    }
    AlphaWindow w{};
    w.start_s = static_cast<double>(start) / rate;
    w.end_s = static_cast<double>(start + win) / rate;
    w.ratio = base_p > 0.0 ? alpha_p / base_p : (alpha_p > 0.0 ? 1e12 : 0.0);
    w.alpha = w.ratio >= cfg.alpha_ratio_threshold;
    out.push_back(w);
  }
  return out;
}

namespace {

std::vector<Interval> runs_to_intervals(const std::vector<char>& above, double rate,
                                        double merge_s, double min_s) {
  std::vector<Interval> raw;
  std::size_t i = 0;
  while (i < above.size()) {
    if (!above[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < above.size() && above[j]) ++j;
    raw.push_back({static_cast<double>(i) / rate, static_cast<double>(j) / rate});
    i = j;
  }
  // merge near-adjacent runs, then drop slivers
  std::vector<Interval> merged;
  for (const auto& r : raw) {
    if (!merged.empty() && r.start_s - merged.back().end_s <= merge_s)
      merged.back().end_s = r.end_s;
    else
      merged.push_back(r);
  }
  std::vector<Interval> out;
  for (const auto& r : merged)
    if (r.end_s - r.start_s >= min_s) out.push_back(r);
  return out;
}

}  // namespace

std::vector<Interval> detect_chew(const MultiSeries& channels, double rate,
                                  const DetectorConfig& cfg) {
  if (channels.empty()) throw DomainError("detect_chew: no channels");
  const std::size_t n = channels.front().size();
  if (n == 0) return {};
  const double hi = std::min(100.0, 0.45 * rate);
  BandpassSpec band{30.0, hi, 4};

  Series combined(n, 0.0);
  for (const auto& ch : channels) {
    Series f = bandpass(ch, band, rate);
    kernels::mul(f.data(), f.data(), f.data(), n);  // squared
    kernels::add(combined.data(), f.data(), combined.data(), n);
  }
  kernels::scale(1.0 / static_cast<double>(channels.size()), combined.data(), n);

  // trailing moving RMS
  const auto w = std::max<std::size_t>(1, static_cast<std::size_t>(cfg.chew_window_s * rate));
  Series mrms(n, 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += combined[i];
    if (i >= w) acc -= combined[i - w];
    const double cnt = static_cast<double>(std::min(i + 1, w));
    mrms[i] = std::sqrt(std::max(0.0, acc / cnt));
  }

  Series sorted = mrms;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2),
                   sorted.end());
  const double baseline = sorted[n / 2];
  const double threshold = cfg.chew_k * std::max(baseline, 1e-15);

  std::vector<char> above(n, 0);
  for (std::size_t i = 0; i < n; ++i) above[i] = mrms[i] > threshold;
  return runs_to_intervals(above, rate, cfg.chew_merge_s, cfg.chew_min_s);
}

std::vector<Interval> detect_blink(const MultiSeries& channels, double rate,
                                   const std::vector<std::size_t>& frontal_idx,
                                   const DetectorConfig& cfg) {
  if (frontal_idx.empty()) throw ConfigError("detect_blink: montage has no frontal set");
  if (channels.empty()) throw DomainError("detect_blink: no channels");
  const std::size_t n = channels.front().size();
  if (n == 0) return {};

  BandpassSpec band{0.5, 5.0, 2};
  Series peak(n, 0.0);
  for (auto idx : frontal_idx) {
    if (idx >= channels.size()) throw ConfigError("detect_blink: frontal index out of range");
    Series f = bandpass(channels[idx], band, rate);
    for (std::size_t i = 0; i < n; ++i) peak[i] = std::max(peak[i], std::fabs(f[i]));
  }

  std::vector<char> above(n, 0);
  for (std::size_t i = 0; i < n; ++i) above[i] = peak[i] > cfg.blink_threshold_v;
  return runs_to_intervals(above, rate, cfg.blink_refractory_s, 0.0);
}

}  // namespace ironstream
