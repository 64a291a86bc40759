// SPDX-License-Identifier: Apache-2.0

#include "ironstream/afe.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ironstream/kernels.hpp"

namespace ironstream {

double rc_response(const RcFilterSpec& spec, double f_hz) {
  spec.validate();
  if (f_hz < 0.0) throw DomainError("rc_response: frequency must be >= 0");
  const double r = f_hz / spec.cutoff_hz;
  return 1.0 / std::sqrt(1.0 + r * r);
}

OnePoleLowpass::OnePoleLowpass(const RcFilterSpec& spec, double rate) {
  spec.validate();
  if (!(rate > 0.0)) throw ConfigError("rc filter: rate must be > 0");
  const double nyquist = rate / 2.0;
  if (spec.cutoff_hz < nyquist) {
    // Pole chosen so |H(e^{j*2*pi*fc/fs})| = 1/sqrt(2) exactly.
    const double c = std::cos(2.0 * M_PI * spec.cutoff_hz / rate);
    const double b = 2.0 - c;
    const double p = b - std::sqrt(b * b - 1.0);
    alpha_ = 1.0 - p;
  } else {
    aliasing_ = true;
    alpha_ = 1.0 - std::exp(-2.0 * M_PI * spec.cutoff_hz / rate);
  }
}

AfeResult apply_afe(const MultiSeries& channels, const RcFilterSpec& spec, double rate) {
  AfeResult result;
  result.series.reserve(channels.size());
  bool aliasing = false;
  for (const auto& ch : channels) {
    OnePoleLowpass lp(spec, rate);
    aliasing = aliasing || lp.aliasing();
    Series out(ch.size());
    lp.process(ch.data(), out.data(), ch.size());
    result.series.push_back(std::move(out));
  }
  if (channels.empty()) {
    OnePoleLowpass lp(spec, rate);
    aliasing = lp.aliasing();
  }
  if (aliasing) {
    std::ostringstream os;
    os << "afe: cutoff " << spec.cutoff_hz << " Hz is at or above Nyquist (" << rate / 2.0
       << " Hz); aliasing regime, filter approaches identity";
    result.warnings.push_back(os.str());
  }
  return result;
}

BiasResult bias_feedback(const MultiSeries& channels, const BiasLoopSpec& spec,
                         const std::vector<std::string>& channel_labels) {
  if (channels.empty()) throw ConfigError("bias_feedback: no channels");
  if (spec.loop_rejection_db < 0.0)
    throw ConfigError("bias_feedback: loop rejection must be >= 0 dB");
  const std::size_t n = channels.front().size();
  for (const auto& ch : channels)
    if (ch.size() != n) throw ConfigError("bias_feedback: ragged channel lengths");

  std::vector<std::size_t> sensed;
  if (spec.enabled) {
    if (spec.sensed_channels.empty())
      throw ConfigError("bias_feedback: loop enabled with empty sensed set");
    for (const auto& label : spec.sensed_channels) {
      auto it = std::find(channel_labels.begin(), channel_labels.end(), label);
      if (it == channel_labels.end())
        throw ConfigError("bias_feedback: sensed channel '" + label + "' not in montage");
      sensed.push_back(static_cast<std::size_t>(it - channel_labels.begin()));
    }
  }

  BiasResult result;
  result.corrected = channels;
  result.residual_common_mode.assign(n, 0.0);
  if (!spec.enabled) {
    // Loop off: output = input; report the raw common-mode of all channels.
    Series& cm = result.residual_common_mode;
    for (const auto& ch : channels) kernels::add(cm.data(), ch.data(), cm.data(), n);
    kernels::scale(1.0 / static_cast<double>(channels.size()), cm.data(), n);
    return result;
  }

  Series cm(n, 0.0);
  for (auto idx : sensed) kernels::add(cm.data(), channels[idx].data(), cm.data(), n);
  kernels::scale(1.0 / static_cast<double>(sensed.size()), cm.data(), n);

  const double k = std::pow(10.0, -spec.loop_rejection_db / 20.0);
  // out = in - (1 - k) * cm  =>  residual common-mode = k * cm
  for (auto& ch : result.corrected) kernels::axpy(-(1.0 - k), cm.data(), ch.data(), n);

  Series& res = result.residual_common_mode;
  for (auto idx : sensed) kernels::add(res.data(), result.corrected[idx].data(), res.data(), n);
  kernels::scale(1.0 / static_cast<double>(sensed.size()), res.data(), n);
  return result;
}

std::optional<std::string> check_common_mode_caps(double cm_cap_farads, double diff_cap_farads) {
  if (cm_cap_farads <= 0.0 || diff_cap_farads <= 0.0) return std::nullopt;
  if (cm_cap_farads > diff_cap_farads / 10.0) {
    std::ostringstream os;
    os << "common-mode input caps (" << cm_cap_farads * 1e12 << " pF) should be 10-20x smaller "
       << "than differential caps (" << diff_cap_farads * 1e12 << " pF) to protect CMRR";
    return os.str();
  }
  return std::nullopt;
}

}  // namespace ironstream
