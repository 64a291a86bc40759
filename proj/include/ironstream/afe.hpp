// SPDX-License-Identifier: Apache-2.0
#pragma once

// Analog-front-end model: per-input single-pole RC low-pass, bias-drive
// common-mode feedback, and the input-capacitor sanity rule. Deliberately
// single-stage (multi-stage input filtering degrades the amplifier's
// common-mode rejection and is unsupported).

#include <optional>
#include <string>
#include <vector>

#include "ironstream/scenario.hpp"

namespace ironstream {

struct RcFilterSpec {
  double cutoff_hz = 1000.0;

  void validate() const {
    if (!(cutoff_hz > 0.0)) throw ConfigError("rc filter: cutoff must be > 0");
  }
};

/// First-order magnitude response 1/sqrt(1 + (f/cutoff)^2).
double rc_response(const RcFilterSpec& spec, double f_hz);

/// Stateful one-pole discrete low-pass, usable sample by sample so the
/// acquisition can stream in chunks.
///
/// Mapping (documented): when cutoff < Nyquist the pole is placed so the
/// discrete -3 dB point sits exactly at the cutoff; at or above Nyquist the
/// impulse-invariant pole is used (the filter degenerates toward identity,
/// which is what an analog RC far above Nyquist looks like after sampling)
/// and the caller is handed an aliasing warning.
class OnePoleLowpass {
 public:
  OnePoleLowpass(const RcFilterSpec& spec, double rate);

  double step(double x) {
    y_ = y_ + alpha_ * (x - y_);
    return y_;
  }
  void process(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = step(x[i]);
  }

  bool aliasing() const { return aliasing_; }
  double alpha() const { return alpha_; }

 private:
  double alpha_ = 1.0;
  double y_ = 0.0;
  bool aliasing_ = false;
};

struct AfeResult {
  MultiSeries series;
  std::vector<std::string> warnings;
};

/// Applies the one-pole low-pass to every channel (fresh filter state per
/// call). Records an aliasing warning when rate <= 2 * cutoff but still
/// performs the operation.
AfeResult apply_afe(const MultiSeries& channels, const RcFilterSpec& spec, double rate);

struct BiasLoopSpec {
  bool enabled = true;
  std::vector<std::string> sensed_channels;  // must be non-empty when enabled
  double loop_rejection_db = 110.0;

  enum class Reference { internal };
  Reference bias_ref = Reference::internal;
};

struct BiasResult {
  MultiSeries corrected;
  Series residual_common_mode;  // instantaneous mean of sensed channels, post-loop
};

/// Common-mode feedback: the instantaneous common-mode is the mean of the
/// sensed channels; when enabled an inverted replica is driven back so the
/// residual equals input common-mode * 10^(-rejection/20). Differential
/// content passes untouched.
BiasResult bias_feedback(const MultiSeries& channels, const BiasLoopSpec& spec,
                         const std::vector<std::string>& channel_labels);

/// Capacitor rule on optional common-mode input caps: they should be 10-20x
/// smaller than the differential caps. Returns a warning string when the
/// ratio is violated, nullopt when fine or when either value is absent (<= 0).
std::optional<std::string> check_common_mode_caps(double cm_cap_farads, double diff_cap_farads);

}  // namespace ironstream
