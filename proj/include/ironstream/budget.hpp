// SPDX-License-Identifier: Apache-2.0
#pragma once

// Battery budget arithmetic with the documented default draw breakdown.
// The component split is illustrative (the converter figure comes from its
// 42 mW @ 5 V rating; MCU/radio absorb the remainder of the 133.33 mA
// total) — every value is overridable.

#include "ironstream/errors.hpp"

namespace ironstream {

struct PowerBreakdown {
  double adc_ma_per_device = 8.4;  // 42 mW at 5 V
  double mcu_ma = 84.93;
  double radio_ma = 40.0;

  double total_ma(int devices = 1) const {
    return adc_ma_per_device * devices + mcu_ma + radio_ma;
  }
};

/// hours = capacity / draw; throws DomainError for non-positive inputs.
double battery_hours(double capacity_mah, double draw_ma);

}  // namespace ironstream
