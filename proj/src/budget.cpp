// SPDX-License-Identifier: Apache-2.0

#include "ironstream/budget.hpp"

namespace ironstream {

double battery_hours(double capacity_mah, double draw_ma) {
  if (!(capacity_mah > 0.0)) throw DomainError("budget: capacity must be > 0 mAh");
  if (!(draw_ma > 0.0)) throw DomainError("budget: draw must be > 0 mA");
  return capacity_mah / draw_ma;
}

}  // namespace ironstream
