#pragma once

#include <cmath>
#include <cstdint>

#include "relpatch/errors.hpp"

namespace relpatch {

/// Linear warmup from zero to lr_max, then cosine decay to zero.
inline double lr_at(std::int64_t step, std::int64_t total_steps, std::int64_t warmup_steps,
                    double lr_max) {
  if (warmup_steps < 0 || total_steps <= 0 || warmup_steps >= total_steps)
    throw ConfigError("lr schedule: need 0 <= warmup < total steps");
  if (step < 0 || step > total_steps)
    throw ArgError("lr schedule: step " + std::to_string(step) + " outside [0," +
                   std::to_string(total_steps) + "]");
  if (step < warmup_steps)
    return lr_max * static_cast<double>(step) / static_cast<double>(warmup_steps);
  const double progress =
      static_cast<double>(step - warmup_steps) / static_cast<double>(total_steps - warmup_steps);
  return lr_max * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
}

}  // namespace relpatch
