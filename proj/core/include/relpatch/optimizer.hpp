#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "relpatch/model.hpp"

namespace relpatch {

/// Decoupled-weight-decay Adam. Moment buffers are keyed by parameter name
/// and created on first sight; shapes are checked on every step.
template <typename S>
class AdamW {
public:
  struct Hyper {
    double lr = 5e-4;  // overridden per step by the schedule
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
  };

  explicit AdamW(Hyper hyper = {}) : hyper_(hyper) {}

  /// Applies one update from the accumulated gradients, then leaves the
  /// gradients untouched (caller zeroes them).
  void step(std::vector<NamedTensor<S>>& params, double lr);

  std::int64_t step_count() const { return t_; }
  const Hyper& hyper() const { return hyper_; }

private:
  struct Moments {
    std::vector<double> m, v;
  };
  Hyper hyper_;
  std::unordered_map<std::string, Moments> state_;
  std::int64_t t_ = 0;
};

}  // namespace relpatch
