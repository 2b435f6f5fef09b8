#include "relpatch/optimizer.hpp"

#include <cmath>

namespace relpatch {

template <typename S>
void AdamW<S>::step(std::vector<NamedTensor<S>>& params, double lr) {
  ++t_;
  const double b1 = hyper_.beta1, b2 = hyper_.beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (auto& p : params) {
    auto vals = p.tensor.values();
    auto grad = p.tensor.grad();
    auto& mom = state_[p.name];
    if (mom.m.empty()) {
      mom.m.assign(vals.size(), 0.0);
      mom.v.assign(vals.size(), 0.0);
    } else if (mom.m.size() != vals.size()) {
      throw DimError("optimizer state for '" + p.name + "' has stale shape");
    }
    for (size_t i = 0; i < vals.size(); ++i) {
      const double g = static_cast<double>(grad[static_cast<std::int64_t>(i)]);
      mom.m[i] = b1 * mom.m[i] + (1.0 - b1) * g;
      mom.v[i] = b2 * mom.v[i] + (1.0 - b2) * g * g;
      const double m_hat = mom.m[i] / bias1;
      const double v_hat = mom.v[i] / bias2;
      double value = static_cast<double>(vals[static_cast<std::int64_t>(i)]);
      value -= lr * (m_hat / (std::sqrt(v_hat) + hyper_.eps) + hyper_.weight_decay * value);
      vals[static_cast<std::int64_t>(i)] = static_cast<S>(value);
    }
  }
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace relpatch
