#pragma once

#include <random>
#include <vector>

#include "relpatch/tensor.hpp"

namespace testutil {

template <typename S>
relpatch::Tensor<S> randn(std::vector<int> shape, std::mt19937_64& rng, S scale = S(1),
                          bool requires_grad = false) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  std::vector<S> vals(static_cast<size_t>(n));
  for (auto& v : vals) v = static_cast<S>(dist(rng)) * scale;
  return relpatch::Tensor<S>::from_values(std::move(shape), std::move(vals), requires_grad);
}

}  // namespace testutil
