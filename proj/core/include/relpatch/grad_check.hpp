#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "relpatch/tensor.hpp"

namespace relpatch {

struct NamedParam {
  std::string name;
  TensorD tensor;
};

struct GradReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  double analytic = 0.0;  // analytic gradient at the worst element
  double numeric = 0.0;   // central-difference estimate at the worst element
};

// Compares reverse-mode gradients of the scalar f() against central finite
// differences, element by element. When max_elems_per_param > 0, a seeded
// random subsample of each parameter is probed instead of every element.
// f is re-evaluated with perturbed parameter values, so it must read the
// parameter tensors on every call. Throws NumericError if f is not finite.
GradReport grad_check(const std::function<TensorD()>& f, const std::vector<NamedParam>& params,
                      double eps = 1e-5, int max_elems_per_param = -1,
                      std::uint64_t seed = 0x9e3779b97f4a7c15ull);

}  // namespace relpatch
