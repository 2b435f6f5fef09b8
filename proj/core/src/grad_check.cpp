#include "relpatch/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relpatch/rng.hpp"

namespace relpatch {

GradReport grad_check(const std::function<TensorD()>& f, const std::vector<NamedParam>& params,
                      double eps, int max_elems_per_param, std::uint64_t seed) {
  if (eps <= 0) throw ArgError("grad_check: eps must be positive");

  for (const auto& p : params) {
    const_cast<TensorD&>(p.tensor).set_requires_grad(true);
    const_cast<TensorD&>(p.tensor).zero_grad();
  }

  TensorD loss = f();
  if (loss.size() != 1) throw ArgError("grad_check: f must return a scalar");
  if (!std::isfinite(loss.item())) throw NumericError("grad_check: f returned a non-finite value");
  loss.backward();

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) {
    auto g = const_cast<TensorD&>(p.tensor).grad();
    analytic.emplace_back(g.begin(), g.end());
  }

  GradReport report;
  auto rng = make_rng(seed);
  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto vals = const_cast<TensorD&>(params[pi].tensor).values();
    const std::int64_t n = static_cast<std::int64_t>(vals.size());

    std::vector<std::int64_t> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    if (max_elems_per_param > 0 && n > max_elems_per_param) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(static_cast<size_t>(max_elems_per_param));
    }

    for (std::int64_t i : idx) {
      const double saved = vals[i];
      double fp, fm;
      {
        NoGradGuard ng;
        vals[i] = saved + eps;
        fp = f().item();
        vals[i] = saved - eps;
        fm = f().item();
        vals[i] = saved;
      }
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw NumericError("grad_check: f returned a non-finite value under perturbation");
      const double numeric = (fp - fm) / (2 * eps);
      const double a = analytic[pi][static_cast<size_t>(i)];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-4});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_parameter = params[pi].name + "[" + std::to_string(i) + "]";
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace relpatch
