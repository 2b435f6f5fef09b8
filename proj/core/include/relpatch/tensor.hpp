#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "relpatch/errors.hpp"

namespace relpatch {

namespace detail {

template <typename S>
struct TensorImpl {
  std::vector<int> shape;
  std::vector<S> values;
  std::vector<S> grad;  // allocated lazily, zero-filled
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorImpl>> parents;
  std::function<void()> backward_fn;

  std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
  void ensure_grad() {
    if (grad.empty()) grad.assign(values.size(), S(0));
  }
};

}  // namespace detail

/// Returns true when ops record the graph needed for backward().
bool grad_enabled();

/// Scoped guard that disables graph recording (evaluation / finite differences).
class NoGradGuard {
public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
  bool prev_;
};

/// Dense row-major tensor with reverse-mode gradient support.
///
/// Copies are shallow (shared buffer); ops return fresh tensors that remember
/// their inputs, and backward() on a scalar accumulates gradients into every
/// reachable tensor with requires_grad set. S is float for training builds
/// and double for finite-difference checks.
template <typename S>
class Tensor {
public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor constant(std::vector<int> shape, S value, bool requires_grad = false);
  static Tensor from_values(std::vector<int> shape, std::vector<S> values,
                            bool requires_grad = false);
  static Tensor scalar(S value);

  bool defined() const { return impl_ != nullptr; }
  const std::vector<int>& shape() const { return impl_->shape; }
  int rank() const { return static_cast<int>(impl_->shape.size()); }
  int dim(int i) const { return impl_->shape[static_cast<size_t>(i)]; }
  std::int64_t size() const { return impl_ ? impl_->size() : 0; }

  std::span<S> values() { return impl_->values; }
  std::span<const S> values() const { return impl_->values; }

  bool requires_grad() const { return impl_ && impl_->requires_grad; }
  void set_requires_grad(bool b) { impl_->requires_grad = b; }
  bool has_grad() const { return impl_ && !impl_->grad.empty(); }
  std::span<S> grad() {
    impl_->ensure_grad();
    return impl_->grad;
  }
  std::span<const S> grad() const { return impl_->grad; }
  void zero_grad() {
    if (impl_) std::fill(impl_->grad.begin(), impl_->grad.end(), S(0));
  }

  /// Value of a single-element tensor.
  S item() const {
    if (size() != 1) throw DimError("item(): tensor has " + std::to_string(size()) + " elements");
    return impl_->values[0];
  }

  bool all_finite() const;

  /// Reverse-mode sweep from a scalar root. Gradients accumulate (+=) into
  /// every requires_grad tensor in the graph; call zero_grad between steps.
  void backward();

  /// Same values, detached from the graph (no parents, no grad tracking).
  Tensor detach() const;

  /// Deep copy of values only.
  Tensor clone() const;

  std::shared_ptr<detail::TensorImpl<S>> impl() const { return impl_; }

private:
  explicit Tensor(std::shared_ptr<detail::TensorImpl<S>> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<detail::TensorImpl<S>> impl_;

  template <typename T>
  friend Tensor<T> make_tensor(std::vector<int>, std::vector<T>);
};

template <typename S>
Tensor<S> make_tensor(std::vector<int> shape, std::vector<S> values);

namespace detail {

/// Marks `out` as produced from `parents` with gradient closure `fn`.
/// No-op when grad recording is off or no parent needs gradients.
template <typename S>
void attach(Tensor<S>& out, std::initializer_list<Tensor<S>> parents, std::function<void()> fn);

template <typename S>
void attach(Tensor<S>& out, const std::vector<Tensor<S>>& parents, std::function<void()> fn);

}  // namespace detail

// ---- elementwise ----
template <typename S> Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b);
template <typename S> Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b);
template <typename S> Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b);
template <typename S> Tensor<S> mul_scalar(const Tensor<S>& a, S factor);
/// Adds a length-D vector to every row of an n x D matrix.
template <typename S> Tensor<S> add_rowwise(const Tensor<S>& mat, const Tensor<S>& row);
template <typename S> Tensor<S> gelu(const Tensor<S>& x);
template <typename S> Tensor<S> sum(const Tensor<S>& x);

// ---- linear algebra ----
template <typename S> Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b);
/// a (m x k) times b^T (k x n) for b given as n x k.
template <typename S> Tensor<S> matmul_nt(const Tensor<S>& a, const Tensor<S>& b);

// ---- shape ----
template <typename S> Tensor<S> reshape(const Tensor<S>& x, std::vector<int> shape);
/// Row i of the result is row perm[i] of x; perm must be a bijection.
template <typename S> Tensor<S> permute_rows(const Tensor<S>& x, const std::vector<int>& perm);
template <typename S> Tensor<S> slice_rows(const Tensor<S>& x, int start, int count);
template <typename S> Tensor<S> slice_cols(const Tensor<S>& x, int start, int count);
template <typename S> Tensor<S> concat_rows(const std::vector<Tensor<S>>& parts);
template <typename S> Tensor<S> concat_cols(const std::vector<Tensor<S>>& parts);
template <typename S> Tensor<S> concat_rows(std::initializer_list<Tensor<S>> parts) {
  return concat_rows(std::vector<Tensor<S>>(parts));
}
template <typename S> Tensor<S> concat_cols(std::initializer_list<Tensor<S>> parts) {
  return concat_cols(std::vector<Tensor<S>>(parts));
}

// ---- normalization and losses ----
template <typename S> Tensor<S> softmax_rows(const Tensor<S>& x);
template <typename S>
Tensor<S> layernorm(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta,
                    S eps = S(1e-6));
/// Mean over rows of -log softmax(logits)[label].
template <typename S>
Tensor<S> softmax_ce(const Tensor<S>& logits, const std::vector<int>& labels);
/// Mean squared difference over all elements.
template <typename S> Tensor<S> mse(const Tensor<S>& pred, const Tensor<S>& target);

// ---- image ----
/// Bilinear interpolation, half-pixel centers, edge clamped. img is {C,H,W}.
template <typename S>
Tensor<S> bilinear_resize(const Tensor<S>& img, int out_h, int out_w);

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace relpatch
