#include "relpatch/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

namespace relpatch {

namespace {

thread_local bool g_grad_enabled = true;

std::string shape_str(const std::vector<int>& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

template <typename S>
void check_rank(const Tensor<S>& t, int rank, const char* op) {
  if (t.rank() != rank)
    throw DimError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                   shape_str(t.shape()));
}

template <typename S>
void check_same_shape(const Tensor<S>& a, const Tensor<S>& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                   shape_str(b.shape()));
}

template <typename S>
using MatMap = Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename S>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

// ---- Tensor basics ----

template <typename S>
Tensor<S> make_tensor(std::vector<int> shape, std::vector<S> values) {
  std::int64_t n = 1;
  for (int d : shape) {
    if (d < 0) throw DimError("negative dimension in shape " + shape_str(shape));
    n *= d;
  }
  if (n != static_cast<std::int64_t>(values.size()))
    throw DimError("shape " + shape_str(shape) + " does not match value count " +
                   std::to_string(values.size()));
  auto impl = std::make_shared<detail::TensorImpl<S>>();
  impl->shape = std::move(shape);
  impl->values = std::move(values);
  return Tensor<S>(std::move(impl));
}

template <typename S>
Tensor<S> Tensor<S>::zeros(std::vector<int> shape, bool requires_grad) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  auto t = make_tensor<S>(std::move(shape), std::vector<S>(static_cast<size_t>(n), S(0)));
  t.impl_->requires_grad = requires_grad;
  return t;
}

template <typename S>
Tensor<S> Tensor<S>::constant(std::vector<int> shape, S value, bool requires_grad) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  auto t = make_tensor<S>(std::move(shape), std::vector<S>(static_cast<size_t>(n), value));
  t.impl_->requires_grad = requires_grad;
  return t;
}

template <typename S>
Tensor<S> Tensor<S>::from_values(std::vector<int> shape, std::vector<S> values,
                                 bool requires_grad) {
  auto t = make_tensor<S>(std::move(shape), std::move(values));
  t.impl_->requires_grad = requires_grad;
  return t;
}

template <typename S>
Tensor<S> Tensor<S>::scalar(S value) {
  return make_tensor<S>({1}, {value});
}

template <typename S>
bool Tensor<S>::all_finite() const {
  for (S v : impl_->values)
    if (!std::isfinite(static_cast<double>(v))) return false;
  return true;
}

template <typename S>
Tensor<S> Tensor<S>::detach() const {
  auto impl = std::make_shared<detail::TensorImpl<S>>();
  impl->shape = impl_->shape;
  impl->values = impl_->values;
  return Tensor<S>(std::move(impl));
}

template <typename S>
Tensor<S> Tensor<S>::clone() const {
  auto t = detach();
  t.impl_->requires_grad = impl_->requires_grad;
  return t;
}

template <typename S>
void Tensor<S>::backward() {
  if (!impl_) throw ArgError("backward: undefined tensor");
  if (size() != 1) throw ArgError("backward: root must be a scalar");

  // Post-order DFS over parents; reversed, consumers run before producers.
  std::vector<detail::TensorImpl<S>*> order;
  std::unordered_set<detail::TensorImpl<S>*> seen;
  struct Frame {
    detail::TensorImpl<S>* node;
    size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({impl_.get(), 0});
  seen.insert(impl_.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      detail::TensorImpl<S>* p = f.node->parents[f.next_parent++].get();
      if (seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  impl_->ensure_grad();
  impl_->grad[0] += S(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward_fn) (*it)->backward_fn();
}

namespace detail {

template <typename S>
void attach(Tensor<S>& out, const std::vector<Tensor<S>>& parents, std::function<void()> fn) {
  if (!grad_enabled()) return;
  bool any = false;
  for (const auto& p : parents) any = any || p.requires_grad();
  if (!any) return;
  auto impl = out.impl();
  impl->requires_grad = true;
  for (const auto& p : parents) impl->parents.push_back(p.impl());
  impl->backward_fn = std::move(fn);
}

template <typename S>
void attach(Tensor<S>& out, std::initializer_list<Tensor<S>> parents, std::function<void()> fn) {
  attach(out, std::vector<Tensor<S>>(parents), std::move(fn));
}

}  // namespace detail

// ---- elementwise ----

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  check_same_shape(a, b, "add");
  std::vector<S> out(a.values().begin(), a.values().end());
  auto bv = b.values();
  for (std::int64_t i = 0; i < a.size(); ++i) out[static_cast<size_t>(i)] += bv[i];
  Tensor<S> r = make_tensor<S>(a.shape(), std::move(out));
  auto ai = a.impl(), bi = b.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {a, b}, [ai, bi, ri] {
    if (ai->requires_grad) {
      ai->ensure_grad();
      for (size_t i = 0; i < ri->grad.size(); ++i) ai->grad[i] += ri->grad[i];
    }
    if (bi->requires_grad) {
      bi->ensure_grad();
      for (size_t i = 0; i < ri->grad.size(); ++i) bi->grad[i] += ri->grad[i];
    }
  });
  return r;
}

template <typename S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
  check_same_shape(a, b, "sub");
  std::vector<S> out(a.values().begin(), a.values().end());
  auto bv = b.values();
  for (std::int64_t i = 0; i < a.size(); ++i) out[static_cast<size_t>(i)] -= bv[i];
  Tensor<S> r = make_tensor<S>(a.shape(), std::move(out));
  auto ai = a.impl(), bi = b.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {a, b}, [ai, bi, ri] {
    if (ai->requires_grad) {
      ai->ensure_grad();
      for (size_t i = 0; i < ri->grad.size(); ++i) ai->grad[i] += ri->grad[i];
    }
    if (bi->requires_grad) {
      bi->ensure_grad();
      for (size_t i = 0; i < ri->grad.size(); ++i) bi->grad[i] -= ri->grad[i];
    }
  });
  return r;
}

template <typename S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  check_same_shape(a, b, "mul");
  std::vector<S> out(static_cast<size_t>(a.size()));
  auto av = a.values();
  auto bv = b.values();
  for (std::int64_t i = 0; i < a.size(); ++i)
    out[static_cast<size_t>(i)] = av[i] * bv[i];
  Tensor<S> r = make_tensor<S>(a.shape(), std::move(out));
  auto ai = a.impl(), bi = b.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {a, b}, [ai, bi, ri] {
    if (ai->requires_grad) {
      ai->ensure_grad();
      for (size_t i = 0; i < ri->grad.size(); ++i) ai->grad[i] += ri->grad[i] * bi->values[i];
    }
    if (bi->requires_grad) {
      bi->ensure_grad();
      for (size_t i = 0; i < ri->grad.size(); ++i) bi->grad[i] += ri->grad[i] * ai->values[i];
    }
  });
  return r;
}

template <typename S>
Tensor<S> mul_scalar(const Tensor<S>& a, S factor) {
  std::vector<S> out(static_cast<size_t>(a.size()));
  auto av = a.values();
  for (std::int64_t i = 0; i < a.size(); ++i) out[static_cast<size_t>(i)] = av[i] * factor;
  Tensor<S> r = make_tensor<S>(a.shape(), std::move(out));
  auto ai = a.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {a}, [ai, ri, factor] {
    ai->ensure_grad();
    for (size_t i = 0; i < ri->grad.size(); ++i) ai->grad[i] += ri->grad[i] * factor;
  });
  return r;
}

template <typename S>
Tensor<S> add_rowwise(const Tensor<S>& mat, const Tensor<S>& row) {
  check_rank(mat, 2, "add_rowwise");
  const int n = mat.dim(0), d = mat.dim(1);
  if (row.size() != d)
    throw DimError("add_rowwise: row length " + std::to_string(row.size()) +
                   " does not match matrix width " + std::to_string(d));
  std::vector<S> out(mat.values().begin(), mat.values().end());
  auto rv = row.values();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) out[static_cast<size_t>(i) * d + j] += rv[j];
  Tensor<S> r = make_tensor<S>(mat.shape(), std::move(out));
  auto mi = mat.impl(), rwi = row.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {mat, row}, [mi, rwi, ri, n, d] {
    if (mi->requires_grad) {
      mi->ensure_grad();
      for (size_t i = 0; i < ri->grad.size(); ++i) mi->grad[i] += ri->grad[i];
    }
    if (rwi->requires_grad) {
      rwi->ensure_grad();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) rwi->grad[j] += ri->grad[static_cast<size_t>(i) * d + j];
    }
  });
  return r;
}

template <typename S>
Tensor<S> gelu(const Tensor<S>& x) {
  // tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3)))
  const S k = static_cast<S>(0.7978845608028654);  // sqrt(2/pi)
  const S c = static_cast<S>(0.044715);
  std::vector<S> out(static_cast<size_t>(x.size()));
  auto xv = x.values();
  for (std::int64_t i = 0; i < x.size(); ++i) {
    S v = xv[i];
    out[static_cast<size_t>(i)] = S(0.5) * v * (S(1) + std::tanh(k * (v + c * v * v * v)));
  }
  Tensor<S> r = make_tensor<S>(x.shape(), std::move(out));
  auto xi = x.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {x}, [xi, ri, k, c] {
    xi->ensure_grad();
    for (size_t i = 0; i < ri->grad.size(); ++i) {
      S v = xi->values[i];
      S u = k * (v + c * v * v * v);
      S t = std::tanh(u);
      S du = k * (S(1) + S(3) * c * v * v);
      S dy = S(0.5) * (S(1) + t) + S(0.5) * v * (S(1) - t * t) * du;
      xi->grad[i] += ri->grad[i] * dy;
    }
  });
  return r;
}

template <typename S>
Tensor<S> sum(const Tensor<S>& x) {
  S acc = 0;
  for (S v : x.values()) acc += v;
  Tensor<S> r = Tensor<S>::scalar(acc);
  auto xi = x.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {x}, [xi, ri] {
    xi->ensure_grad();
    for (size_t i = 0; i < xi->grad.size(); ++i) xi->grad[i] += ri->grad[0];
  });
  return r;
}

// ---- linear algebra ----

template <typename S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  check_rank(a, 2, "matmul");
  check_rank(b, 2, "matmul");
  const int m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
  if (k != k2)
    throw DimError("matmul: inner dimensions " + std::to_string(k) + " vs " + std::to_string(k2));
  Tensor<S> r = Tensor<S>::zeros({m, n});
  {
    ConstMatMap<S> A(a.values().data(), m, k);
    ConstMatMap<S> B(b.values().data(), k, n);
    MatMap<S> C(r.values().data(), m, n);
    C.noalias() = A * B;
  }
  auto ai = a.impl(), bi = b.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {a, b}, [ai, bi, ri, m, k, n] {
    ConstMatMap<S> G(ri->grad.data(), m, n);
    if (ai->requires_grad) {
      ai->ensure_grad();
      ConstMatMap<S> B(bi->values.data(), k, n);
      MatMap<S> dA(ai->grad.data(), m, k);
      dA.noalias() += G * B.transpose();
    }
    if (bi->requires_grad) {
      bi->ensure_grad();
      ConstMatMap<S> A(ai->values.data(), m, k);
      MatMap<S> dB(bi->grad.data(), k, n);
      dB.noalias() += A.transpose() * G;
    }
  });
  return r;
}

template <typename S>
Tensor<S> matmul_nt(const Tensor<S>& a, const Tensor<S>& b) {
  check_rank(a, 2, "matmul_nt");
  check_rank(b, 2, "matmul_nt");
  const int m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (k != b.dim(1))
    throw DimError("matmul_nt: inner dimensions " + std::to_string(k) + " vs " +
                   std::to_string(b.dim(1)));
  Tensor<S> r = Tensor<S>::zeros({m, n});
  {
    ConstMatMap<S> A(a.values().data(), m, k);
    ConstMatMap<S> B(b.values().data(), n, k);
    MatMap<S> C(r.values().data(), m, n);
    C.noalias() = A * B.transpose();
  }
  auto ai = a.impl(), bi = b.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {a, b}, [ai, bi, ri, m, k, n] {
    ConstMatMap<S> G(ri->grad.data(), m, n);
    if (ai->requires_grad) {
      ai->ensure_grad();
      ConstMatMap<S> B(bi->values.data(), n, k);
      MatMap<S> dA(ai->grad.data(), m, k);
      dA.noalias() += G * B;
    }
    if (bi->requires_grad) {
      bi->ensure_grad();
      ConstMatMap<S> A(ai->values.data(), m, k);
      MatMap<S> dB(bi->grad.data(), n, k);
      dB.noalias() += G.transpose() * A;
    }
  });
  return r;
}

// ---- shape ----

template <typename S>
Tensor<S> reshape(const Tensor<S>& x, std::vector<int> shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  if (n != x.size())
    throw DimError("reshape: cannot view " + std::to_string(x.size()) + " elements as " +
                   shape_str(shape));
  Tensor<S> r = make_tensor<S>(std::move(shape),
                               std::vector<S>(x.values().begin(), x.values().end()));
  auto xi = x.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {x}, [xi, ri] {
    xi->ensure_grad();
    for (size_t i = 0; i < ri->grad.size(); ++i) xi->grad[i] += ri->grad[i];
  });
  return r;
}

template <typename S>
Tensor<S> permute_rows(const Tensor<S>& x, const std::vector<int>& perm) {
  check_rank(x, 2, "permute_rows");
  const int n = x.dim(0), d = x.dim(1);
  if (static_cast<int>(perm.size()) != n)
    throw DimError("permute_rows: permutation has " + std::to_string(perm.size()) +
                   " entries for " + std::to_string(n) + " rows");
  std::vector<char> seen(static_cast<size_t>(n), 0);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[static_cast<size_t>(p)])
      throw ArgError("permute_rows: not a permutation of [0," + std::to_string(n) + ")");
    seen[static_cast<size_t>(p)] = 1;
  }
  std::vector<S> out(static_cast<size_t>(n) * d);
  auto xv = x.values();
  for (int i = 0; i < n; ++i)
    std::copy(xv.begin() + static_cast<size_t>(perm[static_cast<size_t>(i)]) * d,
              xv.begin() + static_cast<size_t>(perm[static_cast<size_t>(i)] + 1) * d,
              out.begin() + static_cast<size_t>(i) * d);
  Tensor<S> r = make_tensor<S>({n, d}, std::move(out));
  auto xi = x.impl();
  auto* ri = r.impl().get();
  auto p = perm;
  detail::attach(r, {x}, [xi, ri, p, n, d] {
    xi->ensure_grad();
    for (int i = 0; i < n; ++i) {
      const size_t src = static_cast<size_t>(i) * d;
      const size_t dst = static_cast<size_t>(p[static_cast<size_t>(i)]) * d;
      for (int j = 0; j < d; ++j) xi->grad[dst + j] += ri->grad[src + j];
    }
  });
  return r;
}

template <typename S>
Tensor<S> slice_rows(const Tensor<S>& x, int start, int count) {
  check_rank(x, 2, "slice_rows");
  const int n = x.dim(0), d = x.dim(1);
  if (start < 0 || count < 0 || start + count > n)
    throw IndexError("slice_rows: range [" + std::to_string(start) + "," +
                     std::to_string(start + count) + ") out of " + std::to_string(n));
  std::vector<S> out(static_cast<size_t>(count) * d);
  auto xv = x.values();
  std::copy(xv.begin() + static_cast<size_t>(start) * d,
            xv.begin() + static_cast<size_t>(start + count) * d, out.begin());
  Tensor<S> r = make_tensor<S>({count, d}, std::move(out));
  auto xi = x.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {x}, [xi, ri, start, d] {
    xi->ensure_grad();
    const size_t off = static_cast<size_t>(start) * d;
    for (size_t i = 0; i < ri->grad.size(); ++i) xi->grad[off + i] += ri->grad[i];
  });
  return r;
}

template <typename S>
Tensor<S> slice_cols(const Tensor<S>& x, int start, int count) {
  check_rank(x, 2, "slice_cols");
  const int n = x.dim(0), d = x.dim(1);
  if (start < 0 || count < 0 || start + count > d)
    throw IndexError("slice_cols: range [" + std::to_string(start) + "," +
                     std::to_string(start + count) + ") out of " + std::to_string(d));
  std::vector<S> out(static_cast<size_t>(n) * count);
  auto xv = x.values();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < count; ++j)
      out[static_cast<size_t>(i) * count + j] = xv[static_cast<size_t>(i) * d + start + j];
  Tensor<S> r = make_tensor<S>({n, count}, std::move(out));
  auto xi = x.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {x}, [xi, ri, n, d, start, count] {
    xi->ensure_grad();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < count; ++j)
        xi->grad[static_cast<size_t>(i) * d + start + j] +=
            ri->grad[static_cast<size_t>(i) * count + j];
  });
  return r;
}

template <typename S>
Tensor<S> concat_rows(const std::vector<Tensor<S>>& parts) {
  if (parts.empty()) throw ArgError("concat_rows: no parts");
  const int d = parts[0].dim(1);
  int total = 0;
  for (const auto& p : parts) {
    check_rank(p, 2, "concat_rows");
    if (p.dim(1) != d) throw DimError("concat_rows: width mismatch");
    total += p.dim(0);
  }
  std::vector<S> out;
  out.reserve(static_cast<size_t>(total) * d);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  Tensor<S> r = make_tensor<S>({total, d}, std::move(out));
  std::vector<std::shared_ptr<detail::TensorImpl<S>>> impls;
  for (const auto& p : parts) impls.push_back(p.impl());
  auto* ri = r.impl().get();
  detail::attach(r, parts, [impls, ri] {
    size_t off = 0;
    for (const auto& pi : impls) {
      const size_t len = pi->values.size();
      if (pi->requires_grad) {
        pi->ensure_grad();
        for (size_t i = 0; i < len; ++i) pi->grad[i] += ri->grad[off + i];
      }
      off += len;
    }
  });
  return r;
}

template <typename S>
Tensor<S> concat_cols(const std::vector<Tensor<S>>& parts) {
  if (parts.empty()) throw ArgError("concat_cols: no parts");
  const int n = parts[0].dim(0);
  int total = 0;
  for (const auto& p : parts) {
    check_rank(p, 2, "concat_cols");
    if (p.dim(0) != n) throw DimError("concat_cols: row count mismatch");
    total += p.dim(1);
  }
  std::vector<S> out(static_cast<size_t>(n) * total);
  int col = 0;
  for (const auto& p : parts) {
    const int w = p.dim(1);
    auto pv = p.values();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < w; ++j)
        out[static_cast<size_t>(i) * total + col + j] = pv[static_cast<size_t>(i) * w + j];
    col += w;
  }
  Tensor<S> r = make_tensor<S>({n, total}, std::move(out));
  std::vector<std::shared_ptr<detail::TensorImpl<S>>> impls;
  std::vector<int> widths;
  for (const auto& p : parts) {
    impls.push_back(p.impl());
    widths.push_back(p.dim(1));
  }
  auto* ri = r.impl().get();
  detail::attach(r, parts, [impls, widths, ri, n, total] {
    int col = 0;
    for (size_t pi = 0; pi < impls.size(); ++pi) {
      const int w = widths[pi];
      if (impls[pi]->requires_grad) {
        impls[pi]->ensure_grad();
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < w; ++j)
            impls[pi]->grad[static_cast<size_t>(i) * w + j] +=
                ri->grad[static_cast<size_t>(i) * total + col + j];
      }
      col += w;
    }
  });
  return r;
}

// ---- normalization and losses ----

template <typename S>
Tensor<S> softmax_rows(const Tensor<S>& x) {
  check_rank(x, 2, "softmax_rows");
  const int n = x.dim(0), k = x.dim(1);
  if (k == 0) throw DimError("softmax_rows: zero columns");
  std::vector<S> out(static_cast<size_t>(n) * k);
  auto xv = x.values();
  for (int i = 0; i < n; ++i) {
    const S* row = &xv[static_cast<size_t>(i) * k];
    S mx = row[0];
    for (int j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    S denom = 0;
    for (int j = 0; j < k; ++j) {
      S e = std::exp(row[j] - mx);
      out[static_cast<size_t>(i) * k + j] = e;
      denom += e;
    }
    for (int j = 0; j < k; ++j) out[static_cast<size_t>(i) * k + j] /= denom;
  }
  Tensor<S> r = make_tensor<S>(x.shape(), std::move(out));
  auto xi = x.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {x}, [xi, ri, n, k] {
    xi->ensure_grad();
    for (int i = 0; i < n; ++i) {
      const S* y = &ri->values[static_cast<size_t>(i) * k];
      const S* gy = &ri->grad[static_cast<size_t>(i) * k];
      S dot = 0;
      for (int j = 0; j < k; ++j) dot += y[j] * gy[j];
      for (int j = 0; j < k; ++j)
        xi->grad[static_cast<size_t>(i) * k + j] += y[j] * (gy[j] - dot);
    }
  });
  return r;
}

template <typename S>
Tensor<S> layernorm(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta, S eps) {
  check_rank(x, 2, "layernorm");
  const int n = x.dim(0), d = x.dim(1);
  if (d == 0) throw DimError("layernorm: zero feature dimension");
  if (gamma.size() != d || beta.size() != d)
    throw DimError("layernorm: gamma/beta length must equal " + std::to_string(d));
  std::vector<S> out(static_cast<size_t>(n) * d);
  std::vector<S> inv_std(static_cast<size_t>(n));
  std::vector<S> xhat(static_cast<size_t>(n) * d);
  auto xv = x.values();
  auto gv = gamma.values();
  auto bv = beta.values();
  for (int i = 0; i < n; ++i) {
    const S* row = &xv[static_cast<size_t>(i) * d];
    S mean = 0;
    for (int j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<S>(d);
    S var = 0;
    for (int j = 0; j < d; ++j) {
      S c = row[j] - mean;
      var += c * c;
    }
    var /= static_cast<S>(d);
    S istd = S(1) / std::sqrt(var + eps);
    inv_std[static_cast<size_t>(i)] = istd;
    for (int j = 0; j < d; ++j) {
      S xh = (row[j] - mean) * istd;
      xhat[static_cast<size_t>(i) * d + j] = xh;
      out[static_cast<size_t>(i) * d + j] = gv[j] * xh + bv[j];
    }
  }
  Tensor<S> r = make_tensor<S>(x.shape(), std::move(out));
  auto xi = x.impl(), gi = gamma.impl(), bi = beta.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {x, gamma, beta},
                 [xi, gi, bi, ri, n, d, inv_std = std::move(inv_std), xhat = std::move(xhat)] {
    for (int i = 0; i < n; ++i) {
      const S* gy = &ri->grad[static_cast<size_t>(i) * d];
      const S* xh = &xhat[static_cast<size_t>(i) * d];
      if (gi->requires_grad) {
        gi->ensure_grad();
        for (int j = 0; j < d; ++j) gi->grad[j] += gy[j] * xh[j];
      }
      if (bi->requires_grad) {
        bi->ensure_grad();
        for (int j = 0; j < d; ++j) bi->grad[j] += gy[j];
      }
      if (xi->requires_grad) {
        xi->ensure_grad();
        // dxhat = gy * gamma; dx = istd * (dxhat - mean(dxhat) - xhat * mean(dxhat*xhat))
        S sum_dxh = 0, sum_dxh_xh = 0;
        for (int j = 0; j < d; ++j) {
          S dxh = gy[j] * gi->values[j];
          sum_dxh += dxh;
          sum_dxh_xh += dxh * xh[j];
        }
        const S istd = inv_std[static_cast<size_t>(i)];
        const S inv_d = S(1) / static_cast<S>(d);
        for (int j = 0; j < d; ++j) {
          S dxh = gy[j] * gi->values[j];
          xi->grad[static_cast<size_t>(i) * d + j] +=
              istd * (dxh - sum_dxh * inv_d - xh[j] * sum_dxh_xh * inv_d);
        }
      }
    }
  });
  return r;
}

template <typename S>
Tensor<S> softmax_ce(const Tensor<S>& logits, const std::vector<int>& labels) {
  check_rank(logits, 2, "softmax_ce");
  const int n = logits.dim(0), k = logits.dim(1);
  if (static_cast<int>(labels.size()) != n)
    throw DimError("softmax_ce: " + std::to_string(labels.size()) + " labels for " +
                   std::to_string(n) + " rows");
  for (int i = 0; i < n; ++i)
    if (labels[static_cast<size_t>(i)] < 0 || labels[static_cast<size_t>(i)] >= k)
      throw IndexError("softmax_ce: label " + std::to_string(labels[static_cast<size_t>(i)]) +
                       " out of [0," + std::to_string(k) + ") at row " + std::to_string(i));
  auto xv = logits.values();
  // stash softmax for the backward pass
  auto probs = std::make_shared<std::vector<S>>(static_cast<size_t>(n) * k);
  S total = 0;
  for (int i = 0; i < n; ++i) {
    const S* row = &xv[static_cast<size_t>(i) * k];
    S mx = row[0];
    for (int j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    S denom = 0;
    for (int j = 0; j < k; ++j) denom += std::exp(row[j] - mx);
    S lse = mx + std::log(denom);
    total += lse - row[labels[static_cast<size_t>(i)]];
    for (int j = 0; j < k; ++j)
      (*probs)[static_cast<size_t>(i) * k + j] = std::exp(row[j] - lse);
  }
  Tensor<S> r = Tensor<S>::scalar(total / static_cast<S>(n));
  auto xi = logits.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {logits}, [xi, ri, probs, labels, n, k] {
    xi->ensure_grad();
    const S g = ri->grad[0] / static_cast<S>(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j) {
        S p = (*probs)[static_cast<size_t>(i) * k + j];
        S onehot = (j == labels[static_cast<size_t>(i)]) ? S(1) : S(0);
        xi->grad[static_cast<size_t>(i) * k + j] += g * (p - onehot);
      }
  });
  return r;
}

template <typename S>
Tensor<S> mse(const Tensor<S>& pred, const Tensor<S>& target) {
  check_same_shape(pred, target, "mse");
  if (pred.size() == 0) throw DimError("mse: empty tensors");
  auto pv = pred.values();
  auto tv = target.values();
  S total = 0;
  for (std::int64_t i = 0; i < pred.size(); ++i) {
    S dv = pv[i] - tv[i];
    total += dv * dv;
  }
  Tensor<S> r = Tensor<S>::scalar(total / static_cast<S>(pred.size()));
  auto pi = pred.impl(), ti = target.impl();
  auto* ri = r.impl().get();
  const S inv_n = S(1) / static_cast<S>(pred.size());
  detail::attach(r, {pred, target}, [pi, ti, ri, inv_n] {
    const S g = ri->grad[0] * S(2) * inv_n;
    if (pi->requires_grad) {
      pi->ensure_grad();
      for (size_t i = 0; i < pi->values.size(); ++i)
        pi->grad[i] += g * (pi->values[i] - ti->values[i]);
    }
    if (ti->requires_grad) {
      ti->ensure_grad();
      for (size_t i = 0; i < ti->values.size(); ++i)
        ti->grad[i] -= g * (pi->values[i] - ti->values[i]);
    }
  });
  return r;
}

// ---- image ----

template <typename S>
Tensor<S> bilinear_resize(const Tensor<S>& img, int out_h, int out_w) {
  check_rank(img, 3, "bilinear_resize");
  const int c = img.dim(0), h = img.dim(1), w = img.dim(2);
  if (h < 1 || w < 1 || out_h < 1 || out_w < 1)
    throw DimError("bilinear_resize: zero-size image or target");
  // Half-pixel centers: source = (dst + 0.5) * in/out - 0.5, clamped to the
  // valid range so corner samples never read outside the image.
  struct Axis {
    int lo, hi;
    S frac;
  };
  auto build = [](int out_n, int in_n) {
    std::vector<Axis> ax(static_cast<size_t>(out_n));
    const double scale = static_cast<double>(in_n) / out_n;
    for (int o = 0; o < out_n; ++o) {
      double s = (o + 0.5) * scale - 0.5;
      if (s < 0) s = 0;
      if (s > in_n - 1) s = in_n - 1;
      int lo = static_cast<int>(s);
      int hi = std::min(lo + 1, in_n - 1);
      ax[static_cast<size_t>(o)] = {lo, hi, static_cast<S>(s - lo)};
    }
    return ax;
  };
  const auto ay = build(out_h, h);
  const auto axs = build(out_w, w);
  std::vector<S> out(static_cast<size_t>(c) * out_h * out_w);
  auto iv = img.values();
  for (int ch = 0; ch < c; ++ch) {
    const S* plane = &iv[static_cast<size_t>(ch) * h * w];
    for (int oy = 0; oy < out_h; ++oy) {
      const Axis& ya = ay[static_cast<size_t>(oy)];
      for (int ox = 0; ox < out_w; ++ox) {
        const Axis& xa = axs[static_cast<size_t>(ox)];
        S tl = plane[static_cast<size_t>(ya.lo) * w + xa.lo];
        S tr = plane[static_cast<size_t>(ya.lo) * w + xa.hi];
        S bl = plane[static_cast<size_t>(ya.hi) * w + xa.lo];
        S br = plane[static_cast<size_t>(ya.hi) * w + xa.hi];
        S top = tl + (tr - tl) * xa.frac;
        S bot = bl + (br - bl) * xa.frac;
        out[(static_cast<size_t>(ch) * out_h + oy) * out_w + ox] = top + (bot - top) * ya.frac;
      }
    }
  }
  Tensor<S> r = make_tensor<S>({c, out_h, out_w}, std::move(out));
  auto ii = img.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {img}, [ii, ri, ay, axs, c, h, w, out_h, out_w] {
    ii->ensure_grad();
    for (int ch = 0; ch < c; ++ch) {
      S* gplane = &ii->grad[static_cast<size_t>(ch) * h * w];
      for (int oy = 0; oy < out_h; ++oy) {
        const Axis& ya = ay[static_cast<size_t>(oy)];
        for (int ox = 0; ox < out_w; ++ox) {
          const Axis& xa = axs[static_cast<size_t>(ox)];
          S g = ri->grad[(static_cast<size_t>(ch) * out_h + oy) * out_w + ox];
          gplane[static_cast<size_t>(ya.lo) * w + xa.lo] += g * (1 - ya.frac) * (1 - xa.frac);
          gplane[static_cast<size_t>(ya.lo) * w + xa.hi] += g * (1 - ya.frac) * xa.frac;
          gplane[static_cast<size_t>(ya.hi) * w + xa.lo] += g * ya.frac * (1 - xa.frac);
          gplane[static_cast<size_t>(ya.hi) * w + xa.hi] += g * ya.frac * xa.frac;
        }
      }
    }
  });
  return r;
}

// ---- explicit instantiations ----

#define RELPATCH_INSTANTIATE(S)                                                            \
  template class Tensor<S>;                                                                \
  template Tensor<S> make_tensor<S>(std::vector<int>, std::vector<S>);                     \
  template void detail::attach<S>(Tensor<S>&, std::initializer_list<Tensor<S>>,            \
                                  std::function<void()>);                                  \
  template void detail::attach<S>(Tensor<S>&, const std::vector<Tensor<S>>&,               \
                                  std::function<void()>);                                  \
  template Tensor<S> add<S>(const Tensor<S>&, const Tensor<S>&);                           \
  template Tensor<S> sub<S>(const Tensor<S>&, const Tensor<S>&);                           \
  template Tensor<S> mul<S>(const Tensor<S>&, const Tensor<S>&);                           \
  template Tensor<S> mul_scalar<S>(const Tensor<S>&, S);                                   \
  template Tensor<S> add_rowwise<S>(const Tensor<S>&, const Tensor<S>&);                   \
  template Tensor<S> gelu<S>(const Tensor<S>&);                                            \
  template Tensor<S> sum<S>(const Tensor<S>&);                                             \
  template Tensor<S> matmul<S>(const Tensor<S>&, const Tensor<S>&);                        \
  template Tensor<S> matmul_nt<S>(const Tensor<S>&, const Tensor<S>&);                     \
  template Tensor<S> reshape<S>(const Tensor<S>&, std::vector<int>);                       \
  template Tensor<S> permute_rows<S>(const Tensor<S>&, const std::vector<int>&);           \
  template Tensor<S> slice_rows<S>(const Tensor<S>&, int, int);                    \
  template Tensor<S> slice_cols<S>(const Tensor<S>&, int, int);                            \
  template Tensor<S> concat_rows<S>(const std::vector<Tensor<S>>&);                        \
  template Tensor<S> concat_cols<S>(const std::vector<Tensor<S>>&);                        \
  template Tensor<S> softmax_rows<S>(const Tensor<S>&);                                    \
  template Tensor<S> layernorm<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&, S); \
  template Tensor<S> softmax_ce<S>(const Tensor<S>&, const std::vector<int>&);             \
  template Tensor<S> mse<S>(const Tensor<S>&, const Tensor<S>&);                           \
  template Tensor<S> bilinear_resize<S>(const Tensor<S>&, int, int);

RELPATCH_INSTANTIATE(float)
RELPATCH_INSTANTIATE(double)

#undef RELPATCH_INSTANTIATE

}  // namespace relpatch
