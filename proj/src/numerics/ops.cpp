#include "trajformer/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace trajformer::nn {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) +
                         " vs " + shape_to_string(b.shape()));
  }
}

bool wants_grad(const detail::Node& self, std::size_t parent) {
  return self.parents[parent] && self.parents[parent]->requires_grad;
}

std::vector<double>& parent_grad(detail::Node& self, std::size_t parent) {
  return self.parents[parent]->grad_buffer();
}

const std::vector<double>& parent_value(const detail::Node& self, std::size_t parent) {
  return self.parents[parent]->value;
}

// outer/axis/inner decomposition for reductions along one axis.
struct AxisSplit {
  std::size_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " invalid for shape " +
                         shape_to_string(shape));
  }
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.len = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return Tensor::make_result(a.shape(), std::move(out), "add", {a, b}, [](detail::Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (!wants_grad(self, p)) continue;
      auto& g = parent_grad(self, p);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.numel());
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return Tensor::make_result(a.shape(), std::move(out), "sub", {a, b}, [](detail::Node& self) {
    if (wants_grad(self, 0)) {
      auto& g = parent_grad(self, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (wants_grad(self, 1)) {
      auto& g = parent_grad(self, 1);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.numel());
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return Tensor::make_result(a.shape(), std::move(out), "mul", {a, b}, [](detail::Node& self) {
    const auto& av = parent_value(self, 0);
    const auto& bv = parent_value(self, 1);
    if (wants_grad(self, 0)) {
      auto& g = parent_grad(self, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bv[i];
    }
    if (wants_grad(self, 1)) {
      auto& g = parent_grad(self, 1);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * av[i];
    }
  });
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (auto& v : out) v *= factor;
  return Tensor::make_result(x.shape(), std::move(out), "scale", {x},
                             [factor](detail::Node& self) {
                               auto& g = parent_grad(self, 0);
                               for (std::size_t i = 0; i < g.size(); ++i)
                                 g[i] += self.grad[i] * factor;
                             });
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (auto& v : out) v = v > 0.0 ? v : 0.0;
  return Tensor::make_result(x.shape(), std::move(out), "relu", {x}, [](detail::Node& self) {
    const auto& xv = parent_value(self, 0);
    auto& g = parent_grad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (xv[i] > 0.0) g[i] += self.grad[i];
  });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  if (x.rank() == 0 || bias.rank() != 1 || bias.dim(0) != x.shape().back()) {
    throw DimensionError("add_bias: bias " + shape_to_string(bias.shape()) +
                         " does not match last dimension of " + shape_to_string(x.shape()));
  }
  const std::size_t c = bias.numel();
  std::vector<double> out(x.data().begin(), x.data().end());
  const auto bv = bias.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i % c];
  return Tensor::make_result(x.shape(), std::move(out), "add_bias", {x, bias},
                             [c](detail::Node& self) {
                               if (wants_grad(self, 0)) {
                                 auto& g = parent_grad(self, 0);
                                 for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
                               }
                               if (wants_grad(self, 1)) {
                                 auto& g = parent_grad(self, 1);
                                 for (std::size_t i = 0; i < self.grad.size(); ++i)
                                   g[i % c] += self.grad[i];
                               }
                             });
}

Tensor apply_mask(const Tensor& x, std::span<const std::uint8_t> keep) {
  if (keep.size() != x.numel()) {
    throw DimensionError("apply_mask: mask of " + std::to_string(keep.size()) +
                         " entries for tensor " + shape_to_string(x.shape()));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!keep[i]) out[i] = 0.0;
  std::vector<std::uint8_t> saved(keep.begin(), keep.end());
  return Tensor::make_result(x.shape(), std::move(out), "apply_mask", {x},
                             [saved = std::move(saved)](detail::Node& self) {
                               auto& g = parent_grad(self, 0);
                               for (std::size_t i = 0; i < g.size(); ++i)
                                 if (saved[i]) g[i] += self.grad[i];
                             });
}

Tensor sum(const Tensor& x) {
  const auto xv = x.data();
  const double total = std::accumulate(xv.begin(), xv.end(), 0.0);
  return Tensor::make_result(Shape{}, {total}, "sum", {x}, [](detail::Node& self) {
    auto& g = parent_grad(self, 0);
    for (auto& v : g) v += self.grad[0];
  });
}

namespace {

// c[m,n] += a[m,k] * b[k,n]
void gemm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
              std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

// ga[m,k] += gc[m,n] * b[k,n]^T
void gemm_grad_a(const double* gc, const double* b, double* ga, std::size_t m, std::size_t k,
                 std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += gc[i * n + j] * b[p * n + j];
      ga[i * k + p] += acc;
    }
  }
}

// gb[k,n] += a[m,k]^T * gc[m,n]
void gemm_grad_b(const double* a, const double* gc, double* gb, std::size_t m, std::size_t k,
                 std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * gc[i * n + j];
    }
  }
}

}  // namespace

Tensor bmm(const Tensor& a, const Tensor& b) {
  if (a.rank() != 3 || b.rank() != 3 || a.dim(0) != b.dim(0) || a.dim(2) != b.dim(1)) {
    throw DimensionError("bmm: incompatible shapes " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()));
  }
  const std::size_t batch = a.dim(0), m = a.dim(1), k = a.dim(2), n = b.dim(2);
  std::vector<double> out(batch * m * n, 0.0);
  for (std::size_t s = 0; s < batch; ++s)
    gemm_acc(a.data().data() + s * m * k, b.data().data() + s * k * n, out.data() + s * m * n, m,
             k, n);
  return Tensor::make_result(
      Shape{batch, m, n}, std::move(out), "bmm", {a, b}, [batch, m, k, n](detail::Node& self) {
        const auto& av = parent_value(self, 0);
        const auto& bv = parent_value(self, 1);
        for (std::size_t s = 0; s < batch; ++s) {
          const double* gc = self.grad.data() + s * m * n;
          if (wants_grad(self, 0))
            gemm_grad_a(gc, bv.data() + s * k * n, parent_grad(self, 0).data() + s * m * k, m, k,
                        n);
          if (wants_grad(self, 1))
            gemm_grad_b(av.data() + s * m * k, gc, parent_grad(self, 1).data() + s * k * n, m, k,
                        n);
        }
      });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: incompatible shapes " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  gemm_acc(a.data().data(), b.data().data(), out.data(), m, k, n);
  return Tensor::make_result(Shape{m, n}, std::move(out), "matmul", {a, b},
                             [m, k, n](detail::Node& self) {
                               const auto& av = parent_value(self, 0);
                               const auto& bv = parent_value(self, 1);
                               if (wants_grad(self, 0))
                                 gemm_grad_a(self.grad.data(), bv.data(),
                                             parent_grad(self, 0).data(), m, k, n);
                               if (wants_grad(self, 1))
                                 gemm_grad_b(av.data(), self.grad.data(),
                                             parent_grad(self, 1).data(), m, k, n);
                             });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.rank() == 0 || weight.rank() != 2 || x.shape().back() != weight.dim(0)) {
    throw DimensionError("linear: input " + shape_to_string(x.shape()) + " vs weight " +
                         shape_to_string(weight.shape()));
  }
  const std::size_t k = weight.dim(0), n = weight.dim(1);
  const std::size_t m = x.numel() / k;
  Shape out_shape = x.shape();
  out_shape.back() = n;
  std::vector<double> out(m * n, 0.0);
  if (bias.defined()) {
    if (bias.rank() != 1 || bias.dim(0) != n)
      throw DimensionError("linear: bias " + shape_to_string(bias.shape()) + " for " +
                           std::to_string(n) + " outputs");
    const auto bv = bias.data();
    for (std::size_t i = 0; i < m; ++i) std::copy(bv.begin(), bv.end(), out.begin() + i * n);
  }
  gemm_acc(x.data().data(), weight.data().data(), out.data(), m, k, n);
  std::vector<Tensor> parents{x, weight};
  if (bias.defined()) parents.push_back(bias);
  return Tensor::make_result(std::move(out_shape), std::move(out), "linear", std::move(parents),
                             [m, k, n](detail::Node& self) {
                               const auto& xv = parent_value(self, 0);
                               const auto& wv = parent_value(self, 1);
                               if (wants_grad(self, 0))
                                 gemm_grad_a(self.grad.data(), wv.data(),
                                             parent_grad(self, 0).data(), m, k, n);
                               if (wants_grad(self, 1))
                                 gemm_grad_b(xv.data(), self.grad.data(),
                                             parent_grad(self, 1).data(), m, k, n);
                               if (self.parents.size() > 2 && wants_grad(self, 2)) {
                                 auto& g = parent_grad(self, 2);
                                 for (std::size_t i = 0; i < m; ++i)
                                   for (std::size_t j = 0; j < n; ++j)
                                     g[j] += self.grad[i * n + j];
                               }
                             });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: " + shape_to_string(x.shape()) + " -> " +
                         shape_to_string(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  return Tensor::make_result(std::move(shape), std::move(out), "reshape", {x},
                             [](detail::Node& self) {
                               auto& g = parent_grad(self, 0);
                               for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
                             });
}

namespace {

// Maps each output flat index to the input flat index for a permutation.
std::vector<std::size_t> permutation_map(const Shape& in_shape,
                                         const std::vector<std::size_t>& order) {
  const std::size_t rank = in_shape.size();
  std::vector<std::size_t> in_strides(rank, 1);
  for (std::size_t i = rank; i-- > 1;) in_strides[i - 1] = in_strides[i] * in_shape[i];
  Shape out_shape(rank);
  std::vector<std::size_t> strides(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    out_shape[i] = in_shape[order[i]];
    strides[i] = in_strides[order[i]];
  }
  const std::size_t n = shape_numel(in_shape);
  std::vector<std::size_t> map(n);
  std::vector<std::size_t> idx(rank, 0);
  std::size_t src = 0;
  for (std::size_t flat = 0; flat < n; ++flat) {
    map[flat] = src;
    for (std::size_t ax = rank; ax-- > 0;) {
      ++idx[ax];
      src += strides[ax];
      if (idx[ax] < out_shape[ax]) break;
      src -= strides[ax] * idx[ax];
      idx[ax] = 0;
    }
  }
  return map;
}

}  // namespace

Tensor permute(const Tensor& x, const std::vector<std::size_t>& order) {
  const std::size_t rank = x.rank();
  std::vector<std::size_t> check = order;
  std::sort(check.begin(), check.end());
  bool valid = check.size() == rank;
  for (std::size_t i = 0; valid && i < rank; ++i) valid = check[i] == i;
  if (!valid) throw DimensionError("permute: invalid axis order for " + shape_to_string(x.shape()));
  Shape out_shape(rank);
  for (std::size_t i = 0; i < rank; ++i) out_shape[i] = x.dim(order[i]);
  auto map = permutation_map(x.shape(), order);
  const auto xv = x.data();
  std::vector<double> out(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = xv[map[i]];
  return Tensor::make_result(std::move(out_shape), std::move(out), "permute", {x},
                             [map = std::move(map)](detail::Node& self) {
                               auto& g = parent_grad(self, 0);
                               for (std::size_t i = 0; i < map.size(); ++i)
                                 g[map[i]] += self.grad[i];
                             });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  const auto s = split_axis(x.shape(), axis);
  if (begin > end || end > s.len) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") outside axis of length " + std::to_string(s.len));
  }
  const std::size_t width = end - begin;
  Shape out_shape = x.shape();
  out_shape[axis] = width;
  std::vector<double> out(s.outer * width * s.inner);
  const auto xv = x.data();
  for (std::size_t o = 0; o < s.outer; ++o)
    std::copy_n(xv.begin() + (o * s.len + begin) * s.inner, width * s.inner,
                out.begin() + o * width * s.inner);
  return Tensor::make_result(std::move(out_shape), std::move(out), "slice", {x},
                             [s, begin, width](detail::Node& self) {
                               auto& g = parent_grad(self, 0);
                               for (std::size_t o = 0; o < s.outer; ++o)
                                 for (std::size_t i = 0; i < width * s.inner; ++i)
                                   g[(o * s.len + begin) * s.inner + i] +=
                                       self.grad[o * width * s.inner + i];
                             });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape& first = parts[0].shape();
  std::vector<std::size_t> lens;
  std::size_t total = 0;
  for (const auto& p : parts) {
    const Shape& sh = p.shape();
    bool ok = sh.size() == first.size() && axis < sh.size();
    for (std::size_t i = 0; ok && i < sh.size(); ++i) ok = i == axis || sh[i] == first[i];
    if (!ok)
      throw DimensionError("concat: " + shape_to_string(sh) + " incompatible with " +
                           shape_to_string(first));
    lens.push_back(sh[axis]);
    total += sh[axis];
  }
  auto s = split_axis(first, axis);
  Shape out_shape = first;
  out_shape[axis] = total;
  std::vector<double> out(s.outer * total * s.inner);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto pv = parts[p].data();
    const std::size_t w = lens[p] * s.inner;
    for (std::size_t o = 0; o < s.outer; ++o)
      std::copy_n(pv.begin() + o * w, w, out.begin() + o * total * s.inner + offset * s.inner);
    offset += lens[p];
  }
  std::vector<Tensor> parents(parts.begin(), parts.end());
  return Tensor::make_result(std::move(out_shape), std::move(out), "concat", std::move(parents),
                             [s, lens, total](detail::Node& self) {
                               std::size_t offset = 0;
                               for (std::size_t p = 0; p < lens.size(); ++p) {
                                 const std::size_t w = lens[p] * s.inner;
                                 if (wants_grad(self, p)) {
                                   auto& g = parent_grad(self, p);
                                   for (std::size_t o = 0; o < s.outer; ++o)
                                     for (std::size_t i = 0; i < w; ++i)
                                       g[o * w + i] +=
                                           self.grad[o * total * s.inner + offset * s.inner + i];
                                 }
                                 offset += lens[p];
                               }
                             });
}

Tensor cumsum(const Tensor& x, std::size_t axis) {
  const auto s = split_axis(x.shape(), axis);
  std::vector<double> out(x.data().begin(), x.data().end());
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t a = 1; a < s.len; ++a)
      for (std::size_t i = 0; i < s.inner; ++i)
        out[(o * s.len + a) * s.inner + i] += out[(o * s.len + a - 1) * s.inner + i];
  return Tensor::make_result(x.shape(), std::move(out), "cumsum", {x}, [s](detail::Node& self) {
    auto& g = parent_grad(self, 0);
    for (std::size_t o = 0; o < s.outer; ++o)
      for (std::size_t i = 0; i < s.inner; ++i) {
        double running = 0.0;
        for (std::size_t a = s.len; a-- > 0;) {
          running += self.grad[(o * s.len + a) * s.inner + i];
          g[(o * s.len + a) * s.inner + i] += running;
        }
      }
  });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  const auto s = split_axis(x.shape(), axis);
  const auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.len * s.inner + i;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < s.len; ++a) mx = std::max(mx, xv[base + a * s.inner]);
      double denom = 0.0;
      for (std::size_t a = 0; a < s.len; ++a) {
        const double e = std::exp(xv[base + a * s.inner] - mx);
        out[base + a * s.inner] = e;
        denom += e;
      }
      for (std::size_t a = 0; a < s.len; ++a) out[base + a * s.inner] /= denom;
    }
  return Tensor::make_result(x.shape(), std::move(out), "softmax", {x}, [s](detail::Node& self) {
    auto& g = parent_grad(self, 0);
    const auto& y = self.value;
    for (std::size_t o = 0; o < s.outer; ++o)
      for (std::size_t i = 0; i < s.inner; ++i) {
        const std::size_t base = o * s.len * s.inner + i;
        double dot = 0.0;
        for (std::size_t a = 0; a < s.len; ++a)
          dot += self.grad[base + a * s.inner] * y[base + a * s.inner];
        for (std::size_t a = 0; a < s.len; ++a) {
          const std::size_t idx = base + a * s.inner;
          g[idx] += y[idx] * (self.grad[idx] - dot);
        }
      }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  if (x.rank() == 0) throw DimensionError("layer_norm: scalar input");
  const std::size_t c = x.shape().back();
  if (gain.shape() != Shape{c} || bias.shape() != Shape{c}) {
    throw DimensionError("layer_norm: gain " + shape_to_string(gain.shape()) + " / bias " +
                         shape_to_string(bias.shape()) + " for input " +
                         shape_to_string(x.shape()));
  }
  const std::size_t rows = x.numel() / c;
  const auto xv = x.data();
  const auto gv = gain.data();
  const auto bv = bias.data();
  std::vector<double> out(xv.size());
  std::vector<double> xhat(xv.size());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * c;
    double mean = 0.0;
    for (std::size_t j = 0; j < c; ++j) mean += row[j];
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(c);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      xhat[r * c + j] = (row[j] - mean) * inv_std[r];
      out[r * c + j] = xhat[r * c + j] * gv[j] + bv[j];
    }
  }
  return Tensor::make_result(
      x.shape(), std::move(out), "layer_norm", {x, gain, bias},
      [c, rows, xhat = std::move(xhat), inv_std = std::move(inv_std)](detail::Node& self) {
        const auto& gv = parent_value(self, 1);
        if (wants_grad(self, 0)) {
          auto& g = parent_grad(self, 0);
          for (std::size_t r = 0; r < rows; ++r) {
            double mean_dy = 0.0, mean_dy_xhat = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
              const double dy = self.grad[r * c + j] * gv[j];
              mean_dy += dy;
              mean_dy_xhat += dy * xhat[r * c + j];
            }
            mean_dy /= static_cast<double>(c);
            mean_dy_xhat /= static_cast<double>(c);
            for (std::size_t j = 0; j < c; ++j) {
              const double dy = self.grad[r * c + j] * gv[j];
              g[r * c + j] += inv_std[r] * (dy - mean_dy - xhat[r * c + j] * mean_dy_xhat);
            }
          }
        }
        if (wants_grad(self, 1)) {
          auto& g = parent_grad(self, 1);
          for (std::size_t i = 0; i < xhat.size(); ++i) g[i % c] += self.grad[i] * xhat[i];
        }
        if (wants_grad(self, 2)) {
          auto& g = parent_grad(self, 2);
          for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % c] += self.grad[i];
        }
      });
}

TemporalPadding TemporalPadding::symmetric(std::size_t kernel) {
  if (kernel == 0 || kernel % 2 == 0) {
    throw std::invalid_argument("temporal kernel size must be odd for same padding, got " +
                                std::to_string(kernel));
  }
  return {(kernel - 1) / 2, (kernel - 1) / 2};
}

TemporalPadding TemporalPadding::causal(std::size_t kernel) {
  if (kernel == 0) throw std::invalid_argument("temporal kernel size must be positive");
  return {kernel - 1, 0};
}

namespace {

void check_padding(std::size_t kernel, TemporalPadding padding) {
  if (padding.before + padding.after + 1 != kernel) {
    throw DimensionError("temporal padding " + std::to_string(padding.before) + "+" +
                         std::to_string(padding.after) + " does not preserve length for kernel " +
                         std::to_string(kernel));
  }
}

}  // namespace

Tensor conv2d_temporal(const Tensor& x, const Tensor& kernel, TemporalPadding padding) {
  if (x.rank() != 3 || kernel.rank() != 4 || kernel.dim(1) != 1 || kernel.dim(2) != x.dim(2)) {
    throw DimensionError("conv2d_temporal: input " + shape_to_string(x.shape()) + " vs kernel " +
                         shape_to_string(kernel.shape()));
  }
  const std::size_t t_len = x.dim(0), agents = x.dim(1), cin = x.dim(2);
  const std::size_t k_len = kernel.dim(0), cout = kernel.dim(3);
  check_padding(k_len, padding);
  const auto xv = x.data();
  const auto wv = kernel.data();
  std::vector<double> out(t_len * agents * cout, 0.0);
  // out[t,n,:] += x[t+k-before, n, :] * W[k]
  for (std::size_t t = 0; t < t_len; ++t)
    for (std::size_t k = 0; k < k_len; ++k) {
      const long src = static_cast<long>(t + k) - static_cast<long>(padding.before);
      if (src < 0 || src >= static_cast<long>(t_len)) continue;
      gemm_acc(xv.data() + static_cast<std::size_t>(src) * agents * cin, wv.data() + k * cin * cout,
               out.data() + t * agents * cout, agents, cin, cout);
    }
  return Tensor::make_result(
      Shape{t_len, agents, cout}, std::move(out), "conv2d_temporal", {x, kernel},
      [=](detail::Node& self) {
        const auto& xv = parent_value(self, 0);
        const auto& wv = parent_value(self, 1);
        for (std::size_t t = 0; t < t_len; ++t)
          for (std::size_t k = 0; k < k_len; ++k) {
            const long src = static_cast<long>(t + k) - static_cast<long>(padding.before);
            if (src < 0 || src >= static_cast<long>(t_len)) continue;
            const double* gc = self.grad.data() + t * agents * cout;
            const std::size_t s = static_cast<std::size_t>(src);
            if (wants_grad(self, 0))
              gemm_grad_a(gc, wv.data() + k * cin * cout,
                          parent_grad(self, 0).data() + s * agents * cin, agents, cin, cout);
            if (wants_grad(self, 1))
              gemm_grad_b(xv.data() + s * agents * cin, gc,
                          parent_grad(self, 1).data() + k * cin * cout, agents, cin, cout);
          }
      });
}

Tensor depthwise_conv_temporal(const Tensor& x, const Tensor& kernel, TemporalPadding padding) {
  if (x.rank() != 3 || kernel.rank() != 2 || kernel.dim(1) != x.dim(2)) {
    throw DimensionError("depthwise_conv_temporal: input " + shape_to_string(x.shape()) +
                         " vs kernel " + shape_to_string(kernel.shape()));
  }
  const std::size_t t_len = x.dim(0), agents = x.dim(1), ch = x.dim(2), k_len = kernel.dim(0);
  check_padding(k_len, padding);
  const auto xv = x.data();
  const auto wv = kernel.data();
  std::vector<double> out(xv.size(), 0.0);
  const std::size_t frame = agents * ch;
  for (std::size_t t = 0; t < t_len; ++t)
    for (std::size_t k = 0; k < k_len; ++k) {
      const long src = static_cast<long>(t + k) - static_cast<long>(padding.before);
      if (src < 0 || src >= static_cast<long>(t_len)) continue;
      const double* in = xv.data() + static_cast<std::size_t>(src) * frame;
      double* o = out.data() + t * frame;
      for (std::size_t i = 0; i < frame; ++i) o[i] += in[i] * wv[k * ch + i % ch];
    }
  return Tensor::make_result(
      x.shape(), std::move(out), "depthwise_conv_temporal", {x, kernel}, [=](detail::Node& self) {
        const auto& xv = parent_value(self, 0);
        const auto& wv = parent_value(self, 1);
        for (std::size_t t = 0; t < t_len; ++t)
          for (std::size_t k = 0; k < k_len; ++k) {
            const long src = static_cast<long>(t + k) - static_cast<long>(padding.before);
            if (src < 0 || src >= static_cast<long>(t_len)) continue;
            const std::size_t s = static_cast<std::size_t>(src);
            const double* gc = self.grad.data() + t * frame;
            if (wants_grad(self, 0)) {
              double* gx = parent_grad(self, 0).data() + s * frame;
              for (std::size_t i = 0; i < frame; ++i) gx[i] += gc[i] * wv[k * ch + i % ch];
            }
            if (wants_grad(self, 1)) {
              double* gw = parent_grad(self, 1).data() + k * ch;
              const double* in = xv.data() + s * frame;
              for (std::size_t i = 0; i < frame; ++i) gw[i % ch] += gc[i] * in[i];
            }
          }
      });
}

Tensor separable_conv(const Tensor& x, const Tensor& depthwise, const Tensor& pointwise,
                      TemporalPadding padding) {
  if (pointwise.rank() != 2 || x.rank() != 3 || pointwise.dim(0) != x.dim(2)) {
    throw DimensionError("separable_conv: pointwise kernel " +
                         shape_to_string(pointwise.shape()) + " vs input " +
                         shape_to_string(x.shape()));
  }
  return linear(depthwise_conv_temporal(x, depthwise, padding), pointwise);
}

Tensor dropout(const Tensor& x, double p, bool training, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::invalid_argument("dropout probability must lie in [0, 1), got " +
                                std::to_string(p));
  }
  if (!training || p == 0.0) return x;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> factors(x.numel());
  for (auto& f : factors) f = unit(rng) < p ? 0.0 : keep_scale;
  std::vector<double> out(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factors[i];
  return Tensor::make_result(x.shape(), std::move(out), "dropout", {x},
                             [factors = std::move(factors)](detail::Node& self) {
                               auto& g = parent_grad(self, 0);
                               for (std::size_t i = 0; i < g.size(); ++i)
                                 g[i] += self.grad[i] * factors[i];
                             });
}

AttentionOutput scaled_dot_product_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                                             const BoolTensor* mask) {
  if (q.rank() != 3 || k.rank() != 3 || v.rank() != 3 || q.dim(0) != k.dim(0) ||
      k.dim(0) != v.dim(0) || q.dim(2) != k.dim(2) || k.dim(1) != v.dim(1)) {
    throw DimensionError("attention: incompatible Q " + shape_to_string(q.shape()) + ", K " +
                         shape_to_string(k.shape()) + ", V " + shape_to_string(v.shape()));
  }
  const std::size_t batch = q.dim(0), lq = q.dim(1), lk = k.dim(1);
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(q.dim(2)));

  Tensor scores = scale(bmm(q, permute(k, {0, 2, 1})), inv_sqrt_dk);
  AttentionOutput result;
  std::vector<std::uint8_t> row_live;
  if (mask) {
    if (mask->shape != Shape{batch, lq, lk}) {
      throw DimensionError("attention: mask " + shape_to_string(mask->shape) +
                           " does not match scores " + shape_to_string(scores.shape()));
    }
    std::vector<double> bias(mask->numel());
    row_live.assign(batch * lq * lk, 1);
    for (std::size_t r = 0; r < batch * lq; ++r) {
      bool any = false;
      for (std::size_t j = 0; j < lk; ++j) {
        const bool ok = mask->values[r * lk + j] != 0;
        bias[r * lk + j] = ok ? 0.0 : kMaskedScore;
        any = any || ok;
      }
      if (!any) {
        ++result.empty_rows;
        std::fill_n(row_live.begin() + static_cast<long>(r * lk), lk, 0);
      }
    }
    scores = add(scores, Tensor(scores.shape(), std::move(bias)));
  }
  Tensor weights = softmax(scores, 2);
  if (result.empty_rows > 0) weights = apply_mask(weights, row_live);
  result.output = bmm(weights, v);
  result.weights = weights;
  return result;
}

}  // namespace trajformer::nn
