#include "sfd/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "sfd/error.hpp"

namespace sfd::ops {

namespace {

using detail::make_result;
using detail::TensorImpl;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw InvalidInput(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                       shape_string(b.shape()));
  }
}

void require_rank(const Tensor& a, std::size_t rank, const char* op) {
  if (a.rank() != rank) {
    throw InvalidInput(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                       shape_string(a.shape()));
  }
}

// Accumulates into an input's gradient only if it participates in autodiff.
template <typename F>
void accumulate(const std::shared_ptr<TensorImpl>& input, F&& f) {
  if (!input->requires_grad) return;
  f(input->grad_buffer());
}

template <typename Fwd, typename Dfdx>
Tensor unary(const Tensor& a, Fwd fwd, Dfdx dfdx) {
  auto in = a.data();
  std::vector<double> out(in.size());
  std::transform(in.begin(), in.end(), out.begin(), fwd);
  auto ai = a.impl();
  return make_result(a.shape(), std::move(out), {a}, [ai, dfdx](const TensorImpl& o) {
    accumulate(ai, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * dfdx(ai->data[i], o.data[i]);
    });
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto x = a.data(), y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  auto ai = a.impl(), bi = b.impl();
  return make_result(a.shape(), std::move(out), {a, b}, [ai, bi](const TensorImpl& o) {
    accumulate(ai, [&](auto& g) { for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i]; });
    accumulate(bi, [&](auto& g) { for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i]; });
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  auto x = a.data(), y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  auto ai = a.impl(), bi = b.impl();
  return make_result(a.shape(), std::move(out), {a, b}, [ai, bi](const TensorImpl& o) {
    accumulate(ai, [&](auto& g) { for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i]; });
    accumulate(bi, [&](auto& g) { for (std::size_t i = 0; i < g.size(); ++i) g[i] -= o.grad[i]; });
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  auto x = a.data(), y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  auto ai = a.impl(), bi = b.impl();
  return make_result(a.shape(), std::move(out), {a, b}, [ai, bi](const TensorImpl& o) {
    accumulate(ai, [&](auto& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * bi->data[i];
    });
    accumulate(bi, [&](auto& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * ai->data[i];
    });
  });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(a, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double value) {
  return unary(a, [value](double v) { return v + value; }, [](double, double) { return 1.0; });
}

Tensor relu(const Tensor& a) {
  return unary(a, [](double v) { return v > 0.0 ? v : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor exp(const Tensor& a) {
  return unary(a, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary(a, [](double v) { return std::log(v); }, [](double x, double) { return 1.0 / x; });
}

Tensor abs(const Tensor& a) {
  return unary(a, [](double v) { return std::abs(v); },
               [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor& a) {
  return unary(a, [](double v) { return v * v; }, [](double x, double) { return 2.0 * x; });
}

Tensor sqrt(const Tensor& a) {
  return unary(a, [](double v) { return std::sqrt(v); },
               [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Tensor reciprocal(const Tensor& a) {
  return unary(a, [](double v) { return 1.0 / v; }, [](double, double y) { return -y * y; });
}

Tensor clamp_min(const Tensor& a, double floor) {
  return unary(a, [floor](double v) { return v < floor ? floor : v; },
               [floor](double x, double) { return x < floor ? 0.0 : 1.0; });
}

Tensor sum(const Tensor& a) {
  auto x = a.data();
  double s = 0.0;
  for (double v : x) s += v;
  auto ai = a.impl();
  return make_result({}, {s}, {a}, [ai](const TensorImpl& o) {
    accumulate(ai, [&](auto& g) { for (auto& v : g) v += o.grad[0]; });
  });
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw InvalidInput("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor sum_rows(const Tensor& a) {
  require_rank(a, 2, "sum_rows");
  const std::size_t n = a.dim(0), m = a.dim(1);
  auto x = a.data();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i] += x[i * m + j];
  auto ai = a.impl();
  return make_result({n}, std::move(out), {a}, [ai, n, m](const TensorImpl& o) {
    accumulate(ai, [&](auto& g) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) g[i * m + j] += o.grad[i];
    });
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  if (b.dim(0) != k) {
    throw InvalidInput("matmul: inner dimensions differ " + shape_string(a.shape()) + " x " +
                       shape_string(b.shape()));
  }
  std::vector<double> out(n * m);
  Map(out.data(), n, m).noalias() = ConstMap(a.data().data(), n, k) * ConstMap(b.data().data(), k, m);
  auto ai = a.impl(), bi = b.impl();
  return make_result({n, m}, std::move(out), {a, b}, [ai, bi, n, k, m](const TensorImpl& o) {
    ConstMap go(o.grad.data(), n, m);
    accumulate(ai, [&](auto& g) {
      Map(g.data(), n, k).noalias() += go * ConstMap(bi->data.data(), k, m).transpose();
    });
    accumulate(bi, [&](auto& g) {
      Map(g.data(), k, m).noalias() += ConstMap(ai->data.data(), n, k).transpose() * go;
    });
  });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  require_rank(x, 2, "add_bias");
  require_rank(bias, 1, "add_bias");
  const std::size_t n = x.dim(0), m = x.dim(1);
  if (bias.dim(0) != m) throw InvalidInput("add_bias: bias length does not match columns");
  auto xv = x.data(), bv = bias.data();
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = xv[i * m + j] + bv[j];
  auto xi = x.impl(), bi = bias.impl();
  return make_result({n, m}, std::move(out), {x, bias}, [xi, bi, n, m](const TensorImpl& o) {
    accumulate(xi, [&](auto& g) { for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i]; });
    accumulate(bi, [&](auto& g) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) g[j] += o.grad[i * m + j];
    });
  });
}

Tensor scale_rows(const Tensor& x, const Tensor& factors) {
  require_rank(x, 2, "scale_rows");
  require_rank(factors, 1, "scale_rows");
  const std::size_t n = x.dim(0), m = x.dim(1);
  if (factors.dim(0) != n) throw InvalidInput("scale_rows: one factor per row required");
  auto xv = x.data(), fv = factors.data();
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = xv[i * m + j] * fv[i];
  auto xi = x.impl(), fi = factors.impl();
  return make_result({n, m}, std::move(out), {x, factors}, [xi, fi, n, m](const TensorImpl& o) {
    accumulate(xi, [&](auto& g) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) g[i * m + j] += o.grad[i * m + j] * fi->data[i];
    });
    accumulate(fi, [&](auto& g) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) g[i] += o.grad[i * m + j] * xi->data[i * m + j];
    });
  });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "concat_cols");
  require_rank(b, 2, "concat_cols");
  const std::size_t n = a.dim(0), ma = a.dim(1), mb = b.dim(1);
  if (b.dim(0) != n) throw InvalidInput("concat_cols: row counts differ");
  auto av = a.data(), bv = b.data();
  const std::size_t m = ma + mb;
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(av.begin() + i * ma, ma, out.begin() + i * m);
    std::copy_n(bv.begin() + i * mb, mb, out.begin() + i * m + ma);
  }
  auto ai = a.impl(), bi = b.impl();
  return make_result({n, m}, std::move(out), {a, b}, [ai, bi, n, ma, mb, m](const TensorImpl& o) {
    accumulate(ai, [&](auto& g) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < ma; ++j) g[i * ma + j] += o.grad[i * m + j];
    });
    accumulate(bi, [&](auto& g) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < mb; ++j) g[i * mb + j] += o.grad[i * m + ma + j];
    });
  });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  require_rank(a, 2, "slice_cols");
  const std::size_t n = a.dim(0), m = a.dim(1);
  if (begin > end || end > m) throw InvalidInput("slice_cols: range out of bounds");
  const std::size_t w = end - begin;
  auto av = a.data();
  std::vector<double> out(n * w);
  for (std::size_t i = 0; i < n; ++i) std::copy_n(av.begin() + i * m + begin, w, out.begin() + i * w);
  auto ai = a.impl();
  return make_result({n, w}, std::move(out), {a}, [ai, n, m, w, begin](const TensorImpl& o) {
    accumulate(ai, [&](auto& g) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < w; ++j) g[i * m + begin + j] += o.grad[i * w + j];
    });
  });
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows) {
  require_rank(a, 2, "gather_rows");
  const std::size_t n = a.dim(0), m = a.dim(1);
  auto av = a.data();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  std::vector<double> out(idx.size() * m);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= n) throw InvalidInput("gather_rows: row index out of range");
    std::copy_n(av.begin() + idx[r] * m, m, out.begin() + r * m);
  }
  auto ai = a.impl();
  return make_result({idx.size(), m}, std::move(out), {a}, [ai, idx, m](const TensorImpl& o) {
    accumulate(ai, [&](auto& g) {
      for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t j = 0; j < m; ++j) g[idx[r] * m + j] += o.grad[r * m + j];
    });
  });
}

Tensor l2_normalize_rows(const Tensor& a, double eps) {
  auto norms = sqrt(add_scalar(sum_rows(square(a)), eps));
  return scale_rows(a, reciprocal(norms));
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw InvalidInput("reshape: " + shape_string(a.shape()) + " -> " + shape_string(shape));
  }
  auto ai = a.impl();
  return make_result(std::move(shape), a.to_vector(), {a}, [ai](const TensorImpl& o) {
    accumulate(ai, [&](auto& g) { for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i]; });
  });
}

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t stride,
              std::size_t padding) {
  require_rank(x, 4, "conv2d");
  require_rank(weight, 4, "conv2d");
  require_rank(bias, 1, "conv2d");
  const std::size_t batch = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t cout = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
  if (weight.dim(1) != cin) {
    throw InvalidInput("conv2d: input has " + std::to_string(cin) + " channels, weight expects " +
                       std::to_string(weight.dim(1)));
  }
  if (bias.dim(0) != cout) throw InvalidInput("conv2d: bias length does not match output channels");
  if (stride == 0) throw InvalidInput("conv2d: stride must be positive");
  if (h + 2 * padding < kh || w + 2 * padding < kw) throw InvalidInput("conv2d: kernel larger than input");
  const std::size_t ho = (h + 2 * padding - kh) / stride + 1;
  const std::size_t wo = (w + 2 * padding - kw) / stride + 1;
  const std::size_t plane = ho * wo;
  const std::size_t patch = cin * kh * kw;
  const std::size_t cols_w = batch * plane;

  // im2col over the whole batch: column index = b * plane + p.
  auto cols = std::make_shared<std::vector<double>>(patch * cols_w, 0.0);
  auto xv = x.data();
  for (std::size_t c = 0; c < cin; ++c)
    for (std::size_t ki = 0; ki < kh; ++ki)
      for (std::size_t kj = 0; kj < kw; ++kj) {
        double* row = cols->data() + ((c * kh + ki) * kw + kj) * cols_w;
        for (std::size_t b = 0; b < batch; ++b) {
          const double* src = xv.data() + (b * cin + c) * h * w;
          for (std::size_t oi = 0; oi < ho; ++oi) {
            const std::ptrdiff_t ii = static_cast<std::ptrdiff_t>(oi * stride + ki) - static_cast<std::ptrdiff_t>(padding);
            if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t oj = 0; oj < wo; ++oj) {
              const std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(oj * stride + kj) - static_cast<std::ptrdiff_t>(padding);
              if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(w)) continue;
              row[b * plane + oi * wo + oj] = src[ii * w + jj];
            }
          }
        }
      }

  RowMat result(cout, cols_w);
  result.noalias() = ConstMap(weight.data().data(), cout, patch) * ConstMap(cols->data(), patch, cols_w);
  auto bv = bias.data();
  std::vector<double> out(batch * cout * plane);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < cout; ++o) {
      double* dst = out.data() + (b * cout + o) * plane;
      const double* src = result.data() + o * cols_w + b * plane;
      for (std::size_t p = 0; p < plane; ++p) dst[p] = src[p] + bv[o];
    }

  auto xi = x.impl(), wi = weight.impl(), bi = bias.impl();
  return make_result(
      {batch, cout, ho, wo}, std::move(out), {x, weight, bias},
      [=](const TensorImpl& o) {
        RowMat gout(cout, cols_w);
        for (std::size_t b = 0; b < batch; ++b)
          for (std::size_t oc = 0; oc < cout; ++oc)
            std::copy_n(o.grad.data() + (b * cout + oc) * plane, plane, gout.data() + oc * cols_w + b * plane);
        accumulate(bi, [&](auto& g) {
          for (std::size_t oc = 0; oc < cout; ++oc) g[oc] += gout.row(oc).sum();
        });
        accumulate(wi, [&](auto& g) {
          Map(g.data(), cout, patch).noalias() += gout * ConstMap(cols->data(), patch, cols_w).transpose();
        });
        accumulate(xi, [&](auto& g) {
          RowMat gcols(patch, cols_w);
          gcols.noalias() = ConstMap(wi->data.data(), cout, patch).transpose() * gout;
          for (std::size_t c = 0; c < cin; ++c)
            for (std::size_t ki = 0; ki < kh; ++ki)
              for (std::size_t kj = 0; kj < kw; ++kj) {
                const double* row = gcols.data() + ((c * kh + ki) * kw + kj) * cols_w;
                for (std::size_t b = 0; b < batch; ++b) {
                  double* dst = g.data() + (b * cin + c) * h * w;
                  for (std::size_t oi = 0; oi < ho; ++oi) {
                    const std::ptrdiff_t ii = static_cast<std::ptrdiff_t>(oi * stride + ki) - static_cast<std::ptrdiff_t>(padding);
                    if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(h)) continue;
                    for (std::size_t oj = 0; oj < wo; ++oj) {
                      const std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(oj * stride + kj) - static_cast<std::ptrdiff_t>(padding);
                      if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(w)) continue;
                      dst[ii * w + jj] += row[b * plane + oi * wo + oj];
                    }
                  }
                }
              }
        });
      });
}

Tensor global_avg_pool(const Tensor& x) {
  require_rank(x, 4, "global_avg_pool");
  const std::size_t batch = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  if (plane == 0) throw InvalidInput("global_avg_pool: empty spatial extent");
  auto xv = x.data();
  std::vector<double> out(batch * c);
  for (std::size_t i = 0; i < batch * c; ++i) {
    double s = 0.0;
    for (std::size_t p = 0; p < plane; ++p) s += xv[i * plane + p];
    out[i] = s / static_cast<double>(plane);
  }
  auto xi = x.impl();
  return make_result({batch, c}, std::move(out), {x}, [xi, batch, c, plane](const TensorImpl& o) {
    accumulate(xi, [&](auto& g) {
      const double inv = 1.0 / static_cast<double>(plane);
      for (std::size_t i = 0; i < batch * c; ++i)
        for (std::size_t p = 0; p < plane; ++p) g[i * plane + p] += o.grad[i] * inv;
    });
  });
}

Tensor channel_project(const Tensor& x, const Tensor& basis) {
  require_rank(x, 4, "channel_project");
  require_rank(basis, 3, "channel_project");
  const std::size_t batch = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  if (basis.dim(0) != c || basis.dim(1) != x.dim(2) || basis.dim(2) != x.dim(3)) {
    throw InvalidInput("channel_project: basis " + shape_string(basis.shape()) + " incompatible with input " +
                       shape_string(x.shape()));
  }
  auto xv = x.data();
  auto basis_values = std::make_shared<std::vector<double>>(basis.to_vector());
  std::vector<double> out(batch * c);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t ch = 0; ch < c; ++ch) {
      double s = 0.0;
      const double* src = xv.data() + (b * c + ch) * plane;
      const double* bs = basis_values->data() + ch * plane;
      for (std::size_t p = 0; p < plane; ++p) s += src[p] * bs[p];
      out[b * c + ch] = s;
    }
  auto xi = x.impl();
  return make_result({batch, c}, std::move(out), {x}, [xi, basis_values, batch, c, plane](const TensorImpl& o) {
    accumulate(xi, [&](auto& g) {
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double go = o.grad[b * c + ch];
          const double* bs = basis_values->data() + ch * plane;
          double* dst = g.data() + (b * c + ch) * plane;
          for (std::size_t p = 0; p < plane; ++p) dst[p] += go * bs[p];
        }
    });
  });
}

Tensor scale_channels(const Tensor& x, const Tensor& gate) {
  require_rank(x, 4, "scale_channels");
  require_rank(gate, 2, "scale_channels");
  const std::size_t batch = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  if (gate.dim(0) != batch || gate.dim(1) != c) {
    throw InvalidInput("scale_channels: gate " + shape_string(gate.shape()) + " incompatible with " +
                       shape_string(x.shape()));
  }
  auto xv = x.data(), gv = gate.data();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < batch * c; ++i)
    for (std::size_t p = 0; p < plane; ++p) out[i * plane + p] = xv[i * plane + p] * gv[i];
  auto xi = x.impl(), gi = gate.impl();
  return make_result(x.shape(), std::move(out), {x, gate}, [xi, gi, batch, c, plane](const TensorImpl& o) {
    accumulate(xi, [&](auto& g) {
      for (std::size_t i = 0; i < batch * c; ++i)
        for (std::size_t p = 0; p < plane; ++p) g[i * plane + p] += o.grad[i * plane + p] * gi->data[i];
    });
    accumulate(gi, [&](auto& g) {
      for (std::size_t i = 0; i < batch * c; ++i) {
        double s = 0.0;
        for (std::size_t p = 0; p < plane; ++p) s += o.grad[i * plane + p] * xi->data[i * plane + p];
        g[i] += s;
      }
    });
  });
}

}  // namespace sfd::ops
