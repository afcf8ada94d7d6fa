// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdrcnn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>

#include "sdrcnn/error.hpp"

namespace sdrcnn::nn {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using MatMap = Eigen::Map<RowMatrix>;

void require_same(const Shape4& a, const Shape4& b, const char* op) {
  if (!(a == b))
    throw ShapeError(std::string(op) + ": shape mismatch " + a.str() + " vs " +
                     b.str());
}

void check_pointwise(const Tensor& x, const ConvWeights& w) {
  if (w.kind != ConvKind::kPointwise)
    throw ShapeError("conv_pointwise: weights are not pointwise");
  if (w.in_channels() != x.shape().c)
    throw ShapeError("conv_pointwise: input " + x.shape().str() +
                     " does not match weights " + w.weight.shape().str());
}

void check_depthwise(const Tensor& x, const ConvWeights& w) {
  if (w.kind != ConvKind::kDepthwise)
    throw ShapeError("conv_depthwise: weights are not depthwise");
  const Shape4& s = x.shape();
  if (w.in_channels() != s.c)
    throw ShapeError("conv_depthwise: input " + s.str() +
                     " does not match weights " + w.weight.shape().str());
  const int k = w.kernel();
  if (k % 2 == 0) throw ShapeError("conv_depthwise: kernel must be odd");
  const int pad = k / 2;
  if (k > s.h + 2 * pad || k > s.w + 2 * pad)
    throw ShapeError("conv_depthwise: kernel larger than padded input " +
                     s.str());
}

// Cubic convolution kernel, a = -0.5.
double cubic(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

struct Taps {
  std::array<int, 4> index;  // index[1] is the anchor tap
  std::array<double, 4> weight;
};

std::vector<Taps> cubic_taps(int in_size, int factor) {
  std::vector<Taps> taps(static_cast<std::size_t>(in_size) * factor);
  for (int o = 0; o < in_size * factor; ++o) {
    const double src = (o + 0.5) / factor - 0.5;
    const double base = std::floor(src);
    const double t = src - base;
    const int i0 = static_cast<int>(base);
    Taps& tp = taps[o];
    for (int k = 0; k < 4; ++k) {
      tp.index[k] = std::clamp(i0 - 1 + k, 0, in_size - 1);
      tp.weight[k] = cubic(t + 1.0 - k);
    }
  }
  return taps;
}

double apply_taps(const Taps& tp, const double* src, std::size_t stride) {
  const double anchor = src[tp.index[1] * stride];
  return anchor + tp.weight[0] * (src[tp.index[0] * stride] - anchor) +
         tp.weight[2] * (src[tp.index[2] * stride] - anchor) +
         tp.weight[3] * (src[tp.index[3] * stride] - anchor);
}

void scatter_taps(const Taps& tp, double g, double* dst, std::size_t stride) {
  dst[tp.index[0] * stride] += tp.weight[0] * g;
  dst[tp.index[2] * stride] += tp.weight[2] * g;
  dst[tp.index[3] * stride] += tp.weight[3] * g;
  dst[tp.index[1] * stride] +=
      (1.0 - tp.weight[0] - tp.weight[2] - tp.weight[3]) * g;
}

}  // namespace

Tensor conv_pointwise(const Tensor& x, const ConvWeights& w) {
  check_pointwise(x, w);
  const Shape4& s = x.shape();
  const int out_c = w.out_channels();
  Tensor y({s.n, out_c, s.h, s.w});
  const auto hw = static_cast<Eigen::Index>(s.plane());
  ConstMatMap weight(w.weight.data().data(), out_c, s.c);
  Eigen::Map<const Eigen::VectorXd> bias(w.bias.data().data(), out_c);
  for (int n = 0; n < s.n; ++n) {
    ConstMatMap in(x.plane(n, 0), s.c, hw);
    MatMap out(y.plane(n, 0), out_c, hw);
    out.noalias() = weight * in;
    out.colwise() += bias;
  }
  return y;
}

Tensor conv_pointwise_backward(const Tensor& x, ConvWeights& w,
                               const Tensor& grad_out) {
  check_pointwise(x, w);
  const Shape4& s = x.shape();
  const int out_c = w.out_channels();
  require_same(grad_out.shape(), {s.n, out_c, s.h, s.w},
               "conv_pointwise_backward");
  w.weight.ensure_grad();
  w.bias.ensure_grad();
  Tensor gx(s);
  const auto hw = static_cast<Eigen::Index>(s.plane());
  ConstMatMap weight(w.weight.data().data(), out_c, s.c);
  MatMap gw(w.weight.grad().data(), out_c, s.c);
  double* gb = w.bias.grad().data();
  for (int n = 0; n < s.n; ++n) {
    ConstMatMap in(x.plane(n, 0), s.c, hw);
    ConstMatMap gy(grad_out.plane(n, 0), out_c, hw);
    MatMap gin(gx.plane(n, 0), s.c, hw);
    gin.noalias() = weight.transpose() * gy;
    gw.noalias() += gy * in.transpose();
    for (int o = 0; o < out_c; ++o) {
      const double* row = grad_out.plane(n, o);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < hw; ++i) acc += row[i];
      gb[o] += acc;
    }
  }
  return gx;
}

Tensor conv_depthwise(const Tensor& x, const ConvWeights& w) {
  check_depthwise(x, w);
  const Shape4& s = x.shape();
  const int k = w.kernel();
  const int pad = k / 2;
  Tensor y(s);
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const double* in = x.plane(n, c);
      double* out = y.plane(n, c);
      const double* kern = w.weight.plane(c, 0);
      std::fill(out, out + s.plane(), w.bias.data()[c]);
      for (int ky = 0; ky < k; ++ky) {
        const int dy = ky - pad;
        const int y0 = std::max(0, -dy);
        const int y1 = std::min(s.h, s.h - dy);
        for (int kx = 0; kx < k; ++kx) {
          const int dx = kx - pad;
          const int x0 = std::max(0, -dx);
          const int x1 = std::min(s.w, s.w - dx);
          const double wv = kern[ky * k + kx];
          for (int yy = y0; yy < y1; ++yy) {
            double* orow = out + static_cast<std::size_t>(yy) * s.w;
            const double* irow = in + static_cast<std::size_t>(yy + dy) * s.w + dx;
            for (int xx = x0; xx < x1; ++xx) orow[xx] += wv * irow[xx];
          }
        }
      }
    }
  }
  return y;
}

Tensor conv_depthwise_backward(const Tensor& x, ConvWeights& w,
                               const Tensor& grad_out) {
  check_depthwise(x, w);
  const Shape4& s = x.shape();
  require_same(grad_out.shape(), s, "conv_depthwise_backward");
  w.weight.ensure_grad();
  w.bias.ensure_grad();
  const int k = w.kernel();
  const int pad = k / 2;
  Tensor gx(s);
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const double* in = x.plane(n, c);
      const double* gy = grad_out.plane(n, c);
      double* gin = gx.plane(n, c);
      const double* kern = w.weight.plane(c, 0);
      double* gkern = w.weight.grad().data() + static_cast<std::size_t>(c) * k * k;
      double bsum = 0.0;
      for (std::size_t i = 0; i < s.plane(); ++i) bsum += gy[i];
      w.bias.grad()[c] += bsum;
      for (int ky = 0; ky < k; ++ky) {
        const int dy = ky - pad;
        const int y0 = std::max(0, -dy);
        const int y1 = std::min(s.h, s.h - dy);
        for (int kx = 0; kx < k; ++kx) {
          const int dx = kx - pad;
          const int x0 = std::max(0, -dx);
          const int x1 = std::min(s.w, s.w - dx);
          const double wv = kern[ky * k + kx];
          double acc = 0.0;
          for (int yy = y0; yy < y1; ++yy) {
            const double* grow = gy + static_cast<std::size_t>(yy) * s.w;
            const double* irow = in + static_cast<std::size_t>(yy + dy) * s.w + dx;
            double* girow = gin + static_cast<std::size_t>(yy + dy) * s.w + dx;
            for (int xx = x0; xx < x1; ++xx) {
              acc += grow[xx] * irow[xx];
              girow[xx] += wv * grow[xx];
            }
          }
          gkern[ky * k + kx] += acc;
        }
      }
    }
  }
  return gx;
}

Tensor relu(const Tensor& x) {
  Tensor y(x.shape());
  auto in = x.data();
  auto out = y.data();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
  require_same(x.shape(), grad_out.shape(), "relu_backward");
  Tensor gx(x.shape());
  auto in = x.data();
  auto gy = grad_out.data();
  auto g = gx.data();
  for (std::size_t i = 0; i < in.size(); ++i) g[i] = in[i] > 0.0 ? gy[i] : 0.0;
  return gx;
}

Tensor add(const Tensor& x, const Tensor& y) {
  require_same(x.shape(), y.shape(), "add");
  Tensor z(x.shape());
  auto a = x.data();
  auto b = y.data();
  auto out = z.data();
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return z;
}

Tensor concat_channels(std::span<const Tensor> xs) {
  if (xs.empty()) throw ShapeError("concat_channels: empty input list");
  const Shape4 first = xs.front().shape();
  int channels = 0;
  for (const Tensor& t : xs) {
    const Shape4& s = t.shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w)
      throw ShapeError("concat_channels: shape mismatch " + first.str() +
                       " vs " + s.str());
    channels += s.c;
  }
  Tensor out({first.n, channels, first.h, first.w});
  for (int n = 0; n < first.n; ++n) {
    double* dst = out.plane(n, 0);
    for (const Tensor& t : xs) {
      const std::size_t len = static_cast<std::size_t>(t.shape().c) * first.plane();
      const double* src = t.plane(n, 0);
      dst = std::copy(src, src + len, dst);
    }
  }
  return out;
}

std::vector<Tensor> split_channels(const Tensor& x,
                                   std::span<const int> counts) {
  const Shape4& s = x.shape();
  int total = 0;
  for (int c : counts) {
    if (c < 0) throw ShapeError("split_channels: negative count");
    total += c;
  }
  if (total != s.c)
    throw ShapeError("split_channels: counts do not sum to channels of " +
                     s.str());
  std::vector<Tensor> parts;
  int offset = 0;
  for (int c : counts) {
    Tensor part({s.n, c, s.h, s.w});
    for (int n = 0; n < s.n; ++n) {
      const double* src = x.plane(n, offset);
      std::copy(src, src + static_cast<std::size_t>(c) * s.plane(),
                part.plane(n, 0));
    }
    parts.push_back(std::move(part));
    offset += c;
  }
  return parts;
}

Tensor upsample_bicubic(const Tensor& x, int factor) {
  if (factor < 1) throw ShapeError("upsample_bicubic: factor must be >= 1");
  const Shape4& s = x.shape();
  if (factor == 1) return x;
  const int oh = s.h * factor;
  const int ow = s.w * factor;
  const auto col_taps = cubic_taps(s.w, factor);
  const auto row_taps = cubic_taps(s.h, factor);
  Tensor y({s.n, s.c, oh, ow});
  std::vector<double> wide(static_cast<std::size_t>(s.h) * ow);
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const double* in = x.plane(n, c);
      for (int r = 0; r < s.h; ++r)
        for (int o = 0; o < ow; ++o)
          wide[static_cast<std::size_t>(r) * ow + o] =
              apply_taps(col_taps[o], in + static_cast<std::size_t>(r) * s.w, 1);
      double* out = y.plane(n, c);
      for (int o = 0; o < oh; ++o)
        for (int col = 0; col < ow; ++col)
          out[static_cast<std::size_t>(o) * ow + col] =
              apply_taps(row_taps[o], wide.data() + col, ow);
    }
  }
  return y;
}

Tensor upsample_bicubic_backward(const Tensor& grad_out, int factor) {
  if (factor < 1) throw ShapeError("upsample_bicubic: factor must be >= 1");
  const Shape4& s = grad_out.shape();
  if (s.h % factor != 0 || s.w % factor != 0)
    throw ShapeError("upsample_bicubic_backward: " + s.str() +
                     " not divisible by factor");
  if (factor == 1) return grad_out;
  const int ih = s.h / factor;
  const int iw = s.w / factor;
  const auto col_taps = cubic_taps(iw, factor);
  const auto row_taps = cubic_taps(ih, factor);
  Tensor gx({s.n, s.c, ih, iw});
  std::vector<double> wide(static_cast<std::size_t>(ih) * s.w);
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      std::fill(wide.begin(), wide.end(), 0.0);
      const double* gy = grad_out.plane(n, c);
      for (int o = 0; o < s.h; ++o)
        for (int col = 0; col < s.w; ++col)
          scatter_taps(row_taps[o], gy[static_cast<std::size_t>(o) * s.w + col],
                       wide.data() + col, s.w);
      double* gin = gx.plane(n, c);
      for (int r = 0; r < ih; ++r)
        for (int o = 0; o < s.w; ++o)
          scatter_taps(col_taps[o], wide[static_cast<std::size_t>(r) * s.w + o],
                       gin + static_cast<std::size_t>(r) * iw, 1);
    }
  }
  return gx;
}

Raster upsample_bicubic(const Raster& r, int factor) {
  return to_raster(upsample_bicubic(from_raster(r), factor));
}

double l1_loss(const Tensor& pred, const Tensor& target) {
  require_same(pred.shape(), target.shape(), "l1_loss");
  if (pred.numel() == 0) throw ShapeError("l1_loss: empty tensors");
  auto p = pred.data();
  auto t = target.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - t[i]);
  return sum / static_cast<double>(p.size());
}

Tensor l1_loss_backward(const Tensor& pred, const Tensor& target) {
  require_same(pred.shape(), target.shape(), "l1_loss_backward");
  Tensor g(pred.shape());
  auto p = pred.data();
  auto t = target.data();
  auto out = g.data();
  const double inv = 1.0 / static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - t[i];
    out[i] = d > 0.0 ? inv : (d < 0.0 ? -inv : 0.0);
  }
  return g;
}

BatchNorm BatchNorm::make(int channels) {
  BatchNorm bn;
  bn.gamma = Tensor({1, channels, 1, 1}, 1.0);
  bn.beta = Tensor({1, channels, 1, 1}, 0.0);
  bn.running_mean = Tensor({1, channels, 1, 1}, 0.0);
  bn.running_var = Tensor({1, channels, 1, 1}, 1.0);
  return bn;
}

Tensor batch_norm(const Tensor& x, BatchNorm& bn, bool training,
                  BatchNormCache* cache) {
  const Shape4& s = x.shape();
  if (s.c != bn.channels())
    throw ShapeError("batch_norm: input " + s.str() + " has wrong channels");
  const std::size_t hw = s.plane();
  const double count = static_cast<double>(s.n) * static_cast<double>(hw);
  Tensor normalized(s);
  Tensor y(s);
  std::vector<double> inv_std(s.c);
  for (int c = 0; c < s.c; ++c) {
    double mean = bn.running_mean.data()[c];
    double var = bn.running_var.data()[c];
    if (training) {
      double sum = 0.0;
      for (int n = 0; n < s.n; ++n) {
        const double* p = x.plane(n, c);
        for (std::size_t i = 0; i < hw; ++i) sum += p[i];
      }
      mean = sum / count;
      double sq = 0.0;
      for (int n = 0; n < s.n; ++n) {
        const double* p = x.plane(n, c);
        for (std::size_t i = 0; i < hw; ++i) sq += (p[i] - mean) * (p[i] - mean);
      }
      var = sq / count;
      const double unbiased = count > 1.0 ? sq / (count - 1.0) : var;
      double& rm = bn.running_mean.data()[c];
      double& rv = bn.running_var.data()[c];
      rm = (1.0 - bn.momentum) * rm + bn.momentum * mean;
      rv = (1.0 - bn.momentum) * rv + bn.momentum * unbiased;
    }
    inv_std[c] = 1.0 / std::sqrt(var + bn.eps);
    const double g = bn.gamma.data()[c];
    const double b = bn.beta.data()[c];
    for (int n = 0; n < s.n; ++n) {
      const double* p = x.plane(n, c);
      double* xh = normalized.plane(n, c);
      double* out = y.plane(n, c);
      for (std::size_t i = 0; i < hw; ++i) {
        xh[i] = (p[i] - mean) * inv_std[c];
        out[i] = g * xh[i] + b;
      }
    }
  }
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
    cache->training = training;
  }
  return y;
}

Tensor batch_norm_backward(const BatchNormCache& cache, BatchNorm& bn,
                           const Tensor& grad_out) {
  const Shape4& s = grad_out.shape();
  require_same(s, cache.normalized.shape(), "batch_norm_backward");
  bn.gamma.ensure_grad();
  bn.beta.ensure_grad();
  const std::size_t hw = s.plane();
  const double count = static_cast<double>(s.n) * static_cast<double>(hw);
  Tensor gx(s);
  for (int c = 0; c < s.c; ++c) {
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (int n = 0; n < s.n; ++n) {
      const double* g = grad_out.plane(n, c);
      const double* xh = cache.normalized.plane(n, c);
      for (std::size_t i = 0; i < hw; ++i) {
        sum_g += g[i];
        sum_gx += g[i] * xh[i];
      }
    }
    bn.gamma.grad()[c] += sum_gx;
    bn.beta.grad()[c] += sum_g;
    const double scale = bn.gamma.data()[c] * cache.inv_std[c];
    for (int n = 0; n < s.n; ++n) {
      const double* g = grad_out.plane(n, c);
      const double* xh = cache.normalized.plane(n, c);
      double* out = gx.plane(n, c);
      if (cache.training) {
        for (std::size_t i = 0; i < hw; ++i)
          out[i] = scale * (g[i] - sum_g / count - xh[i] * sum_gx / count);
      } else {
        for (std::size_t i = 0; i < hw; ++i) out[i] = scale * g[i];
      }
    }
  }
  return gx;
}

}  // namespace sdrcnn::nn
