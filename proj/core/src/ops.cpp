#include "pdl/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>

#include "pdl/error.hpp"

namespace pdl::ops {

namespace {

thread_local ActivationPatternScope* g_pattern = nullptr;

using NodePtr = std::shared_ptr<detail::Node>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using BackwardFn = std::function<void(std::span<const double>)>;

void check_finite(const Tensor& t, const char* op) {
  if (!t.defined()) throw ValidationError(std::string(op) + ": undefined tensor argument");
  for (double v : t.data()) {
    if (!std::isfinite(v)) throw NumericalError(std::string(op) + ": non-finite input value");
  }
}

bool tracking(std::initializer_list<const Tensor*> inputs) {
  if (active_tape() == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

Tensor make_output(Shape shape, Buffer value, BackwardFn backward) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (backward) {
    node->requires_grad = true;
    node->leaf = false;
    node->backward = std::move(backward);
    active_tape()->record(node);
  }
  return Tensor(std::move(node));
}

void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) + ", got " +
                     shape_str(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

struct ConvGeometry {
  std::size_t batch, channels, height, width;
  std::size_t kernels, kh, kw;
  std::size_t stride, padding;
  std::size_t out_h, out_w;

  std::size_t patch() const { return channels * kh * kw; }
  std::size_t out_pixels() const { return out_h * out_w; }
};

// cols is [C*kh*kw, out_h*out_w], row-major.
void im2col(const double* image, const ConvGeometry& g, double* cols) {
  const std::size_t npix = g.out_pixels();
  for (std::size_t c = 0; c < g.channels; ++c) {
    const double* plane = image + c * g.height * g.width;
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        double* row = cols + ((c * g.kh + ki) * g.kw + kj) * npix;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ki) - static_cast<std::ptrdiff_t>(g.padding);
          double* dst = row + oy * g.out_w;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) {
            std::fill(dst, dst + g.out_w, 0.0);
            continue;
          }
          const double* src = plane + static_cast<std::size_t>(iy) * g.width;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox * g.stride + kj) - static_cast<std::ptrdiff_t>(g.padding);
            dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) ? 0.0 : src[ix];
          }
        }
      }
    }
  }
}

void col2im_add(const double* cols, const ConvGeometry& g, double* image) {
  const std::size_t npix = g.out_pixels();
  for (std::size_t c = 0; c < g.channels; ++c) {
    double* plane = image + c * g.height * g.width;
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        const double* row = cols + ((c * g.kh + ki) * g.kw + kj) * npix;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ki) - static_cast<std::ptrdiff_t>(g.padding);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
          double* dst = plane + static_cast<std::size_t>(iy) * g.width;
          const double* src = row + oy * g.out_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox * g.stride + kj) - static_cast<std::ptrdiff_t>(g.padding);
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.width)) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

template <typename F>
Tensor unary_elementwise(const Tensor& x, const char* op, F&& forward_and_derivative) {
  check_finite(x, op);
  const auto in = x.data();
  Buffer out(in.size());
  Buffer deriv;
  const bool track = tracking({&x});
  if (track) deriv.resize(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    double d = 0.0;
    out[i] = forward_and_derivative(in[i], d);
    if (track) deriv[i] = d;
  }
  BackwardFn bw;
  if (track) {
    bw = [xn = x.node(), deriv = std::move(deriv)](std::span<const double> gout) {
      auto& gx = xn->grad_buffer();
      for (std::size_t i = 0; i < gout.size(); ++i) gx[i] += gout[i] * deriv[i];
    };
  }
  return make_output(x.shape(), std::move(out), std::move(bw));
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride, std::size_t padding) {
  constexpr const char* op = "conv2d";
  check_finite(input, op);
  check_finite(weight, op);
  check_finite(bias, op);
  require_rank(input, 4, op, "input");
  require_rank(weight, 4, op, "weight");
  require_rank(bias, 1, op, "bias");
  if (stride == 0) throw ValidationError("conv2d: stride must be >= 1");

  ConvGeometry g{input.dim(0), input.dim(1), input.dim(2), input.dim(3), weight.dim(0), weight.dim(2), weight.dim(3),
                 stride, padding, 0, 0};
  if (weight.dim(1) != g.channels) {
    throw ShapeError("conv2d: weight " + shape_str(weight.shape()) + " expects " + std::to_string(weight.dim(1)) +
                     " input channels but input is " + shape_str(input.shape()));
  }
  if (bias.dim(0) != g.kernels) {
    throw ShapeError("conv2d: bias " + shape_str(bias.shape()) + " does not match " + std::to_string(g.kernels) +
                     " kernels");
  }
  if (g.kh > g.height + 2 * padding || g.kw > g.width + 2 * padding) {
    throw ShapeError("conv2d: kernel " + shape_str(weight.shape()) + " larger than padded input " +
                     shape_str(input.shape()));
  }
  g.out_h = (g.height + 2 * padding - g.kh) / stride + 1;
  g.out_w = (g.width + 2 * padding - g.kw) / stride + 1;

  const std::size_t in_plane = g.channels * g.height * g.width;
  const std::size_t out_plane = g.kernels * g.out_pixels();
  Buffer out(g.batch * out_plane);
  Buffer cols(g.patch() * g.out_pixels());
  ConstMapMat w(weight.data().data(), g.kernels, g.patch());
  Eigen::Map<const Eigen::VectorXd> b(bias.data().data(), g.kernels);
  for (std::size_t n = 0; n < g.batch; ++n) {
    im2col(input.data().data() + n * in_plane, g, cols.data());
    ConstMapMat c(cols.data(), g.patch(), g.out_pixels());
    MapMat o(out.data() + n * out_plane, g.kernels, g.out_pixels());
    o.noalias() = w * c;
    o.colwise() += b;
  }

  BackwardFn bw;
  if (tracking({&input, &weight, &bias})) {
    bw = [g, xn = input.node(), wn = weight.node(), bn = bias.node()](std::span<const double> gout) {
      const std::size_t in_plane = g.channels * g.height * g.width;
      const std::size_t out_plane = g.kernels * g.out_pixels();
      Buffer cols(g.patch() * g.out_pixels());
      Buffer dcols;
      if (xn->requires_grad) dcols.resize(cols.size());
      ConstMapMat w(wn->value.data(), g.kernels, g.patch());
      for (std::size_t n = 0; n < g.batch; ++n) {
        ConstMapMat go(gout.data() + n * out_plane, g.kernels, g.out_pixels());
        if (bn->requires_grad) {
          Eigen::Map<Eigen::VectorXd> db(bn->grad_buffer().data(), g.kernels);
          db += go.rowwise().sum();
        }
        if (wn->requires_grad) {
          im2col(xn->value.data() + n * in_plane, g, cols.data());
          ConstMapMat c(cols.data(), g.patch(), g.out_pixels());
          MapMat dw(wn->grad_buffer().data(), g.kernels, g.patch());
          dw.noalias() += go * c.transpose();
        }
        if (xn->requires_grad) {
          MapMat dc(dcols.data(), g.patch(), g.out_pixels());
          dc.noalias() = w.transpose() * go;
          col2im_add(dcols.data(), g, xn->grad_buffer().data() + n * in_plane);
        }
      }
    };
  }
  return make_output({g.batch, g.kernels, g.out_h, g.out_w}, std::move(out), std::move(bw));
}

ActivationPatternScope::ActivationPatternScope() : previous_(g_pattern) { g_pattern = this; }
ActivationPatternScope::~ActivationPatternScope() { g_pattern = previous_; }

Tensor max_pool2d(const Tensor& input, std::size_t kernel, std::size_t stride) {
  constexpr const char* op = "max_pool2d";
  check_finite(input, op);
  require_rank(input, 4, op, "input");
  if (kernel == 0 || stride == 0) throw ValidationError("max_pool2d: kernel and stride must be >= 1");
  const std::size_t B = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  if (kernel > H || kernel > W) {
    throw ShapeError("max_pool2d: kernel " + std::to_string(kernel) + " larger than input " + shape_str(input.shape()));
  }
  const std::size_t oh = (H - kernel) / stride + 1, ow = (W - kernel) / stride + 1;
  Buffer out(B * C * oh * ow);
  std::vector<std::size_t> argmax(out.size());
  const auto in = input.data();
  for (std::size_t p = 0; p < B * C; ++p) {
    const std::size_t base = p * H * W;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = base + oy * stride * W + ox * stride;
        for (std::size_t ky = 0; ky < kernel; ++ky) {
          for (std::size_t kx = 0; kx < kernel; ++kx) {
            const std::size_t idx = base + (oy * stride + ky) * W + ox * stride + kx;
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t o = (p * oh + oy) * ow + ox;
        out[o] = in[best];
        argmax[o] = best;
      }
    }
  }
  if (g_pattern != nullptr) {
    for (std::size_t a : argmax) g_pattern->hash().update_pod(static_cast<std::uint64_t>(a));
  }
  BackwardFn bw;
  if (tracking({&input})) {
    bw = [xn = input.node(), argmax = std::move(argmax)](std::span<const double> gout) {
      auto& gx = xn->grad_buffer();
      for (std::size_t i = 0; i < gout.size(); ++i) gx[argmax[i]] += gout[i];
    };
  }
  return make_output({B, C, oh, ow}, std::move(out), std::move(bw));
}

Tensor upsample_nearest(const Tensor& input, std::size_t factor) {
  constexpr const char* op = "upsample_nearest";
  check_finite(input, op);
  require_rank(input, 4, op, "input");
  if (factor == 0) throw ValidationError("upsample_nearest: factor must be >= 1");
  const std::size_t B = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const std::size_t oh = H * factor, ow = W * factor;
  Buffer out(B * C * oh * ow);
  const auto in = input.data();
  for (std::size_t p = 0; p < B * C; ++p) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) out[(p * oh + y) * ow + x] = in[(p * H + y / factor) * W + x / factor];
    }
  }
  BackwardFn bw;
  if (tracking({&input})) {
    bw = [xn = input.node(), B, C, H, W, factor](std::span<const double> gout) {
      auto& gx = xn->grad_buffer();
      const std::size_t oh = H * factor, ow = W * factor;
      for (std::size_t p = 0; p < B * C; ++p) {
        for (std::size_t y = 0; y < oh; ++y) {
          for (std::size_t x = 0; x < ow; ++x) gx[(p * H + y / factor) * W + x / factor] += gout[(p * oh + y) * ow + x];
        }
      }
    };
  }
  return make_output({B, C, oh, ow}, std::move(out), std::move(bw));
}

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  constexpr const char* op = "linear";
  check_finite(input, op);
  check_finite(weight, op);
  check_finite(bias, op);
  require_rank(input, 2, op, "input");
  require_rank(weight, 2, op, "weight");
  require_rank(bias, 1, op, "bias");
  const std::size_t B = input.dim(0), in_dim = input.dim(1), out_dim = weight.dim(0);
  if (weight.dim(1) != in_dim || bias.dim(0) != out_dim) {
    throw ShapeError("linear: input " + shape_str(input.shape()) + ", weight " + shape_str(weight.shape()) +
                     ", bias " + shape_str(bias.shape()) + " are incompatible");
  }
  Buffer out(B * out_dim);
  ConstMapMat x(input.data().data(), B, in_dim);
  ConstMapMat w(weight.data().data(), out_dim, in_dim);
  Eigen::Map<const Eigen::RowVectorXd> b(bias.data().data(), out_dim);
  MapMat o(out.data(), B, out_dim);
  o.noalias() = x * w.transpose();
  o.rowwise() += b;

  BackwardFn bw;
  if (tracking({&input, &weight, &bias})) {
    bw = [xn = input.node(), wn = weight.node(), bn = bias.node(), B, in_dim, out_dim](std::span<const double> gout) {
      ConstMapMat go(gout.data(), B, out_dim);
      if (xn->requires_grad) {
        MapMat dx(xn->grad_buffer().data(), B, in_dim);
        dx.noalias() += go * ConstMapMat(wn->value.data(), out_dim, in_dim);
      }
      if (wn->requires_grad) {
        MapMat dw(wn->grad_buffer().data(), out_dim, in_dim);
        dw.noalias() += go.transpose() * ConstMapMat(xn->value.data(), B, in_dim);
      }
      if (bn->requires_grad) {
        Eigen::Map<Eigen::RowVectorXd> db(bn->grad_buffer().data(), out_dim);
        db += go.colwise().sum();
      }
    };
  }
  return make_output({B, out_dim}, std::move(out), std::move(bw));
}

Tensor relu(const Tensor& x) {
  if (g_pattern != nullptr) {
    for (double v : x.data()) g_pattern->hash().update_pod(static_cast<unsigned char>(v > 0.0));
  }
  return unary_elementwise(x, "relu", [](double v, double& d) {
    d = v > 0.0 ? 1.0 : 0.0;
    return v > 0.0 ? v : 0.0;
  });
}

Tensor sigmoid(const Tensor& x) {
  return unary_elementwise(x, "sigmoid", [](double v, double& d) {
    const double s = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    d = s * (1.0 - s);
    return s;
  });
}

Tensor log_sigmoid(const Tensor& x) {
  return unary_elementwise(x, "log_sigmoid", [](double v, double& d) {
    // log(sigmoid(v)) = -log1p(exp(-v)) for v >= 0, v - log1p(exp(v)) otherwise.
    if (v >= 0.0) {
      const double e = std::exp(-v);
      d = e / (1.0 + e);
      return -std::log1p(e);
    }
    const double e = std::exp(v);
    d = 1.0 / (1.0 + e);
    return v - std::log1p(e);
  });
}

namespace {

template <typename Fwd>
Tensor binary_elementwise(const Tensor& a, const Tensor& b, const char* op, Fwd&& fwd, double da_sign,
                          double db_sign, bool product) {
  check_finite(a, op);
  check_finite(b, op);
  require_same_shape(a, b, op);
  const auto av = a.data();
  const auto bv = b.data();
  Buffer out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i], bv[i]);
  BackwardFn bw;
  if (tracking({&a, &b})) {
    bw = [an = a.node(), bn = b.node(), da_sign, db_sign, product](std::span<const double> gout) {
      if (an->requires_grad) {
        auto& ga = an->grad_buffer();
        for (std::size_t i = 0; i < gout.size(); ++i) ga[i] += gout[i] * (product ? bn->value[i] : da_sign);
      }
      if (bn->requires_grad) {
        auto& gb = bn->grad_buffer();
        for (std::size_t i = 0; i < gout.size(); ++i) gb[i] += gout[i] * (product ? an->value[i] : db_sign);
      }
    };
  }
  return make_output(a.shape(), std::move(out), std::move(bw));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_elementwise(a, b, "add", [](double x, double y) { return x + y; }, 1.0, 1.0, false);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_elementwise(a, b, "sub", [](double x, double y) { return x - y; }, 1.0, -1.0, false);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_elementwise(a, b, "mul", [](double x, double y) { return x * y; }, 0.0, 0.0, true);
}

Tensor scale(const Tensor& x, double factor) {
  if (!std::isfinite(factor)) throw NumericalError("scale: non-finite factor");
  return unary_elementwise(x, "scale", [factor](double v, double& d) {
    d = factor;
    return v * factor;
  });
}

Tensor sum(const Tensor& x) {
  check_finite(x, "sum");
  double total = 0.0;
  for (double v : x.data()) total += v;
  BackwardFn bw;
  if (tracking({&x})) {
    bw = [xn = x.node()](std::span<const double> gout) {
      auto& gx = xn->grad_buffer();
      for (double& g : gx) g += gout[0];
    };
  }
  return make_output({1}, {total}, std::move(bw));
}

Tensor mean(const Tensor& x) {
  check_finite(x, "mean");
  const double n = static_cast<double>(x.numel());
  double total = 0.0;
  for (double v : x.data()) total += v;
  BackwardFn bw;
  if (tracking({&x})) {
    bw = [xn = x.node(), n](std::span<const double> gout) {
      auto& gx = xn->grad_buffer();
      for (double& g : gx) g += gout[0] / n;
    };
  }
  return make_output({1}, {total / n}, std::move(bw));
}

Tensor mse(const Tensor& a, const Tensor& b) {
  constexpr const char* op = "mse";
  check_finite(a, op);
  check_finite(b, op);
  require_same_shape(a, b, op);
  const auto av = a.data();
  const auto bv = b.data();
  const double n = static_cast<double>(av.size());
  double total = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    total += d * d;
  }
  BackwardFn bw;
  if (tracking({&a, &b})) {
    bw = [an = a.node(), bn = b.node(), n](std::span<const double> gout) {
      const double s = 2.0 * gout[0] / n;
      if (an->requires_grad) {
        auto& ga = an->grad_buffer();
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += s * (an->value[i] - bn->value[i]);
      }
      if (bn->requires_grad) {
        auto& gb = bn->grad_buffer();
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= s * (an->value[i] - bn->value[i]);
      }
    };
  }
  return make_output({1}, {total / n}, std::move(bw));
}

Tensor reshape(const Tensor& x, Shape shape) {
  check_finite(x, "reshape");
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  Buffer out(x.data().begin(), x.data().end());
  BackwardFn bw;
  if (tracking({&x})) {
    bw = [xn = x.node()](std::span<const double> gout) {
      auto& gx = xn->grad_buffer();
      for (std::size_t i = 0; i < gout.size(); ++i) gx[i] += gout[i];
    };
  }
  return make_output(std::move(shape), std::move(out), std::move(bw));
}

Tensor flatten(const Tensor& x) {
  if (x.rank() < 1) throw ShapeError("flatten: rank-0 tensor");
  const std::size_t b = x.dim(0);
  return reshape(x, {b, x.numel() / b});
}

Tensor concat_channels(std::span<const Tensor> parts) {
  constexpr const char* op = "concat_channels";
  if (parts.empty()) throw ShapeError("concat_channels: nothing to concatenate");
  for (const auto& p : parts) {
    check_finite(p, op);
    require_rank(p, 4, op, "part");
  }
  const std::size_t B = parts[0].dim(0), H = parts[0].dim(2), W = parts[0].dim(3);
  std::size_t C = 0;
  for (const auto& p : parts) {
    if (p.dim(0) != B || p.dim(2) != H || p.dim(3) != W) {
      throw ShapeError("concat_channels: part " + shape_str(p.shape()) + " incompatible with " +
                       shape_str(parts[0].shape()));
    }
    C += p.dim(1);
  }
  const std::size_t hw = H * W;
  Buffer out(B * C * hw);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    const std::size_t pc = p.dim(1);
    for (std::size_t b = 0; b < B; ++b) {
      std::copy_n(p.data().data() + b * pc * hw, pc * hw, out.data() + (b * C + off) * hw);
    }
    off += pc;
  }
  bool track = false;
  for (const auto& p : parts) track = track || tracking({&p});
  BackwardFn bw;
  if (track) {
    std::vector<NodePtr> nodes;
    for (const auto& p : parts) nodes.push_back(p.node());
    bw = [nodes = std::move(nodes), offsets = std::move(offsets), B, C, hw](std::span<const double> gout) {
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (!nodes[k]->requires_grad) continue;
        auto& g = nodes[k]->grad_buffer();
        const std::size_t pc = nodes[k]->shape[1];
        for (std::size_t b = 0; b < B; ++b) {
          const double* src = gout.data() + (b * C + offsets[k]) * hw;
          double* dst = g.data() + b * pc * hw;
          for (std::size_t i = 0; i < pc * hw; ++i) dst[i] += src[i];
        }
      }
    };
  }
  return make_output({B, C, H, W}, std::move(out), std::move(bw));
}

Tensor binary_cross_entropy(const Tensor& probs, const Tensor& targets, double eps, std::size_t* clamped) {
  constexpr const char* op = "binary_cross_entropy";
  check_finite(probs, op);
  check_finite(targets, op);
  require_same_shape(probs, targets, op);
  const auto p = probs.data();
  const auto y = targets.data();
  const double n = static_cast<double>(p.size());
  double total = 0.0;
  Buffer dp(p.size());
  std::size_t clamp_count = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double q = p[i];
    bool was_clamped = false;
    if (q < eps) {
      q = eps;
      was_clamped = true;
    } else if (q > 1.0 - eps) {
      q = 1.0 - eps;
      was_clamped = true;
    }
    clamp_count += was_clamped ? 1 : 0;
    total += -(y[i] * std::log(q) + (1.0 - y[i]) * std::log1p(-q));
    dp[i] = was_clamped ? 0.0 : (-y[i] / q + (1.0 - y[i]) / (1.0 - q)) / n;
  }
  if (clamped != nullptr) *clamped += clamp_count;
  BackwardFn bw;
  if (tracking({&probs})) {
    bw = [pn = probs.node(), dp = std::move(dp)](std::span<const double> gout) {
      auto& g = pn->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gout[0] * dp[i];
    };
  }
  return make_output({1}, {total / n}, std::move(bw));
}

}  // namespace pdl::ops
