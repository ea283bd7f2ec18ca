#include "groundbridge/encoder.hpp"

#include <cmath>
#include <random>

#include "groundbridge/error.hpp"
#include "groundbridge/seeding.hpp"

namespace groundbridge {

namespace {

constexpr std::array<std::size_t, kConvLayers> kChannels = {32, 32, 64, 64};
constexpr std::array<bool, kConvLayers> kPooled = {true, true, false, false};

// out[co][t] = b[co] + sum_ci sum_k w[co][ci][k] * in[ci][t + k]
void conv_forward(const ConvShape& s, const double* w, const double* b, const double* in, double* out) {
  const std::size_t lin = s.in_length, lout = s.out_length;
  for (std::size_t co = 0; co < s.out_channels; ++co) {
    double* o = out + co * lout;
    for (std::size_t t = 0; t < lout; ++t) o[t] = b[co];
    for (std::size_t ci = 0; ci < s.in_channels; ++ci) {
      const double* x = in + ci * lin;
      const double* k = w + (co * s.in_channels + ci) * kKernel;
      const double k0 = k[0], k1 = k[1], k2 = k[2];
      for (std::size_t t = 0; t < lout; ++t) o[t] += k0 * x[t] + k1 * x[t + 1] + k2 * x[t + 2];
    }
  }
}

void conv_backward(const ConvShape& s, const double* w, const double* in, const double* dout, double* dw,
                   double* db, double* din) {
  const std::size_t lin = s.in_length, lout = s.out_length;
  for (std::size_t co = 0; co < s.out_channels; ++co) {
    const double* g = dout + co * lout;
    double gb = 0.0;
    for (std::size_t t = 0; t < lout; ++t) gb += g[t];
    db[co] += gb;
    for (std::size_t ci = 0; ci < s.in_channels; ++ci) {
      const double* x = in + ci * lin;
      const std::size_t base = (co * s.in_channels + ci) * kKernel;
      double g0 = 0.0, g1 = 0.0, g2 = 0.0;
      for (std::size_t t = 0; t < lout; ++t) {
        g0 += g[t] * x[t];
        g1 += g[t] * x[t + 1];
        g2 += g[t] * x[t + 2];
      }
      dw[base] += g0;
      dw[base + 1] += g1;
      dw[base + 2] += g2;
      if (din) {
        double* dx = din + ci * lin;
        const double k0 = w[base], k1 = w[base + 1], k2 = w[base + 2];
        for (std::size_t t = 0; t < lout; ++t) {
          dx[t] += k0 * g[t];
          dx[t + 1] += k1 * g[t];
          dx[t + 2] += k2 * g[t];
        }
      }
    }
  }
}

void check_input(const EncoderParams& params, std::span<const double> input) {
  require(input.size() == params.layout.input_length(), ErrorKind::shape,
          "encoder input has length " + std::to_string(input.size()) + ", expected " +
              std::to_string(params.layout.input_length()));
  for (double v : input) require(std::isfinite(v), ErrorKind::numeric, "non-finite encoder input");
}

}  // namespace

EncoderLayout::EncoderLayout(std::size_t input_length) : input_length_(input_length) {
  std::size_t channels = 1;
  std::size_t length = input_length;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    require(length >= kKernel, ErrorKind::shape, "encoder input too short for the architecture");
    ConvShape s{};
    s.in_channels = channels;
    s.out_channels = kChannels[l];
    s.in_length = length;
    s.out_length = length - kKernel + 1;
    s.pooled = kPooled[l];
    s.pooled_length = s.pooled ? s.out_length / kPoolWindow : s.out_length;
    conv_[l] = s;
    conv_w_[l] = offset;
    offset += s.out_channels * s.in_channels * kKernel;
    conv_b_[l] = offset;
    offset += s.out_channels;
    channels = s.out_channels;
    length = s.pooled_length;
  }
  require(length >= 1, ErrorKind::shape, "encoder input too short for the architecture");
  flat_dim_ = channels * length;
  dense_w_ = offset;
  offset += flat_dim_ * kEmbeddingDim;
  dense_b_ = offset;
  offset += kEmbeddingDim;
  total_ = offset;
}

std::span<double> EncoderParams::conv_weight(std::size_t l) {
  const auto& s = layout.conv(l);
  return {values.data() + layout.conv_weight_offset(l), s.out_channels * s.in_channels * kKernel};
}
std::span<const double> EncoderParams::conv_weight(std::size_t l) const {
  const auto& s = layout.conv(l);
  return {values.data() + layout.conv_weight_offset(l), s.out_channels * s.in_channels * kKernel};
}
std::span<double> EncoderParams::conv_bias(std::size_t l) {
  return {values.data() + layout.conv_bias_offset(l), layout.conv(l).out_channels};
}
std::span<const double> EncoderParams::conv_bias(std::size_t l) const {
  return {values.data() + layout.conv_bias_offset(l), layout.conv(l).out_channels};
}
std::span<double> EncoderParams::dense_weight() {
  return {values.data() + layout.dense_weight_offset(), layout.flat_dim() * kEmbeddingDim};
}
std::span<const double> EncoderParams::dense_weight() const {
  return {values.data() + layout.dense_weight_offset(), layout.flat_dim() * kEmbeddingDim};
}
std::span<double> EncoderParams::dense_bias() {
  return {values.data() + layout.dense_bias_offset(), kEmbeddingDim};
}
std::span<const double> EncoderParams::dense_bias() const {
  return {values.data() + layout.dense_bias_offset(), kEmbeddingDim};
}

std::size_t EncoderParams::fan_in_of(std::size_t i) const {
  if (i >= layout.dense_weight_offset()) return layout.flat_dim();
  for (std::size_t l = kConvLayers; l-- > 0;) {
    if (i >= layout.conv_weight_offset(l)) return layout.conv(l).in_channels * kKernel;
  }
  return kKernel;
}

EncoderParams init_params(std::uint64_t seed, std::size_t input_length) {
  EncoderParams p{EncoderLayout(input_length)};
  Rng rng(derive_seed(seed, "encoder-init"));
  auto fill = [&](std::span<double> w, std::size_t fan_in) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto& v : w) v = u(rng);
  };
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    fill(p.conv_weight(l), p.layout.conv(l).in_channels * kKernel);
  }
  fill(p.dense_weight(), p.layout.flat_dim());
  return p;
}

ForwardTrace forward_trace(const EncoderParams& params, std::span<const double> input) {
  check_input(params, input);
  const auto& layout = params.layout;
  ForwardTrace tr;
  tr.input.assign(input.begin(), input.end());

  const double* x = tr.input.data();
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    const ConvShape& s = layout.conv(l);
    auto& pre = tr.pre[l];
    pre.assign(s.out_channels * s.out_length, 0.0);
    conv_forward(s, params.conv_weight(l).data(), params.conv_bias(l).data(), x, pre.data());

    auto& post = tr.post[l];
    if (s.pooled) {
      post.assign(s.out_channels * s.pooled_length, 0.0);
      tr.argmax[l].assign(post.size(), 0);
      for (std::size_t c = 0; c < s.out_channels; ++c) {
        for (std::size_t t = 0; t < s.pooled_length; ++t) {
          const std::size_t i0 = c * s.out_length + t * kPoolWindow;
          // ReLU then pool; ties resolve to the lower index.
          const double a = std::max(pre[i0], 0.0);
          const double b = std::max(pre[i0 + 1], 0.0);
          const bool first = a >= b;
          post[c * s.pooled_length + t] = first ? a : b;
          tr.argmax[l][c * s.pooled_length + t] = static_cast<std::uint32_t>(first ? i0 : i0 + 1);
        }
      }
    } else {
      post.resize(pre.size());
      for (std::size_t i = 0; i < pre.size(); ++i) post[i] = std::max(pre[i], 0.0);
    }
    x = post.data();
  }

  const std::size_t flat = layout.flat_dim();
  const auto w = params.dense_weight();
  const auto b = params.dense_bias();
  tr.dense_pre.assign(b.begin(), b.end());
  for (std::size_t i = 0; i < flat; ++i) {
    const double fi = x[i];
    if (fi == 0.0) continue;
    const double* row = w.data() + i * kEmbeddingDim;
    for (std::size_t j = 0; j < kEmbeddingDim; ++j) tr.dense_pre[j] += fi * row[j];
  }

  double sq = 0.0;
  for (double v : tr.dense_pre) sq += v * v;
  tr.norm = std::sqrt(sq);
  tr.output.values.assign(kEmbeddingDim, 0.0);
  if (tr.norm < kNormGuard) {
    tr.output.values[0] = 1.0;
    tr.output.fallback = true;
  } else {
    for (std::size_t j = 0; j < kEmbeddingDim; ++j) tr.output.values[j] = tr.dense_pre[j] / tr.norm;
  }
  return tr;
}

Embedding forward(const EncoderParams& params, std::span<const double> input) {
  return forward_trace(params, input).output;
}

void backward_sample(const EncoderParams& params, const ForwardTrace& tr, std::span<const double> output_grad,
                     ParamGrads& grads) {
  require(output_grad.size() == kEmbeddingDim, ErrorKind::shape, "output gradient must have 64 entries");
  require(grads.values.size() == params.values.size(), ErrorKind::shape, "gradient buffer layout mismatch");
  if (tr.output.fallback) return;  // the guard output is constant

  const auto& layout = params.layout;
  const auto& y = tr.output.values;

  // Through y = z / |z|: dz = (dy - y (y . dy)) / |z|
  double ydot = 0.0;
  for (std::size_t j = 0; j < kEmbeddingDim; ++j) ydot += y[j] * output_grad[j];
  std::array<double, kEmbeddingDim> dz{};
  for (std::size_t j = 0; j < kEmbeddingDim; ++j) dz[j] = (output_grad[j] - y[j] * ydot) / tr.norm;

  // Dense layer.
  const std::size_t flat = layout.flat_dim();
  const double* f = tr.post[kConvLayers - 1].data();
  const auto w = params.dense_weight();
  double* gw = grads.values.data() + layout.dense_weight_offset();
  double* gb = grads.values.data() + layout.dense_bias_offset();
  for (std::size_t j = 0; j < kEmbeddingDim; ++j) gb[j] += dz[j];
  std::vector<double> dx(flat, 0.0);
  for (std::size_t i = 0; i < flat; ++i) {
    const double* row = w.data() + i * kEmbeddingDim;
    double* grow = gw + i * kEmbeddingDim;
    double acc = 0.0;
    const double fi = f[i];
    for (std::size_t j = 0; j < kEmbeddingDim; ++j) {
      grow[j] += fi * dz[j];
      acc += row[j] * dz[j];
    }
    dx[i] = acc;
  }

  // Convolutional stack, last to first. `dx` holds the gradient w.r.t. the
  // layer output after ReLU (and pooling).
  for (std::size_t l = kConvLayers; l-- > 0;) {
    const ConvShape& s = layout.conv(l);
    const auto& pre = tr.pre[l];
    std::vector<double> dpre(pre.size(), 0.0);
    if (s.pooled) {
      const auto& route = tr.argmax[l];
      for (std::size_t i = 0; i < route.size(); ++i) {
        const std::size_t src = route[i];
        if (pre[src] > 0.0) dpre[src] += dx[i];
      }
    } else {
      for (std::size_t i = 0; i < pre.size(); ++i) dpre[i] = pre[i] > 0.0 ? dx[i] : 0.0;
    }
    const double* in = l == 0 ? tr.input.data() : tr.post[l - 1].data();
    std::vector<double> din;
    if (l > 0) din.assign(s.in_channels * s.in_length, 0.0);
    conv_backward(s, params.conv_weight(l).data(), in, dpre.data(),
                  grads.values.data() + layout.conv_weight_offset(l),
                  grads.values.data() + layout.conv_bias_offset(l), l > 0 ? din.data() : nullptr);
    dx = std::move(din);
  }
}

ParamGrads backward(const EncoderParams& params, std::span<const std::vector<double>> batch,
                    std::span<const std::vector<double>> output_grads) {
  require(batch.size() == output_grads.size(), ErrorKind::shape,
          "batch has " + std::to_string(batch.size()) + " samples but " + std::to_string(output_grads.size()) +
              " output gradients");
  ParamGrads grads(params.layout);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const ForwardTrace tr = forward_trace(params, batch[i]);
    backward_sample(params, tr, output_grads[i], grads);
  }
  return grads;
}

bool same_activation_pattern(const ForwardTrace& a, const ForwardTrace& b) {
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    if (a.pre[l].size() != b.pre[l].size() || a.argmax[l] != b.argmax[l]) return false;
    for (std::size_t i = 0; i < a.pre[l].size(); ++i) {
      if ((a.pre[l][i] > 0.0) != (b.pre[l][i] > 0.0)) return false;
    }
  }
  return a.output.fallback == b.output.fallback;
}

}  // namespace groundbridge
