#pragma once

// 1D-convolutional metric encoder:
//   conv(32) -> ReLU -> maxpool(2) -> conv(32) -> ReLU -> maxpool(2)
//   -> conv(64) -> ReLU -> conv(64) -> ReLU -> flatten -> dense(64) -> L2 norm
// Valid (unpadded) convolutions with kernel 3 and stride 1. With 42 inputs the
// sequence length flows 42 -> 40 -> 20 -> 18 -> 9 -> 7 -> 5, so the dense layer
// sees 5 * 64 = 320 features.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace groundbridge {

inline constexpr std::size_t kEmbeddingDim = 64;
inline constexpr std::size_t kConvLayers = 4;
inline constexpr std::size_t kKernel = 3;
inline constexpr std::size_t kPoolWindow = 2;
inline constexpr double kNormGuard = 1e-12;

struct ConvShape {
  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t in_length;
  std::size_t out_length;     // in_length - kKernel + 1
  bool pooled;                // max-pool follows the ReLU
  std::size_t pooled_length;  // out_length / 2 when pooled
};

// Offsets of every tensor inside the flat parameter vector.
class EncoderLayout {
 public:
  explicit EncoderLayout(std::size_t input_length = 42);

  std::size_t input_length() const { return input_length_; }
  const ConvShape& conv(std::size_t l) const { return conv_[l]; }
  std::size_t flat_dim() const { return flat_dim_; }

  std::size_t conv_weight_offset(std::size_t l) const { return conv_w_[l]; }
  std::size_t conv_bias_offset(std::size_t l) const { return conv_b_[l]; }
  std::size_t dense_weight_offset() const { return dense_w_; }
  std::size_t dense_bias_offset() const { return dense_b_; }
  std::size_t total() const { return total_; }

  // Index of conv weight W[out][in][k] within the flat vector.
  std::size_t conv_weight_index(std::size_t l, std::size_t out, std::size_t in, std::size_t k) const {
    return conv_w_[l] + (out * conv_[l].in_channels + in) * kKernel + k;
  }
  // Dense weights are stored row-major as flat_dim x 64.
  std::size_t dense_weight_index(std::size_t in, std::size_t out) const {
    return dense_w_ + in * kEmbeddingDim + out;
  }

  friend bool operator==(const EncoderLayout& a, const EncoderLayout& b) {
    return a.input_length_ == b.input_length_;
  }

 private:
  std::size_t input_length_;
  std::array<ConvShape, kConvLayers> conv_{};
  std::array<std::size_t, kConvLayers> conv_w_{};
  std::array<std::size_t, kConvLayers> conv_b_{};
  std::size_t flat_dim_ = 0;
  std::size_t dense_w_ = 0;
  std::size_t dense_b_ = 0;
  std::size_t total_ = 0;
};

struct EncoderParams {
  EncoderLayout layout;
  std::vector<double> values;

  explicit EncoderParams(EncoderLayout l = EncoderLayout()) : layout(l), values(l.total(), 0.0) {}

  std::span<double> conv_weight(std::size_t l);
  std::span<const double> conv_weight(std::size_t l) const;
  std::span<double> conv_bias(std::size_t l);
  std::span<const double> conv_bias(std::size_t l) const;
  std::span<double> dense_weight();
  std::span<const double> dense_weight() const;
  std::span<double> dense_bias();
  std::span<const double> dense_bias() const;

  // Fan-in of the tensor that owns flat index `i` (biases report their layer's fan-in).
  std::size_t fan_in_of(std::size_t i) const;

  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

// Gradient buffer with the same layout as EncoderParams.
struct ParamGrads {
  std::vector<double> values;
  explicit ParamGrads(const EncoderLayout& l) : values(l.total(), 0.0) {}
};

// He-style uniform init: weights ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)), biases 0.
EncoderParams init_params(std::uint64_t seed, std::size_t input_length = 42);

struct Embedding {
  std::vector<double> values;  // kEmbeddingDim entries, unit norm
  bool fallback = false;       // pre-normalisation norm fell under kNormGuard; values = e1
};

// Intermediate activations of one forward pass, kept for backprop and for
// detecting activation-pattern changes in finite-difference checks.
struct ForwardTrace {
  std::vector<double> input;
  std::array<std::vector<double>, kConvLayers> pre;    // conv outputs before ReLU
  std::array<std::vector<double>, kConvLayers> post;   // after ReLU (and pool when pooled)
  std::array<std::vector<std::uint32_t>, kConvLayers> argmax;  // pool routing (pooled layers)
  std::vector<double> dense_pre;  // before normalisation
  double norm = 0.0;
  Embedding output;
};

Embedding forward(const EncoderParams& params, std::span<const double> input);
ForwardTrace forward_trace(const EncoderParams& params, std::span<const double> input);

// Accumulates dLoss/dparams for one traced sample into `grads`.
void backward_sample(const EncoderParams& params, const ForwardTrace& trace,
                     std::span<const double> output_grad, ParamGrads& grads);

// Sum over the batch of dLoss/dparams.
ParamGrads backward(const EncoderParams& params, std::span<const std::vector<double>> batch,
                    std::span<const std::vector<double>> output_grads);

// True when the ReLU masks and pool routing of two traces agree.
bool same_activation_pattern(const ForwardTrace& a, const ForwardTrace& b);

}  // namespace groundbridge
