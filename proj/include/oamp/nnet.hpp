#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace oamp {

/// C x H x W array of doubles, channel-major.
struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, fill) {}
  Tensor(int c, int h, int w, std::vector<double> values);

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  std::size_t size() const { return data.size(); }
  std::span<double> plane(int c) { return {data.data() + c * plane_size(), plane_size()}; }
  std::span<const double> plane(int c) const {
    return {data.data() + c * plane_size(), plane_size()};
  }
  double& at(int c, int y, int x) { return data[c * plane_size() + y * width + x]; }
  double at(int c, int y, int x) const { return data[c * plane_size() + y * width + x]; }
  bool same_shape(const Tensor& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Per-pixel softmax across the channel axis (max-shifted).
Tensor channel_softmax(const Tensor& logits);
/// Vector-Jacobian product of channel_softmax: given p = softmax(z) and dL/dp,
/// returns dL/dz = p * (g - <p, g>) per pixel.
Tensor channel_softmax_backward(const Tensor& probs, const Tensor& grad_probs);

enum class OutputHead { kSoftmax, kLinear };

struct ConvNetSpec {
  int in_channels = 2;
  int hidden_channels = 32;
  int out_channels = 2;
  int n_blocks = 4;
  int time_embed_dim = 32;
  OutputHead head = OutputHead::kSoftmax;
  /// Number of cosine frequencies per axis appended to the input as fixed
  /// position channels (0 = none). Adds 2 * coord_features input channels.
  int coord_features = 0;

  int conv_in_channels() const { return in_channels + 2 * coord_features; }

  void validate() const;
  friend bool operator==(const ConvNetSpec&, const ConvNetSpec&) = default;
};

enum class InitScheme {
  kHeNormalZeroHead,   // He-normal convs, zero FiLM projection, zero output conv
  kHeNormalRandomHead  // everything random; used by gradient checks
};

struct InitRecord {
  std::uint64_t seed = 0;
  InitScheme scheme = InitScheme::kHeNormalZeroHead;

  friend bool operator==(const InitRecord&, const InitRecord&) = default;
};

/// Offsets of each parameter tensor inside the flat parameter vector.
struct ParamLayout {
  struct Slice {
    std::size_t offset = 0;
    std::size_t size = 0;
  };
  Slice time_w1, time_b1, time_w2, time_b2;
  std::vector<Slice> conv_w, conv_b;
  Slice head_w, head_b;
  std::size_t total = 0;

  static ParamLayout of(const ConvNetSpec& spec);
};

struct NetParams {
  ConvNetSpec spec;
  InitRecord init;
  std::vector<double> values;

  static NetParams initialize(const ConvNetSpec& spec, InitRecord init);
  friend bool operator==(const NetParams&, const NetParams&) = default;
};

/// Fixed position channels: cos(pi f (y + 0.5) / H) and cos(pi f (x + 0.5) / W)
/// for f = 1..n_freq.
Tensor position_channels(int n_freq, int height, int width);

/// Intermediate activations kept by a forward pass for the backward pass.
struct Tape {
  Tensor input;  // caller input with the position channels appended
  double t = 0.0;
  std::vector<double> embed, mlp_pre, mlp_hidden, film;
  std::vector<Tensor> conv_out;  // pre-FiLM convolution output per block
  std::vector<Tensor> film_out;  // post-FiLM, pre-GELU per block
  std::vector<Tensor> film_cdf;  // standard normal CDF of film_out
  std::vector<Tensor> block_out;
  Tensor output;  // after the head (probabilities for a softmax head)
};

Tensor forward(const NetParams& params, const Tensor& input, double t);
Tensor forward(const NetParams& params, const Tensor& input, double t, Tape& tape);

/// Reverse pass. Adds dL/dtheta into `param_grad` when non-null (size must be
/// the parameter count) and returns dL/dinput (empty tensor when
/// `want_input_grad` is false).
Tensor backward(const NetParams& params, const Tape& tape, const Tensor& grad_output,
                std::vector<double>* param_grad, bool want_input_grad);

/// Scalar loss of a network output; writes dL/doutput into `grad`.
using LossFn = std::function<double(const Tensor& output, Tensor& grad)>;

struct BatchItem {
  Tensor input;  // spec.in_channels planes; position channels are added by forward
  double t = 0.0;
  LossFn loss;
};

struct GradResult {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Batch-mean loss and its exact parameter gradient.
GradResult param_grad(const NetParams& params, std::span<const BatchItem> batch);

struct InputGradResult {
  double loss = 0.0;
  Tensor grad;
};

InputGradResult input_grad(const NetParams& params, const LossFn& loss, const Tensor& input,
                           double t);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<double> m;
  std::vector<double> v;

  static AdamState for_params(const NetParams& params, double lr);
};

void adam_step(AdamState& state, NetParams& params, std::span<const double> grads);

// Checkpoints: "OAMW", u16 version, spec header, u64 count, raw f64 payload.
void save_checkpoint(const std::filesystem::path& path, const NetParams& params);
NetParams load_checkpoint(const std::filesystem::path& path);

std::string to_string(OutputHead head);
OutputHead output_head_from_string(const std::string& name);

}  // namespace oamp
