#include "oamp/nnet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>

#include <cblas.h>

#include "oamp/errors.hpp"
#include "oamp/io.hpp"
#include "oamp/rng.hpp"

namespace oamp {
namespace {

// --- elementwise helpers ------------------------------------------------------

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

inline double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

constexpr double kInvSqrt2Pi = 0.3989422804014327;

void require_finite(std::span<const double> v, const char* where) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericalError(std::string("non-finite value in ") + where);
  }
}

// --- 3x3 convolution, stride 1, zero padding 1 --------------------------------
//
// Lowered to GEMM: the (cin * 9) x (h * w) patch matrix times the
// cout x (cin * 9) kernel matrix.

void im2col(const double* in, int cin, int h, int w, double* col) {
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  for (int ci = 0; ci < cin; ++ci) {
    const double* src = in + ci * hw;
    for (int tap = 0; tap < 9; ++tap) {
      const int dy = tap / 3 - 1, dx = tap % 3 - 1;
      double* dst = col + (static_cast<std::size_t>(ci) * 9 + tap) * hw;
      const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
      for (int y = 0; y < h; ++y) {
        double* drow = dst + y * w;
        const int sy = y + dy;
        if (sy < 0 || sy >= h) {
          std::fill(drow, drow + w, 0.0);
          continue;
        }
        const double* srow = src + sy * w + dx;
        for (int x = 0; x < x0; ++x) drow[x] = 0.0;
        for (int x = x0; x < x1; ++x) drow[x] = srow[x];
        for (int x = x1; x < w; ++x) drow[x] = 0.0;
      }
    }
  }
}

void col2im_add(const double* col, int cin, int h, int w, double* out) {
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  for (int ci = 0; ci < cin; ++ci) {
    double* dst = out + ci * hw;
    for (int tap = 0; tap < 9; ++tap) {
      const int dy = tap / 3 - 1, dx = tap % 3 - 1;
      const double* src = col + (static_cast<std::size_t>(ci) * 9 + tap) * hw;
      const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
      for (int y = 0; y < h; ++y) {
        const int sy = y + dy;
        if (sy < 0 || sy >= h) continue;
        double* drow = dst + sy * w + dx;
        const double* srow = src + y * w;
        for (int x = x0; x < x1; ++x) drow[x] += srow[x];
      }
    }
  }
}

void conv3x3_forward(const double* in, int cin, int h, int w, const double* weight,
                     const double* bias, int cout, double* out) {
  const int hw = h * w;
  const int k = cin * 9;
  std::vector<double> col(static_cast<std::size_t>(k) * hw);
  im2col(in, cin, h, w, col.data());
  for (int co = 0; co < cout; ++co) std::fill(out + co * hw, out + (co + 1) * hw, bias[co]);
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, cout, hw, k, 1.0, weight, k, col.data(),
              hw, 1.0, out, hw);
}

// grad_in may be null (skip), grad_w / grad_b may be null (skip).
void conv3x3_backward(const double* in, int cin, int h, int w, const double* weight, int cout,
                      const double* grad_out, double* grad_in, double* grad_w, double* grad_b) {
  const int hw = h * w;
  const int k = cin * 9;
  if (grad_b) {
    for (int co = 0; co < cout; ++co) {
      double s = 0.0;
      for (int i = 0; i < hw; ++i) s += grad_out[co * hw + i];
      grad_b[co] += s;
    }
  }
  std::vector<double> col(static_cast<std::size_t>(k) * hw);
  if (grad_w) {
    im2col(in, cin, h, w, col.data());
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, cout, k, hw, 1.0, grad_out, hw,
                col.data(), hw, 1.0, grad_w, k);
  }
  if (grad_in) {
    cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, k, hw, cout, 1.0, weight, k, grad_out,
                hw, 0.0, col.data(), hw);
    col2im_add(col.data(), cin, h, w, grad_in);
  }
}

// --- time embedding -------------------------------------------------------------

std::vector<double> sinusoidal_embedding(double t, int dim) {
  const int half = dim / 2;
  std::vector<double> e(static_cast<std::size_t>(dim));
  for (int k = 0; k < half; ++k) {
    const double freq = std::exp(-std::log(10000.0) * k / half);
    const double arg = 1000.0 * t * freq;
    e[k] = std::sin(arg);
    e[half + k] = std::cos(arg);
  }
  return e;
}

struct Views {
  const double* w1;
  const double* b1;
  const double* w2;
  const double* b2;
  std::vector<const double*> cw, cb;
  const double* hw;
  const double* hb;
};

Views views(const ParamLayout& L, const std::vector<double>& v) {
  Views out;
  out.w1 = v.data() + L.time_w1.offset;
  out.b1 = v.data() + L.time_b1.offset;
  out.w2 = v.data() + L.time_w2.offset;
  out.b2 = v.data() + L.time_b2.offset;
  for (std::size_t k = 0; k < L.conv_w.size(); ++k) {
    out.cw.push_back(v.data() + L.conv_w[k].offset);
    out.cb.push_back(v.data() + L.conv_b[k].offset);
  }
  out.hw = v.data() + L.head_w.offset;
  out.hb = v.data() + L.head_b.offset;
  return out;
}

}  // namespace

// --- Tensor / softmax -------------------------------------------------------------

Tensor::Tensor(int c, int h, int w, std::vector<double> values)
    : channels(c), height(h), width(w), data(std::move(values)) {
  if (data.size() != static_cast<std::size_t>(c) * h * w) {
    throw DimensionError("tensor data size does not match its shape");
  }
}

Tensor channel_softmax(const Tensor& logits) {
  Tensor out(logits.channels, logits.height, logits.width);
  const std::size_t hw = logits.plane_size();
  const int C = logits.channels;
  for (std::size_t i = 0; i < hw; ++i) {
    double mx = logits.data[i];
    for (int c = 1; c < C; ++c) mx = std::max(mx, logits.data[c * hw + i]);
    double sum = 0.0;
    for (int c = 0; c < C; ++c) {
      const double e = std::exp(logits.data[c * hw + i] - mx);
      out.data[c * hw + i] = e;
      sum += e;
    }
    for (int c = 0; c < C; ++c) out.data[c * hw + i] /= sum;
  }
  return out;
}

Tensor channel_softmax_backward(const Tensor& probs, const Tensor& grad_probs) {
  if (!probs.same_shape(grad_probs)) throw DimensionError("softmax backward: shape mismatch");
  Tensor out(probs.channels, probs.height, probs.width);
  const std::size_t hw = probs.plane_size();
  for (std::size_t i = 0; i < hw; ++i) {
    double dot = 0.0;
    for (int c = 0; c < probs.channels; ++c) dot += probs.data[c * hw + i] * grad_probs.data[c * hw + i];
    for (int c = 0; c < probs.channels; ++c) {
      out.data[c * hw + i] = probs.data[c * hw + i] * (grad_probs.data[c * hw + i] - dot);
    }
  }
  return out;
}

// --- spec / layout / init -------------------------------------------------------

void ConvNetSpec::validate() const {
  if (in_channels < 1 || hidden_channels < 1 || out_channels < 1 || n_blocks < 1) {
    throw ConfigError("network channel counts and block count must be positive");
  }
  if (time_embed_dim < 2 || time_embed_dim % 2 != 0) {
    throw ConfigError("time_embed_dim must be a positive even number");
  }
  if (coord_features < 0) throw ConfigError("coord_features must be >= 0");
  if (head == OutputHead::kSoftmax && out_channels < 2) {
    throw ConfigError("softmax head needs at least two output channels");
  }
}

ParamLayout ParamLayout::of(const ConvNetSpec& spec) {
  spec.validate();
  ParamLayout L;
  std::size_t off = 0;
  auto take = [&](std::size_t n) {
    Slice s{off, n};
    off += n;
    return s;
  };
  const std::size_t E = spec.time_embed_dim;
  const std::size_t H = spec.hidden_channels;
  const std::size_t film = static_cast<std::size_t>(spec.n_blocks) * 2 * H;
  L.time_w1 = take(E * E);
  L.time_b1 = take(E);
  L.time_w2 = take(film * E);
  L.time_b2 = take(film);
  for (int k = 0; k < spec.n_blocks; ++k) {
    const std::size_t cin = k == 0 ? spec.conv_in_channels() : H;
    L.conv_w.push_back(take(H * cin * 9));
    L.conv_b.push_back(take(H));
  }
  L.head_w = take(static_cast<std::size_t>(spec.out_channels) * H * 9);
  L.head_b = take(spec.out_channels);
  L.total = off;
  return L;
}

NetParams NetParams::initialize(const ConvNetSpec& spec, InitRecord init) {
  const auto L = ParamLayout::of(spec);
  NetParams p{spec, init, std::vector<double>(L.total, 0.0)};
  Rng rng = make_rng(init.seed, "net-init");
  auto fill_normal = [&](ParamLayout::Slice s, double std) {
    for (std::size_t i = 0; i < s.size; ++i) p.values[s.offset + i] = std * standard_normal(rng);
  };
  const double E = spec.time_embed_dim;
  fill_normal(L.time_w1, std::sqrt(2.0 / E));
  for (int k = 0; k < spec.n_blocks; ++k) {
    const double cin = k == 0 ? spec.conv_in_channels() : spec.hidden_channels;
    fill_normal(L.conv_w[k], std::sqrt(2.0 / (cin * 9.0)));
  }
  if (init.scheme == InitScheme::kHeNormalRandomHead) {
    fill_normal(L.time_b1, 0.1);
    fill_normal(L.time_w2, 0.1 / std::sqrt(E));
    fill_normal(L.time_b2, 0.1);
    for (int k = 0; k < spec.n_blocks; ++k) fill_normal(L.conv_b[k], 0.1);
    fill_normal(L.head_w, std::sqrt(1.0 / (spec.hidden_channels * 9.0)));
    fill_normal(L.head_b, 0.1);
  }
  return p;
}

// --- forward / backward ---------------------------------------------------------------

Tensor position_channels(int n_freq, int height, int width) {
  Tensor pos(2 * n_freq, height, width);
  for (int f = 1; f <= n_freq; ++f) {
    for (int y = 0; y < height; ++y) {
      const double cy = std::cos(std::numbers::pi * f * (y + 0.5) / height);
      for (int x = 0; x < width; ++x) {
        pos.at(2 * (f - 1), y, x) = cy;
        pos.at(2 * (f - 1) + 1, y, x) = std::cos(std::numbers::pi * f * (x + 0.5) / width);
      }
    }
  }
  return pos;
}

Tensor forward(const NetParams& params, const Tensor& input, double t) {
  Tape tape;
  return forward(params, input, t, tape);
}

Tensor forward(const NetParams& params, const Tensor& input, double t, Tape& tape) {
  const auto& spec = params.spec;
  if (input.channels != spec.in_channels) {
    throw DimensionError("network input has " + std::to_string(input.channels) +
                         " channels, expected " + std::to_string(spec.in_channels));
  }
  if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("network time outside [0, 1]");
  require_finite(input.data, "network input");
  const auto L = ParamLayout::of(spec);
  if (params.values.size() != L.total) throw DimensionError("parameter count does not match spec");
  const auto V = views(L, params.values);
  const int E = spec.time_embed_dim;
  const int H = spec.hidden_channels;
  const int nb = spec.n_blocks;
  const int h = input.height, w = input.width;

  if (spec.coord_features > 0) {
    const Tensor pos = position_channels(spec.coord_features, h, w);
    tape.input = Tensor(spec.conv_in_channels(), h, w);
    std::copy(input.data.begin(), input.data.end(), tape.input.data.begin());
    std::copy(pos.data.begin(), pos.data.end(), tape.input.data.begin() + input.size());
  } else {
    tape.input = input;
  }
  tape.t = t;
  tape.embed = sinusoidal_embedding(t, E);
  tape.mlp_pre.assign(E, 0.0);
  tape.mlp_hidden.assign(E, 0.0);
  for (int i = 0; i < E; ++i) {
    double s = V.b1[i];
    for (int j = 0; j < E; ++j) s += V.w1[i * E + j] * tape.embed[j];
    tape.mlp_pre[i] = s;
    tape.mlp_hidden[i] = gelu(s);
  }
  const int nf = nb * 2 * H;
  tape.film.assign(nf, 0.0);
  for (int i = 0; i < nf; ++i) {
    double s = V.b2[i];
    for (int j = 0; j < E; ++j) s += V.w2[i * E + j] * tape.mlp_hidden[j];
    tape.film[i] = s;
  }

  tape.conv_out.assign(nb, Tensor());
  tape.film_out.assign(nb, Tensor());
  tape.film_cdf.assign(nb, Tensor());
  tape.block_out.assign(nb, Tensor());
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  for (int k = 0; k < nb; ++k) {
    const Tensor& src = k == 0 ? tape.input : tape.block_out[k - 1];
    Tensor z(H, h, w);
    conv3x3_forward(src.data.data(), src.channels, h, w, V.cw[k], V.cb[k], H, z.data.data());
    Tensor u(H, h, w), phi(H, h, w), out(H, h, w);
    const double* scale = tape.film.data() + k * 2 * H;
    const double* shift = scale + H;
    for (int c = 0; c < H; ++c) {
      const double g = 1.0 + scale[c], b = shift[c];
      for (std::size_t i = 0; i < hw; ++i) {
        const double v = z.data[c * hw + i] * g + b;
        const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
        u.data[c * hw + i] = v;
        phi.data[c * hw + i] = cdf;
        out.data[c * hw + i] = v * cdf;
      }
    }
    if (k > 0) {
      for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += src.data[i];
    }
    tape.conv_out[k] = std::move(z);
    tape.film_out[k] = std::move(u);
    tape.film_cdf[k] = std::move(phi);
    tape.block_out[k] = std::move(out);
  }

  Tensor logits(spec.out_channels, h, w);
  const Tensor& last = tape.block_out.back();
  conv3x3_forward(last.data.data(), H, h, w, V.hw, V.hb, spec.out_channels, logits.data.data());
  tape.output = spec.head == OutputHead::kSoftmax ? channel_softmax(logits) : std::move(logits);
  require_finite(tape.output.data, "network output");
  return tape.output;
}

Tensor backward(const NetParams& params, const Tape& tape, const Tensor& grad_output,
                std::vector<double>* param_grad, bool want_input_grad) {
  const auto& spec = params.spec;
  if (!grad_output.same_shape(tape.output)) throw DimensionError("grad_output shape mismatch");
  require_finite(grad_output.data, "output gradient");
  const auto L = ParamLayout::of(spec);
  const auto V = views(L, params.values);
  if (param_grad && param_grad->size() != L.total) {
    throw DimensionError("parameter gradient buffer has wrong size");
  }
  double* G = param_grad ? param_grad->data() : nullptr;
  auto gslice = [&](ParamLayout::Slice s) { return G ? G + s.offset : nullptr; };

  const int E = spec.time_embed_dim;
  const int H = spec.hidden_channels;
  const int nb = spec.n_blocks;
  const int h = tape.input.height, w = tape.input.width;
  const std::size_t hw = static_cast<std::size_t>(h) * w;

  Tensor dlogits = spec.head == OutputHead::kSoftmax
                       ? channel_softmax_backward(tape.output, grad_output)
                       : grad_output;
  Tensor dh(H, h, w);
  conv3x3_backward(tape.block_out.back().data.data(), H, h, w, V.hw, spec.out_channels,
                   dlogits.data.data(), dh.data.data(), gslice(L.head_w), gslice(L.head_b));

  std::vector<double> dfilm(static_cast<std::size_t>(nb) * 2 * H, 0.0);
  Tensor din;
  for (int k = nb - 1; k >= 0; --k) {
    const Tensor& z = tape.conv_out[k];
    const Tensor& u = tape.film_out[k];
    const Tensor& cdf = tape.film_cdf[k];
    const double* scale = tape.film.data() + k * 2 * H;
    double* dscale = dfilm.data() + k * 2 * H;
    double* dshift = dscale + H;
    Tensor dz(H, h, w);
    for (int c = 0; c < H; ++c) {
      const double g = 1.0 + scale[c];
      double ds = 0.0, db = 0.0;
      for (std::size_t i = 0; i < hw; ++i) {
        const std::size_t j = c * hw + i;
        const double x = u.data[j];
        const double du = dh.data[j] * (cdf.data[j] + x * kInvSqrt2Pi * std::exp(-0.5 * x * x));
        ds += du * z.data[j];
        db += du;
        dz.data[j] = du * g;
      }
      dscale[c] += ds;
      dshift[c] += db;
    }
    const Tensor& src = k == 0 ? tape.input : tape.block_out[k - 1];
    const bool need_src_grad = k > 0 || want_input_grad;
    Tensor dsrc = need_src_grad ? Tensor(src.channels, h, w) : Tensor();
    conv3x3_backward(src.data.data(), src.channels, h, w, V.cw[k], H, dz.data.data(),
                     need_src_grad ? dsrc.data.data() : nullptr, gslice(L.conv_w[k]),
                     gslice(L.conv_b[k]));
    if (k > 0) {
      // residual path
      for (std::size_t i = 0; i < dsrc.data.size(); ++i) dsrc.data[i] += dh.data[i];
      dh = std::move(dsrc);
    } else {
      din = std::move(dsrc);
    }
  }

  if (G) {
    double* gw2 = gslice(L.time_w2);
    double* gb2 = gslice(L.time_b2);
    double* gw1 = gslice(L.time_w1);
    double* gb1 = gslice(L.time_b1);
    std::vector<double> dhidden(E, 0.0);
    const int nf = nb * 2 * H;
    for (int i = 0; i < nf; ++i) {
      const double d = dfilm[i];
      gb2[i] += d;
      for (int j = 0; j < E; ++j) {
        gw2[i * E + j] += d * tape.mlp_hidden[j];
        dhidden[j] += V.w2[i * E + j] * d;
      }
    }
    for (int i = 0; i < E; ++i) {
      const double dpre = dhidden[i] * gelu_grad(tape.mlp_pre[i]);
      gb1[i] += dpre;
      for (int j = 0; j < E; ++j) gw1[i * E + j] += dpre * tape.embed[j];
    }
    require_finite(*param_grad, "parameter gradient");
  }
  if (!want_input_grad) return Tensor();
  require_finite(din.data, "input gradient");
  if (spec.coord_features > 0) {
    din.channels = spec.in_channels;
    din.data.resize(static_cast<std::size_t>(spec.in_channels) * hw);
  }
  return din;
}

GradResult param_grad(const NetParams& params, std::span<const BatchItem> batch) {
  if (batch.empty()) throw ValidationError("param_grad: empty batch");
  const auto L = ParamLayout::of(params.spec);
  GradResult result{0.0, std::vector<double>(L.total, 0.0)};
  Tape tape;
  for (const auto& item : batch) {
    const Tensor out = forward(params, item.input, item.t, tape);
    Tensor g(out.channels, out.height, out.width);
    const double loss = item.loss(out, g);
    if (!std::isfinite(loss)) throw NumericalError("non-finite loss in batch");
    result.loss += loss;
    backward(params, tape, g, &result.grad, false);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  result.loss *= inv;
  for (double& x : result.grad) x *= inv;
  return result;
}

InputGradResult input_grad(const NetParams& params, const LossFn& loss, const Tensor& input,
                           double t) {
  Tape tape;
  const Tensor out = forward(params, input, t, tape);
  Tensor g(out.channels, out.height, out.width);
  const double value = loss(out, g);
  if (!std::isfinite(value)) throw NumericalError("non-finite loss");
  return {value, backward(params, tape, g, nullptr, true)};
}

// --- Adam -------------------------------------------------------------------------------

AdamState AdamState::for_params(const NetParams& params, double lr) {
  AdamState s;
  s.lr = lr;
  s.m.assign(params.values.size(), 0.0);
  s.v.assign(params.values.size(), 0.0);
  return s;
}

void adam_step(AdamState& state, NetParams& params, std::span<const double> grads) {
  const std::size_t n = params.values.size();
  if (grads.size() != n || state.m.size() != n || state.v.size() != n) {
    throw DimensionError("adam_step: parameter, gradient and moment sizes differ");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params.values[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

// --- checkpoints ---------------------------------------------------------------------------

namespace {

constexpr char kWeightMagic[4] = {'O', 'A', 'M', 'W'};
constexpr std::uint16_t kWeightVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  static_assert(std::endian::native == std::endian::little);
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(const std::vector<std::uint8_t>& in, std::size_t& off) {
  if (off + sizeof(T) > in.size()) throw FormatError("checkpoint truncated");
  T v;
  std::memcpy(&v, in.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const NetParams& params) {
  std::vector<std::uint8_t> out(kWeightMagic, kWeightMagic + 4);
  put<std::uint16_t>(out, kWeightVersion);
  const auto& s = params.spec;
  for (int v : {s.in_channels, s.hidden_channels, s.out_channels, s.n_blocks, s.time_embed_dim,
                s.coord_features}) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(v));
  }
  put<std::uint8_t>(out, s.head == OutputHead::kSoftmax ? 0 : 1);
  put<std::uint64_t>(out, params.init.seed);
  put<std::uint8_t>(out, params.init.scheme == InitScheme::kHeNormalZeroHead ? 0 : 1);
  put<std::uint64_t>(out, params.values.size());
  for (double v : params.values) put<double>(out, v);
  io::write_atomic(path, out);
}

NetParams load_checkpoint(const std::filesystem::path& path) {
  const auto in = io::read_bytes(path);
  if (in.size() < 4 || std::memcmp(in.data(), kWeightMagic, 4) != 0) {
    throw FormatError(path.string() + ": bad checkpoint magic");
  }
  std::size_t off = 4;
  if (get<std::uint16_t>(in, off) != kWeightVersion) throw FormatError("unsupported checkpoint version");
  NetParams p;
  p.spec.in_channels = static_cast<int>(get<std::uint32_t>(in, off));
  p.spec.hidden_channels = static_cast<int>(get<std::uint32_t>(in, off));
  p.spec.out_channels = static_cast<int>(get<std::uint32_t>(in, off));
  p.spec.n_blocks = static_cast<int>(get<std::uint32_t>(in, off));
  p.spec.time_embed_dim = static_cast<int>(get<std::uint32_t>(in, off));
  p.spec.coord_features = static_cast<int>(get<std::uint32_t>(in, off));
  const auto head = get<std::uint8_t>(in, off);
  if (head > 1) throw FormatError("checkpoint: unknown output head");
  p.spec.head = head == 0 ? OutputHead::kSoftmax : OutputHead::kLinear;
  p.init.seed = get<std::uint64_t>(in, off);
  p.init.scheme = get<std::uint8_t>(in, off) == 0 ? InitScheme::kHeNormalZeroHead
                                                  : InitScheme::kHeNormalRandomHead;
  const auto n = get<std::uint64_t>(in, off);
  ParamLayout L;
  try {
    L = ParamLayout::of(p.spec);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint spec invalid: ") + e.what());
  }
  if (n != L.total) throw FormatError("checkpoint parameter count does not match its spec");
  if (in.size() - off != n * 8) throw FormatError("checkpoint payload size mismatch");
  p.values.resize(n);
  std::memcpy(p.values.data(), in.data() + off, n * 8);
  require_finite(p.values, "checkpoint");
  return p;
}

std::string to_string(OutputHead head) {
  return head == OutputHead::kSoftmax ? "softmax-over-channels" : "linear";
}

OutputHead output_head_from_string(const std::string& name) {
  if (name == "softmax-over-channels" || name == "softmax") return OutputHead::kSoftmax;
  if (name == "linear") return OutputHead::kLinear;
  throw ConfigError("unknown output head '" + name + "'");
}

}  // namespace oamp
