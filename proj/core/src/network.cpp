#include "syntone/network.hpp"

#include "syntone/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace syntone::models {
namespace {

constexpr int kKernel = 4;
constexpr int kTaps = kKernel * kKernel;

// Row-major GEMM kernels, accumulating into C.

// C[M x N] += A[M x K] * B[K x N]
void gemm_nn(int m, int n, int k, const double* a, const double* b, double* c) {
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<std::size_t>(i) * n;
    const double* ai = a + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      const double* bp = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// C[M x N] += A[M x K] * B[N x K]^T
void gemm_nt(int m, int n, int k, const double* a, const double* b, double* c) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * k;
    double* ci = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<std::size_t>(j) * k;
      double s = 0.0;
      for (int p = 0; p < k; ++p) s += ai[p] * bj[p];
      ci[j] += s;
    }
  }
}

// C[M x N] += A[K x M]^T * B[K x N]
void gemm_tn(int m, int n, int k, const double* a, const double* b, double* c) {
  for (int p = 0; p < k; ++p) {
    const double* ap = a + static_cast<std::size_t>(p) * m;
    const double* bp = b + static_cast<std::size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const double av = ap[i];
      if (av == 0.0) continue;
      double* ci = c + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

/// Patches of a [ch, big_h, big_w] image for a stride-2, pad-1, kernel-4
/// convolution producing [small_h, small_w]; col is (ch*16) x (small_h*small_w).
void im2col(const double* x, int ch, int big_h, int big_w, int small_h, int small_w, double* col) {
  const int p = small_h * small_w;
  for (int c = 0; c < ch; ++c) {
    for (int ky = 0; ky < kKernel; ++ky) {
      for (int kx = 0; kx < kKernel; ++kx) {
        double* row = col + static_cast<std::size_t>((c * kKernel + ky) * kKernel + kx) * p;
        for (int oy = 0; oy < small_h; ++oy) {
          const int iy = 2 * oy - 1 + ky;
          double* dst = row + oy * small_w;
          if (iy < 0 || iy >= big_h) {
            std::fill(dst, dst + small_w, 0.0);
            continue;
          }
          const double* src = x + (static_cast<std::size_t>(c) * big_h + iy) * big_w;
          for (int ox = 0; ox < small_w; ++ox) {
            const int ix = 2 * ox - 1 + kx;
            dst[ox] = (ix >= 0 && ix < big_w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

/// Adjoint of im2col: scatter-adds patches back into a [ch, big_h, big_w] image.
void col2im(const double* col, int ch, int big_h, int big_w, int small_h, int small_w, double* x) {
  const int p = small_h * small_w;
  for (int c = 0; c < ch; ++c) {
    for (int ky = 0; ky < kKernel; ++ky) {
      for (int kx = 0; kx < kKernel; ++kx) {
        const double* row = col + static_cast<std::size_t>((c * kKernel + ky) * kKernel + kx) * p;
        for (int oy = 0; oy < small_h; ++oy) {
          const int iy = 2 * oy - 1 + ky;
          if (iy < 0 || iy >= big_h) continue;
          double* dst = x + (static_cast<std::size_t>(c) * big_h + iy) * big_w;
          const double* src = row + oy * small_w;
          for (int ox = 0; ox < small_w; ++ox) {
            const int ix = 2 * ox - 1 + kx;
            if (ix >= 0 && ix < big_w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

inline double leaky(double v) { return v > 0.0 ? v : kLeakySlope * v; }
inline double leaky_grad(double pre) { return pre > 0.0 ? 1.0 : kLeakySlope; }

void apply_leaky(const std::vector<double>& pre, std::vector<double>& post) {
  post.resize(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) post[i] = leaky(pre[i]);
}

void check_size(std::span<const double> v, std::size_t expected, const char* what) {
  if (v.size() != expected) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(expected) +
                                " values, got " + std::to_string(v.size()));
  }
}

}  // namespace

NetworkSpec NetworkSpec::tiny() {
  NetworkSpec s;
  s.n_mels = 8;
  s.n_frames = 4;
  s.channels = {2, 2, 2, 2};
  s.hidden = 4;
  s.latent_dim = 3;
  return s;
}

void NetworkSpec::validate() const {
  if (n_mels < 1 || n_frames < 1) throw std::invalid_argument("network input must be non-empty");
  for (int c : channels) {
    if (c < 1) throw std::invalid_argument("channel widths must be positive");
  }
  if (hidden < 1 || latent_dim < 1) throw std::invalid_argument("hidden and latent sizes must be positive");
}

std::array<int, 2> NetworkSpec::stage_shape(int stage) const {
  int h = n_mels, w = n_frames;
  for (int s = 0; s < stage; ++s) {
    h = (h + 1) / 2;
    w = (w + 1) / 2;
  }
  return {h, w};
}

int NetworkSpec::flat_size() const {
  const auto s = stage_shape(4);
  return channels[3] * s[0] * s[1];
}

std::size_t ParameterLayout::add(std::string name, std::vector<std::size_t> shape) {
  ParamEntry e;
  e.name = std::move(name);
  e.size = 1;
  for (auto d : shape) e.size *= d;
  e.shape = std::move(shape);
  e.offset = total_;
  total_ += e.size;
  entries_.push_back(std::move(e));
  return entries_.size() - 1;
}

const ParamEntry& ParameterLayout::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e;
  }
  throw std::out_of_range("no parameter named '" + std::string(name) + "'");
}

ConvVae::ConvVae(const NetworkSpec& spec) : spec_(spec) {
  spec_.validate();
  const auto k = static_cast<std::size_t>(kKernel);
  int in_ch = 1;
  for (int i = 0; i < 4; ++i) {
    const auto big = spec_.stage_shape(i);
    const auto small = spec_.stage_shape(i + 1);
    Conv c{in_ch, spec_.channels[i], big[0], big[1], small[0], small[1], 0, 0};
    const std::string base = "enc.conv" + std::to_string(i);
    c.weight = layout_.add(base + ".weight", {std::size_t(c.out_ch), std::size_t(c.in_ch), k, k});
    c.bias = layout_.add(base + ".bias", {std::size_t(c.out_ch)});
    enc_conv_[i] = c;
    in_ch = spec_.channels[i];
  }
  const int flat = spec_.flat_size();
  const int d = spec_.latent_dim;
  enc_fc1_ = {flat, spec_.hidden, layout_.add("enc.fc1.weight", {std::size_t(spec_.hidden), std::size_t(flat)}),
              layout_.add("enc.fc1.bias", {std::size_t(spec_.hidden)})};
  enc_fc2_ = {spec_.hidden, 2 * d, layout_.add("enc.fc2.weight", {std::size_t(2 * d), std::size_t(spec_.hidden)}),
              layout_.add("enc.fc2.bias", {std::size_t(2 * d)})};
  dec_fc1_ = {d, spec_.hidden, layout_.add("dec.fc1.weight", {std::size_t(spec_.hidden), std::size_t(d)}),
              layout_.add("dec.fc1.bias", {std::size_t(spec_.hidden)})};
  dec_fc2_ = {spec_.hidden, flat, layout_.add("dec.fc2.weight", {std::size_t(flat), std::size_t(spec_.hidden)}),
              layout_.add("dec.fc2.bias", {std::size_t(flat)})};
  for (int i = 0; i < 4; ++i) {
    const int stage = 4 - i;  // small side
    const auto small = spec_.stage_shape(stage);
    const auto big = spec_.stage_shape(stage - 1);
    const int cin = spec_.channels[3 - i];
    const int cout = (i == 3) ? 1 : spec_.channels[2 - i];
    Conv c{cin, cout, small[0], small[1], big[0], big[1], 0, 0};
    const std::string base = "dec.deconv" + std::to_string(i);
    c.weight = layout_.add(base + ".weight", {std::size_t(cin), std::size_t(cout), k, k});
    c.bias = layout_.add(base + ".bias", {std::size_t(cout)});
    dec_deconv_[i] = c;
  }
}

std::vector<double> ConvVae::init_params(std::uint64_t seed) const {
  std::vector<double> params(layout_.total());
  Rng rng(seed);
  auto fill = [&](std::size_t weight, std::size_t bias, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t idx : {weight, bias}) {
      const auto& e = layout_.at(idx);
      for (std::size_t i = 0; i < e.size; ++i) params[e.offset + i] = bound * (2.0 * rng.uniform() - 1.0);
    }
  };
  for (const auto& c : enc_conv_) fill(c.weight, c.bias, c.in_ch * kTaps);
  for (const auto* f : {&enc_fc1_, &enc_fc2_, &dec_fc1_, &dec_fc2_}) fill(f->weight, f->bias, f->in);
  for (const auto& c : dec_deconv_) fill(c.weight, c.bias, c.out_ch * kTaps);
  return params;
}

void ConvVae::encode_forward(std::span<const double> params, std::span<const double> x, EncoderTape& tape) const {
  check_size(params, layout_.total(), "encoder parameters");
  check_size(x, static_cast<std::size_t>(spec_.input_size()), "encoder input");
  const double* p = params.data();
  tape.input.assign(x.begin(), x.end());
  const double* in = tape.input.data();
  for (int i = 0; i < 4; ++i) {
    const Conv& c = enc_conv_[i];
    const int pix = c.out_h * c.out_w;
    const int taps = c.in_ch * kTaps;
    auto& col = tape.cols[i];
    col.resize(static_cast<std::size_t>(taps) * pix);
    im2col(in, c.in_ch, c.in_h, c.in_w, c.out_h, c.out_w, col.data());
    auto& pre = tape.pre[i];
    pre.resize(static_cast<std::size_t>(c.out_ch) * pix);
    const double* bias = p + layout_.at(c.bias).offset;
    for (int o = 0; o < c.out_ch; ++o) std::fill_n(pre.data() + static_cast<std::size_t>(o) * pix, pix, bias[o]);
    gemm_nn(c.out_ch, pix, taps, p + layout_.at(c.weight).offset, col.data(), pre.data());
    apply_leaky(pre, tape.post[i]);
    in = tape.post[i].data();
  }

  auto dense = [&](const Dense& f, const double* input, std::vector<double>& out) {
    out.assign(p + layout_.at(f.bias).offset, p + layout_.at(f.bias).offset + f.out);
    gemm_nn(f.out, 1, f.in, p + layout_.at(f.weight).offset, input, out.data());
  };
  dense(enc_fc1_, tape.post[3].data(), tape.fc1_pre);
  apply_leaky(tape.fc1_pre, tape.fc1_post);
  std::vector<double> head;
  dense(enc_fc2_, tape.fc1_post.data(), head);

  const int d = spec_.latent_dim;
  tape.posterior.mu.assign(head.begin(), head.begin() + d);
  tape.raw_logvar.assign(head.begin() + d, head.end());
  tape.posterior.logvar.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) tape.posterior.logvar[j] = std::clamp(tape.raw_logvar[j], kLogvarMin, kLogvarMax);
}

void ConvVae::encode_backward(std::span<const double> params, const EncoderTape& tape,
                              std::span<const double> d_mu, std::span<const double> d_logvar,
                              std::span<double> grad) const {
  const double* p = params.data();
  double* g = grad.data();
  const int d = spec_.latent_dim;

  std::vector<double> d_head(static_cast<std::size_t>(2 * d));
  for (int j = 0; j < d; ++j) {
    d_head[j] = d_mu[j];
    const double raw = tape.raw_logvar[j];
    d_head[d + j] = (raw > kLogvarMin && raw < kLogvarMax) ? d_logvar[j] : 0.0;
  }

  // fc2 (linear head)
  gemm_nn(enc_fc2_.out, enc_fc2_.in, 1, d_head.data(), tape.fc1_post.data(), g + layout_.at(enc_fc2_.weight).offset);
  for (int o = 0; o < enc_fc2_.out; ++o) g[layout_.at(enc_fc2_.bias).offset + o] += d_head[o];
  std::vector<double> d_fc1(static_cast<std::size_t>(enc_fc1_.out), 0.0);
  gemm_tn(enc_fc2_.in, 1, enc_fc2_.out, p + layout_.at(enc_fc2_.weight).offset, d_head.data(), d_fc1.data());
  for (std::size_t i = 0; i < d_fc1.size(); ++i) d_fc1[i] *= leaky_grad(tape.fc1_pre[i]);

  // fc1
  gemm_nn(enc_fc1_.out, enc_fc1_.in, 1, d_fc1.data(), tape.post[3].data(), g + layout_.at(enc_fc1_.weight).offset);
  for (int o = 0; o < enc_fc1_.out; ++o) g[layout_.at(enc_fc1_.bias).offset + o] += d_fc1[o];
  std::vector<double> d_act(static_cast<std::size_t>(enc_fc1_.in), 0.0);
  gemm_tn(enc_fc1_.in, 1, enc_fc1_.out, p + layout_.at(enc_fc1_.weight).offset, d_fc1.data(), d_act.data());

  std::vector<double> d_col;
  for (int i = 3; i >= 0; --i) {
    const Conv& c = enc_conv_[i];
    const int pix = c.out_h * c.out_w;
    const int taps = c.in_ch * kTaps;
    for (std::size_t q = 0; q < d_act.size(); ++q) d_act[q] *= leaky_grad(tape.pre[i][q]);
    gemm_nt(c.out_ch, taps, pix, d_act.data(), tape.cols[i].data(), g + layout_.at(c.weight).offset);
    double* gb = g + layout_.at(c.bias).offset;
    for (int o = 0; o < c.out_ch; ++o) {
      const double* row = d_act.data() + static_cast<std::size_t>(o) * pix;
      double s = 0.0;
      for (int q = 0; q < pix; ++q) s += row[q];
      gb[o] += s;
    }
    if (i == 0) break;
    d_col.assign(static_cast<std::size_t>(taps) * pix, 0.0);
    gemm_tn(taps, pix, c.out_ch, p + layout_.at(c.weight).offset, d_act.data(), d_col.data());
    std::vector<double> d_in(static_cast<std::size_t>(c.in_ch) * c.in_h * c.in_w, 0.0);
    col2im(d_col.data(), c.in_ch, c.in_h, c.in_w, c.out_h, c.out_w, d_in.data());
    d_act = std::move(d_in);
  }
}

void ConvVae::decode_forward(std::span<const double> params, std::span<const double> z, DecoderTape& tape) const {
  check_size(params, layout_.total(), "decoder parameters");
  check_size(z, static_cast<std::size_t>(spec_.latent_dim), "latent code");
  const double* p = params.data();
  tape.z.assign(z.begin(), z.end());

  auto dense = [&](const Dense& f, const double* input, std::vector<double>& out) {
    out.assign(p + layout_.at(f.bias).offset, p + layout_.at(f.bias).offset + f.out);
    gemm_nn(f.out, 1, f.in, p + layout_.at(f.weight).offset, input, out.data());
  };
  dense(dec_fc1_, tape.z.data(), tape.fc1_pre);
  apply_leaky(tape.fc1_pre, tape.fc1_post);
  dense(dec_fc2_, tape.fc1_post.data(), tape.fc2_pre);
  apply_leaky(tape.fc2_pre, tape.fc2_post);

  const double* in = tape.fc2_post.data();
  std::vector<double> col;
  for (int i = 0; i < 4; ++i) {
    const Conv& c = dec_deconv_[i];
    const int pix = c.in_h * c.in_w;
    const int taps = c.out_ch * kTaps;
    col.assign(static_cast<std::size_t>(taps) * pix, 0.0);
    gemm_tn(taps, pix, c.in_ch, p + layout_.at(c.weight).offset, in, col.data());
    auto& pre = tape.pre[i];
    const int out_pix = c.out_h * c.out_w;
    pre.resize(static_cast<std::size_t>(c.out_ch) * out_pix);
    const double* bias = p + layout_.at(c.bias).offset;
    for (int o = 0; o < c.out_ch; ++o) std::fill_n(pre.data() + static_cast<std::size_t>(o) * out_pix, out_pix, bias[o]);
    col2im(col.data(), c.out_ch, c.out_h, c.out_w, c.in_h, c.in_w, pre.data());
    if (i == 3) {
      tape.post[i] = pre;
    } else {
      apply_leaky(pre, tape.post[i]);
    }
    in = tape.post[i].data();
  }
}

void ConvVae::decode_backward(std::span<const double> params, const DecoderTape& tape,
                              std::span<const double> d_out, std::span<double> grad,
                              std::span<double> d_z) const {
  check_size(d_out, static_cast<std::size_t>(spec_.input_size()), "decoder output gradient");
  const double* p = params.data();
  double* g = grad.data();

  std::vector<double> d_act(d_out.begin(), d_out.end());
  std::vector<double> d_col;
  for (int i = 3; i >= 0; --i) {
    const Conv& c = dec_deconv_[i];
    const int pix = c.in_h * c.in_w;
    const int out_pix = c.out_h * c.out_w;
    const int taps = c.out_ch * kTaps;
    if (i != 3) {
      for (std::size_t q = 0; q < d_act.size(); ++q) d_act[q] *= leaky_grad(tape.pre[i][q]);
    }
    double* gb = g + layout_.at(c.bias).offset;
    for (int o = 0; o < c.out_ch; ++o) {
      const double* row = d_act.data() + static_cast<std::size_t>(o) * out_pix;
      double s = 0.0;
      for (int q = 0; q < out_pix; ++q) s += row[q];
      gb[o] += s;
    }
    d_col.resize(static_cast<std::size_t>(taps) * pix);
    im2col(d_act.data(), c.out_ch, c.out_h, c.out_w, c.in_h, c.in_w, d_col.data());
    const double* input = (i == 0) ? tape.fc2_post.data() : tape.post[i - 1].data();
    gemm_nt(c.in_ch, taps, pix, input, d_col.data(), g + layout_.at(c.weight).offset);
    std::vector<double> d_in(static_cast<std::size_t>(c.in_ch) * pix, 0.0);
    gemm_nn(c.in_ch, pix, taps, p + layout_.at(c.weight).offset, d_col.data(), d_in.data());
    d_act = std::move(d_in);
  }

  // fc2 -> reshape
  for (std::size_t q = 0; q < d_act.size(); ++q) d_act[q] *= leaky_grad(tape.fc2_pre[q]);
  gemm_nn(dec_fc2_.out, dec_fc2_.in, 1, d_act.data(), tape.fc1_post.data(), g + layout_.at(dec_fc2_.weight).offset);
  for (int o = 0; o < dec_fc2_.out; ++o) g[layout_.at(dec_fc2_.bias).offset + o] += d_act[o];
  std::vector<double> d_h(static_cast<std::size_t>(dec_fc2_.in), 0.0);
  gemm_tn(dec_fc2_.in, 1, dec_fc2_.out, p + layout_.at(dec_fc2_.weight).offset, d_act.data(), d_h.data());
  for (std::size_t q = 0; q < d_h.size(); ++q) d_h[q] *= leaky_grad(tape.fc1_pre[q]);

  gemm_nn(dec_fc1_.out, dec_fc1_.in, 1, d_h.data(), tape.z.data(), g + layout_.at(dec_fc1_.weight).offset);
  for (int o = 0; o < dec_fc1_.out; ++o) g[layout_.at(dec_fc1_.bias).offset + o] += d_h[o];
  std::fill(d_z.begin(), d_z.end(), 0.0);
  gemm_tn(dec_fc1_.in, 1, dec_fc1_.out, p + layout_.at(dec_fc1_.weight).offset, d_h.data(), d_z.data());
}

GaussianPosterior ConvVae::encode(std::span<const double> params, std::span<const double> x) const {
  EncoderTape tape;
  encode_forward(params, x, tape);
  return tape.posterior;
}

std::vector<double> ConvVae::decode(std::span<const double> params, std::span<const double> z) const {
  DecoderTape tape;
  decode_forward(params, z, tape);
  return tape.post[3];
}

}  // namespace syntone::models
