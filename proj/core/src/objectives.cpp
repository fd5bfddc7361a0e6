#include "syntone/objectives.hpp"

#include "syntone/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace syntone::models {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 * pi)

double logsumexp(std::span<const double> v) {
  double hi = v[0];
  for (double x : v) hi = std::max(hi, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

double leaky(double v) { return v > 0.0 ? v : kLeakySlope * v; }
double leaky_grad(double pre) { return pre > 0.0 ? 1.0 : kLeakySlope; }

}  // namespace

ObjectiveConfig ObjectiveConfig::vanilla() { return ObjectiveConfig{}; }

ObjectiveConfig ObjectiveConfig::beta_vae(double beta) {
  ObjectiveConfig c;
  c.kind = ObjectiveKind::Beta;
  c.beta = beta;
  return c;
}

ObjectiveConfig ObjectiveConfig::factor_vae(double gamma) {
  ObjectiveConfig c;
  c.kind = ObjectiveKind::FactorVae;
  c.gamma = gamma;
  return c;
}

ObjectiveConfig ObjectiveConfig::beta_tcvae(double alpha, double beta, double gamma) {
  ObjectiveConfig c;
  c.kind = ObjectiveKind::BetaTcVae;
  c.tc_alpha = alpha;
  c.tc_beta = beta;
  c.tc_gamma = gamma;
  return c;
}

double ObjectiveConfig::kl_weight() const {
  switch (kind) {
    case ObjectiveKind::Vanilla: return 1.0;
    case ObjectiveKind::Beta: return beta;
    case ObjectiveKind::FactorVae: return 1.0;
    case ObjectiveKind::BetaTcVae: return 0.0;
  }
  return 1.0;
}

void ObjectiveConfig::validate() const {
  for (double w : {beta, gamma, tc_alpha, tc_beta, tc_gamma}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("objective weights must be finite and >= 0");
  }
}

std::string_view model_name(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::Vanilla: return "vae";
    case ObjectiveKind::Beta: return "beta-vae";
    case ObjectiveKind::FactorVae: return "factor-vae";
    case ObjectiveKind::BetaTcVae: return "beta-tcvae";
  }
  return "unknown";
}

ObjectiveKind model_kind_from_name(std::string_view name) {
  for (auto k : {ObjectiveKind::Vanilla, ObjectiveKind::Beta, ObjectiveKind::FactorVae, ObjectiveKind::BetaTcVae}) {
    if (model_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown model '" + std::string(name) +
                              "'; valid models: vae, beta-vae, factor-vae, beta-tcvae");
}

std::vector<double> reparameterize(const GaussianPosterior& q, std::span<const double> eps) {
  if (eps.size() != q.mu.size()) throw std::invalid_argument("reparameterize: eps has the wrong size");
  std::vector<double> z(q.mu.size());
  for (std::size_t d = 0; d < z.size(); ++d) z[d] = q.mu[d] + std::exp(0.5 * q.logvar[d]) * eps[d];
  return z;
}

double kl_to_standard_normal(const GaussianPosterior& q) {
  double s = 0.0;
  for (std::size_t d = 0; d < q.mu.size(); ++d) {
    s += 1.0 + q.logvar[d] - q.mu[d] * q.mu[d] - std::exp(q.logvar[d]);
  }
  return std::max(0.0, -0.5 * s);
}

double gaussian_log_density(double x, double mu, double logvar) {
  const double diff = x - mu;
  return -0.5 * (kLog2Pi + logvar + diff * diff * std::exp(-logvar));
}

double squared_error(std::span<const double> x, std::span<const double> x_hat) {
  if (x.size() != x_hat.size()) throw std::invalid_argument("squared_error: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = x_hat[i] - x[i];
    s += e * e;
  }
  return s;
}

double elbo_loss(const Matrix& x, const Matrix& x_hat, std::span<const GaussianPosterior> q,
                 const ObjectiveConfig& cfg) {
  if (x.rows != x_hat.rows || x.cols != x_hat.cols || q.size() != x.rows) {
    throw std::invalid_argument("elbo_loss: shape mismatch");
  }
  const double b = static_cast<double>(x.rows);
  double recon = 0.0, kl = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    recon += squared_error(x.row(i), x_hat.row(i));
    kl += kl_to_standard_normal(q[i]);
  }
  return recon / b + cfg.kl_weight() * (kl / b);
}

TcTerms tc_mws(const Matrix& z, std::span<const GaussianPosterior> q, std::size_t dataset_size) {
  Matrix d_z(z.rows, z.cols), d_mu(z.rows, z.cols), d_lv(z.rows, z.cols);
  return tc_mws_backward(z, q, dataset_size, 0.0, 0.0, 0.0, d_z, d_mu, d_lv);
}

TcTerms tc_mws_backward(const Matrix& z, std::span<const GaussianPosterior> q, std::size_t dataset_size,
                        double alpha, double beta, double gamma, Matrix& d_z, Matrix& d_mu,
                        Matrix& d_logvar) {
  const std::size_t b = z.rows;
  const std::size_t dim = z.cols;
  if (b < 2) throw std::invalid_argument("tc_mws: batch size must be >= 2");
  if (q.size() != b) throw std::invalid_argument("tc_mws: posterior count does not match batch");
  if (dataset_size < 1) throw std::invalid_argument("tc_mws: dataset size must be >= 1");
  const double bd = static_cast<double>(b);
  const double log_norm = std::log(bd * static_cast<double>(dataset_size));
  const bool want_grad = alpha != 0.0 || beta != 0.0 || gamma != 0.0;

  // Per-(j, d) inverse variances.
  Matrix inv_var(b, dim);
  for (std::size_t j = 0; j < b; ++j) {
    for (std::size_t d = 0; d < dim; ++d) inv_var(j, d) = std::exp(-q[j].logvar[d]);
  }

  TcTerms terms;
  Matrix l(b, dim);  // l(j, d) = log q(z_id | x_j) for the current i
  std::vector<double> joint(b), column(b), w(b);
  Matrix u(b, dim);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = z(i, d) - q[j].mu[d];
        l(j, d) = -0.5 * (kLog2Pi + q[j].logvar[d] + diff * diff * inv_var(j, d));
        s += l(j, d);
      }
      joint[j] = s;
    }
    const double log_qz_x = joint[i];
    const double lse_joint = logsumexp(joint);
    const double log_qz = lse_joint - log_norm;
    double log_prod = 0.0, log_prior = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      for (std::size_t j = 0; j < b; ++j) column[j] = l(j, d);
      const double lse = logsumexp(column);
      log_prod += lse - log_norm;
      log_prior += -0.5 * (kLog2Pi + z(i, d) * z(i, d));
      if (want_grad) {
        for (std::size_t j = 0; j < b; ++j) u(j, d) = std::exp(column[j] - lse);
      }
    }
    terms.mi += (log_qz_x - log_qz) / bd;
    terms.tc += (log_qz - log_prod) / bd;
    terms.dwkl += (log_prod - log_prior) / bd;

    if (!want_grad) continue;
    for (std::size_t j = 0; j < b; ++j) w[j] = std::exp(joint[j] - lse_joint);
    for (std::size_t j = 0; j < b; ++j) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double c = ((j == i ? alpha : 0.0) + (beta - alpha) * w[j] + (gamma - beta) * u(j, d)) / bd;
        if (c == 0.0) continue;
        const double diff = z(i, d) - q[j].mu[d];
        const double scaled = diff * inv_var(j, d);
        d_z(i, d) += -c * scaled;
        d_mu(j, d) += c * scaled;
        d_logvar(j, d) += c * (-0.5 + 0.5 * diff * scaled);
      }
    }
    for (std::size_t d = 0; d < dim; ++d) d_z(i, d) += gamma * z(i, d) / bd;
  }
  return terms;
}

Matrix permute_dims(const Matrix& z, std::uint64_t seed) {
  Matrix out(z.rows, z.cols);
  Rng rng(seed);
  for (std::size_t d = 0; d < z.cols; ++d) {
    const auto perm = rng.permutation(z.rows);
    for (std::size_t i = 0; i < z.rows; ++i) out(i, d) = z(perm[i], d);
  }
  return out;
}

Discriminator::Discriminator(int latent_dim, int hidden) : latent_dim_(latent_dim), hidden_(hidden) {
  if (latent_dim < 1 || hidden < 1) throw std::invalid_argument("discriminator sizes must be positive");
  const auto d = static_cast<std::size_t>(latent_dim), h = static_cast<std::size_t>(hidden);
  layout_.add("disc.fc1.weight", {h, d});
  layout_.add("disc.fc1.bias", {h});
  layout_.add("disc.fc2.weight", {h, h});
  layout_.add("disc.fc2.bias", {h});
  layout_.add("disc.fc3.weight", {2, h});
  layout_.add("disc.fc3.bias", {2});
}

std::vector<double> Discriminator::init_params(std::uint64_t seed) const {
  std::vector<double> p(layout_.total());
  Rng rng(seed);
  const int fan_in[3] = {latent_dim_, hidden_, hidden_};
  for (std::size_t e = 0; e < layout_.entries().size(); ++e) {
    const auto& entry = layout_.at(e);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in[e / 2]));
    for (std::size_t i = 0; i < entry.size; ++i) p[entry.offset + i] = bound * (2.0 * rng.uniform() - 1.0);
  }
  return p;
}

void Discriminator::forward(std::span<const double> params, std::span<const double> z, Tape& tape) const {
  if (params.size() != layout_.total()) throw std::invalid_argument("discriminator: wrong parameter count");
  if (z.size() != static_cast<std::size_t>(latent_dim_)) throw std::invalid_argument("discriminator: wrong input size");
  const double* w1 = params.data() + layout_.at(0).offset;
  const double* b1 = params.data() + layout_.at(1).offset;
  const double* w2 = params.data() + layout_.at(2).offset;
  const double* b2 = params.data() + layout_.at(3).offset;
  const double* w3 = params.data() + layout_.at(4).offset;
  const double* b3 = params.data() + layout_.at(5).offset;
  const int h = hidden_, d = latent_dim_;
  tape.input.assign(z.begin(), z.end());
  tape.h1_pre.assign(b1, b1 + h);
  tape.h1.resize(h);
  for (int o = 0; o < h; ++o) {
    for (int i = 0; i < d; ++i) tape.h1_pre[o] += w1[o * d + i] * z[i];
    tape.h1[o] = leaky(tape.h1_pre[o]);
  }
  tape.h2_pre.assign(b2, b2 + h);
  tape.h2.resize(h);
  for (int o = 0; o < h; ++o) {
    for (int i = 0; i < h; ++i) tape.h2_pre[o] += w2[o * h + i] * tape.h1[i];
    tape.h2[o] = leaky(tape.h2_pre[o]);
  }
  for (int c = 0; c < 2; ++c) {
    double s = b3[c];
    for (int i = 0; i < h; ++i) s += w3[c * h + i] * tape.h2[i];
    tape.logits[c] = s;
  }
}

void Discriminator::backward(std::span<const double> params, const Tape& tape, double d_logit0, double d_logit1,
                             std::span<double> grad, std::span<double> d_z) const {
  const double* w2 = params.data() + layout_.at(2).offset;
  const double* w3 = params.data() + layout_.at(4).offset;
  const double* w1 = params.data() + layout_.at(0).offset;
  const int h = hidden_, d = latent_dim_;
  const bool param_grad = !grad.empty();
  const double dl[2] = {d_logit0, d_logit1};

  std::vector<double> d_h2(h, 0.0);
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < h; ++i) {
      d_h2[i] += w3[c * h + i] * dl[c];
      if (param_grad) grad[layout_.at(4).offset + c * h + i] += dl[c] * tape.h2[i];
    }
    if (param_grad) grad[layout_.at(5).offset + c] += dl[c];
  }
  std::vector<double> d_h1(h, 0.0);
  for (int o = 0; o < h; ++o) {
    const double g = d_h2[o] * leaky_grad(tape.h2_pre[o]);
    if (g == 0.0) continue;
    for (int i = 0; i < h; ++i) {
      d_h1[i] += w2[o * h + i] * g;
      if (param_grad) grad[layout_.at(2).offset + o * h + i] += g * tape.h1[i];
    }
    if (param_grad) grad[layout_.at(3).offset + o] += g;
  }
  for (int o = 0; o < h; ++o) {
    const double g = d_h1[o] * leaky_grad(tape.h1_pre[o]);
    if (g == 0.0) continue;
    for (int i = 0; i < d; ++i) {
      if (!d_z.empty()) d_z[i] += w1[o * d + i] * g;
      if (param_grad) grad[layout_.at(0).offset + o * d + i] += g * tape.input[i];
    }
    if (param_grad) grad[layout_.at(1).offset + o] += g;
  }
}

FactorVaeLosses factorvae_losses(const Matrix& z, const Matrix& z_permuted, const Discriminator& disc,
                                 std::span<const double> disc_params, double elbo, double gamma) {
  FactorVaeLosses out;
  out.tc_surrogate = 0.0;
  const double b = static_cast<double>(z.rows);
  Discriminator::Tape tape;
  for (std::size_t i = 0; i < z.rows; ++i) {
    disc.forward(disc_params, z.row(i), tape);
    out.tc_surrogate += (tape.logits[0] - tape.logits[1]) / b;
  }
  out.vae_loss = elbo + gamma * out.tc_surrogate;
  out.disc_loss = discriminator_batch(disc, disc_params, z, z_permuted, false).loss;
  return out;
}

DiscBatchResult discriminator_batch(const Discriminator& disc, std::span<const double> params,
                                    const Matrix& z, const Matrix& z_permuted, bool want_grad) {
  DiscBatchResult out;
  if (want_grad) out.grad.assign(disc.param_count(), 0.0);
  Discriminator::Tape tape;
  auto half = [&](const Matrix& batch, int target) {
    const double scale = 0.5 / static_cast<double>(batch.rows);
    for (std::size_t i = 0; i < batch.rows; ++i) {
      disc.forward(params, batch.row(i), tape);
      const double lse = logsumexp(std::span<const double>(tape.logits, 2));
      out.loss += scale * (lse - tape.logits[target]);
      if (want_grad) {
        const double p0 = std::exp(tape.logits[0] - lse);
        const double p1 = std::exp(tape.logits[1] - lse);
        disc.backward(params, tape, scale * (p0 - (target == 0 ? 1.0 : 0.0)),
                      scale * (p1 - (target == 1 ? 1.0 : 0.0)), out.grad, {});
      }
    }
  };
  half(z, 0);
  half(z_permuted, 1);
  return out;
}

VaeBatchResult vae_batch(const ConvVae& net, std::span<const double> params, const ObjectiveConfig& cfg,
                         const Matrix& x, const Matrix& eps, std::size_t dataset_size,
                         const Discriminator* disc, std::span<const double> disc_params, bool want_grad) {
  cfg.validate();
  const std::size_t b = x.rows;
  const auto dim = static_cast<std::size_t>(net.spec().latent_dim);
  if (b < 1) throw std::invalid_argument("vae_batch: empty batch");
  if (x.cols != static_cast<std::size_t>(net.spec().input_size())) throw std::invalid_argument("vae_batch: input shape mismatch");
  if (eps.rows != b || eps.cols != dim) throw std::invalid_argument("vae_batch: eps shape mismatch");
  if (cfg.kind == ObjectiveKind::FactorVae && disc == nullptr) {
    throw std::invalid_argument("vae_batch: Factor-VAE needs a discriminator");
  }
  const double bd = static_cast<double>(b);

  VaeBatchResult out;
  out.z = Matrix(b, dim);
  out.posteriors.resize(b);
  if (want_grad) out.grad.assign(net.param_count(), 0.0);

  std::vector<ConvVae::EncoderTape> enc(b);
  ConvVae::DecoderTape dec;
  Matrix d_z(b, dim), d_mu(b, dim), d_logvar(b, dim);
  std::vector<double> d_out(x.cols), d_z_row(dim);

  double recon = 0.0, kl = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    net.encode_forward(params, x.row(i), enc[i]);
    const auto& q = enc[i].posterior;
    out.posteriors[i] = q;
    const auto z = reparameterize(q, eps.row(i));
    std::copy(z.begin(), z.end(), out.z.row(i).begin());
    net.decode_forward(params, z, dec);
    const auto& x_hat = dec.post[3];
    recon += squared_error(x.row(i), x_hat);
    kl += kl_to_standard_normal(q);
    if (want_grad) {
      for (std::size_t e = 0; e < x.cols; ++e) d_out[e] = 2.0 * (x_hat[e] - x(i, e)) / bd;
      net.decode_backward(params, dec, d_out, out.grad, d_z_row);
      for (std::size_t d = 0; d < dim; ++d) d_z(i, d) += d_z_row[d];
    }
  }
  out.loss.recon = recon / bd;
  out.loss.kl = kl / bd;

  const double kl_w = cfg.kl_weight();
  out.loss.total = out.loss.recon + kl_w * out.loss.kl;
  if (want_grad && kl_w != 0.0) {
    for (std::size_t i = 0; i < b; ++i) {
      const auto& q = out.posteriors[i];
      for (std::size_t d = 0; d < dim; ++d) {
        d_mu(i, d) += kl_w * q.mu[d] / bd;
        d_logvar(i, d) += kl_w * 0.5 * (std::exp(q.logvar[d]) - 1.0) / bd;
      }
    }
  }

  if (cfg.kind == ObjectiveKind::FactorVae) {
    Discriminator::Tape tape;
    double surrogate = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
      disc->forward(disc_params, out.z.row(i), tape);
      surrogate += (tape.logits[0] - tape.logits[1]) / bd;
      if (want_grad && cfg.gamma != 0.0) {
        disc->backward(disc_params, tape, cfg.gamma / bd, -cfg.gamma / bd, {}, d_z.row(i));
      }
    }
    out.loss.extra = surrogate;
    out.loss.total += cfg.gamma * surrogate;
  } else if (cfg.kind == ObjectiveKind::BetaTcVae) {
    if (b < 2) throw std::invalid_argument("vae_batch: beta-TCVAE needs a batch of at least 2");
    const auto terms = want_grad ? tc_mws_backward(out.z, out.posteriors, dataset_size, cfg.tc_alpha, cfg.tc_beta,
                                                   cfg.tc_gamma, d_z, d_mu, d_logvar)
                                 : tc_mws(out.z, out.posteriors, dataset_size);
    out.loss.extra = terms.tc;
    out.loss.total += cfg.tc_alpha * terms.mi + cfg.tc_beta * terms.tc + cfg.tc_gamma * terms.dwkl;
  }

  if (!want_grad) return out;
  std::vector<double> dm(dim), dl(dim);
  for (std::size_t i = 0; i < b; ++i) {
    const auto& q = out.posteriors[i];
    for (std::size_t d = 0; d < dim; ++d) {
      dm[d] = d_mu(i, d) + d_z(i, d);
      dl[d] = d_logvar(i, d) + d_z(i, d) * 0.5 * std::exp(0.5 * q.logvar[d]) * eps(i, d);
    }
    net.encode_backward(params, enc[i], dm, dl, out.grad);
  }
  return out;
}

}  // namespace syntone::models
