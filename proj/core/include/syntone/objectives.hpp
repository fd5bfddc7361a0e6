#pragma once

#include "syntone/matrix.hpp"
#include "syntone/network.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace syntone::models {

enum class ObjectiveKind { Vanilla, Beta, FactorVae, BetaTcVae };

struct ObjectiveConfig {
  ObjectiveKind kind = ObjectiveKind::Vanilla;
  double beta = 1.0;      // KL weight (Beta)
  double gamma = 10.0;    // TC weight (FactorVae)
  double tc_alpha = 1.0;  // index-code MI weight (BetaTcVae)
  double tc_beta = 6.0;   // total-correlation weight (BetaTcVae)
  double tc_gamma = 1.0;  // dimension-wise KL weight (BetaTcVae)

  static ObjectiveConfig vanilla();
  static ObjectiveConfig beta_vae(double beta = 4.0);
  static ObjectiveConfig factor_vae(double gamma = 10.0);
  static ObjectiveConfig beta_tcvae(double alpha = 1.0, double beta = 6.0, double gamma = 1.0);

  /// Weight on the analytic KL term (0 for BetaTcVae, which decomposes it).
  double kl_weight() const;
  void validate() const;
};

/// CLI model names: vae, beta-vae, factor-vae, beta-tcvae.
std::string_view model_name(ObjectiveKind kind);
ObjectiveKind model_kind_from_name(std::string_view name);

/// z = mu + exp(logvar / 2) * eps
std::vector<double> reparameterize(const GaussianPosterior& q, std::span<const double> eps);

/// KL(q || N(0, I)) in closed form.
double kl_to_standard_normal(const GaussianPosterior& q);

/// log N(x; mu, exp(logvar))
double gaussian_log_density(double x, double mu, double logvar);

/// Summed squared error over the elements of one sample.
double squared_error(std::span<const double> x, std::span<const double> x_hat);

/// Batch ELBO loss: mean over rows of summed squared error plus weight * mean
/// KL. Vanilla uses weight 1, Beta uses beta.
double elbo_loss(const Matrix& x, const Matrix& x_hat, std::span<const GaussianPosterior> q,
                 const ObjectiveConfig& cfg);

struct TcTerms {
  double mi = 0.0;    // E[log q(z|x) - log q(z)]
  double tc = 0.0;    // E[log q(z) - sum_d log q(z_d)]
  double dwkl = 0.0;  // E[sum_d log q(z_d) - log p(z_d)]
};

/// Minibatch-weighted-sampling decomposition of the KL term. The aggregate
/// posterior is estimated as logsumexp_j log q(z_i | x_j) - log(B * N).
TcTerms tc_mws(const Matrix& z, std::span<const GaussianPosterior> q, std::size_t dataset_size);

/// Gradient of alpha*mi + beta*tc + gamma*dwkl with respect to z, mu and
/// logvar (all B x D), accumulated into the outputs. Returns the terms.
TcTerms tc_mws_backward(const Matrix& z, std::span<const GaussianPosterior> q, std::size_t dataset_size,
                        double alpha, double beta, double gamma, Matrix& d_z, Matrix& d_mu,
                        Matrix& d_logvar);

/// Shuffles every column independently across the batch (seeded).
Matrix permute_dims(const Matrix& z, std::uint64_t seed);

/// Two hidden layers (leaky ReLU 0.01) and two logits: class 0 = sample from
/// q(z), class 1 = sample from the product of marginals.
class Discriminator {
public:
  explicit Discriminator(int latent_dim, int hidden = 64);

  int latent_dim() const { return latent_dim_; }
  int hidden() const { return hidden_; }
  const ParameterLayout& layout() const { return layout_; }
  std::size_t param_count() const { return layout_.total(); }
  std::vector<double> init_params(std::uint64_t seed) const;

  struct Tape {
    std::vector<double> input, h1_pre, h1, h2_pre, h2;
    double logits[2] = {0.0, 0.0};
  };

  void forward(std::span<const double> params, std::span<const double> z, Tape& tape) const;
  /// Backprop of (d_logit0, d_logit1). Parameter gradients are accumulated
  /// into `grad` when non-empty; input gradient into `d_z` when non-empty.
  void backward(std::span<const double> params, const Tape& tape, double d_logit0, double d_logit1,
                std::span<double> grad, std::span<double> d_z) const;

private:
  int latent_dim_;
  int hidden_;
  ParameterLayout layout_;
};

struct FactorVaeLosses {
  double vae_loss = 0.0;
  double disc_loss = 0.0;
  double tc_surrogate = 0.0;  // mean(logit_real - logit_perm) over the batch
};

/// vae_loss = elbo + gamma * tc_surrogate; disc_loss is the two-class
/// cross-entropy of z (class 0) against permute_dims(z) (class 1), averaged
/// over both halves.
FactorVaeLosses factorvae_losses(const Matrix& z, const Matrix& z_permuted, const Discriminator& disc,
                                 std::span<const double> disc_params, double elbo, double gamma);

struct LossBreakdown {
  double total = 0.0;
  double recon = 0.0;
  double kl = 0.0;     // analytic batch-mean KL
  double extra = 0.0;  // unweighted TC estimate (FactorVae / BetaTcVae), else 0
};

struct VaeBatchResult {
  LossBreakdown loss;
  std::vector<double> grad;  // dLoss/dparams (empty when not requested)
  Matrix z;                  // sampled codes, B x D
  std::vector<GaussianPosterior> posteriors;
};

/// Full VAE objective on one batch with explicit noise. `x` and `eps` are
/// B x input_size and B x D. For FactorVae the discriminator is frozen.
VaeBatchResult vae_batch(const ConvVae& net, std::span<const double> params, const ObjectiveConfig& cfg,
                         const Matrix& x, const Matrix& eps, std::size_t dataset_size,
                         const Discriminator* disc, std::span<const double> disc_params,
                         bool want_grad);

struct DiscBatchResult {
  double loss = 0.0;
  std::vector<double> grad;
};

DiscBatchResult discriminator_batch(const Discriminator& disc, std::span<const double> params,
                                    const Matrix& z, const Matrix& z_permuted, bool want_grad);

}  // namespace syntone::models
