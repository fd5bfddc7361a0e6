#include "syntone/trainer.hpp"

#include "syntone/csv.hpp"
#include "syntone/rng.hpp"
#include "syntone/tensor_io.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace syntone::models {
namespace {

using json = nlohmann::json;

json objective_to_json(const ObjectiveConfig& c) {
  return json{{"model", std::string(model_name(c.kind))}, {"beta", c.beta},         {"gamma", c.gamma},
              {"tc_alpha", c.tc_alpha},                   {"tc_beta", c.tc_beta}, {"tc_gamma", c.tc_gamma}};
}

ObjectiveConfig objective_from_json(const json& j) {
  ObjectiveConfig c;
  c.kind = model_kind_from_name(j.at("model").get<std::string>());
  c.beta = j.at("beta").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.tc_alpha = j.at("tc_alpha").get<double>();
  c.tc_beta = j.at("tc_beta").get<double>();
  c.tc_gamma = j.at("tc_gamma").get<double>();
  return c;
}

json spec_to_json(const NetworkSpec& s) {
  return json{{"n_mels", s.n_mels},
              {"n_frames", s.n_frames},
              {"channels", s.channels},
              {"hidden", s.hidden},
              {"latent_dim", s.latent_dim}};
}

NetworkSpec spec_from_json(const json& j) {
  NetworkSpec s;
  s.n_mels = j.at("n_mels").get<int>();
  s.n_frames = j.at("n_frames").get<int>();
  s.channels = j.at("channels").get<std::array<int, 4>>();
  s.hidden = j.at("hidden").get<int>();
  s.latent_dim = j.at("latent_dim").get<int>();
  s.validate();
  return s;
}

void append_layout(io::Container& c, const ParameterLayout& layout, const std::vector<double>& values) {
  for (const auto& e : layout.entries()) {
    std::vector<std::uint32_t> dims(e.shape.begin(), e.shape.end());
    c.entries.push_back({e.name, io::make_tensor(std::move(dims),
                                                 std::span<const double>(values.data() + e.offset, e.size))});
  }
}

std::vector<double> gather_layout(const io::Container& c, const ParameterLayout& layout) {
  std::vector<double> values(layout.total());
  for (const auto& e : layout.entries()) {
    const auto& t = c.at(e.name);
    if (t.element_count() != e.size) throw std::runtime_error("checkpoint: tensor '" + e.name + "' has the wrong size");
    for (std::size_t i = 0; i < e.size; ++i) values[e.offset + i] = t.values[i];
  }
  return values;
}

}  // namespace

void Adam::step(std::span<double> params, std::span<const double> grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
  }
}

TrainedModel train(const Matrix& features, const ObjectiveConfig& objective, const TrainConfig& cfg,
                   const NetworkSpec& spec) {
  objective.validate();
  if (cfg.steps < 0) throw std::invalid_argument("train: steps must be >= 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
  if (features.rows < 1) throw std::invalid_argument("train: no training features");
  const ConvVae net(spec);
  if (features.cols != static_cast<std::size_t>(spec.input_size())) {
    throw std::invalid_argument("train: feature size does not match the network input");
  }

  TrainedModel model;
  model.spec = spec;
  model.objective = objective;
  model.params = net.init_params(derive_seed(cfg.seed, "init/vae"));

  const bool factor = objective.kind == ObjectiveKind::FactorVae;
  const Discriminator disc(spec.latent_dim);
  if (factor) model.disc_params = disc.init_params(derive_seed(cfg.seed, "init/disc"));

  Adam adam(model.params.size(), cfg.optimizer);
  Adam disc_adam(model.disc_params.size(), cfg.disc_optimizer);
  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  Rng noise_rng(derive_seed(cfg.seed, "noise"));
  Rng perm_rng(derive_seed(cfg.seed, "permute"));

  const std::size_t n = features.rows;
  const std::size_t b = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);
  const auto dim = static_cast<std::size_t>(spec.latent_dim);
  std::vector<std::size_t> order;
  std::size_t cursor = n;
  Matrix x(b, features.cols), eps(b, dim);

  for (int step = 0; step < cfg.steps; ++step) {
    for (std::size_t i = 0; i < b; ++i) {
      if (cursor >= n) {
        order = shuffle_rng.permutation(n);
        cursor = 0;
      }
      const auto src = features.row(order[cursor++]);
      std::copy(src.begin(), src.end(), x.row(i).begin());
    }
    for (double& e : eps.data) e = noise_rng.normal();

    auto result = vae_batch(net, model.params, objective, x, eps, n, factor ? &disc : nullptr,
                            model.disc_params, true);
    const auto& l = result.loss;
    if (!std::isfinite(l.total)) {
      std::ostringstream msg;
      msg << "training diverged at step " << step << " (model " << model_name(objective.kind)
          << "): loss=" << l.total << " recon=" << l.recon << " kl=" << l.kl << " extra=" << l.extra;
      throw DivergenceError(msg.str());
    }
    model.trace.push_back({step, l.total, l.recon, l.kl, l.extra});
    adam.step(model.params, result.grad);

    if (factor) {
      const Matrix permuted = permute_dims(result.z, perm_rng.next_u64());
      const auto d = discriminator_batch(disc, model.disc_params, result.z, permuted, true);
      disc_adam.step(model.disc_params, d.grad);
    }
  }
  return model;
}

metrics::Representation extract_representation(const TrainedModel& model, const Matrix& features,
                                                const std::vector<synth::FactorTuple>& factors, bool use_mean,
                                                std::uint64_t seed) {
  if (features.rows != factors.size()) throw std::invalid_argument("extract_representation: features and factors differ in length");
  const ConvVae net(model.spec);
  const auto dim = static_cast<std::size_t>(model.spec.latent_dim);
  metrics::Representation rep;
  rep.codes = Matrix(features.rows, dim);
  rep.factors = factors;
  ConvVae::EncoderTape tape;
  std::vector<double> eps(dim);
  for (std::size_t i = 0; i < features.rows; ++i) {
    net.encode_forward(model.params, features.row(i), tape);
    if (use_mean) {
      std::copy(tape.posterior.mu.begin(), tape.posterior.mu.end(), rep.codes.row(i).begin());
    } else {
      Rng rng(derive_seed(seed, "sample/" + std::to_string(i)));
      for (double& e : eps) e = rng.normal();
      const auto z = reparameterize(tape.posterior, eps);
      std::copy(z.begin(), z.end(), rep.codes.row(i).begin());
    }
  }
  return rep;
}

std::vector<double> default_traversal_values() {
  std::vector<double> v(10);
  for (int i = 0; i < 10; ++i) v[i] = -3.0 + 6.0 * i / 9.0;
  return v;
}

std::vector<std::vector<double>> latent_traverse(const TrainedModel& model, std::span<const double> base_z, int dim,
                                                 std::span<const double> values) {
  if (dim < 0 || dim >= model.spec.latent_dim) throw std::invalid_argument("latent_traverse: dim out of range");
  if (base_z.size() != static_cast<std::size_t>(model.spec.latent_dim)) {
    throw std::invalid_argument("latent_traverse: base code has the wrong size");
  }
  const ConvVae net(model.spec);
  std::vector<std::vector<double>> out;
  std::vector<double> z(base_z.begin(), base_z.end());
  for (double v : values) {
    z[static_cast<std::size_t>(dim)] = v;
    out.push_back(net.decode(model.params, z));
  }
  return out;
}

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path) {
  io::Container c;
  c.meta = json{{"network", spec_to_json(model.spec)}, {"objective", objective_to_json(model.objective)}}.dump();
  const ConvVae net(model.spec);
  append_layout(c, net.layout(), model.params);
  if (!model.disc_params.empty()) {
    append_layout(c, Discriminator(model.spec.latent_dim).layout(), model.disc_params);
  }
  io::write_container(path, c);
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  const auto c = io::read_container(path);
  TrainedModel model;
  try {
    const auto meta = json::parse(c.meta);
    model.spec = spec_from_json(meta.at("network"));
    model.objective = objective_from_json(meta.at("objective"));
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": bad checkpoint metadata: " + e.what());
  }
  const ConvVae net(model.spec);
  model.params = gather_layout(c, net.layout());
  if (model.objective.kind == ObjectiveKind::FactorVae) {
    model.disc_params = gather_layout(c, Discriminator(model.spec.latent_dim).layout());
  }
  return model;
}

void write_loss_trace(const std::vector<LossRecord>& trace, const std::filesystem::path& path) {
  csv::Table t;
  t.header = {"step", "loss", "recon", "kl", "extra_term"};
  for (const auto& r : trace) {
    t.rows.push_back({std::to_string(r.step), csv::format_double(r.loss), csv::format_double(r.recon),
                      csv::format_double(r.kl), csv::format_double(r.extra)});
  }
  csv::write(path, t);
}

}  // namespace syntone::models
