#include "syntone/pipeline.hpp"

#include "syntone/csv.hpp"
#include "syntone/png.hpp"
#include "syntone/rng.hpp"
#include "syntone/tensor_io.hpp"
#include "syntone/wav.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

namespace syntone::harness {
namespace {

using json = nlohmann::json;

void write_run_config(const fs::path& dir, const std::string& command, json args) {
  fs::create_directories(dir);
  json cfg{{"command", command}, {"args", std::move(args)}};
  std::ofstream out(dir / kRunConfigName, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (dir / kRunConfigName).string());
  out << cfg.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json objective_json(const models::ObjectiveConfig& c) {
  return json{{"model", std::string(models::model_name(c.kind))},
              {"beta", c.beta},
              {"gamma", c.gamma},
              {"tc_alpha", c.tc_alpha},
              {"tc_beta", c.tc_beta},
              {"tc_gamma", c.tc_gamma}};
}

Matrix mel_to_matrix(std::span<const double> flat, int n_mels, int n_frames) {
  Matrix m(static_cast<std::size_t>(n_mels), static_cast<std::size_t>(n_frames));
  std::copy(flat.begin(), flat.end(), m.data.begin());
  return m;
}

void write_image(const fs::path& stem, std::span<const double> flat, int n_mels, int n_frames, bool png) {
  io::write_tensor(fs::path(stem).replace_extension(".synt"),
                   io::make_tensor({static_cast<std::uint32_t>(n_mels), static_cast<std::uint32_t>(n_frames)}, flat));
  if (png) png::write_heatmap(fs::path(stem).replace_extension(".png"), mel_to_matrix(flat, n_mels, n_frames));
}

std::map<int, synth::FactorTuple> factors_by_id(const synth::DatasetManifest& m) {
  std::map<int, synth::FactorTuple> out;
  for (const auto& r : m.rows) out.emplace(r.id, r.factors);
  return out;
}

int model_rank(const std::string& model) {
  static const std::array<const char*, 4> order{"vae", "beta-vae", "factor-vae", "beta-tcvae"};
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (model == order[i]) return static_cast<int>(i);
  }
  return static_cast<int>(order.size());
}

}  // namespace

bool is_heldout(int id) { return fnv1a64(std::to_string(id)) % 10 == 0; }

Split split_from_name(std::string_view name) {
  if (name == "all") return Split::All;
  if (name == "train") return Split::Train;
  if (name == "heldout") return Split::Heldout;
  throw std::invalid_argument("unknown split '" + std::string(name) + "' (expected all, train or heldout)");
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::All: return "all";
    case Split::Train: return "train";
    case Split::Heldout: return "heldout";
  }
  return "all";
}

bool in_split(int id, Split s) {
  switch (s) {
    case Split::All: return true;
    case Split::Train: return !is_heldout(id);
    case Split::Heldout: return is_heldout(id);
  }
  return true;
}

GenerateSummary cmd_generate(const GenerateOptions& opts) {
  const auto manifest = synth::generate_dataset(opts.out, opts.subset);
  write_run_config(opts.out, "generate",
                   json{{"out", opts.out.string()},
                        {"subset", opts.subset ? opts.subset->to_string() : std::string("1,1,1")},
                        {"seed", opts.seed}});
  return {manifest.rows.size(), opts.out / synth::kManifestName};
}

FeatureSet cmd_featurize(const FeaturizeOptions& opts) {
  opts.frontend.validate();
  const auto manifest = synth::read_manifest(opts.manifest);
  fs::create_directories(opts.out);
  frontend::MelFrontend fe(opts.frontend);

  FeatureSet set;
  set.root = opts.out;
  for (const auto& row : manifest.rows) {
    const fs::path wav_path = manifest.clip_path(row);
    if (!fs::exists(wav_path)) {
      throw std::runtime_error("featurize: missing audio for id " + std::to_string(row.id) + " (" +
                               wav_path.string() + ")");
    }
    const auto clip = wav::read_pcm16(wav_path);
    if (clip.sample_rate != opts.frontend.sample_rate) {
      throw std::runtime_error("featurize: id " + std::to_string(row.id) + " has sample rate " +
                               std::to_string(clip.sample_rate));
    }
    const auto mel = fe.mel_spectrogram(clip.samples, row.id);
    FeatureRow fr;
    fr.id = row.id;
    fr.path = fs::path(row.path).replace_extension(".synt").string();
    fr.n_mels = static_cast<int>(mel.n_mels());
    fr.n_frames = static_cast<int>(mel.n_frames());
    io::write_tensor(opts.out / fr.path,
                     io::make_tensor({static_cast<std::uint32_t>(fr.n_mels), static_cast<std::uint32_t>(fr.n_frames)},
                                     mel.values.data));
    set.rows.push_back(std::move(fr));
  }
  write_feature_set(set, opts.out / kFeaturesManifestName);
  const auto& c = opts.frontend;
  write_run_config(opts.out, "featurize",
                   json{{"manifest", opts.manifest.string()},
                        {"out", opts.out.string()},
                        {"seed", opts.seed},
                        {"frontend",
                         {{"sample_rate", c.sample_rate},
                          {"window_size", c.window_size},
                          {"hop_size", c.hop_size},
                          {"n_mels", c.n_mels},
                          {"fmin", c.fmin},
                          {"fmax", c.fmax},
                          {"log_floor", c.log_floor},
                          {"window", "hann"},
                          {"padding", "center-reflect"}}}});
  return set;
}

void write_feature_set(const FeatureSet& set, const fs::path& features_csv) {
  csv::Table t;
  t.header = {"id", "path", "n_mels", "n_frames"};
  for (const auto& r : set.rows) {
    t.rows.push_back({std::to_string(r.id), r.path, std::to_string(r.n_mels), std::to_string(r.n_frames)});
  }
  csv::write(features_csv, t);
}

FeatureSet read_feature_set(const fs::path& features_csv) {
  const auto t = csv::read(features_csv);
  const auto c_id = t.column("id"), c_p = t.column("path"), c_m = t.column("n_mels"), c_f = t.column("n_frames");
  FeatureSet set;
  set.root = features_csv.parent_path();
  for (const auto& r : t.rows) {
    set.rows.push_back({csv::parse_int(r[c_id]), r[c_p], csv::parse_int(r[c_m]), csv::parse_int(r[c_f])});
  }
  return set;
}

std::vector<std::size_t> rows_in_split(const FeatureSet& set, Split split) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < set.rows.size(); ++i) {
    if (in_split(set.rows[i].id, split)) rows.push_back(i);
  }
  return rows;
}

Matrix load_features(const FeatureSet& set, const std::vector<std::size_t>& rows) {
  if (rows.empty()) return {};
  const auto& first = set.rows[rows.front()];
  const std::size_t width = static_cast<std::size_t>(first.n_mels) * first.n_frames;
  Matrix m(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = set.rows[rows[i]];
    const auto t = io::read_tensor(set.root / r.path);
    if (t.dims.size() != 2 || t.dims[0] != static_cast<std::uint32_t>(first.n_mels) ||
        t.dims[1] != static_cast<std::uint32_t>(first.n_frames)) {
      throw std::runtime_error("feature file for id " + std::to_string(r.id) + " has an unexpected shape");
    }
    std::copy(t.values.begin(), t.values.end(), m.row(i).begin());
  }
  return m;
}

TrainSummary cmd_train(const TrainOptions& opts) {
  const auto set = read_feature_set(opts.features);
  const auto rows = rows_in_split(set, opts.split);
  if (rows.empty()) throw std::runtime_error("train: no clips in split '" + std::string(split_name(opts.split)) + "'");
  const Matrix features = load_features(set, rows);

  models::NetworkSpec spec;
  spec.n_mels = set.rows[rows.front()].n_mels;
  spec.n_frames = set.rows[rows.front()].n_frames;
  models::TrainConfig tcfg = opts.train;
  tcfg.seed = derive_seed(opts.seed, "train");

  const auto model = models::train(features, opts.objective, tcfg, spec);
  fs::create_directories(opts.out);
  TrainSummary s;
  s.checkpoint = opts.out / kCheckpointName;
  s.loss_trace = opts.out / kLossTraceName;
  s.clips = rows.size();
  if (!model.trace.empty()) {
    s.initial_loss = model.trace.front().loss;
    s.final_loss = model.trace.back().loss;
  }
  models::save_checkpoint(model, s.checkpoint);
  models::write_loss_trace(model.trace, s.loss_trace);
  write_run_config(opts.out, "train",
                   json{{"features", opts.features.string()},
                        {"out", opts.out.string()},
                        {"seed", opts.seed},
                        {"split", std::string(split_name(opts.split))},
                        {"objective", objective_json(opts.objective)},
                        {"steps", tcfg.steps},
                        {"batch_size", tcfg.batch_size},
                        {"lr", tcfg.optimizer.lr},
                        {"disc_lr", tcfg.disc_optimizer.lr},
                        {"latent_dim", spec.latent_dim}});
  return s;
}

void write_codes(const metrics::Representation& rep, const std::vector<int>& ids, const fs::path& dir) {
  fs::create_directories(dir);
  io::write_tensor(dir / kCodesName, io::make_tensor({static_cast<std::uint32_t>(rep.size()),
                                                      static_cast<std::uint32_t>(rep.latent_dim())},
                                                     rep.codes.data));
  csv::Table t;
  t.header = {"row", "id"};
  for (std::size_t i = 0; i < ids.size(); ++i) t.rows.push_back({std::to_string(i), std::to_string(ids[i])});
  csv::write(dir / kCodesIndexName, t);
}

metrics::Representation read_codes(const fs::path& codes, const synth::DatasetManifest& manifest) {
  const auto tensor = io::read_tensor(codes);
  if (tensor.dims.size() != 2) throw std::runtime_error(codes.string() + ": codes must be a rank-2 tensor");
  const auto index = csv::read(fs::path(codes).replace_extension(".csv"));
  const auto c_row = index.column("row"), c_id = index.column("id");
  if (index.rows.size() != tensor.dims[0]) throw std::runtime_error("codes index and tensor disagree on N");
  const auto lookup = factors_by_id(manifest);
  metrics::Representation rep;
  rep.codes = Matrix(tensor.dims[0], tensor.dims[1]);
  rep.factors.resize(tensor.dims[0]);
  for (const auto& r : index.rows) {
    const auto row = static_cast<std::size_t>(csv::parse_int(r[c_row]));
    const int id = csv::parse_int(r[c_id]);
    const auto it = lookup.find(id);
    if (it == lookup.end()) throw std::runtime_error("codes reference id " + std::to_string(id) + " missing from the manifest");
    if (row >= rep.size()) throw std::runtime_error("codes index row out of range");
    rep.factors[row] = it->second;
    for (std::size_t d = 0; d < rep.latent_dim(); ++d) rep.codes(row, d) = tensor.values[row * rep.latent_dim() + d];
  }
  return rep;
}

report::ModelReport cmd_eval(const EvalOptions& opts) {
  const auto manifest = synth::read_manifest(opts.manifest);
  metrics::Representation rep;
  std::string label = opts.label;
  std::vector<int> ids;

  if (!opts.codes.empty()) {
    rep = read_codes(opts.codes, manifest);
    if (label.empty()) label = opts.codes.stem().string();
  } else {
    const auto model = models::load_checkpoint(opts.checkpoint);
    if (label.empty()) label = std::string(models::model_name(model.objective.kind));
    const auto set = read_feature_set(opts.features);
    const auto rows = rows_in_split(set, opts.split);
    if (rows.size() < 2) throw std::runtime_error("eval: fewer than 2 clips in the evaluation split");
    const auto lookup = factors_by_id(manifest);
    std::vector<synth::FactorTuple> factors;
    for (auto r : rows) {
      const int id = set.rows[r].id;
      const auto it = lookup.find(id);
      if (it == lookup.end()) throw std::runtime_error("eval: id " + std::to_string(id) + " missing from the manifest");
      factors.push_back(it->second);
      ids.push_back(id);
    }
    rep = models::extract_representation(model, load_features(set, rows), factors, opts.use_mean,
                                         derive_seed(opts.seed, "extract"));
  }

  report::ModelReport result{label, metrics::evaluate(rep, opts.runs, derive_seed(opts.seed, "eval"))};
  fs::create_directories(opts.out);
  if (!ids.empty()) write_codes(rep, ids, opts.out);
  report::write_csv(opts.out / kReportCsvName, {result});
  write_text(opts.out / kReportMarkdownName, report::markdown_table({result}));
  write_run_config(opts.out, "eval",
                   json{{"checkpoint", opts.checkpoint.string()},
                        {"features", opts.features.string()},
                        {"codes", opts.codes.string()},
                        {"manifest", opts.manifest.string()},
                        {"out", opts.out.string()},
                        {"runs", opts.runs},
                        {"split", std::string(split_name(opts.split))},
                        {"use_mean", opts.use_mean},
                        {"label", label},
                        {"seed", opts.seed}});
  return result;
}

report::ModelReport cmd_probe(const ProbeOptions& opts) {
  const auto grid = metrics::probe_grid(opts.stride, opts.rows);
  const auto rep = metrics::probe_representation(opts.kind, grid, derive_seed(opts.seed, "probe"), opts.sigma);
  report::ModelReport result{std::string(metrics::probe_kind_name(opts.kind)),
                             metrics::evaluate(rep, opts.runs, derive_seed(opts.seed, "eval"))};
  if (!opts.out.empty()) {
    fs::create_directories(opts.out);
    report::write_csv(opts.out / kReportCsvName, {result});
    write_text(opts.out / kReportMarkdownName, report::markdown_table({result}));
    write_run_config(opts.out, "probe",
                     json{{"kind", result.model},
                          {"sigma", opts.sigma},
                          {"subset", opts.stride.to_string()},
                          {"rows", opts.rows ? json(*opts.rows) : json(nullptr)},
                          {"runs", opts.runs},
                          {"seed", opts.seed}});
  }
  return result;
}

TraverseSummary cmd_traverse(const TraverseOptions& opts) {
  const auto model = models::load_checkpoint(opts.checkpoint);
  const models::ConvVae net(model.spec);
  const int d = model.spec.latent_dim;
  const int n_mels = model.spec.n_mels, n_frames = model.spec.n_frames;
  std::vector<int> dims = opts.dims;
  if (dims.empty()) {
    for (int j = 0; j < d; ++j) dims.push_back(j);
  }
  TraverseSummary s;

  const fs::path trav_dir = opts.out / "traversal";
  fs::create_directories(trav_dir);
  const std::vector<double> base(static_cast<std::size_t>(d), 0.0);
  const auto values = models::default_traversal_values();
  for (int dim : dims) {
    const auto grids = models::latent_traverse(model, base, dim, values);
    for (std::size_t v = 0; v < grids.size(); ++v) {
      write_image(trav_dir / ("dim" + std::to_string(dim) + "_step" + std::to_string(v)), grids[v], n_mels, n_frames,
                  opts.png);
      ++s.traversal_grids;
    }
  }

  if (!opts.features.empty()) {
    const fs::path rec_dir = opts.out / "reconstructions";
    fs::create_directories(rec_dir);
    const auto set = read_feature_set(opts.features);
    const auto rows = rows_in_split(set, Split::Heldout);
    const Matrix x = load_features(set, rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const int id = set.rows[rows[i]].id;
      const auto q = net.encode(model.params, x.row(i));
      const auto decoded = net.decode(model.params, q.mu);
      write_image(rec_dir / (std::to_string(id) + "_original"), x.row(i), n_mels, n_frames, opts.png);
      write_image(rec_dir / (std::to_string(id) + "_decoded"), decoded, n_mels, n_frames, opts.png);
      ++s.reconstruction_pairs;
    }
  }

  const fs::path sample_dir = opts.out / "samples";
  fs::create_directories(sample_dir);
  Rng rng(derive_seed(opts.seed, "samples"));
  std::vector<double> z(static_cast<std::size_t>(d));
  for (int k = 0; k < opts.samples; ++k) {
    for (double& v : z) v = rng.normal();
    write_image(sample_dir / ("sample" + std::to_string(k)), net.decode(model.params, z), n_mels, n_frames, opts.png);
    ++s.random_samples;
  }

  write_run_config(opts.out, "traverse",
                   json{{"checkpoint", opts.checkpoint.string()},
                        {"features", opts.features.string()},
                        {"out", opts.out.string()},
                        {"dims", dims},
                        {"values", values},
                        {"samples", opts.samples},
                        {"png", opts.png},
                        {"seed", opts.seed}});
  return s;
}

std::string cmd_report(const ReportOptions& opts) {
  if (opts.inputs.empty()) throw std::invalid_argument("report: no inputs");
  std::vector<report::ModelReport> rows;
  for (const auto& in : opts.inputs) {
    const fs::path csv_path = fs::is_directory(in) ? in / kReportCsvName : in;
    for (auto& r : report::read_csv(csv_path)) rows.push_back(std::move(r));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return model_rank(a.model) < model_rank(b.model); });
  const std::string table = report::markdown_table(rows);
  if (!opts.out.empty()) {
    if (opts.out.has_parent_path()) fs::create_directories(opts.out.parent_path());
    write_text(opts.out, table);
    report::write_csv(fs::path(opts.out).replace_extension(".csv"), rows);
  }
  return table;
}

}  // namespace syntone::harness
