#include "zqvae/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace zqvae {

using nlohmann::json;

namespace {

// Reads one config block, remembering which keys were consumed so that
// typos surface as errors instead of silently falling back to defaults.
class Block {
 public:
  Block(const json& root, std::string name) : name_(std::move(name)) {
    if (!root.contains(name_)) return;
    node_ = root.at(name_);
    if (!node_.is_object()) throw ValidationError(name_ + ": expected an object");
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!node_.contains(key)) return fallback;
    try {
      return node_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ValidationError(name_ + "." + key + ": " + e.what());
    }
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return node_.contains(key);
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return node_.at(key);
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!used_.count(key)) throw ValidationError("unknown config key " + name_ + "." + key);
    }
  }

 private:
  std::string name_;
  json node_ = json::object();
  std::set<std::string> used_;
};

template <typename F>
auto wrap(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

json mean_std_json(const std::optional<MeanStd>& m) {
  if (!m) return nullptr;
  return json{{"mean", m->mean}, {"std", m->std}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw RuntimeFailure("cannot write " + file.string());
  out << text;
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) throw ValidationError("run config must be a JSON object");
  static const std::set<std::string> kBlocks{"data", "model", "objective", "train", "qsvc", "report"};
  for (const auto& [key, value] : j.items()) {
    if (!kBlocks.count(key)) throw ValidationError("unknown config block '" + key + "'");
  }
  RunConfig cfg;

  Block data(j, "data");
  cfg.data.kind = data.get("kind", cfg.data.kind);
  cfg.data.n = data.get("n", cfg.data.n);
  cfg.data.seed = data.get("seed", cfg.data.seed);
  cfg.data.noise_dims = data.get("noise_dims", cfg.data.noise_dims);
  cfg.data.noise_sd = data.get("noise_sd", cfg.data.noise_sd);
  cfg.data.path = data.get("path", cfg.data.path);
  if (data.has("label_column") && !data.raw("label_column").is_null()) {
    cfg.data.label_column = data.get<std::string>("label_column", "");
  }
  cfg.data.train_ratio = data.get("train_ratio", cfg.data.train_ratio);
  data.finish();
  static const std::set<std::string> kKinds{"synthetic-quantum", "swiss-roll", "csv", "bundle"};
  if (!kKinds.count(cfg.data.kind)) throw ValidationError("data.kind: unknown kind '" + cfg.data.kind + "'");
  if (cfg.data.n < 1) throw ValidationError("data.n must be >= 1");
  if (!(cfg.data.train_ratio > 0.0 && cfg.data.train_ratio < 1.0)) {
    throw ValidationError("data.train_ratio must lie in (0, 1)");
  }
  if ((cfg.data.kind == "csv" || cfg.data.kind == "bundle") && cfg.data.path.empty()) {
    throw ValidationError("data.path is required for kind " + cfg.data.kind);
  }

  Block model(j, "model");
  cfg.model.n_z = model.get("n_z", cfg.model.n_z);
  cfg.model.n_aux = model.get("n_aux", cfg.model.n_aux);
  if (model.has("n_aux_decoder") && !model.raw("n_aux_decoder").is_null()) {
    cfg.model.n_aux_decoder = model.get("n_aux_decoder", 0);
  }
  cfg.model.n_layers = model.get("n_layers", cfg.model.n_layers);
  model.finish();

  Block obj(j, "objective");
  cfg.objective.recon = wrap(obj.path("recon"), [&] { return parse_loss_kind(obj.get<std::string>("recon", "fidelity")); });
  cfg.objective.reg = wrap(obj.path("reg"), [&] { return parse_loss_kind(obj.get<std::string>("reg", "jsd")); });
  cfg.objective.beta = obj.get("beta", cfg.objective.beta);
  cfg.objective.mode = wrap(obj.path("mode"), [&] { return parse_objective_mode(obj.get<std::string>("mode", "instance")); });
  obj.finish();
  wrap("objective", [&] { cfg.objective.validate(); return 0; });

  Block train(j, "train");
  cfg.train.epochs = train.get("epochs", cfg.train.epochs);
  cfg.train.patience = train.get("patience", cfg.train.patience);
  cfg.train.seeds = train.get("seeds", cfg.train.seeds);
  cfg.train.rho_begin = train.get("rho_begin", cfg.train.rho_begin);
  cfg.train.rho_end = train.get("rho_end", cfg.train.rho_end);
  cfg.train.max_fun_per_epoch = train.get("max_fun_per_epoch", cfg.train.max_fun_per_epoch);
  if (train.has("batch_size")) {
    const json& b = train.raw("batch_size");
    if (b.is_string() && b.get<std::string>() == "full") {
      cfg.train.batch_size.reset();
    } else if (b.is_number_integer()) {
      cfg.train.batch_size = b.get<int>();
    } else {
      throw ValidationError("train.batch_size: expected \"full\" or an integer");
    }
  }
  train.finish();
  cfg.train.validate();

  Block qsvc(j, "qsvc");
  cfg.qsvc.n_layers = qsvc.get("n_layers", cfg.qsvc.n_layers);
  cfg.qsvc.scaling = wrap(qsvc.path("scaling"), [&] { return parse_kernel_scaling(qsvc.get<std::string>("scaling", "tan")); });
  cfg.qsvc.c_reg = qsvc.get("c_reg", cfg.qsvc.c_reg);
  cfg.qsvc.feature_seed = qsvc.get("feature_seed", cfg.qsvc.feature_seed);
  qsvc.finish();
  cfg.qsvc.validate();

  Block report(j, "report");
  cfg.report.bloch_dump = report.get("bloch_dump", cfg.report.bloch_dump);
  cfg.report.export_kernels = report.get("export_kernels", cfg.report.export_kernels);
  report.finish();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  try {
    return parse_run_config(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

json to_json(const RunConfig& cfg) {
  json j;
  j["data"] = {{"kind", cfg.data.kind},
               {"n", cfg.data.n},
               {"seed", cfg.data.seed},
               {"noise_dims", cfg.data.noise_dims},
               {"noise_sd", cfg.data.noise_sd},
               {"path", cfg.data.path},
               {"label_column", cfg.data.label_column ? json(*cfg.data.label_column) : json(nullptr)},
               {"train_ratio", cfg.data.train_ratio}};
  j["model"] = {{"n_z", cfg.model.n_z},
                {"n_aux", cfg.model.n_aux},
                {"n_aux_decoder", cfg.model.n_aux_decoder.value_or(cfg.model.n_aux)},
                {"n_layers", cfg.model.n_layers}};
  j["objective"] = {{"recon", to_string(cfg.objective.recon)},
                    {"reg", to_string(cfg.objective.reg)},
                    {"beta", cfg.objective.beta},
                    {"mode", to_string(cfg.objective.mode)}};
  j["train"] = {{"epochs", cfg.train.epochs},
                {"patience", cfg.train.patience},
                {"seeds", cfg.train.seeds},
                {"rho_begin", cfg.train.rho_begin},
                {"rho_end", cfg.train.rho_end},
                {"max_fun_per_epoch", cfg.train.max_fun_per_epoch},
                {"batch_size", cfg.train.batch_size ? json(*cfg.train.batch_size) : json("full")}};
  j["qsvc"] = {{"n_layers", cfg.qsvc.n_layers},
               {"scaling", to_string(cfg.qsvc.scaling)},
               {"c_reg", cfg.qsvc.c_reg},
               {"feature_seed", cfg.qsvc.feature_seed}};
  j["report"] = {{"bloch_dump", cfg.report.bloch_dump}, {"export_kernels", cfg.report.export_kernels}};
  return j;
}

Dataset prepare_dataset(const DataConfig& cfg) {
  Rng rng(cfg.seed);
  Dataset data;
  if (cfg.kind == "bundle") {
    data = read_bundle(cfg.path);
  } else if (cfg.kind == "csv") {
    IngestOptions opts;
    opts.label_column = cfg.label_column;
    opts.train_ratio = cfg.train_ratio;
    data = ingest_csv(cfg.path, opts, rng);
  } else if (cfg.kind == "swiss-roll") {
    data = gen_swiss_roll(cfg.n, cfg.noise_dims, cfg.noise_sd, rng);
  } else {
    data = gen_synthetic_quantum(cfg.n, rng);
  }
  if (cfg.kind != "bundle") data.provenance.seed = cfg.seed;
  if (!data.has_split()) {
    Rng split_rng = Rng(cfg.seed).split(1);
    const bool stratify = data.labels.has_value();
    data = split(std::move(data), cfg.train_ratio, stratify, split_rng);
  }
  data.validate();
  return data;
}

ModelSpec model_spec_for(const RunConfig& cfg, int n_x) {
  const ModelConfig& m = cfg.model;
  ModelSpec spec{EncoderSpec{n_x, m.n_z, m.n_aux, m.n_layers},
                 DecoderSpec{n_x, m.n_z, m.n_aux_decoder.value_or(m.n_aux), m.n_layers}};
  wrap("model", [&] { spec.validate(); return 0; });
  return spec;
}

RunResult run_experiment(const RunConfig& cfg, const Dataset& data) {
  data.validate();
  if (data.split.train.empty() || data.split.test.empty()) {
    throw ValidationError("dataset needs non-empty train and test splits");
  }
  RunResult run;
  run.spec = model_spec_for(cfg, data.n_qubits());
  const auto train_points = data.select(data.split.train);
  run.seeds = train(run.spec, cfg.objective, train_points, cfg.train);
  run.report = report_triple(run.spec, run.seeds, data, cfg.qsvc);
  return run;
}

json metrics_json(const RunConfig& cfg, const RunResult& run) {
  json seeds = json::array();
  std::vector<double> vols;
  std::vector<double> pccs;
  for (std::size_t k = 0; k < run.report.per_seed.size(); ++k) {
    const SeedMetrics& m = run.report.per_seed[k];
    const TrainTrace& trace = run.seeds[k].trace;
    seeds.push_back({{"seed", m.seed},
                     {"f", m.f},
                     {"l", optional_json(m.l)},
                     {"r", optional_json(m.r)},
                     {"l_auc", optional_json(m.l_auc)},
                     {"r_auc", optional_json(m.r_auc)},
                     {"latent_volume", optional_json(m.latent_volume)},
                     {"input_latent_pcc", m.input_latent_pcc},
                     {"best_objective", trace.best_value},
                     {"evaluations", trace.evaluations.size()},
                     {"epochs", trace.epoch_best.size()},
                     {"stop", to_string(trace.stop)}});
    if (m.latent_volume) vols.push_back(*m.latent_volume);
    pccs.push_back(m.input_latent_pcc);
  }
  std::optional<MeanStd> vol;
  if (!vols.empty() && vols.size() == run.report.per_seed.size()) vol = mean_std(vols);
  return json{{"format", "zqvae-metrics/1"},
              {"key",
               {{"n_x", run.spec.n_x()},
                {"n_z", run.spec.n_z()},
                {"n_aux", run.spec.encoder.n_aux},
                {"n_aux_decoder", run.spec.decoder.n_aux},
                {"n_layers", run.spec.encoder.n_layers},
                {"beta", cfg.objective.beta},
                {"recon", to_string(cfg.objective.recon)},
                {"reg", to_string(cfg.objective.reg)},
                {"mode", to_string(cfg.objective.mode)}}},
              {"summary",
               {{"f", mean_std_json(run.report.f)},
                {"l", mean_std_json(run.report.l)},
                {"r", mean_std_json(run.report.r)},
                {"latent_volume", mean_std_json(vol)},
                {"input_latent_pcc", mean_std_json(mean_std(pccs))}}},
              {"seeds", seeds}};
}

void write_run(const std::filesystem::path& dir, const RunConfig& cfg, const Dataset& data, const RunResult& run) {
  std::filesystem::create_directories(dir);
  write_text(dir / "config.resolved.json", to_json(cfg).dump(2) + "\n");
  for (const auto& s : run.seeds) {
    const auto seed_dir = dir / ("seed_" + std::to_string(s.seed));
    std::filesystem::create_directories(seed_dir);
    const auto& e = s.params.theta_e;
    const auto& d = s.params.theta_d;
    const json params{{"seed", s.seed},
                      {"theta_e", std::vector<double>(e.data(), e.data() + e.size())},
                      {"theta_d", std::vector<double>(d.data(), d.data() + d.size())}};
    write_text(seed_dir / "params.json", params.dump(2) + "\n");
    write_text(seed_dir / "trace.ndjson", s.trace.to_ndjson());
  }
  write_text(dir / "metrics.json", metrics_json(cfg, run).dump(2) + "\n");

  if (cfg.report.bloch_dump && run.spec.n_z() == 1) {
    std::ostringstream csv;
    csv << "x,y,z,label,beta,seed\n";
    const auto test = data.select(data.split.test);
    for (const auto& s : run.seeds) {
      const CompiledModel model(run.spec, s.params);
      for (std::size_t i = 0; i < test.size(); ++i) {
        const Bloch b = bloch_coords(model.encode(test[i]), 0);
        const int label = data.labels ? (*data.labels)[data.split.test[i]] : 0;
        csv << format_number(b.x) << ',' << format_number(b.y) << ',' << format_number(b.z) << ',' << label << ','
            << format_number(cfg.objective.beta) << ',' << s.seed << '\n';
      }
    }
    write_text(dir / "bloch.csv", csv.str());
  }

  if (cfg.report.export_kernels && data.labels && !run.seeds.empty()) {
    const CompiledModel model(run.spec, run.seeds.front().params);
    std::vector<DensityMatrix> latent;
    for (int i : data.split.train) latent.push_back(model.encode(data.points[i]));
    const KernelSpec spec{AnsatzSpec{run.spec.n_z(), cfg.qsvc.n_layers}, cfg.qsvc.scaling};
    write_matrix_csv(kernel_matrix(latent, spec, feature_map_params(spec.feature_map, cfg.qsvc.feature_seed)),
                     dir / "kernel_latent_train.csv");
  }
}

std::vector<double> parse_beta_sweep(const std::string& spec) {
  const std::string prefix = "beta=";
  if (spec.rfind(prefix, 0) != 0) throw ValidationError("--sweep: only beta=a:b:step is supported");
  std::vector<double> parts;
  std::stringstream ss(spec.substr(prefix.size()));
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("--sweep: bad number '" + item + "'");
    }
  }
  if (parts.size() != 3) throw ValidationError("--sweep: expected beta=start:stop:step");
  const double start = parts[0];
  const double stop = parts[1];
  const double step = parts[2];
  if (!(step > 0.0) || stop < start) throw ValidationError("--sweep: need step > 0 and stop >= start");
  std::vector<double> values;
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  for (long k = 0; k <= count; ++k) {
    // Snap to the step grid so 0.1 * 3 prints as 0.3.
    values.push_back(std::round((start + static_cast<double>(k) * step) * 1e12) / 1e12);
  }
  return values;
}

std::string sweep_dir_name(double beta) { return "beta_" + format_number(beta); }

namespace {

std::vector<std::filesystem::path> find_runs(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ValidationError("no such run directory: " + path.string());
  if (std::filesystem::exists(path / "metrics.json")) return {path};
  std::vector<std::filesystem::path> runs;
  for (const auto& entry : std::filesystem::directory_iterator(path)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "metrics.json")) runs.push_back(entry.path());
  }
  if (runs.empty()) throw ValidationError("no completed runs under " + path.string());
  std::sort(runs.begin(), runs.end());
  return runs;
}

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

ReportTables aggregate_runs(const std::vector<std::filesystem::path>& paths) {
  if (paths.empty()) throw ValidationError("report needs at least one run directory");
  std::vector<std::filesystem::path> runs;
  for (const auto& p : paths) {
    for (auto& r : find_runs(p)) runs.push_back(std::move(r));
  }
  ReportTables out;
  static const std::vector<std::string> kKey{"n_x", "n_z", "n_aux", "n_aux_decoder", "n_layers",
                                             "beta", "recon", "reg", "mode"};
  static const std::vector<std::string> kStats{"f", "l", "r", "latent_volume", "input_latent_pcc"};
  std::ostringstream csv;
  for (std::size_t i = 0; i < kKey.size(); ++i) csv << (i ? "," : "") << kKey[i];
  csv << ",seeds";
  for (const auto& s : kStats) csv << ',' << s << "_mean," << s << "_std";
  csv << ",run\n";
  std::ostringstream bloch;
  bool bloch_header = false;

  for (const auto& dir : runs) {
    std::ifstream in(dir / "metrics.json");
    json m;
    try {
      m = json::parse(in);
    } catch (const json::exception& e) {
      throw ValidationError((dir / "metrics.json").string() + ": " + e.what());
    }
    if (m.value("format", "") != "zqvae-metrics/1") {
      throw ValidationError("incompatible run schema in " + dir.string());
    }
    json row = m.at("key");
    row["seeds"] = m.at("seeds").size();
    row["run"] = dir.string();
    for (const auto& s : kStats) row[s] = m.at("summary").at(s);
    out.rows.push_back(row);

    for (std::size_t i = 0; i < kKey.size(); ++i) csv << (i ? "," : "") << csv_cell(row.at(kKey[i]));
    csv << ',' << row["seeds"].get<std::size_t>();
    for (const auto& s : kStats) {
      const json& v = row.at(s);
      csv << ',' << (v.is_null() ? "" : csv_cell(v.at("mean"))) << ',' << (v.is_null() ? "" : csv_cell(v.at("std")));
    }
    csv << ',' << dir.string() << '\n';

    std::ifstream b(dir / "bloch.csv");
    std::string line;
    if (b && std::getline(b, line)) {
      if (!bloch_header) {
        bloch << line << '\n';
        bloch_header = true;
      }
      while (std::getline(b, line)) bloch << line << '\n';
    }
  }
  out.csv = csv.str();
  out.bloch_csv = bloch.str();
  return out;
}

}  // namespace zqvae
