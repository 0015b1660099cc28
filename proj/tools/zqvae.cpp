// zqvae command-line driver: gen, train, check, report.
//
// Exit codes: 0 ok, 1 invalid input or config, 2 runtime failure,
// 3 a property suite failed.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "zqvae/checks.hpp"
#include "zqvae/experiment.hpp"

using namespace zqvae;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitProperty = 3;

struct GenArgs {
  std::string config;
  std::string kind;
  std::optional<int> n;
  std::optional<std::uint64_t> seed;
  std::optional<int> noise_dims;
  std::optional<double> noise_sd;
  std::string csv;
  std::string label_column;
  std::optional<double> train_ratio;
  std::string out;
};

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  std::string sweep;
  std::string mode;
  std::optional<double> beta;
};

struct CheckArgs {
  std::string suites = "all";
  std::optional<int> trials;
  std::uint64_t seed = 0;
  bool inject_fault = false;
  std::string json_out;
};

struct ReportArgs {
  std::vector<std::string> runs;
  std::string out;
};

RunConfig base_config(const std::string& path) {
  return path.empty() ? parse_run_config(nlohmann::json::object()) : load_run_config(path);
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw RuntimeFailure("cannot write " + p.string());
  out << text;
}

int cmd_gen(const GenArgs& a) {
  DataConfig d = base_config(a.config).data;
  if (!a.kind.empty()) d.kind = a.kind;
  if (a.n) d.n = *a.n;
  if (a.seed) d.seed = *a.seed;
  if (a.noise_dims) d.noise_dims = *a.noise_dims;
  if (a.noise_sd) d.noise_sd = *a.noise_sd;
  if (!a.csv.empty()) d.path = a.csv;
  if (!a.label_column.empty()) d.label_column = a.label_column;
  if (a.train_ratio) d.train_ratio = *a.train_ratio;
  if (d.kind == "bundle") throw ValidationError("gen: kind must be synthetic-quantum, swiss-roll or csv");
  if (d.kind == "csv" && d.path.empty()) throw ValidationError("gen: --csv is required for kind csv");
  const Dataset data = prepare_dataset(d);
  write_bundle(data, a.out);
  std::cout << "wrote " << data.size() << " states (" << data.n_qubits() << " qubits, " << data.split.train.size()
            << " train / " << data.split.test.size() << " test) to " << a.out << '\n';
  return 0;
}

void print_summary(const std::string& label, const RunResult& run) {
  const auto& r = run.report;
  std::cout << label << "f " << r.f.mean << " +- " << r.f.std;
  if (r.l) std::cout << "  l " << r.l->mean << " +- " << r.l->std;
  if (r.r) std::cout << "  r " << r.r->mean << " +- " << r.r->std;
  std::cout << '\n';
}

int cmd_train(const TrainArgs& a) {
  RunConfig cfg = base_config(a.config);
  if (!a.data.empty()) {
    cfg.data.kind = "bundle";
    cfg.data.path = a.data;
  }
  if (!a.mode.empty()) cfg.objective.mode = parse_objective_mode(a.mode);
  if (a.beta) cfg.objective.beta = *a.beta;
  const Dataset data = prepare_dataset(cfg.data);
  const std::filesystem::path out(a.out);

  if (a.sweep.empty()) {
    const RunResult run = run_experiment(cfg, data);
    write_run(out, cfg, data, run);
    print_summary("", run);
    return 0;
  }
  for (double beta : parse_beta_sweep(a.sweep)) {
    RunConfig c = cfg;
    c.objective.beta = beta;
    const RunResult run = run_experiment(c, data);
    write_run(out / sweep_dir_name(beta), c, data, run);
    print_summary("beta " + std::to_string(beta) + ": ", run);
  }
  return 0;
}

int cmd_check(const CheckArgs& a) {
  static const std::map<std::string, int> kDefaultTrials{
      {"cptp", 1000}, {"elbo", 1000}, {"equivalence", 200}, {"equivalence-control", 200}, {"divergence", 500}};
  std::vector<std::string> names;
  if (a.suites == "all") {
    names = suite_names();
  } else {
    std::stringstream ss(a.suites);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!kDefaultTrials.count(item)) throw ValidationError("unknown check suite '" + item + "'");
      names.push_back(item);
    }
  }
  if (a.trials && *a.trials < 1) throw ValidationError("--trials must be >= 1");
  bool all_passed = true;
  nlohmann::json report = nlohmann::json::array();
  for (const auto& name : names) {
    const int trials = a.trials.value_or(kDefaultTrials.at(name));
    const SuiteResult r = run_suite(name, trials, a.seed, a.inject_fault ? Fault::TraceLeak : Fault::None);
    all_passed = all_passed && r.passed();
    std::cout << (r.passed() ? "PASS " : "FAIL ") << r.name << ": " << r.trials << " trials, " << r.failures
              << " failing";
    for (const auto& note : r.notes) std::cout << "; " << note;
    std::cout << '\n';
    report.push_back({{"suite", r.name},
                      {"passed", r.passed()},
                      {"trials", r.trials},
                      {"failures", r.failures},
                      {"worst", r.worst},
                      {"notes", r.notes}});
  }
  if (!a.json_out.empty()) write_file(a.json_out, report.dump(2) + "\n");
  return all_passed ? 0 : kExitProperty;
}

int cmd_report(const ReportArgs& a) {
  std::vector<std::filesystem::path> runs(a.runs.begin(), a.runs.end());
  const ReportTables t = aggregate_runs(runs);
  if (a.out.empty()) {
    std::cout << t.csv;
    return 0;
  }
  std::filesystem::create_directories(a.out);
  const std::filesystem::path out(a.out);
  write_file(out / "table.csv", t.csv);
  write_file(out / "table.json", t.rows.dump(2) + "\n");
  if (!t.bloch_csv.empty()) write_file(out / "bloch.csv", t.bloch_csv);
  std::cout << "wrote " << t.rows.size() << " rows to " << (out / "table.csv").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density-matrix variational quantum autoencoder: data, training, checks, reports"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate or ingest a dataset bundle");
  g->add_option("--config", gen.config, "Run config; its data block supplies defaults");
  g->add_option("--kind", gen.kind, "synthetic-quantum | swiss-roll | csv");
  g->add_option("--n", gen.n, "Number of points");
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--noise-dims", gen.noise_dims, "Swiss roll: appended noise coordinates");
  g->add_option("--noise-sd", gen.noise_sd, "Swiss roll: noise standard deviation");
  g->add_option("--csv", gen.csv, "CSV file for kind csv");
  g->add_option("--label-column", gen.label_column, "Label column for kind csv");
  g->add_option("--train-ratio", gen.train_ratio, "Fraction of points in the training split");
  g->add_option("--out", gen.out, "Output bundle directory")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train models and write a run directory");
  t->add_option("--config", tr.config, "Run config (JSON)");
  t->add_option("--data", tr.data, "Dataset bundle; overrides the config's data block");
  t->add_option("--out", tr.out, "Run directory")->required();
  t->add_option("--sweep", tr.sweep, "Sweep spec, e.g. beta=0:3.5:0.5");
  t->add_option("--mode", tr.mode, "Objective mode: instance | global");
  t->add_option("--beta", tr.beta, "Regularization weight");

  CheckArgs ck;
  auto* c = app.add_subcommand("check", "Run property suites");
  c->add_option("--suites", ck.suites, "Comma-separated suites or 'all'");
  c->add_option("--trials", ck.trials, "Trials per suite (default: per-suite)");
  c->add_option("--seed", ck.seed, "Seed");
  c->add_flag("--inject-fault", ck.inject_fault, "Test hook: corrupt the channel under test");
  c->add_option("--json", ck.json_out, "Also write the report as JSON");

  ReportArgs rp;
  auto* r = app.add_subcommand("report", "Aggregate run directories into tables");
  r->add_option("runs", rp.runs, "Run or sweep directories")->required();
  r->add_option("--out", rp.out, "Output directory (default: CSV to stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (g->parsed()) return cmd_gen(gen);
    if (t->parsed()) return cmd_train(tr);
    if (c->parsed()) return cmd_check(ck);
    if (r->parsed()) return cmd_report(rp);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}
