#include "zqvae/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace zqvae {

int Dataset::n_qubits() const {
  if (points.empty()) throw ValidationError("empty dataset");
  return points.front().n_qubits();
}

void Dataset::validate() const {
  if (points.empty()) throw ValidationError("dataset has no points");
  const Eigen::Index dim = points.front().dim();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].dim() != dim) throw DimensionError("dataset points differ in dimension");
    if (!allows_mixed && !points[i].is_pure()) {
      throw ValidationError("dataset point " + std::to_string(i) + " is not pure");
    }
  }
  if (labels) {
    if (labels->size() != points.size()) throw ValidationError("label count does not match point count");
    for (int y : *labels) {
      if (y != 1 && y != -1) throw ValidationError("labels must be -1 or +1");
    }
  }
  std::vector<char> seen(points.size(), 0);
  for (const auto* side : {&split.train, &split.test}) {
    for (int i : *side) {
      if (i < 0 || static_cast<std::size_t>(i) >= points.size()) throw ValidationError("split index out of range");
      if (seen[i]) throw ValidationError("split index " + std::to_string(i) + " used twice");
      seen[i] = 1;
    }
  }
}

std::vector<DensityMatrix> Dataset::select(const std::vector<int>& indices) const {
  std::vector<DensityMatrix> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(points.at(i));
  return out;
}

std::vector<int> Dataset::select_labels(const std::vector<int>& indices) const {
  if (!labels) throw ValidationError("dataset has no labels");
  std::vector<int> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(labels->at(i));
  return out;
}

namespace {

void require_count(int n) {
  if (n < 1) throw ValidationError("generator needs n >= 1");
}

CMatrix cry(double theta) {
  // Control is qubit 0 (most significant), target qubit 1.
  CMatrix u = CMatrix::Identity(4, 4);
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  u(2, 2) = c;
  u(2, 3) = -s;
  u(3, 2) = s;
  u(3, 3) = c;
  return u;
}

// Fisher-Yates driven by our own generator so shuffles are portable.
void shuffle(std::vector<int>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

int register_for(std::size_t features) {
  int q = 1;
  while (static_cast<std::size_t>(qubit_dim(q)) < features) ++q;
  return q;
}

}  // namespace

Dataset gen_synthetic_quantum(int n, Rng& rng, const SyntheticOptions& opts) {
  require_count(n);
  if (!(opts.radius_lo >= 0.0 && opts.radius_lo <= opts.radius_hi && opts.radius_hi <= 1.0)) {
    throw ValidationError("synthetic radius range must satisfy 0 <= lo <= hi <= 1");
  }
  if (!(opts.theta_sd >= 0.0)) throw ValidationError("synthetic theta_sd must be non-negative");
  Dataset data;
  data.allows_mixed = true;
  data.provenance.generator = "synthetic-quantum";
  data.provenance.params = {{"n", n},
                            {"radius_lo", opts.radius_lo},
                            {"radius_hi", opts.radius_hi},
                            {"theta_mean", opts.theta_mean},
                            {"theta_sd", opts.theta_sd}};
  CMatrix ket0 = CMatrix::Zero(2, 2);
  ket0(0, 0) = 1.0;
  for (int i = 0; i < n; ++i) {
    const double r = rng.uniform(opts.radius_lo, opts.radius_hi);
    Eigen::Vector3d dir;
    do {
      dir << rng.normal(), rng.normal(), rng.normal();
    } while (dir.norm() < 1e-12);
    dir.normalize();
    const CMatrix q0 = (CMatrix::Identity(2, 2) + r * (dir.x() * pauli_x() + dir.y() * pauli_y() +
                                                       dir.z() * pauli_z())) /
                       2.0;
    const double theta = opts.theta_sd > 0.0 ? rng.normal(opts.theta_mean, opts.theta_sd) : opts.theta_mean;
    const CMatrix u = cry(theta);
    data.points.push_back(DensityMatrix::trusted(symmetrize(u * kron(q0, ket0) * u.adjoint())));
  }
  return data;
}

Dataset gen_swiss_roll(int n, int noise_dims, double noise_sd, Rng& rng) {
  require_count(n);
  if (noise_dims < 0) throw ValidationError("noise_dims must be non-negative");
  if (!(noise_sd >= 0.0)) throw ValidationError("noise_sd must be non-negative");
  Dataset data;
  data.provenance.generator = "swiss-roll";
  data.provenance.params = {{"n", n}, {"noise_dims", noise_dims}, {"noise_sd", noise_sd}};
  const std::size_t width = 3 + static_cast<std::size_t>(noise_dims);
  const int qubits = register_for(width);
  std::vector<double> ts;
  std::vector<double> row(width);
  for (int i = 0; i < n; ++i) {
    const double t = 1.5 * std::numbers::pi * (1.0 + 2.0 * rng.uniform());
    const double h = 21.0 * rng.uniform();
    row[0] = t * std::cos(t);
    row[1] = h;
    row[2] = t * std::sin(t);
    for (int k = 0; k < noise_dims; ++k) row[3 + k] = noise_sd > 0.0 ? rng.normal(0.0, noise_sd) : 0.0;
    data.points.push_back(amplitude_embed(row, qubits));
    ts.push_back(t);
  }
  std::vector<double> sorted = ts;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  std::vector<int> labels;
  for (double t : ts) labels.push_back(t > median ? 1 : -1);
  data.labels = std::move(labels);
  data.provenance.params["label_threshold_t"] = median;
  data.manifold_coord = std::move(ts);
  return data;
}

std::vector<std::vector<double>> normalize_features(const std::vector<std::vector<double>>& rows) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& r : rows) {
    for (double v : r) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) throw ValidationError("degenerate normalization: every feature value is equal");
  std::vector<std::vector<double>> out = rows;
  for (auto& r : out) {
    double norm = 0.0;
    for (double& v : r) {
      v = std::numbers::pi * (v - lo) / (hi - lo);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) throw ValidationError("row with all features at the global minimum cannot be L2-normalized");
    for (double& v : r) v /= norm;
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, std::size_t row, std::size_t col) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (cell.empty() || used != cell.size() || !std::isfinite(v)) {
    throw ValidationError("non-numeric cell '" + cell + "' at row " + std::to_string(row) + ", column " +
                          std::to_string(col + 1));
  }
  return v;
}

}  // namespace

Dataset ingest_csv(const std::filesystem::path& path, const IngestOptions& opts, Rng& rng) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);
  std::optional<std::size_t> label_col;
  if (opts.label_column) {
    const auto it = std::find(header.begin(), header.end(), *opts.label_column);
    if (it == header.end()) throw ValidationError("missing label column '" + *opts.label_column + "'");
    label_col = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ValidationError("row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(header.size()));
    }
    std::vector<double> features;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (label_col && c == *label_col) {
        raw_labels.push_back(cells[c]);
      } else {
        features.push_back(parse_number(cells[c], row_no, c));
      }
    }
    if (features.empty()) throw ValidationError("CSV has no feature columns");
    rows.push_back(std::move(features));
  }
  if (rows.empty()) throw ValidationError(path.string() + ": no data rows");

  const auto normalized = normalize_features(rows);
  const int qubits = opts.n_qubits.value_or(register_for(normalized.front().size()));
  if (static_cast<std::size_t>(qubit_dim(qubits)) < normalized.front().size()) {
    throw DimensionError(std::to_string(normalized.front().size()) + " features do not fit in " +
                         std::to_string(qubits) + " qubits");
  }

  Dataset data;
  data.provenance.generator = "csv";
  data.provenance.params = {{"path", path.string()}, {"n_qubits", qubits}, {"n_rows", rows.size()}};
  std::vector<int> keep(rows.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = static_cast<int>(i);

  std::vector<int> labels;
  if (label_col) {
    std::vector<std::string> classes = raw_labels;
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.size() != 2) {
      throw ValidationError("label column must hold exactly two classes, found " + std::to_string(classes.size()));
    }
    // Numeric labels sort numerically so that 0/1 and -1/1 map as expected.
    bool numeric = true;
    for (const auto& c : classes) {
      try {
        std::size_t used = 0;
        std::stod(c, &used);
        numeric = numeric && used == c.size();
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (numeric && std::stod(classes[0]) > std::stod(classes[1])) std::swap(classes[0], classes[1]);
    for (const auto& r : raw_labels) labels.push_back(r == classes[1] ? 1 : -1);
    data.provenance.params["label_negative"] = classes[0];
    data.provenance.params["label_positive"] = classes[1];

    if (opts.balance_classes) {
      std::vector<int> pos;
      std::vector<int> neg;
      for (int i : keep) (labels[i] > 0 ? pos : neg).push_back(i);
      const std::size_t m = std::min(pos.size(), neg.size());
      shuffle(pos, rng);
      shuffle(neg, rng);
      pos.resize(m);
      neg.resize(m);
      keep = pos;
      keep.insert(keep.end(), neg.begin(), neg.end());
      std::sort(keep.begin(), keep.end());
    }
  }

  std::vector<int> kept_labels;
  for (int i : keep) {
    data.points.push_back(amplitude_embed(normalized[i], qubits));
    if (label_col) kept_labels.push_back(labels[i]);
  }
  if (label_col) data.labels = std::move(kept_labels);
  data.provenance.params["source_rows"] = keep;
  return split(std::move(data), opts.train_ratio, label_col.has_value(), rng);
}

Dataset split(Dataset data, double ratio, bool stratify, Rng& rng) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("split ratio must lie in (0, 1)");
  if (data.points.size() < 2) throw ValidationError("cannot split a dataset with fewer than two points");
  if (stratify && !data.labels) throw ValidationError("stratified split needs labels");
  std::vector<std::vector<int>> groups;
  if (stratify) {
    std::map<int, std::vector<int>> by_label;
    for (std::size_t i = 0; i < data.points.size(); ++i) by_label[(*data.labels)[i]].push_back(static_cast<int>(i));
    for (auto& [label, members] : by_label) {
      if (members.size() < 2) {
        throw ValidationError("class " + std::to_string(label) + " has fewer than two members; cannot stratify");
      }
      groups.push_back(std::move(members));
    }
  } else {
    std::vector<int> all(data.points.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    groups.push_back(std::move(all));
  }
  data.split = Split{};
  for (auto& g : groups) {
    shuffle(g, rng);
    auto n_train = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(g.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, g.size() - 1);
    data.split.train.insert(data.split.train.end(), g.begin(), g.begin() + static_cast<long>(n_train));
    data.split.test.insert(data.split.test.end(), g.begin() + static_cast<long>(n_train), g.end());
  }
  std::sort(data.split.train.begin(), data.split.train.end());
  std::sort(data.split.test.begin(), data.split.test.end());
  return data;
}

namespace {

template <typename T>
void put(std::ofstream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "bundle I/O assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ValidationError("truncated state file");
  return value;
}

template <typename Real>
void write_states(const std::vector<DensityMatrix>& points, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + file.string());
  for (const auto& p : points) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.dim()));
    for (Eigen::Index i = 0; i < p.dim(); ++i) {
      for (Eigen::Index j = 0; j < p.dim(); ++j) {
        put<Real>(out, static_cast<Real>(p.matrix()(i, j).real()));
        put<Real>(out, static_cast<Real>(p.matrix()(i, j).imag()));
      }
    }
  }
}

template <typename Real>
std::vector<CMatrix> read_states(const std::filesystem::path& file, std::size_t count) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + file.string());
  std::vector<CMatrix> out;
  for (std::size_t k = 0; k < count; ++k) {
    const auto dim = static_cast<Eigen::Index>(get<std::uint32_t>(in));
    if (dim < 2 || dim > kMaxDim) throw ValidationError("bad matrix dimension in " + file.string());
    CMatrix m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        const auto re = static_cast<double>(get<Real>(in));
        const auto im = static_cast<double>(get<Real>(in));
        m(i, j) = Complex(re, im);
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

void write_bundle(const Dataset& data, const std::filesystem::path& dir) {
  data.validate();
  std::filesystem::create_directories(dir);
  nlohmann::json meta = {
      {"format", "zqvae-dataset/1"},
      {"n_points", data.points.size()},
      {"n_qubits", data.n_qubits()},
      {"allows_mixed", data.allows_mixed},
      {"labeled", data.labels.has_value()},
      {"provenance",
       {{"generator", data.provenance.generator}, {"seed", data.provenance.seed}, {"params", data.provenance.params}}},
      {"split", {{"train", data.split.train}, {"test", data.split.test}}},
  };
  if (data.manifold_coord) meta["manifold_coord"] = *data.manifold_coord;
  {
    std::ofstream out(dir / "meta.json");
    if (!out) throw RuntimeFailure("cannot write " + (dir / "meta.json").string());
    out << meta.dump(2) << '\n';
  }
  write_states<float>(data.points, dir / "states.bin");
  write_states<double>(data.points, dir / "states_f64.bin");
  if (data.labels) {
    std::ofstream out(dir / "labels.csv");
    out << "index,label\n";
    for (std::size_t i = 0; i < data.labels->size(); ++i) out << i << ',' << (*data.labels)[i] << '\n';
  }
}

Dataset read_bundle(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw ValidationError("no dataset bundle at " + dir.string() + " (meta.json missing)");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("meta.json: " + std::string(e.what()));
  }
  Dataset data;
  const auto count = meta.at("n_points").get<std::size_t>();
  data.allows_mixed = meta.value("allows_mixed", false);
  const auto& prov = meta.at("provenance");
  data.provenance.generator = prov.at("generator").get<std::string>();
  data.provenance.seed = prov.at("seed").get<std::uint64_t>();
  data.provenance.params = prov.at("params");
  data.split.train = meta.at("split").at("train").get<std::vector<int>>();
  data.split.test = meta.at("split").at("test").get<std::vector<int>>();
  if (meta.contains("manifold_coord")) data.manifold_coord = meta["manifold_coord"].get<std::vector<double>>();

  const bool exact = std::filesystem::exists(dir / "states_f64.bin");
  const auto mats = exact ? read_states<double>(dir / "states_f64.bin", count)
                          : read_states<float>(dir / "states.bin", count);
  for (const auto& m : mats) {
    if (exact) {
      data.points.push_back(DensityMatrix::trusted(m));
    } else {
      // Single precision: restore Hermiticity and unit trace, and rank one
      // for pure datasets.
      const CMatrix h = symmetrize(m);
      if (data.allows_mixed) {
        data.points.push_back(DensityMatrix::trusted(h / h.trace().real()));
      } else {
        const auto sys = eigh(h);
        data.points.push_back(pure_state(sys.vectors.col(sys.vectors.cols() - 1)));
      }
    }
  }
  if (meta.value("labeled", false)) {
    std::ifstream lab(dir / "labels.csv");
    if (!lab) throw ValidationError("labels.csv missing from labelled bundle");
    std::string line;
    std::getline(lab, line);
    std::vector<int> labels(count, 0);
    std::size_t seen = 0;
    while (std::getline(lab, line)) {
      if (line.empty()) continue;
      const auto cells = split_csv_line(line);
      if (cells.size() != 2) throw ValidationError("labels.csv: malformed row '" + line + "'");
      const auto idx = static_cast<std::size_t>(parse_number(cells[0], seen + 2, 0));
      if (idx >= count) throw ValidationError("labels.csv: index out of range");
      labels[idx] = static_cast<int>(parse_number(cells[1], seen + 2, 1));
      ++seen;
    }
    if (seen != count) throw ValidationError("labels.csv: expected " + std::to_string(count) + " rows");
    data.labels = std::move(labels);
  }
  data.validate();
  return data;
}

}  // namespace zqvae
