#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <string>

#include <unistd.h>

#include "zqvae/data.hpp"

using namespace zqvae;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() / ("zqvae_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

std::filesystem::path write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

int count(const std::vector<int>& v, int x) { return static_cast<int>(std::count(v.begin(), v.end(), x)); }

}  // namespace

TEST_SUITE("data") {

TEST_CASE("synthetic states: purity set by the input radius") {
  Rng rng(1);
  const Dataset d = gen_synthetic_quantum(50, rng);
  CHECK(d.size() == 50);
  CHECK(d.allows_mixed);
  CHECK_NOTHROW(d.validate());
  for (const auto& p : d.points) {
    CHECK(p.n_qubits() == 2);
    // the gate is unitary: purity stays (1 + r^2) / 2 with r in [0.6, 0.7]
    CHECK(p.purity() >= (1.0 + 0.36) / 2.0 - 1e-12);
    CHECK(p.purity() <= (1.0 + 0.49) / 2.0 + 1e-12);
    // control marginal: z kept, transverse part shrunk by cos(theta / 2)
    CHECK(bloch_coords(p, 0).norm() <= 0.7 + 1e-12);
  }
}

TEST_CASE("synthetic states without rotation are product states") {
  SyntheticOptions o;
  o.theta_mean = 0.0;
  o.theta_sd = 0.0;
  Rng rng(12);
  for (const auto& p : gen_synthetic_quantum(10, rng, o).points) {
    const double r = bloch_coords(p, 0).norm();
    CHECK(r >= 0.6 - 1e-12);
    CHECK(r <= 0.7 + 1e-12);
    CHECK(bloch_coords(p, 1).z == doctest::Approx(1.0));
  }
}

TEST_CASE("synthetic states with a fixed angle") {
  // CRY(pi): |00> stays, |10> -> |11>
  SyntheticOptions o;
  o.theta_mean = std::numbers::pi;
  o.theta_sd = 0.0;
  Rng rng(2);
  const Dataset d = gen_synthetic_quantum(10, rng, o);
  for (const auto& p : d.points) {
    const CMatrix& m = p.matrix();
    CHECK(std::abs(m(1, 1)) < 1e-12);
    CHECK(std::abs(m(2, 2)) < 1e-12);
    CHECK(m(0, 0).real() + m(3, 3).real() == doctest::Approx(1.0));
  }
  SyntheticOptions bad;
  bad.radius_hi = 1.5;
  CHECK_THROWS_AS(gen_synthetic_quantum(3, rng, bad), ValidationError);
}

TEST_CASE("swiss roll: shape, labels, noise-free tail") {
  Rng rng(3);
  const Dataset d = gen_swiss_roll(40, 5, 0.0, rng);
  REQUIRE(d.labels);
  CHECK(d.n_qubits() == 3);
  CHECK(count(*d.labels, 1) == 20);
  CHECK(count(*d.labels, -1) == 20);
  REQUIRE(d.manifold_coord);
  const double thr = d.provenance.params.at("label_threshold_t").get<double>();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double t = (*d.manifold_coord)[i];
    CHECK(t >= 1.5 * std::numbers::pi);
    CHECK(t < 4.5 * std::numbers::pi);
    CHECK(((*d.labels)[i] == 1) == (t > thr));
    const CMatrix& m = d.points[i].matrix();
    for (Eigen::Index k = 3; k < 8; ++k) CHECK(std::abs(m(k, k)) < 1e-15);
    // amplitudes 0 and 2 are t cos t and t sin t over the same norm
    if (std::abs(std::cos(t)) > 0.1) CHECK(m(0, 2).real() / m(0, 0).real() == doctest::Approx(std::tan(t)).epsilon(1e-9));
  }
}

TEST_CASE("swiss roll is reproducible") {
  Rng a(9);
  Rng b(9);
  const Dataset x = gen_swiss_roll(5, 2, 0.2, a);
  const Dataset y = gen_swiss_roll(5, 2, 0.2, b);
  for (int i = 0; i < 5; ++i) CHECK((x.points[i].matrix() - y.points[i].matrix()).norm() == 0.0);
  CHECK(x.n_qubits() == 3);
  CHECK(gen_swiss_roll(5, 0, 0.0, a).n_qubits() == 2);
}

TEST_CASE("normalize_features: global min-max then row norm") {
  const auto out = normalize_features({{0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}});
  CHECK(out[0][0] == 0.0);
  CHECK(out[0][1] == doctest::Approx(1.0));
  CHECK(out[2][0] == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(normalize_features({{2.0, 2.0}, {2.0, 2.0}}), ValidationError);
}

TEST_CASE("csv ingest of a two-row toy") {
  TempDir tmp("csv_toy");
  const auto f = write_text(tmp.path / "toy.csv", "a,b\n0,1\n1,0\n");
  Rng rng(4);
  const Dataset d = ingest_csv(f, IngestOptions{}, rng);
  REQUIRE(d.size() == 2);
  CHECK(d.n_qubits() == 1);
  CHECK(std::abs(d.points[0].matrix()(1, 1) - Complex(1.0)) < 1e-15);
  CHECK(std::abs(d.points[1].matrix()(0, 0) - Complex(1.0)) < 1e-15);
  CHECK(d.split.train.size() == 1);
  CHECK(d.split.test.size() == 1);
  CHECK_FALSE(d.labels);
}

TEST_CASE("csv ingest with labels balances and stratifies") {
  TempDir tmp("csv_lab");
  std::string text = "x,y,z,cls\n";
  // 8 positives, 4 negatives
  for (int i = 0; i < 12; ++i) {
    text += std::to_string(i) + "," + std::to_string(12 - i) + "," + std::to_string(i % 3) + "," + (i < 8 ? "1" : "0") + "\n";
  }
  const auto f = write_text(tmp.path / "lab.csv", text);
  IngestOptions o;
  o.label_column = "cls";
  Rng rng(5);
  const Dataset d = ingest_csv(f, o, rng);
  REQUIRE(d.labels);
  CHECK(d.size() == 8);
  CHECK(count(*d.labels, 1) == 4);
  CHECK(count(*d.labels, -1) == 4);
  CHECK(d.n_qubits() == 2);
  CHECK(d.split.train.size() == 6);  // round(0.7 * 4) = 3 per class
  CHECK(count(d.select_labels(d.split.train), 1) == 3);
  CHECK(d.provenance.params.at("label_positive") == "1");
}

TEST_CASE("csv ingest errors") {
  TempDir tmp("csv_err");
  Rng rng(6);
  IngestOptions o;
  o.label_column = "y";
  CHECK_THROWS_WITH_AS(ingest_csv(write_text(tmp.path / "a.csv", "a,b\n1,2\n3,4\n"), o, rng),
                       doctest::Contains("missing label column"), ValidationError);
  CHECK_THROWS_WITH_AS(ingest_csv(write_text(tmp.path / "b.csv", "a,y\n1,p\nfoo,q\n"), o, rng),
                       doctest::Contains("non-numeric"), ValidationError);
  CHECK_THROWS_WITH_AS(ingest_csv(write_text(tmp.path / "c.csv", "a,b,y\n1,2,p\n2,1,q\n3,3,r\n"), o, rng),
                       doctest::Contains("exactly two classes"), ValidationError);
  CHECK_THROWS_WITH_AS(ingest_csv(write_text(tmp.path / "d.csv", "a,b\n5,5\n5,5\n"), IngestOptions{}, rng),
                       doctest::Contains("degenerate normalization"), ValidationError);
  CHECK_THROWS_AS(ingest_csv(tmp.path / "nope.csv", IngestOptions{}, rng), RuntimeFailure);
}

TEST_CASE("split sizes and disjointness") {
  Rng rng(7);
  Dataset d = gen_swiss_roll(10, 0, 0.0, rng);
  const Dataset s = split(d, 0.7, false, rng);
  CHECK(s.split.train.size() == 7);
  CHECK(s.split.test.size() == 3);
  std::set<int> all(s.split.train.begin(), s.split.train.end());
  all.insert(s.split.test.begin(), s.split.test.end());
  CHECK(all.size() == 10);

  Dataset six = gen_swiss_roll(6, 0, 0.0, rng);
  const Dataset st = split(six, 0.5, true, rng);
  CHECK(count(six.select_labels(st.split.train), 1) == 2);  // round(1.5) per class
  CHECK(count(six.select_labels(st.split.train), -1) == 2);

  Dataset one = gen_swiss_roll(1, 0, 0.0, rng);
  CHECK_THROWS_AS(split(one, 0.7, false, rng), ValidationError);
  CHECK_THROWS_AS(split(d, 1.0, false, rng), ValidationError);
}

TEST_CASE("split never leaves a side empty") {
  Rng rng(8);
  const Dataset d = split(gen_swiss_roll(4, 0, 0.0, rng), 0.99, false, rng);
  CHECK(d.split.test.size() == 1);
}

TEST_CASE("bundle round trip") {
  TempDir tmp("bundle");
  Rng rng(10);
  Dataset d = split(gen_swiss_roll(12, 5, 0.2, rng), 0.7, true, rng);
  d.provenance.seed = 10;
  write_bundle(d, tmp.path / "b");
  CHECK(std::filesystem::exists(tmp.path / "b" / "states.bin"));
  const Dataset r = read_bundle(tmp.path / "b");
  REQUIRE(r.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) CHECK((r.points[i].matrix() - d.points[i].matrix()).norm() <= 1e-12);
  CHECK(*r.labels == *d.labels);
  CHECK(r.split.train == d.split.train);
  CHECK(r.split.test == d.split.test);
  CHECK(r.provenance.seed == 10);
  CHECK(r.provenance.generator == "swiss-roll");
  CHECK(*r.manifold_coord == *d.manifold_coord);

  // single-precision file alone still reads, to float accuracy
  std::filesystem::remove(tmp.path / "b" / "states_f64.bin");
  const Dataset f = read_bundle(tmp.path / "b");
  for (std::size_t i = 0; i < d.size(); ++i) CHECK((f.points[i].matrix() - d.points[i].matrix()).norm() <= 1e-6);

  CHECK_THROWS_AS(read_bundle(tmp.path / "missing"), ValidationError);
}

TEST_CASE("validate catches bad datasets") {
  Rng rng(11);
  Dataset d = gen_swiss_roll(4, 0, 0.0, rng);
  d.split.train = {0, 1};
  d.split.test = {1};
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d.split.test = {7};
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d.split = {};
  (*d.labels)[0] = 0;
  CHECK_THROWS_AS(d.validate(), ValidationError);
  Dataset m = gen_synthetic_quantum(2, rng);
  m.allows_mixed = false;
  CHECK_THROWS_AS(m.validate(), ValidationError);
}

}  // TEST_SUITE
