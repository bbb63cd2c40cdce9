#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fsml/error.hpp"
#include "fsml/parallel.hpp"
#include "fsml/pipeline.hpp"
#include "fsml/synth.hpp"

using namespace fsml;
using namespace fsml::pipeline;
namespace fs = std::filesystem;

namespace {

synth::SynthData model_ii(std::size_t n, std::uint64_t seed, bool noise = true) {
  synth::SynthSpec spec;
  spec.model = synth::Model::swiss_rolls;
  spec.n = n;
  spec.J = 50;
  spec.noise = noise;
  spec.seed = seed;
  return synth::generate(spec);
}

FitConfig quick_config() {
  FitConfig c;
  c.d = 2;
  c.folds = 5;
  c.head = classify::HeadSpec::knn_head(5);
  return c;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("fsml_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void copy_bundle(const fs::path& from, const fs::path& to) {
  fs::remove_all(to);
  fs::copy(from, to, fs::copy_options::recursive);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config validation") {
  FitConfig c;
  CHECK_NOTHROW(c.validate());
  c.k_pca = 1;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = FitConfig{};
  c.xi = -1.0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = FitConfig{};
  c.grid_points = 4;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = FitConfig{};
  c.folds = 1;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  CHECK(FitConfig{}.graph_k() == 15);
}

TEST_CASE("a single curve is a precondition error") {
  const auto sim = model_ii(2, 1);
  const std::vector<fda::SampledCurve> one{sim.curves[0]};
  CHECK_THROWS_AS(fit(one, std::vector<int>{0}, FitConfig{}), PreconditionError);
  CHECK_THROWS_AS(fit(sim.curves, std::vector<int>{0}, FitConfig{}), PreconditionError);
}

TEST_CASE("stage failures name the stage and keep the cause") {
  const auto sim = model_ii(30, 2);
  FitConfig c = quick_config();
  c.k_graph = 40;  // more neighbours than curves
  try {
    fit(sim.curves, sim.labels, c);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "graph");
    CHECK_THROWS_AS(e.rethrow_cause(), PreconditionError);
  }
}

TEST_CASE("model (ii) seed 7: estimated dimension, connected graph, diagnostics") {
  // Noise-free generator curves: the manifold sample itself.
  const auto clean = model_ii(200, 7, false);
  FitConfig c;
  c.folds = 5;
  const auto m = fit(clean.curves, clean.labels, c);
  CHECK(m.d_estimated);
  CHECK(m.d == 2);
  CHECK(m.embedding.epsilon_mds >= 0.0);
  CHECK(m.embedding.coords.cols() == 2);
  CHECK(m.graph_edges >= 199);
  const auto graph = geometry::build_graph(fda::pairwise_l2_distances(m.curves()), m.k_graph);
  CHECK(graph.connected());
  CHECK(graph.edge_count() == m.graph_edges);

  const auto noisy = model_ii(200, 7, true);
  const auto mn = fit(noisy.curves, noisy.labels, c);
  MESSAGE("with the default noise the estimate is d = " << mn.d << " (raw " << mn.d_raw << ")");
}

TEST_CASE("fit then predict on the training set with a 1-NN head") {
  const auto sim = model_ii(200, 7);
  FitConfig c = quick_config();
  c.head = classify::HeadSpec::knn_head(1);
  const auto m = fit(sim.curves, sim.labels, c);
  const auto pred = predict_batch(m, m.curves());
  std::size_t hit = 0, agree = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    hit += pred.labels[i] == m.labels[i];
    agree += pred.labels[i] == m.head.predict(m.embedding.coords.row(static_cast<Eigen::Index>(i)).transpose());
  }
  MESSAGE("training accuracy " << hit << "/200, agreement with the head at Z_i " << agree << "/200 (CV bandwidth)");
  CHECK(hit >= 190);
  // Single-curve prediction matches the batch.
  for (std::size_t i = 0; i < 10; ++i) CHECK(predict(m, m.curves().curve(i)) == pred.labels[i]);
}

TEST_CASE("with a small bandwidth, predicting a training curve equals the head at its embedding") {
  const auto sim = model_ii(200, 7);
  FitConfig c = quick_config();
  c.head = classify::HeadSpec::knn_head(1);
  c.xi = 400.0;
  c.h_reg = 0.02;  // well below the nearest-neighbour L2 distances
  const auto m = fit(sim.curves, sim.labels, c);
  const auto pred = predict_batch(m, m.curves());
  for (std::size_t i = 0; i < m.size(); ++i)
    CHECK(pred.labels[i] == m.head.predict(m.embedding.coords.row(static_cast<Eigen::Index>(i)).transpose()));
}

TEST_CASE("raw queries are smoothed with the training settings") {
  const auto sim = model_ii(80, 3);
  const auto m = fit(sim.curves, sim.labels, quick_config());
  const auto test = model_ii(5, 99);
  for (const auto& raw : test.curves) {
    const fda::Curve smooth = smooth_query(m, raw);
    const fda::Curve direct = fda::smooth_curve(raw, m.grid(), m.kernel, m.bandwidth_rule);
    CHECK(smooth.values() == direct.values());
    CHECK(predict(m, raw) == predict(m, smooth));
  }
}

TEST_CASE("save and load reproduce predictions bitwise") {
  TempDir tmp("roundtrip");
  const auto sim = model_ii(100, 4);
  const auto test = model_ii(40, 5);
  for (const auto& head : {classify::HeadSpec::knn_head(5), classify::HeadSpec::lda_head(), classify::HeadSpec::svm_head()}) {
    FitConfig c = quick_config();
    c.head = head;
    c.d.reset();  // exercise the estimated-dimension fields too
    const auto m = fit(sim.curves, sim.labels, c);
    save(m, tmp.path.string());
    const auto back = load(tmp.path.string());
    const auto q = smooth_all(test.curves, m.grid(), m.kernel, m.bandwidth_rule);
    const auto q2 = smooth_all(test.curves, back.grid(), back.kernel, back.bandwidth_rule);
    CHECK(q.values == q2.values);
    const auto a = predict_batch(m, q);
    const auto b = predict_batch(back, q2);
    CHECK(a.labels == b.labels);
    CHECK(a.errors == b.errors);
    CHECK(a.coords.cwiseEqual(b.coords).count() + a.coords.array().isNaN().count() == a.coords.size());
    CHECK(a.scores.cwiseEqual(b.scores).count() + a.scores.array().isNaN().count() == a.scores.size());
    CHECK(back.embedding.coords == m.embedding.coords);
    CHECK(back.embedding.eigenvalues == m.embedding.eigenvalues);
    CHECK(back.embedding.epsilon_mds == m.embedding.epsilon_mds);
    CHECK(back.xi == m.xi);
    CHECK(back.h_reg() == m.h_reg());
    CHECK(back.ridge() == m.ridge());
    CHECK(back.d == m.d);
    CHECK(back.d_raw == m.d_raw);
    CHECK(back.head.spec().name() == m.head.spec().name());
    REQUIRE(back.cv.has_value());
    CHECK(back.cv->xi_losses == m.cv->xi_losses);
    CHECK(back.cv->h_grid == m.cv->h_grid);
    CHECK(back.ids == m.ids);
  }
}

TEST_CASE("damaged bundles") {
  TempDir tmp("damaged");
  const auto sim = model_ii(60, 6);
  const auto m = fit(sim.curves, sim.labels, quick_config());
  const fs::path good = tmp.path / "good";
  save(m, good.string());

  SUBCASE("truncated embedding section") {
    const fs::path bad = tmp.path / "trunc";
    copy_bundle(good, bad);
    const std::string text = slurp(bad / "embedding.csv");
    std::ofstream(bad / "embedding.csv") << text.substr(0, text.size() / 2);
    try {
      load(bad.string());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("embedding") != std::string::npos);
    }
  }
  SUBCASE("missing curves section") {
    const fs::path bad = tmp.path / "missing";
    copy_bundle(good, bad);
    fs::remove(bad / "curves.csv");
    try {
      load(bad.string());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("curves") != std::string::npos);
    }
  }
  SUBCASE("manifest cut short") {
    const fs::path bad = tmp.path / "manifest";
    copy_bundle(good, bad);
    std::istringstream lines(slurp(bad / "manifest.txt"));
    std::string line, kept;
    for (int i = 0; i < 3 && std::getline(lines, line); ++i) kept += line + "\n";
    std::ofstream(bad / "manifest.txt") << kept;
    try {
      load(bad.string());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("manifest") != std::string::npos);
    }
  }
  SUBCASE("newer format version") {
    const fs::path bad = tmp.path / "newer";
    copy_bundle(good, bad);
    std::istringstream lines(slurp(bad / "manifest.txt"));
    std::string line, out;
    while (std::getline(lines, line))
      out += (line.rfind("format_version=", 0) == 0 ? "format_version=" + std::to_string(FsmlModel::kFormatVersion + 1) : line) + "\n";
    std::ofstream(bad / "manifest.txt") << out;
    CHECK_THROWS_AS(load(bad.string()), IncompatibleVersionError);
  }
  SUBCASE("no bundle at all") { CHECK_THROWS_AS(load((tmp.path / "nothing").string()), ParseError); }
}

TEST_CASE("fit resumes from precomputed geodesics") {
  const auto sim = model_ii(80, 8);
  FitConfig c = quick_config();
  const auto grid = fda::Grid::uniform(c.grid_min, c.grid_max, c.grid_points);
  auto curves = smooth_all(sim.curves, grid, c.kernel, c.bandwidth_rule);
  std::vector<std::string> ids;
  for (const auto& s : sim.curves) ids.push_back(s.id);
  const auto data = fda::make_dataset(ids, curves, sim.labels);
  const auto geo = compute_geometry(data.curves, c.k_pca, c.graph_k(), 2);
  const auto direct = fit(data, c);
  const auto resumed = fit(data, c, geo.geodesics);
  CHECK(resumed.embedding.coords == direct.embedding.coords);
  CHECK(resumed.xi == direct.xi);
  CHECK(resumed.h_reg() == direct.h_reg());
  CHECK(resumed.graph_edges == direct.graph_edges);
  geometry::GeodesicDistances wrong = geo.geodesics.restrict_to(std::vector<std::size_t>{0, 1, 2});
  CHECK_THROWS_AS(fit(data, c, wrong), StageError);
}

TEST_CASE("fixed xi and h skip tuning") {
  const auto sim = model_ii(60, 9);
  FitConfig c = quick_config();
  c.xi = 100.0;
  c.h_reg = 0.7;
  const auto m = fit(sim.curves, sim.labels, c);
  CHECK_FALSE(m.cv.has_value());
  CHECK(m.xi == 100.0);
  CHECK(m.h_reg() == 0.7);
  CHECK_FALSE(m.xi_tuned);
  CHECK_FALSE(m.h_tuned);
  c.h_reg.reset();
  const auto m2 = fit(sim.curves, sim.labels, c);
  CHECK(m2.h_tuned);
  CHECK_FALSE(m2.xi_tuned);
}

TEST_CASE("fits are identical across thread counts") {
  const auto sim = model_ii(80, 10);
  FitConfig c = quick_config();
  c.d.reset();
  const std::size_t before = thread_count();
  set_thread_count(1);
  const auto a = fit(sim.curves, sim.labels, c);
  set_thread_count(4);
  const auto b = fit(sim.curves, sim.labels, c);
  set_thread_count(before);
  CHECK(a.embedding.coords == b.embedding.coords);
  CHECK(a.xi == b.xi);
  CHECK(a.h_reg() == b.h_reg());
  REQUIRE(a.cv.has_value());
  for (std::size_t k = 0; k < a.cv->cells.size(); ++k)
    CHECK(a.cv->cells[k].inner_losses == b.cv->cells[k].inner_losses);
  const auto pa = predict_batch(a, a.curves());
  const auto pb = predict_batch(b, b.curves());
  CHECK(pa.labels == pb.labels);
}

}  // TEST_SUITE
