#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fsml/benchmark.hpp"
#include "fsml/error.hpp"
#include "fsml/io.hpp"
#include "fsml/parallel.hpp"
#include "fsml/pipeline.hpp"
#include "fsml/report.hpp"
#include "fsml/synth.hpp"

namespace {

using namespace fsml;

// "auto" or a number.
std::optional<double> auto_or_double(const std::string& text, const std::string& flag) {
  if (text == "auto") return std::nullopt;
  return io::parse_double(text, flag);
}

std::optional<std::size_t> auto_or_size(const std::string& text, const std::string& flag) {
  if (text == "auto") return std::nullopt;
  const long long v = io::parse_int(text, flag);
  if (v < 1) throw ParameterError(flag + " must be a positive integer or 'auto'");
  return static_cast<std::size_t>(v);
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(io::parse_double(item, flag));
  return out;
}

std::vector<classify::HeadSpec> parse_heads(const std::string& text) {
  std::vector<classify::HeadSpec> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(classify::HeadSpec::parse(item));
  if (out.empty()) throw ParameterError("--heads needs at least one head");
  return out;
}

fda::BandwidthRule parse_rule(const std::string& text) {
  if (text == "plugin") return fda::BandwidthRule::plugin;
  if (text == "loocv") return fda::BandwidthRule::loocv;
  throw ParameterError("--bandwidth must be 'plugin' or 'loocv', got '" + text + "'");
}

// External integer labels become class indices 0..M-1 in ascending order.
struct LabelCoding {
  std::vector<int> indices;
  std::vector<int> values;
};

LabelCoding encode_labels(const std::vector<int>& raw) {
  LabelCoding c;
  c.values = raw;
  std::sort(c.values.begin(), c.values.end());
  c.values.erase(std::unique(c.values.begin(), c.values.end()), c.values.end());
  for (int y : raw)
    c.indices.push_back(static_cast<int>(std::lower_bound(c.values.begin(), c.values.end(), y) - c.values.begin()));
  return c;
}

struct GridOptions {
  double min = 0.0;
  double max = 1.0;
  std::size_t points = 101;
  std::string kernel = "gaussian";
  std::string bandwidth = "plugin";

  void attach(CLI::App* cmd, bool with_points = true) {
    cmd->add_option("--grid-min", min, "left end of the evaluation grid")->capture_default_str();
    cmd->add_option("--grid-max", max, "right end of the evaluation grid")->capture_default_str();
    if (with_points) cmd->add_option("--grid-points", points, "number of grid points")->capture_default_str();
    cmd->add_option("--kernel", kernel, "smoothing kernel: gaussian or epanechnikov")->capture_default_str();
    cmd->add_option("--bandwidth", bandwidth, "per-curve bandwidth rule: plugin or loocv")->capture_default_str();
  }
};

struct LabeledInput {
  std::vector<fda::SampledCurve> raw;
  LabelCoding coding;
};

LabeledInput read_labeled(const std::string& curves_path, const std::string& labels_path) {
  LabeledInput in;
  in.raw = io::read_curves_file(curves_path);
  std::vector<std::string> ids;
  for (const auto& c : in.raw) ids.push_back(c.id);
  in.coding = encode_labels(io::align_labels(ids, io::read_labels_file(labels_path)));
  return in;
}

fda::LabeledDataset smooth_dataset(const LabeledInput& in, const GridOptions& g) {
  const auto grid = fda::Grid::uniform(g.min, g.max, g.points);
  auto curves = run_stage("smooth", [&] {
    return pipeline::smooth_all(in.raw, grid, fda::Kernel::parse(g.kernel), parse_rule(g.bandwidth));
  });
  std::vector<std::string> ids;
  for (const auto& c : in.raw) ids.push_back(c.id);
  return fda::make_dataset(std::move(ids), std::move(curves), in.coding.indices);
}

void k_pca_hint(std::size_t n, std::size_t d) {
  std::cerr << "hint: n^(2/(d+2)) gives k_pca ~ " << geometry::suggested_k_pca(n, d) << " for n=" << n << ", d=" << d
            << "; try several values around it\n";
}

std::string sidecar_path(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension(".meta.txt");
  return p.string();
}

// ---- simulate

struct SimulateArgs {
  std::string model = "ii";
  std::size_t n = 200, J = 50, k0 = 50;
  std::uint64_t seed = 0;
  bool no_noise = false;
  std::string out, labels, truth;
};

int run_simulate(const SimulateArgs& a) {
  synth::SynthSpec spec;
  spec.model = synth::parse_model(a.model);
  spec.n = a.n;
  spec.J = a.J;
  spec.k0 = a.k0;
  spec.seed = a.seed;
  spec.noise = !a.no_noise;
  const auto data = synth::generate(spec);
  {
    auto out = io::open_output(a.out);
    io::write_curves(out, data.curves);
  }
  std::vector<std::string> ids;
  for (const auto& c : data.curves) ids.push_back(c.id);
  {
    auto out = io::open_output(a.labels);
    io::write_labels(out, ids, data.labels);
  }
  if (!a.truth.empty()) {
    std::vector<std::string> header{"curve_id"};
    Eigen::Index cols = data.latent.cols();
    for (Eigen::Index k = 1; k <= cols; ++k) header.push_back("latent" + std::to_string(k));
    Eigen::MatrixXd values = data.latent;
    if (data.intrinsic) {
      for (Eigen::Index k = 1; k <= data.intrinsic->cols(); ++k) header.push_back("chart" + std::to_string(k));
      values.conservativeResize(Eigen::NoChange, cols + data.intrinsic->cols());
      values.rightCols(data.intrinsic->cols()) = *data.intrinsic;
    }
    auto out = io::open_output(a.truth);
    io::write_id_matrix(out, header, ids, values);
  }
  std::cerr << "simulated " << data.curves.size() << " curves of model " << synth::model_name(spec.model)
            << "; noise variance " << io::format_double(data.noise_variance) << '\n';
  return 0;
}

// ---- fit

struct FitArgs {
  std::string curves, labels, model_dir;
  std::string xi = "auto", hreg = "auto", d = "auto", kgraph = "auto";
  std::size_t kpca = 15, folds = 10;
  std::string head = "knn:20";
  std::string xi_grid, h_grid;
  bool no_stratify = false;
  std::uint64_t seed = 0;
  GridOptions grid;
  std::string dim_diagnostics, geodesics_out, geodesics_in;
};

int run_fit(const FitArgs& a) {
  pipeline::FitConfig config;
  config.grid_min = a.grid.min;
  config.grid_max = a.grid.max;
  config.grid_points = a.grid.points;
  config.kernel = fda::Kernel::parse(a.grid.kernel);
  config.bandwidth_rule = parse_rule(a.grid.bandwidth);
  config.d = auto_or_size(a.d, "--d");
  config.k_pca = a.kpca;
  config.k_graph = auto_or_size(a.kgraph, "--kgraph");
  config.xi = auto_or_double(a.xi, "--xi");
  config.h_reg = auto_or_double(a.hreg, "--hreg");
  config.head = classify::HeadSpec::parse(a.head);
  config.folds = a.folds;
  if (!a.xi_grid.empty()) config.xi_grid = parse_list(a.xi_grid, "--xi-grid");
  if (!a.h_grid.empty()) config.h_grid = parse_list(a.h_grid, "--h-grid");
  config.stratify = !a.no_stratify;
  config.seed = a.seed;
  config.validate();

  const LabeledInput in = read_labeled(a.curves, a.labels);
  if (in.raw.size() < 2)
    throw PreconditionError("at least 2 curves are required, got " + std::to_string(in.raw.size()));
  const auto t0 = std::chrono::steady_clock::now();
  const fda::LabeledDataset data = smooth_dataset(in, a.grid);
  const double smooth_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!a.dim_diagnostics.empty()) {
    const auto est = geometry::estimate_intrinsic_dim(data.curves);
    auto out = io::open_output(a.dim_diagnostics);
    out << "# estimated d = " << est.dimension << ", raw = " << io::format_double(est.raw) << ", valid = " << est.valid
        << ", used = " << est.used << '\n';
    out << "curve_id,mu\n";
    for (std::size_t i = 0; i < data.size(); ++i) out << data.ids[i] << ',' << io::format_double(est.ratios[i]) << '\n';
  }

  std::optional<geometry::GeodesicDistances> geodesics;
  std::optional<geometry::IntrinsicDimEstimate> exported_estimate;
  if (!a.geodesics_in.empty()) {
    auto [ids, matrix] = io::read_square_matrix_file(a.geodesics_in);
    if (ids != data.ids) throw PreconditionError("geodesic matrix ids do not match the curves in " + a.curves);
    geodesics = geometry::GeodesicDistances{matrix, matrix};
  } else if (!a.geodesics_out.empty()) {
    if (!config.d) {
      exported_estimate = geometry::estimate_intrinsic_dim(data.curves);
      config.d = static_cast<std::size_t>(exported_estimate->dimension);
    }
    const std::size_t d = *config.d;
    auto geo = run_stage("geodesics", [&] {
      return pipeline::compute_geometry(data.curves, config.k_pca, config.graph_k(), d).geodesics;
    });
    auto out = io::open_output(a.geodesics_out);
    io::write_square_matrix(out, data.ids, geo.unfolded);
    geodesics = std::move(geo);
  }

  pipeline::FsmlModel model = pipeline::fit(data, config, geodesics);
  model.label_values = in.coding.values;
  model.timings.insert(model.timings.begin(), {"smooth", smooth_seconds});
  if (exported_estimate) {
    model.d_estimated = true;
    model.d_raw = exported_estimate->raw;
  }
  pipeline::save(model, a.model_dir);

  k_pca_hint(model.size(), model.d);
  std::cout << "fitted " << model.size() << " curves: d=" << model.d << ", xi=" << io::format_double(model.xi)
            << ", h_reg=" << io::format_double(model.h_reg()) << ", head=" << model.head.spec().name()
            << ", epsilon_mds=" << io::format_double(model.embedding.epsilon_mds) << '\n';
  std::cout << "model written to " << a.model_dir << '\n';
  return 0;
}

// ---- predict

struct PredictArgs {
  std::string model_dir, curves, out;
  bool scores = false;
};

int run_predict(const PredictArgs& a) {
  const pipeline::FsmlModel model = pipeline::load(a.model_dir);
  const auto raw = io::read_curves_file(a.curves);
  const std::size_t m = raw.size();
  std::vector<std::string> errors(m);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(model.grid()->size()));
  parallel_for(m, [&](std::size_t i) {
    try {
      values.row(static_cast<Eigen::Index>(i)) = pipeline::smooth_query(model, raw[i]).values().transpose();
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  std::vector<std::size_t> ok;
  for (std::size_t i = 0; i < m; ++i)
    if (errors[i].empty()) ok.push_back(i);
  fda::CurveSet smoothed{model.grid(), values};
  const auto pred = pipeline::predict_batch(model, smoothed.subset(ok));

  auto out = io::open_output(a.out);
  out << "curve_id,predicted_label";
  for (std::size_t k = 1; k <= model.d; ++k) out << ",z" << k;
  if (a.scores)
    for (int v : model.label_values) out << ",score_" << v;
  out << '\n';
  std::vector<Eigen::Index> row_of(m, -1);
  for (std::size_t r = 0; r < ok.size(); ++r) row_of[ok[r]] = static_cast<Eigen::Index>(r);
  std::size_t failed = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const Eigen::Index r = row_of[i];
    if (r >= 0 && !pred.errors[static_cast<std::size_t>(r)].empty()) errors[i] = pred.errors[static_cast<std::size_t>(r)];
    const bool good = errors[i].empty();
    if (!good) {
      ++failed;
      std::cerr << "warning: curve '" << raw[i].id << "': " << errors[i] << '\n';
    }
    out << raw[i].id << ',';
    if (good) out << model.label_values[static_cast<std::size_t>(pred.labels[static_cast<std::size_t>(r)])];
    else out << "NA";
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(model.d); ++k)
      out << ',' << (good ? io::format_double(pred.coords(r, k)) : "NA");
    if (a.scores)
      for (Eigen::Index c = 0; c < model.class_count; ++c)
        out << ',' << (good ? io::format_double(pred.scores(r, c)) : "NA");
    out << '\n';
  }
  std::cerr << "predicted " << m - failed << " of " << m << " curves\n";
  return failed == m && m > 0 ? 1 : 0;
}

// ---- embed

struct EmbedArgs {
  std::string curves, labels, out;
  double xi = 0.0;
  std::string d = "auto", kgraph = "auto";
  std::size_t kpca = 15;
  GridOptions grid;
};

int run_embed(const EmbedArgs& a) {
  if (!(a.xi >= 0.0)) throw ParameterError("--xi must be nonnegative");
  const LabeledInput in = read_labeled(a.curves, a.labels);
  const fda::LabeledDataset data = smooth_dataset(in, a.grid);
  std::size_t d = 0;
  if (auto given = auto_or_size(a.d, "--d")) {
    d = *given;
  } else {
    d = static_cast<std::size_t>(geometry::estimate_intrinsic_dim(data.curves).dimension);
  }
  const std::size_t k_graph = auto_or_size(a.kgraph, "--kgraph").value_or(a.kpca);
  const auto geo = run_stage("geodesics", [&] { return pipeline::compute_geometry(data.curves, a.kpca, k_graph, d); });
  const auto emb = run_stage("embedding", [&] {
    return embedding::classical_mds(embedding::penalized_proximity(geo.geodesics.unfolded, data.labels, a.xi), d);
  });
  std::vector<int> external;
  for (int c : data.labels) external.push_back(in.coding.values[static_cast<std::size_t>(c)]);
  {
    auto out = io::open_output(a.out);
    report::write_embedding_csv(out, data.ids, emb.coords, external);
  }
  auto side = io::open_output(sidecar_path(a.out));
  report::write_embedding_sidecar(side, emb, a.xi);
  std::cerr << "embedded " << data.size() << " curves in d=" << d << "; epsilon_mds "
            << io::format_double(emb.epsilon_mds) << '\n';
  return 0;
}

// ---- benchmark and sweep-xi

struct BenchArgs {
  std::string model = "ii";
  std::size_t n = 200, J = 50, test_n = 500, reps = 20, kpca = 15, folds = 10, grid_points = 101;
  std::uint64_t seed = 0;
  std::string heads = "knn:20,lda,svm:0.01";
  std::string d = "auto", kgraph = "auto";
  std::string xi_grid, h_grid;
  bool no_stratify = false;
  std::string out;

  void attach(CLI::App* cmd) {
    cmd->add_option("--model", model, "synthetic model: i, ii, iii, iv, v, example2")->capture_default_str();
    cmd->add_option("--n", n, "training curves per rep")->capture_default_str();
    cmd->add_option("--J", J, "observations per curve")->capture_default_str();
    cmd->add_option("--test-n", test_n, "test curves per rep")->capture_default_str();
    cmd->add_option("--reps", reps, "replications")->capture_default_str();
    cmd->add_option("--seed", seed, "base seed")->capture_default_str();
    cmd->add_option("--kpca", kpca, "local PCA neighbourhood size")->capture_default_str();
    cmd->add_option("--kgraph", kgraph, "graph neighbours (default: kpca)")->capture_default_str();
    cmd->add_option("--folds", folds, "cross-validation folds")->capture_default_str();
    cmd->add_option("--grid-points", grid_points, "evaluation grid size")->capture_default_str();
    cmd->add_option("--d", d, "intrinsic dimension (auto: the model's true value, estimated for model v)")
        ->capture_default_str();
    cmd->add_option("--xi-grid", xi_grid, "comma-separated xi candidates");
    cmd->add_option("--h-grid", h_grid, "comma-separated h_reg candidates");
    cmd->add_flag("--no-stratify", no_stratify, "plain random folds");
    cmd->add_option("--out", out, "write the table to this file instead of stdout");
  }

  synth::BenchmarkConfig config() const {
    synth::BenchmarkConfig c;
    c.model = synth::parse_model(model);
    c.n = n;
    c.J = J;
    c.test_n = test_n;
    c.reps = reps;
    c.seed = seed;
    c.heads = parse_heads(heads);
    c.k_pca = kpca;
    c.k_graph = auto_or_size(kgraph, "--kgraph");
    c.folds = folds;
    c.grid_points = grid_points;
    c.stratify = !no_stratify;
    c.d = auto_or_size(d, "--d");
    if (!xi_grid.empty()) c.xi_grid = parse_list(xi_grid, "--xi-grid");
    if (!h_grid.empty()) c.h_grid = parse_list(h_grid, "--h-grid");
    c.validate();
    return c;
  }
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    auto out = io::open_output(path);
    out << text;
  }
}

int run_benchmark(const BenchArgs& a) {
  const auto table = synth::benchmark_run(a.config());
  emit(a.out, table.format());
  return 0;
}

struct SweepArgs {
  BenchArgs bench;
  std::string curves, labels;
  std::string sqrt_xi = "0,5,10,15,20,25,30";
  std::string head = "knn:20";
  GridOptions grid;
};

int run_sweep(const SweepArgs& a) {
  const auto grid = parse_list(a.sqrt_xi, "--sqrt-xi");
  std::vector<report::SweepRow> rows;
  if (a.curves.empty() != a.labels.empty()) throw ParameterError("--curves and --labels go together");
  if (!a.curves.empty()) {
    const LabeledInput in = read_labeled(a.curves, a.labels);
    const fda::LabeledDataset data = smooth_dataset(in, a.grid);
    const auto& b = a.bench;
    std::size_t d = 0;
    if (auto given = auto_or_size(b.d, "--d")) {
      d = *given;
    } else {
      d = static_cast<std::size_t>(geometry::estimate_intrinsic_dim(data.curves).dimension);
    }
    const std::size_t k_graph = auto_or_size(b.kgraph, "--kgraph").value_or(b.kpca);
    const auto geo = pipeline::compute_geometry(data.curves, b.kpca, k_graph, d);
    tuning::CvPlan plan;
    plan.folds = b.folds;
    plan.seed = b.seed;
    plan.stratify = !b.no_stratify;
    plan.h_grid = b.h_grid.empty() ? tuning::default_h_grid(geo.l2) : parse_list(b.h_grid, "--h-grid");
    const tuning::RegressionSettings settings{fda::Kernel::parse(a.grid.kernel), b.kpca, d, std::nullopt};
    rows = report::xi_sweep(data, geo.geodesics, grid, classify::HeadSpec::parse(a.head), plan, settings);
  } else {
    BenchArgs b = a.bench;
    b.heads = a.head;
    rows = report::xi_sweep(b.config(), grid);
  }
  std::ostringstream os;
  report::write_sweep_csv(os, rows);
  emit(a.bench.out, os.str());
  return 0;
}

// ---- report

struct ReportArgs {
  std::string model_dir, cv_out, embedding_out;
};

int run_report(const ReportArgs& a) {
  const pipeline::FsmlModel model = pipeline::load(a.model_dir);
  std::cout << report::format_run_report(report::make_run_report(model));
  if (!a.cv_out.empty()) {
    if (!model.cv) throw StateError("the model was fitted with fixed xi; it has no cross-validation table");
    auto out = io::open_output(a.cv_out);
    report::write_cv_csv(out, *model.cv);
  }
  if (!a.embedding_out.empty()) {
    std::vector<int> external;
    for (int c : model.labels) external.push_back(model.label_values[static_cast<std::size_t>(c)]);
    {
      auto out = io::open_output(a.embedding_out);
      report::write_embedding_csv(out, model.ids, model.embedding.coords, external);
    }
    auto side = io::open_output(sidecar_path(a.embedding_out));
    report::write_embedding_sidecar(side, model.embedding, model.xi);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional supervised manifold learning: smoothing, label-aware embedding and classification of curves"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "worker threads (0: all cores)")->capture_default_str();
  app.fallthrough();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic labelled dataset");
  simulate->add_option("--model", sim.model, "i, ii, iii, iv, v or example2")->capture_default_str();
  simulate->add_option("--n", sim.n, "number of curves")->capture_default_str();
  simulate->add_option("--J", sim.J, "observations per curve")->capture_default_str();
  simulate->add_option("--k0", sim.k0, "terms of the example2 warping family")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "seed")->capture_default_str();
  simulate->add_flag("--no-noise", sim.no_noise, "skip the measurement noise");
  simulate->add_option("--out", sim.out, "curves CSV (curve_id,t,value)")->required();
  simulate->add_option("--labels", sim.labels, "labels CSV (curve_id,label)")->required();
  simulate->add_option("--truth", sim.truth, "latent variables and chart coordinates CSV");

  FitArgs fit;
  auto* fitc = app.add_subcommand("fit", "fit a model and write it as a bundle directory");
  fitc->add_option("--curves", fit.curves, "curves CSV (curve_id,t,value)")->required();
  fitc->add_option("--labels", fit.labels, "labels CSV (curve_id,label)")->required();
  fitc->add_option("--model", fit.model_dir, "output bundle directory")->required();
  fitc->add_option("--xi", fit.xi, "label penalty, or auto for nested CV")->capture_default_str();
  fitc->add_option("--hreg", fit.hreg, "coordinate-map bandwidth, or auto for CV")->capture_default_str();
  fitc->add_option("--d", fit.d, "intrinsic dimension, or auto for the two-NN estimate")->capture_default_str();
  fitc->add_option("--kpca", fit.kpca, "local PCA neighbourhood size")->capture_default_str();
  fitc->add_option("--kgraph", fit.kgraph, "graph neighbours (auto: kpca)")->capture_default_str();
  fitc->add_option("--head", fit.head, "knn:K, lda or svm:COST")->capture_default_str();
  fitc->add_option("--folds", fit.folds, "cross-validation folds")->capture_default_str();
  fitc->add_option("--xi-grid", fit.xi_grid, "comma-separated xi candidates");
  fitc->add_option("--h-grid", fit.h_grid, "comma-separated h_reg candidates");
  fitc->add_flag("--no-stratify", fit.no_stratify, "plain random folds");
  fitc->add_option("--seed", fit.seed, "seed for fold assignment")->capture_default_str();
  fit.grid.attach(fitc);
  fitc->add_option("--dump-dim-diagnostics", fit.dim_diagnostics, "write the dimension estimate and mu ratios here");
  fitc->add_option("--geodesics-out", fit.geodesics_out, "export the unfolded geodesic matrix as CSV");
  fitc->add_option("--geodesics-in", fit.geodesics_in, "resume from an exported geodesic matrix")
      ->excludes("--geodesics-out");

  PredictArgs pred;
  auto* predc = app.add_subcommand("predict", "classify curves with a fitted model");
  predc->add_option("--model", pred.model_dir, "bundle directory")->required();
  predc->add_option("--curves", pred.curves, "curves CSV (curve_id,t,value)")->required();
  predc->add_option("--out", pred.out, "predictions CSV")->required();
  predc->add_flag("--scores", pred.scores, "append per-class scores");

  EmbedArgs emb;
  auto* embc = app.add_subcommand("embed", "write the label-aware embedding of a dataset");
  embc->add_option("--curves", emb.curves, "curves CSV (curve_id,t,value)")->required();
  embc->add_option("--labels", emb.labels, "labels CSV (curve_id,label)")->required();
  embc->add_option("--xi", emb.xi, "label penalty")->required();
  embc->add_option("--d", emb.d, "embedding dimension, or auto")->capture_default_str();
  embc->add_option("--kpca", emb.kpca, "local PCA neighbourhood size")->capture_default_str();
  embc->add_option("--kgraph", emb.kgraph, "graph neighbours (auto: kpca)")->capture_default_str();
  embc->add_option("--out", emb.out, "embedding CSV; a .meta.txt sidecar is written next to it")->required();
  emb.grid.attach(embc);

  BenchArgs bench;
  auto* benchc = app.add_subcommand("benchmark", "train/test error of the synthetic protocol over repetitions");
  bench.attach(benchc);
  benchc->add_option("--heads", bench.heads, "comma-separated heads")->capture_default_str();

  SweepArgs sweep;
  auto* sweepc = app.add_subcommand("sweep-xi", "error against sqrt(xi) on a synthetic model or a dataset");
  sweep.bench.attach(sweepc);
  sweepc->add_option("--sqrt-xi", sweep.sqrt_xi, "comma-separated sqrt(xi) values")->capture_default_str();
  sweepc->add_option("--head", sweep.head, "classifier head")->capture_default_str();
  sweepc->add_option("--curves", sweep.curves, "dataset curves CSV (instead of a synthetic model)");
  sweepc->add_option("--labels", sweep.labels, "dataset labels CSV");
  sweep.grid.attach(sweepc, false);

  ReportArgs rep;
  auto* repc = app.add_subcommand("report", "print the run report of a fitted model");
  repc->add_option("--model", rep.model_dir, "bundle directory")->required();
  repc->add_option("--cv-out", rep.cv_out, "per-fold CV losses CSV");
  repc->add_option("--embedding-out", rep.embedding_out, "training embedding CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    set_thread_count(threads);
    if (*simulate) return run_simulate(sim);
    if (*fitc) return run_fit(fit);
    if (*predc) return run_predict(pred);
    if (*embc) return run_embed(emb);
    if (*benchc) return run_benchmark(bench);
    if (*sweepc) {
      sweep.grid.points = sweep.bench.grid_points;
      return run_sweep(sweep);
    }
    if (*repc) return run_report(rep);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
