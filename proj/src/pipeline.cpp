#include "fsml/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "fsml/error.hpp"
#include "fsml/local_pca.hpp"
#include "fsml/parallel.hpp"

namespace fsml::pipeline {
namespace {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}

  template <typename F>
  decltype(auto) operator()(const std::string& stage, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      std::vector<StageTiming>& sink;
      const std::string& stage;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        sink.push_back({stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()});
      }
    } record{sink_, stage, start};
    return run_stage(stage, std::forward<F>(body));
  }

 private:
  std::vector<StageTiming>& sink_;
};

}  // namespace

void FitConfig::validate() const {
  if (!(grid_max > grid_min)) throw ParameterError("grid maximum must exceed the grid minimum");
  if (grid_points < fda::Grid::kMinPoints)
    throw ParameterError("grid needs at least " + std::to_string(fda::Grid::kMinPoints) + " points");
  if (d && *d < 1) throw ParameterError("d must be at least 1");
  if (k_pca < 2) throw ParameterError("k_pca must be at least 2");
  if (k_graph && *k_graph < 1) throw ParameterError("k_graph must be at least 1");
  if (xi && !(*xi >= 0.0)) throw ParameterError("xi must be nonnegative");
  if (h_reg && !(*h_reg > 0.0)) throw ParameterError("h_reg must be positive");
  if (ridge && !(*ridge >= 0.0)) throw ParameterError("ridge must be nonnegative");
  if (folds < 2) throw ParameterError("at least 2 folds are required");
}

Geometry compute_geometry(const fda::CurveSet& curves, std::size_t k_pca, std::size_t k_graph, std::size_t d,
                          std::optional<Eigen::MatrixXd> l2) {
  Geometry g;
  g.l2 = l2 ? std::move(*l2) : fda::pairwise_l2_distances(curves);
  g.graph = geometry::build_graph(g.l2, k_graph);
  g.frames = geometry::tangent_frames(curves, g.l2, k_pca, d);
  g.geodesics = geometry::geodesic_distance_matrix(curves, g.graph, g.frames);
  return g;
}

fda::CurveSet smooth_all(const std::vector<fda::SampledCurve>& raw, const fda::GridPtr& grid, const fda::Kernel& kernel,
                         fda::BandwidthRule rule) {
  fda::CurveSet out{grid, Eigen::MatrixXd(static_cast<Eigen::Index>(raw.size()), static_cast<Eigen::Index>(grid->size()))};
  parallel_for(raw.size(), [&](std::size_t i) {
    try {
      raw[i].validate(grid->a(), grid->b());
      out.values.row(static_cast<Eigen::Index>(i)) = fda::smooth_curve(raw[i], grid, kernel, rule).values().transpose();
    } catch (const Error& e) {
      throw PreconditionError("curve '" + raw[i].id + "': " + e.what());
    }
  });
  return out;
}

FsmlModel fit(const std::vector<fda::SampledCurve>& raw, const std::vector<int>& labels, const FitConfig& config) {
  config.validate();
  if (raw.size() != labels.size()) throw PreconditionError("one label per curve is required");
  if (raw.size() < 2) throw PreconditionError("at least 2 curves are required, got " + std::to_string(raw.size()));
  std::vector<StageTiming> timings;
  StageClock clock(timings);
  const auto grid = fda::Grid::uniform(config.grid_min, config.grid_max, config.grid_points);
  fda::CurveSet curves =
      clock("smooth", [&] { return smooth_all(raw, grid, config.kernel, config.bandwidth_rule); });
  std::vector<std::string> ids;
  for (const auto& c : raw) ids.push_back(c.id);
  FsmlModel model = fit(fda::make_dataset(std::move(ids), std::move(curves), labels), config);
  model.timings.insert(model.timings.begin(), timings.begin(), timings.end());
  return model;
}

FsmlModel fit(const fda::LabeledDataset& data, const FitConfig& config,
              const std::optional<geometry::GeodesicDistances>& precomputed) {
  config.validate();
  if (data.size() < 2) throw PreconditionError("at least 2 curves are required, got " + std::to_string(data.size()));
  data.validate();
  const std::size_t n = data.size();

  FsmlModel model;
  StageClock clock(model.timings);
  model.kernel = config.kernel;
  model.bandwidth_rule = config.bandwidth_rule;
  model.ids = data.ids;
  model.labels = data.labels;
  model.class_count = data.class_count;
  model.label_values.resize(static_cast<std::size_t>(data.class_count));
  for (int c = 0; c < data.class_count; ++c) model.label_values[static_cast<std::size_t>(c)] = c;
  model.k_pca = config.k_pca;
  model.k_graph = config.graph_k();
  model.seed = config.seed;
  model.folds = config.folds;
  model.stratify = config.stratify;

  Eigen::MatrixXd l2 = clock("distances", [&] { return fda::pairwise_l2_distances(data.curves); });

  if (config.d) {
    model.d = *config.d;
  } else {
    const auto est = clock("dimension", [&] { return geometry::estimate_intrinsic_dim(l2); });
    model.d = static_cast<std::size_t>(est.dimension);
    model.d_raw = est.raw;
    model.d_estimated = true;
  }
  if (model.d > n - 1) throw StageError("dimension", "d=" + std::to_string(model.d) + " exceeds n-1");

  geometry::GeodesicDistances geodesics;
  if (precomputed) {
    if (precomputed->size() != n) throw StageError("geodesics", "precomputed matrix does not match the dataset");
    geodesics = *precomputed;
    const auto graph = clock("graph", [&] { return geometry::build_graph(l2, model.k_graph); });
    model.graph_edges = graph.edge_count();
  } else {
    const auto graph = clock("graph", [&] { return geometry::build_graph(l2, model.k_graph); });
    model.graph_edges = graph.edge_count();
    const auto frames =
        clock("frames", [&] { return geometry::tangent_frames(data.curves, l2, model.k_pca, model.d); });
    geodesics = clock("geodesics", [&] { return geometry::geodesic_distance_matrix(data.curves, graph, frames); });
  }

  const tuning::RegressionSettings settings{config.kernel, model.k_pca, model.d, config.ridge};
  double h_reg = config.h_reg.value_or(0.0);
  model.xi = config.xi.value_or(0.0);
  if (!config.xi || !config.h_reg) {
    clock("tuning", [&] {
      tuning::CvPlan plan;
      plan.folds = config.folds;
      plan.seed = config.seed;
      plan.stratify = config.stratify;
      if (config.h_reg) {
        plan.h_grid = {*config.h_reg};
      } else {
        plan.h_grid = config.h_grid.empty() ? tuning::default_h_grid(l2) : config.h_grid;
      }
      if (config.xi) {
        plan.xi_grid = {*config.xi};
        const auto choice = tuning::select_bandwidth(data, geodesics, *config.xi, plan, settings);
        h_reg = choice.h;
        model.h_tuned = true;
      } else {
        plan.xi_grid = config.xi_grid.empty() ? tuning::default_xi_grid(geodesics.unfolded) : config.xi_grid;
        auto cv = tuning::nested_cv_select(data, geodesics, plan, config.head, settings);
        model.xi = cv.xi;
        model.xi_tuned = true;
        if (!config.h_reg) {
          h_reg = cv.h_reg;
          model.h_tuned = true;
        }
        model.cv = std::move(cv);
      }
    });
  }

  model.embedding = clock("embedding", [&] {
    return embedding::classical_mds(embedding::penalized_proximity(geodesics.unfolded, data.labels, model.xi),
                                    model.d);
  });
  model.map = clock("coordinate-map", [&] {
    return interp::make_coordinate_map(data.curves, model.embedding.coords, config.kernel, h_reg, model.k_pca,
                                       config.ridge);
  });
  model.head = clock("head", [&] {
    return classify::ClassifierHead::fit(config.head, model.embedding.coords, data.labels, data.class_count);
  });
  return model;
}

int predict(const FsmlModel& model, const fda::Curve& curve) {
  return model.head.predict(interp::interpolate_mu(model.map, curve));
}

fda::Curve smooth_query(const FsmlModel& model, const fda::SampledCurve& raw) {
  raw.validate(model.grid()->a(), model.grid()->b());
  return fda::smooth_curve(raw, model.grid(), model.kernel, model.bandwidth_rule);
}

int predict(const FsmlModel& model, const fda::SampledCurve& raw) { return predict(model, smooth_query(model, raw)); }

Prediction predict_batch(const FsmlModel& model, const fda::CurveSet& curves) {
  fda::require_same_grid(curves.grid, model.grid());
  const std::size_t m = curves.size();
  const auto d = static_cast<Eigen::Index>(model.d);
  Prediction out;
  out.labels.assign(m, -1);
  out.errors.assign(m, {});
  out.coords = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(m), d, std::numeric_limits<double>::quiet_NaN());
  out.scores = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(m), model.class_count,
                                         std::numeric_limits<double>::quiet_NaN());
  parallel_for(m, [&](std::size_t q) {
    const auto r = static_cast<Eigen::Index>(q);
    try {
      const Eigen::VectorXd z = interp::interpolate_mu(model.map, curves.curve(q));
      out.coords.row(r) = z.transpose();
      out.labels[q] = model.head.predict(z);
      out.scores.row(r) = model.head.scores(z).transpose();
    } catch (const ExtrapolationError& e) {
      out.errors[q] = e.what();
    }
  });
  return out;
}

}  // namespace fsml::pipeline
