#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsml/coordinate_map.hpp"
#include "fsml/curve.hpp"
#include "fsml/cv.hpp"
#include "fsml/embedding.hpp"
#include "fsml/geodesic.hpp"
#include "fsml/graph.hpp"
#include "fsml/heads.hpp"
#include "fsml/intrinsic_dim.hpp"
#include "fsml/kernel.hpp"
#include "fsml/smoothing.hpp"

namespace fsml::pipeline {

struct FitConfig {
  double grid_min = 0.0;
  double grid_max = 1.0;
  std::size_t grid_points = 101;
  fda::Kernel kernel;
  fda::BandwidthRule bandwidth_rule = fda::BandwidthRule::plugin;

  std::optional<std::size_t> d;        // estimated when unset
  std::size_t k_pca = 15;
  std::optional<std::size_t> k_graph;  // defaults to k_pca
  std::optional<double> xi;            // tuned when unset
  std::optional<double> h_reg;         // tuned when unset
  std::optional<double> ridge;         // n^-3 when unset
  classify::HeadSpec head;

  std::size_t folds = 10;
  std::vector<double> xi_grid;  // default grid when empty
  std::vector<double> h_grid;   // default grid when empty
  bool stratify = true;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t graph_k() const { return k_graph.value_or(k_pca); }
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

/// Graph, frames and unfolded geodesic distances of one sample.
struct Geometry {
  Eigen::MatrixXd l2;
  geometry::NeighborGraph graph{0};
  std::vector<geometry::TangentFrame> frames;
  geometry::GeodesicDistances geodesics;
};

Geometry compute_geometry(const fda::CurveSet& curves, std::size_t k_pca, std::size_t k_graph, std::size_t d,
                          std::optional<Eigen::MatrixXd> l2 = std::nullopt);

/// Smooths every raw curve onto `grid` with its own bandwidth (parallel).
fda::CurveSet smooth_all(const std::vector<fda::SampledCurve>& raw, const fda::GridPtr& grid, const fda::Kernel& kernel,
                         fda::BandwidthRule rule);

struct FsmlModel {
  static constexpr int kFormatVersion = 1;

  fda::Kernel kernel;
  fda::BandwidthRule bandwidth_rule = fda::BandwidthRule::plugin;
  std::vector<std::string> ids;
  std::vector<int> labels;
  int class_count = 0;
  std::vector<int> label_values;  // external label for each class index

  std::size_t d = 0;
  bool d_estimated = false;
  double d_raw = 0.0;  // unrounded estimate when d_estimated
  std::size_t k_pca = 0;
  std::size_t k_graph = 0;
  std::size_t graph_edges = 0;
  double xi = 0.0;
  bool xi_tuned = false;
  bool h_tuned = false;

  embedding::Embedding embedding;
  interp::CoordinateMapModel map;  // holds the training curves, h_reg and ridge
  classify::ClassifierHead head;
  std::optional<tuning::CvResult> cv;

  std::uint64_t seed = 0;
  std::size_t folds = 0;
  bool stratify = true;
  std::vector<StageTiming> timings;

  const fda::GridPtr& grid() const { return map.curves.grid; }
  const fda::CurveSet& curves() const { return map.curves; }
  double h_reg() const { return map.bandwidth; }
  double ridge() const { return map.ridge; }
  std::size_t size() const { return labels.size(); }
};

/// Raw observations are smoothed onto the configured grid first.
FsmlModel fit(const std::vector<fda::SampledCurve>& raw, const std::vector<int>& labels, const FitConfig& config);

/// Fit from curves already on a shared grid. `geodesics` resumes from a
/// previously computed distance matrix (it must match config's d, k_pca and
/// k_graph; this is not checked).
FsmlModel fit(const fda::LabeledDataset& data, const FitConfig& config,
              const std::optional<geometry::GeodesicDistances>& geodesics = std::nullopt);

struct Prediction {
  std::vector<int> labels;      // class indices; -1 where interpolation failed
  Eigen::MatrixXd coords;       // m x d, NaN rows where interpolation failed
  Eigen::MatrixXd scores;       // m x class_count
  std::vector<std::string> errors;  // empty string on success
};

int predict(const FsmlModel& model, const fda::Curve& curve);
/// Smooths with the training kernel and rule and the query's own bandwidth.
int predict(const FsmlModel& model, const fda::SampledCurve& raw);
fda::Curve smooth_query(const FsmlModel& model, const fda::SampledCurve& raw);
/// Batch prediction; extrapolation failures are recorded per row.
Prediction predict_batch(const FsmlModel& model, const fda::CurveSet& curves);

/// Writes the model as a directory bundle: manifest.txt plus CSV sections.
void save(const FsmlModel& model, const std::string& directory);
FsmlModel load(const std::string& directory);

}  // namespace fsml::pipeline
