#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fsml/benchmark.hpp"
#include "fsml/cv.hpp"
#include "fsml/embedding.hpp"
#include "fsml/pipeline.hpp"

namespace fsml::report {

struct RunReport {
  std::vector<pipeline::StageTiming> timings;
  double epsilon_mds = 0.0;
  double clipped_mass = 0.0;
  double xi = 0.0;
  double h_reg = 0.0;
  std::size_t d = 0;
  bool d_estimated = false;
  std::size_t k_pca = 0;
  std::size_t k_graph = 0;
  std::size_t graph_edges = 0;
  std::size_t n = 0;
  std::string head;
  std::vector<double> eigenvalues;
  std::optional<tuning::CvResult> cv;
  std::optional<synth::BenchmarkTable> errors;
};

RunReport make_run_report(const pipeline::FsmlModel& model);
std::string format_run_report(const RunReport& report);

/// Text table of CV misclassifications per xi grid value and the chosen pair.
std::string format_cv_table(const tuning::CvResult& cv);
/// `xi,fold,misclassifications,h_inner`.
void write_cv_csv(std::ostream& out, const tuning::CvResult& cv);

/// `curve_id,z1,...,zd,label`.
void write_embedding_csv(std::ostream& out, const std::vector<std::string>& ids, const Eigen::MatrixXd& coords,
                         const std::vector<int>& labels);
/// Eigenvalue spectrum, epsilon_mds and clipped mass as plain text.
void write_embedding_sidecar(std::ostream& out, const embedding::Embedding& emb, double xi);

struct SweepRow {
  double sqrt_xi = 0.0;
  double mean_error = 0.0;  // percent
  double sd = 0.0;
  std::size_t count = 0;    // reps (synthetic) or folds (dataset)
};

/// Synthetic sweep: mean and sd over reps of the test error at each sqrt(xi).
std::vector<SweepRow> xi_sweep(const synth::BenchmarkConfig& config, const std::vector<double>& sqrt_xi);

/// Dataset sweep: outer-fold CV error of each xi (nested CV, h chosen in the
/// inner loop); sd is over folds.
std::vector<SweepRow> xi_sweep(const fda::LabeledDataset& data, const geometry::GeodesicDistances& geodesics,
                               const std::vector<double>& sqrt_xi, const classify::HeadSpec& head,
                               tuning::CvPlan plan, const tuning::RegressionSettings& settings);

/// `sqrt_xi,mean_error,sd,count`.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace fsml::report
