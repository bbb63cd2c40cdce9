#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsml/heads.hpp"
#include "fsml/kernel.hpp"
#include "fsml/synth.hpp"

namespace fsml::synth {

/// Simulation protocol: train on (n, J), test on an independent sample of
/// test_n curves, both smoothed with per-curve plug-in bandwidths.
struct BenchmarkConfig {
  Model model = Model::swiss_rolls;
  std::size_t n = 200;
  std::size_t J = 50;
  std::size_t test_n = 500;
  std::size_t reps = 20;
  std::uint64_t seed = 0;
  std::vector<classify::HeadSpec> heads{classify::HeadSpec::knn_head(20), classify::HeadSpec::lda_head(),
                                        classify::HeadSpec::svm_head()};
  std::size_t k_pca = 15;
  std::optional<std::size_t> k_graph;  // defaults to k_pca
  std::size_t folds = 10;
  std::size_t grid_points = 101;
  bool stratify = true;
  fda::Kernel kernel;
  std::optional<std::size_t> d;  // true dimension, or estimated for model v
  std::vector<double> xi_grid;   // default grid when empty
  std::vector<double> h_grid;    // default grid when empty

  void validate() const;
};

struct RepResult {
  std::size_t rep = 0;
  std::size_t d = 0;
  std::vector<double> error_pct;  // per head
  std::vector<double> xi;         // per head
  std::vector<double> h_reg;      // per head
};

struct BenchmarkTable {
  std::string model;
  std::size_t n = 0, J = 0, test_n = 0;
  std::vector<std::string> heads;
  std::vector<double> mean;  // percent
  std::vector<double> sd;    // sample sd over reps (0 for one rep)
  std::vector<RepResult> reps;

  /// Plain text table in "mean (sd)" form, one row per head.
  std::string format() const;
};

BenchmarkTable benchmark_run(const BenchmarkConfig& config);

/// Test error of one head at each fixed xi, h_reg chosen per rep by
/// single-level CV of the regression loss. Row r, column x holds the error
/// of rep r at sqrt_xi[x].
std::vector<std::vector<double>> xi_sweep_errors(const BenchmarkConfig& config, const std::vector<double>& sqrt_xi);

double mean_of(const std::vector<double>& v);
/// Sample standard deviation; 0 for fewer than two values.
double sd_of(const std::vector<double>& v);

}  // namespace fsml::synth
