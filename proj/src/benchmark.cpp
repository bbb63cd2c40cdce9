#include "fsml/benchmark.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "fsml/coordinate_map.hpp"
#include "fsml/cv.hpp"
#include "fsml/embedding.hpp"
#include "fsml/error.hpp"
#include "fsml/parallel.hpp"
#include "fsml/pipeline.hpp"
#include "fsml/rng.hpp"

namespace fsml::synth {
namespace {

/// Everything of one replicate that does not depend on xi, h or the head.
struct RepContext {
  fda::LabeledDataset train;
  std::vector<int> test_labels;
  pipeline::Geometry geometry;
  std::size_t d = 0;
  std::vector<interp::QueryDesign> test_designs;
  tuning::RegressionSettings settings;
  tuning::CvPlan plan;
};

RepContext prepare_rep(const BenchmarkConfig& config, std::size_t rep) {
  const std::uint64_t rep_seed = derive_seed(config.seed, {rep});
  SynthSpec spec{config.model, config.n, config.J, true, derive_seed(rep_seed, {0})};
  const SynthData train = generate(spec);
  spec.n = config.test_n;
  spec.seed = derive_seed(rep_seed, {1});
  const SynthData test = generate(spec);

  const auto grid = fda::Grid::uniform(0.0, 1.0, config.grid_points);
  RepContext ctx;
  std::vector<std::string> ids;
  for (const auto& c : train.curves) ids.push_back(c.id);
  ctx.train = fda::make_dataset(
      std::move(ids), pipeline::smooth_all(train.curves, grid, config.kernel, fda::BandwidthRule::plugin), train.labels);
  const fda::CurveSet test_curves = pipeline::smooth_all(test.curves, grid, config.kernel, fda::BandwidthRule::plugin);
  ctx.test_labels = test.labels;

  Eigen::MatrixXd l2 = fda::pairwise_l2_distances(ctx.train.curves);
  if (config.d) {
    ctx.d = *config.d;
  } else if (const auto truth = true_dimension(config.model)) {
    ctx.d = *truth;
  } else {
    ctx.d = static_cast<std::size_t>(geometry::estimate_intrinsic_dim(l2).dimension);
  }
  ctx.geometry = pipeline::compute_geometry(ctx.train.curves, config.k_pca, config.k_graph.value_or(config.k_pca), ctx.d, std::move(l2));
  ctx.settings = tuning::RegressionSettings{config.kernel, config.k_pca, ctx.d, std::nullopt};

  ctx.plan.folds = config.folds;
  ctx.plan.seed = derive_seed(rep_seed, {2});
  ctx.plan.stratify = config.stratify;
  ctx.plan.xi_grid = config.xi_grid.empty() ? tuning::default_xi_grid(ctx.geometry.geodesics.unfolded) : config.xi_grid;
  ctx.plan.h_grid = config.h_grid.empty() ? tuning::default_h_grid(ctx.geometry.l2) : config.h_grid;

  ctx.test_designs.resize(test_curves.size());
  parallel_for(test_curves.size(), [&](std::size_t q) {
    ctx.test_designs[q] = interp::prepare_query(
        ctx.train.curves, test_curves.values.row(static_cast<Eigen::Index>(q)).transpose(), config.k_pca, ctx.d);
  });
  return ctx;
}

/// Percentage of test curves misclassified; failed interpolations count as
/// errors.
double test_error(const RepContext& ctx, const Eigen::MatrixXd& z, double h, const classify::HeadSpec& spec) {
  const auto head = classify::ClassifierHead::fit(spec, z, ctx.train.labels, ctx.train.class_count);
  const double ridge = interp::default_regression_ridge(ctx.train.size());
  std::size_t errors = 0;
  for (std::size_t q = 0; q < ctx.test_designs.size(); ++q) {
    try {
      const Eigen::VectorXd mu = interp::evaluate_local_linear(ctx.test_designs[q], z, ctx.settings.kernel, h, ridge);
      if (head.predict(mu) != ctx.test_labels[q]) ++errors;
    } catch (const ExtrapolationError&) {
      ++errors;
    }
  }
  return 100.0 * static_cast<double>(errors) / static_cast<double>(ctx.test_designs.size());
}

Eigen::MatrixXd embed(const RepContext& ctx, double xi) {
  return embedding::classical_mds(
             embedding::penalized_proximity(ctx.geometry.geodesics.unfolded, ctx.train.labels, xi), ctx.d)
      .coords;
}

}  // namespace

void BenchmarkConfig::validate() const {
  if (reps < 1) throw ParameterError("benchmark needs at least one replicate");
  if (heads.empty()) throw ParameterError("benchmark needs at least one head");
  if (test_n < 1) throw ParameterError("test sample must be nonempty");
  SynthSpec{model, n, J, true, seed}.validate();
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

BenchmarkTable benchmark_run(const BenchmarkConfig& config) {
  config.validate();
  std::vector<RepResult> reps(config.reps);
  parallel_for(config.reps, [&](std::size_t rep) {
    const RepContext ctx = prepare_rep(config, rep);
    const auto cv = tuning::nested_cv_select(ctx.train, ctx.geometry.geodesics, ctx.plan, config.heads, ctx.settings);
    RepResult r;
    r.rep = rep;
    r.d = ctx.d;
    std::map<double, Eigen::MatrixXd> embeddings;
    for (std::size_t h = 0; h < config.heads.size(); ++h) {
      auto it = embeddings.find(cv[h].xi);
      if (it == embeddings.end()) it = embeddings.emplace(cv[h].xi, embed(ctx, cv[h].xi)).first;
      r.error_pct.push_back(test_error(ctx, it->second, cv[h].h_reg, config.heads[h]));
      r.xi.push_back(cv[h].xi);
      r.h_reg.push_back(cv[h].h_reg);
    }
    reps[rep] = std::move(r);
  });

  BenchmarkTable table;
  table.model = model_name(config.model);
  table.n = config.n;
  table.J = config.J;
  table.test_n = config.test_n;
  for (std::size_t h = 0; h < config.heads.size(); ++h) {
    table.heads.push_back(config.heads[h].name());
    std::vector<double> errs;
    for (const auto& r : reps) errs.push_back(r.error_pct[h]);
    table.mean.push_back(mean_of(errs));
    table.sd.push_back(sd_of(errs));
  }
  table.reps = std::move(reps);
  return table;
}

std::string BenchmarkTable::format() const {
  std::ostringstream os;
  os << "model " << model << ", n=" << n << ", J=" << J << ", test n=" << test_n << ", reps=" << reps.size() << '\n';
  os << std::left << std::setw(12) << "head" << "error % mean (sd)\n";
  os << std::fixed << std::setprecision(1);
  for (std::size_t h = 0; h < heads.size(); ++h)
    os << std::left << std::setw(12) << heads[h] << mean[h] << " (" << sd[h] << ")\n";
  os << "\nrep,d";
  for (const auto& h : heads) os << ',' << h << "_error," << h << "_xi," << h << "_hreg";
  os << '\n' << std::setprecision(6) << std::defaultfloat;
  for (const auto& r : reps) {
    os << r.rep << ',' << r.d;
    for (std::size_t h = 0; h < heads.size(); ++h) os << ',' << r.error_pct[h] << ',' << r.xi[h] << ',' << r.h_reg[h];
    os << '\n';
  }
  return os.str();
}

std::vector<std::vector<double>> xi_sweep_errors(const BenchmarkConfig& config, const std::vector<double>& sqrt_xi) {
  config.validate();
  if (sqrt_xi.empty()) throw ParameterError("sweep grid must be nonempty");
  for (double s : sqrt_xi)
    if (!(s >= 0.0)) throw ParameterError("sqrt(xi) values must be nonnegative");
  std::vector<std::vector<double>> errors(config.reps, std::vector<double>(sqrt_xi.size()));
  parallel_for(config.reps, [&](std::size_t rep) {
    const RepContext ctx = prepare_rep(config, rep);
    for (std::size_t x = 0; x < sqrt_xi.size(); ++x) {
      const double xi = sqrt_xi[x] * sqrt_xi[x];
      tuning::CvPlan plan = ctx.plan;
      plan.xi_grid = {xi};
      const auto h = tuning::select_bandwidth(ctx.train, ctx.geometry.geodesics, xi, plan, ctx.settings).h;
      errors[rep][x] = test_error(ctx, embed(ctx, xi), h, config.heads.front());
    }
  });
  return errors;
}

}  // namespace fsml::synth
