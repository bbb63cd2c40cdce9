#include "fsml/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "fsml/error.hpp"
#include "fsml/io.hpp"
#include "fsml/rng.hpp"

namespace fsml::report {

using io::format_double;

RunReport make_run_report(const pipeline::FsmlModel& model) {
  RunReport r;
  r.timings = model.timings;
  r.epsilon_mds = model.embedding.epsilon_mds;
  r.clipped_mass = model.embedding.clipped_mass;
  r.xi = model.xi;
  r.h_reg = model.h_reg();
  r.d = model.d;
  r.d_estimated = model.d_estimated;
  r.k_pca = model.k_pca;
  r.k_graph = model.k_graph;
  r.graph_edges = model.graph_edges;
  r.n = model.size();
  r.head = model.head.spec().name();
  const auto& ev = model.embedding.eigenvalues;
  r.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  r.cv = model.cv;
  return r;
}

std::string format_cv_table(const tuning::CvResult& cv) {
  std::ostringstream os;
  const std::size_t folds = cv.xi_grid.empty() ? 0 : cv.cells.size() / cv.xi_grid.size();
  os << "cross-validation (" << folds << " outer folds, " << cv.evaluated << " held-out curves per xi)\n";
  os << std::left << std::setw(12) << "sqrt(xi)" << std::setw(12) << "xi" << std::setw(15) << "misclassified"
     << "error %\n";
  os << std::setprecision(6);
  for (std::size_t x = 0; x < cv.xi_grid.size(); ++x) {
    const double pct = cv.evaluated ? 100.0 * static_cast<double>(cv.xi_losses[x]) / static_cast<double>(cv.evaluated) : 0.0;
    os << std::left << std::setw(12) << std::sqrt(cv.xi_grid[x]) << std::setw(12) << cv.xi_grid[x] << std::setw(15)
       << cv.xi_losses[x] << std::fixed << std::setprecision(2) << pct << std::defaultfloat
       << std::setprecision(6) << (cv.xi_grid[x] == cv.xi ? "  <- chosen" : "") << '\n';
  }
  os << "h grid:";
  for (double h : cv.h_grid) os << ' ' << format_double(h);
  os << "\nchosen xi = " << format_double(cv.xi) << ", mean inner h_reg = " << format_double(cv.h_reg) << '\n';
  return os.str();
}

std::string format_run_report(const RunReport& r) {
  std::ostringstream os;
  os << "FSML run report\n";
  os << "curves: " << r.n << "\n";
  os << "head: " << r.head << "\n";
  os << "d: " << r.d << (r.d_estimated ? " (estimated)" : " (given)") << "\n";
  os << "k_pca: " << r.k_pca << ", k_graph: " << r.k_graph << ", graph edges: " << r.graph_edges << "\n";
  os << "xi: " << format_double(r.xi) << " (sqrt " << format_double(std::sqrt(r.xi)) << ")\n";
  os << "h_reg: " << format_double(r.h_reg) << "\n";
  os << "epsilon_mds: " << format_double(r.epsilon_mds) << "\n";
  os << "clipped eigenvalue mass: " << format_double(r.clipped_mass) << "\n";
  os << "leading eigenvalues:";
  for (std::size_t k = 0; k < std::min<std::size_t>(r.eigenvalues.size(), std::max<std::size_t>(r.d + 2, 5)); ++k)
    os << ' ' << format_double(r.eigenvalues[k]);
  os << "\n\nstage timings (s)\n";
  for (const auto& t : r.timings) os << "  " << std::left << std::setw(16) << t.stage << format_double(t.seconds) << '\n';
  if (r.cv) os << '\n' << format_cv_table(*r.cv);
  if (r.errors) os << '\n' << r.errors->format();
  return os.str();
}

void write_cv_csv(std::ostream& out, const tuning::CvResult& cv) {
  out << "xi,fold,misclassifications,h_inner\n";
  for (const auto& c : cv.cells)
    out << format_double(c.xi) << ',' << c.fold << ',' << c.misclassifications << ',' << format_double(c.h_inner)
        << '\n';
}

void write_embedding_csv(std::ostream& out, const std::vector<std::string>& ids, const Eigen::MatrixXd& coords,
                         const std::vector<int>& labels) {
  out << "curve_id";
  for (Eigen::Index k = 1; k <= coords.cols(); ++k) out << ",z" << k;
  out << ",label\n";
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < coords.cols(); ++k) out << ',' << format_double(coords(i, k));
    out << ',' << labels[static_cast<std::size_t>(i)] << '\n';
  }
}

void write_embedding_sidecar(std::ostream& out, const embedding::Embedding& emb, double xi) {
  out << "xi: " << format_double(xi) << '\n';
  out << "d: " << emb.dim() << '\n';
  out << "epsilon_mds: " << format_double(emb.epsilon_mds) << '\n';
  out << "clipped_mass: " << format_double(emb.clipped_mass) << '\n';
  out << "eigenvalues:\n";
  for (Eigen::Index k = 0; k < emb.eigenvalues.size(); ++k) out << format_double(emb.eigenvalues[k]) << '\n';
}

std::vector<SweepRow> xi_sweep(const synth::BenchmarkConfig& config, const std::vector<double>& sqrt_xi) {
  const auto errors = synth::xi_sweep_errors(config, sqrt_xi);
  std::vector<SweepRow> rows;
  for (std::size_t x = 0; x < sqrt_xi.size(); ++x) {
    std::vector<double> col;
    for (const auto& rep : errors) col.push_back(rep[x]);
    rows.push_back({sqrt_xi[x], synth::mean_of(col), synth::sd_of(col), col.size()});
  }
  return rows;
}

std::vector<SweepRow> xi_sweep(const fda::LabeledDataset& data, const geometry::GeodesicDistances& geodesics,
                               const std::vector<double>& sqrt_xi, const classify::HeadSpec& head,
                               tuning::CvPlan plan, const tuning::RegressionSettings& settings) {
  if (sqrt_xi.empty()) throw ParameterError("sweep grid must be nonempty");
  plan.xi_grid.clear();
  for (double s : sqrt_xi) {
    if (!(s >= 0.0)) throw ParameterError("sqrt(xi) values must be nonnegative");
    plan.xi_grid.push_back(s * s);
  }
  const auto cv = tuning::nested_cv_select(data, geodesics, plan, head, settings);
  const std::size_t folds = cv.cells.size() / sqrt_xi.size();
  std::vector<std::size_t> fold_size(folds, 0);
  const auto fold_lists = tuning::make_folds(data.labels, plan.folds, derive_seed(plan.seed, {0}), plan.stratify);
  for (std::size_t l = 0; l < folds; ++l) fold_size[l] = fold_lists[l].size();
  std::vector<SweepRow> rows;
  for (std::size_t x = 0; x < sqrt_xi.size(); ++x) {
    std::vector<double> per_fold;
    for (std::size_t l = 0; l < folds; ++l)
      per_fold.push_back(100.0 * static_cast<double>(cv.cells[x * folds + l].misclassifications) /
                         static_cast<double>(fold_size[l]));
    const double total = 100.0 * static_cast<double>(cv.xi_losses[x]) / static_cast<double>(data.size());
    rows.push_back({sqrt_xi[x], total, synth::sd_of(per_fold), folds});
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "sqrt_xi,mean_error,sd,count\n";
  for (const auto& r : rows)
    out << format_double(r.sqrt_xi) << ',' << format_double(r.mean_error) << ',' << format_double(r.sd) << ','
        << r.count << '\n';
}

}  // namespace fsml::report
