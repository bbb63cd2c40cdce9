#include "fsml/heads.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "fsml/diagnostics.hpp"
#include "fsml/error.hpp"
#include "fsml/io.hpp"

namespace fsml::classify {
namespace {

std::string format_number(double v) { return io::format_double(v); }

void check_training(const Eigen::MatrixXd& z, std::span<const int> labels, int class_count) {
  if (z.rows() == 0) throw StateError("empty training set");
  if (static_cast<std::size_t>(z.rows()) != labels.size()) throw ParameterError("one label per training row required");
  for (int y : labels)
    if (y < 0 || y >= class_count) throw ParameterError("training label outside [0, class_count)");
}

std::vector<std::size_t> knn_order(const KnnState& s, const Eigen::Ref<const Eigen::VectorXd>& z0) {
  const Eigen::VectorXd dist = (s.points.rowwise() - z0.transpose()).rowwise().squaredNorm();
  std::vector<std::size_t> idx(static_cast<std::size_t>(dist.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(s.k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double da = dist[static_cast<Eigen::Index>(a)], db = dist[static_cast<Eigen::Index>(b)];
                      return da < db || (da == db && a < b);
                    });
  idx.resize(s.k);
  return idx;
}

}  // namespace

std::string HeadSpec::name() const {
  switch (kind) {
    case HeadKind::knn:
      return "knn:" + std::to_string(k);
    case HeadKind::lda:
      return "lda";
    case HeadKind::svm:
      return "svm:" + format_number(cost);
  }
  return "?";
}

HeadSpec HeadSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (kind == "knn") return knn_head(arg.empty() ? 20 : static_cast<std::size_t>(std::stoul(arg)));
    if (kind == "lda") return lda_head();
    if (kind == "svm") return svm_head(arg.empty() ? 0.01 : std::stod(arg));
  } catch (const std::logic_error&) {
    throw ParameterError("malformed head specification '" + text + "'");
  }
  throw ParameterError("unknown head '" + text + "' (expected knn[:k], lda or svm[:cost])");
}

int argmax_label(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  int best = 0;
  for (Eigen::Index c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = static_cast<int>(c);
  return best;
}

KnnState knn_fit(std::size_t k, const Eigen::MatrixXd& z, std::span<const int> labels) {
  if (z.rows() == 0) throw StateError("k-NN head has an empty training set");
  if (k < 1 || k > static_cast<std::size_t>(z.rows()))
    throw ParameterError("k-NN requires 1 <= k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(z.rows()) + ")");
  return KnnState{k, z, std::vector<int>(labels.begin(), labels.end())};
}

int knn_predict(const KnnState& state, const Eigen::Ref<const Eigen::VectorXd>& z0, int class_count) {
  if (state.points.rows() == 0) throw StateError("k-NN head has an empty training set");
  const auto order = knn_order(state, z0);
  if (class_count <= 2) {
    double mean = 0.0;
    for (std::size_t i : order) mean += state.labels[i];
    mean /= static_cast<double>(state.k);
    return mean <= 0.5 ? 0 : 1;
  }
  std::vector<std::size_t> votes(static_cast<std::size_t>(class_count), 0);
  for (std::size_t i : order) ++votes[static_cast<std::size_t>(state.labels[i])];
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

LdaState lda_fit(const Eigen::MatrixXd& z, std::span<const int> labels, int class_count) {
  check_training(z, labels, class_count);
  const Eigen::Index n = z.rows(), d = z.cols();
  std::vector<std::size_t> counts(static_cast<std::size_t>(class_count), 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  const auto present = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
  if (present < 2) throw StateError("LDA needs at least two classes in the training set");

  LdaState s;
  s.means = Eigen::MatrixXd::Zero(class_count, d);
  s.priors = Eigen::VectorXd::Zero(class_count);
  for (Eigen::Index i = 0; i < n; ++i) s.means.row(labels[static_cast<std::size_t>(i)]) += z.row(i);
  for (int c = 0; c < class_count; ++c)
    if (counts[static_cast<std::size_t>(c)] > 0) {
      s.means.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
      s.priors[c] = static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(n);
    }
  s.pooled_covariance = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVectorXd r = z.row(i) - s.means.row(labels[static_cast<std::size_t>(i)]);
    s.pooled_covariance.noalias() += r.transpose() * r;
  }
  s.pooled_covariance /= static_cast<double>(std::max<Eigen::Index>(n - present, 1));
  s.pooled_covariance = 0.5 * (s.pooled_covariance + s.pooled_covariance.transpose()).eval();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(s.pooled_covariance);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.pooled_covariance, Eigen::EigenvaluesOnly);
  const double trace = s.pooled_covariance.trace();
  if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(trace, 0.0) || ldlt.info() != Eigen::Success) {
    const double ridge = trace > 0.0 ? 1e-8 * trace / static_cast<double>(d) : 1e-8;
    warn("LDA pooled covariance is singular; adding ridge " + format_number(ridge));
    s.pooled_covariance.diagonal().array() += ridge;
    ldlt.compute(s.pooled_covariance);
  }

  s.weights = Eigen::MatrixXd::Zero(class_count, d);
  s.offsets = Eigen::VectorXd::Constant(class_count, -std::numeric_limits<double>::infinity());
  for (int c = 0; c < class_count; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) continue;
    const Eigen::VectorXd m = s.means.row(c).transpose();
    const Eigen::VectorXd w = ldlt.solve(m);
    s.weights.row(c) = w.transpose();
    s.offsets[c] = -0.5 * m.dot(w) + std::log(s.priors[c]);
  }
  return s;
}

Eigen::VectorXd lda_scores(const LdaState& s, const Eigen::Ref<const Eigen::VectorXd>& z0) {
  return s.weights * z0 + s.offsets;
}

namespace {

/// Full-batch projected subgradient on
///   cost/2 * ||(w, b)||^2 + mean_i max(0, 1 - y_i (w.x_i + b))
/// over standardized features, step 1/(cost * t), projection onto the ball of
/// radius 1/sqrt(cost). Returns the average of the second half of the iterates.
std::pair<Eigen::VectorXd, double> train_binary_svm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double cost) {
  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);  // (w, b)
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd grad(d + 1);
  Eigen::VectorXd margins(n), active(n);
  const double radius = 1.0 / std::sqrt(cost);
  const int burn_in = kSvmIterations / 2;
  for (int t = 1; t <= kSvmIterations; ++t) {
    margins.noalias() = x * theta.head(d);
    for (Eigen::Index i = 0; i < n; ++i)
      active[i] = y[i] * (margins[i] + theta[d]) < 1.0 ? y[i] / static_cast<double>(n) : 0.0;
    grad = cost * theta;
    grad.head(d).noalias() -= x.transpose() * active;
    grad[d] -= active.sum();
    theta -= grad / (cost * static_cast<double>(t));
    const double norm = theta.norm();
    if (norm > radius) theta *= radius / norm;
    if (t > burn_in) avg += theta;
  }
  avg /= static_cast<double>(kSvmIterations - burn_in);
  return {avg.head(d), avg[d]};
}

}  // namespace

SvmState svm_fit(const Eigen::MatrixXd& z, std::span<const int> labels, int class_count, double cost) {
  check_training(z, labels, class_count);
  if (!(cost > 0.0) || !std::isfinite(cost)) throw ParameterError("SVM cost must be positive");
  std::set<int> present(labels.begin(), labels.end());
  if (present.size() < 2) throw StateError("SVM needs both classes in the training set; only one label present");

  const Eigen::Index d = z.cols();
  const Eigen::RowVectorXd mean = z.colwise().mean();
  Eigen::RowVectorXd sd = ((z.rowwise() - mean).array().square().colwise().mean()).sqrt();
  for (Eigen::Index c = 0; c < d; ++c)
    if (!(sd[c] > 0.0)) sd[c] = 1.0;
  const Eigen::MatrixXd x = (z.rowwise() - mean).array().rowwise() / sd.array();

  const int rows = class_count <= 2 ? 1 : class_count;
  SvmState s{Eigen::MatrixXd::Zero(rows, d), Eigen::VectorXd::Zero(rows)};
  for (int r = 0; r < rows; ++r) {
    const int positive = class_count <= 2 ? 1 : r;
    Eigen::VectorXd y(z.rows());
    for (Eigen::Index i = 0; i < z.rows(); ++i) y[i] = labels[static_cast<std::size_t>(i)] == positive ? 1.0 : -1.0;
    if (class_count > 2 && !present.count(r)) {
      s.biases[r] = -std::numeric_limits<double>::infinity();
      continue;
    }
    auto [w, b] = train_binary_svm(x, y, cost);
    // Undo standardization: w.(z - m)/sd + b.
    const Eigen::VectorXd w_raw = w.array() / sd.transpose().array();
    s.weights.row(r) = w_raw.transpose();
    s.biases[r] = b - mean.dot(w_raw);
  }
  return s;
}

Eigen::VectorXd svm_scores(const SvmState& s, const Eigen::Ref<const Eigen::VectorXd>& z0) {
  return s.weights * z0 + s.biases;
}

ClassifierHead ClassifierHead::fit(const HeadSpec& spec, const Eigen::MatrixXd& z, std::span<const int> labels,
                                   int class_count) {
  check_training(z, labels, class_count);
  ClassifierHead h;
  h.spec_ = spec;
  h.class_count_ = class_count;
  h.dim_ = static_cast<std::size_t>(z.cols());
  switch (spec.kind) {
    case HeadKind::knn:
      h.state_ = knn_fit(spec.k, z, labels);
      break;
    case HeadKind::lda:
      h.state_ = lda_fit(z, labels, class_count);
      break;
    case HeadKind::svm:
      h.state_ = svm_fit(z, labels, class_count, spec.cost);
      break;
  }
  return h;
}

ClassifierHead ClassifierHead::from_state(HeadSpec spec, int class_count, std::size_t dim, State state) {
  ClassifierHead h;
  h.spec_ = spec;
  h.class_count_ = class_count;
  h.dim_ = dim;
  h.state_ = std::move(state);
  return h;
}

int ClassifierHead::predict(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  if (static_cast<std::size_t>(z.size()) != dim_) throw ParameterError("query dimension does not match the head");
  return std::visit(
      [&](const auto& s) -> int {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, std::monostate>) {
          throw StateError("classifier head is not fitted");
        } else if constexpr (std::is_same_v<S, KnnState>) {
          return knn_predict(s, z, class_count_);
        } else if constexpr (std::is_same_v<S, LdaState>) {
          return argmax_label(lda_scores(s, z));
        } else {
          const Eigen::VectorXd sc = svm_scores(s, z);
          if (sc.size() == 1) return sc[0] > 0.0 ? 1 : 0;
          return argmax_label(sc);
        }
      },
      state_);
}

std::vector<int> ClassifierHead::predict_batch(const Eigen::MatrixXd& z) const {
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) out[static_cast<std::size_t>(i)] = predict(z.row(i).transpose());
  return out;
}

Eigen::VectorXd ClassifierHead::scores(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  if (static_cast<std::size_t>(z.size()) != dim_) throw ParameterError("query dimension does not match the head");
  return std::visit(
      [&](const auto& s) -> Eigen::VectorXd {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, std::monostate>) {
          throw StateError("classifier head is not fitted");
        } else if constexpr (std::is_same_v<S, KnnState>) {
          Eigen::VectorXd count = Eigen::VectorXd::Zero(class_count_);
          const auto order = knn_order(s, z);
          for (std::size_t i : order) count[s.labels[i]] += 1.0;
          return count / static_cast<double>(order.size());
        } else if constexpr (std::is_same_v<S, LdaState>) {
          return lda_scores(s, z);
        } else {
          const Eigen::VectorXd sc = svm_scores(s, z);
          if (sc.size() == 1) return Eigen::Vector2d(-sc[0], sc[0]);
          return sc;
        }
      },
      state_);
}

}  // namespace fsml::classify
