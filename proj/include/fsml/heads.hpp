#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fsml::classify {

enum class HeadKind { knn, lda, svm };

struct HeadSpec {
  HeadKind kind = HeadKind::knn;
  std::size_t k = 20;  // knn
  double cost = 0.01;  // svm: L2 penalty weight, step size 1/(cost * t)

  static HeadSpec knn_head(std::size_t k) { return {HeadKind::knn, k, 0.01}; }
  static HeadSpec lda_head() { return {HeadKind::lda, 20, 0.01}; }
  static HeadSpec svm_head(double cost = 0.01) { return {HeadKind::svm, 20, cost}; }

  /// "knn:20", "lda", "svm:0.01".
  std::string name() const;
  static HeadSpec parse(const std::string& text);
};

/// k-NN on the training embedding. Binary labels follow the mean rule
/// (0 when the mean of the k nearest labels is <= 1/2); more classes use a
/// majority vote with ties to the smallest label.
struct KnnState {
  std::size_t k = 1;
  Eigen::MatrixXd points;
  std::vector<int> labels;
};

/// Gaussian discriminant with pooled covariance: score_c(z) = w_c . z + b_c.
struct LdaState {
  Eigen::MatrixXd means;    // M x d (rows of absent classes unused)
  Eigen::MatrixXd weights;  // M x d
  Eigen::VectorXd offsets;  // M; -inf for classes absent in training
  Eigen::VectorXd priors;   // M
  Eigen::MatrixXd pooled_covariance;
};

/// Linear soft-margin SVM, one-vs-rest for more than two classes.
/// Binary: a single row; score > 0 predicts class 1.
struct SvmState {
  Eigen::MatrixXd weights;  // rows per decision function
  Eigen::VectorXd biases;
};

class ClassifierHead {
 public:
  ClassifierHead() = default;

  static ClassifierHead fit(const HeadSpec& spec, const Eigen::MatrixXd& z, std::span<const int> labels,
                            int class_count);

  const HeadSpec& spec() const { return spec_; }
  int class_count() const { return class_count_; }
  std::size_t dim() const { return dim_; }
  bool fitted() const { return !std::holds_alternative<std::monostate>(state_); }

  int predict(const Eigen::Ref<const Eigen::VectorXd>& z) const;
  std::vector<int> predict_batch(const Eigen::MatrixXd& z) const;
  /// Per-class scores for lda (discriminant values) and svm (decision values);
  /// for knn, the fraction of the k nearest labels per class.
  Eigen::VectorXd scores(const Eigen::Ref<const Eigen::VectorXd>& z) const;

  using State = std::variant<std::monostate, KnnState, LdaState, SvmState>;
  const State& state() const { return state_; }
  static ClassifierHead from_state(HeadSpec spec, int class_count, std::size_t dim, State state);

 private:
  HeadSpec spec_;
  int class_count_ = 0;
  std::size_t dim_ = 0;
  State state_;
};

KnnState knn_fit(std::size_t k, const Eigen::MatrixXd& z, std::span<const int> labels);
int knn_predict(const KnnState& state, const Eigen::Ref<const Eigen::VectorXd>& z0, int class_count);

LdaState lda_fit(const Eigen::MatrixXd& z, std::span<const int> labels, int class_count);
Eigen::VectorXd lda_scores(const LdaState& state, const Eigen::Ref<const Eigen::VectorXd>& z0);

inline constexpr int kSvmIterations = 10000;
SvmState svm_fit(const Eigen::MatrixXd& z, std::span<const int> labels, int class_count, double cost);
Eigen::VectorXd svm_scores(const SvmState& state, const Eigen::Ref<const Eigen::VectorXd>& z0);

/// Index of the largest score; ties go to the smaller index.
int argmax_label(const Eigen::Ref<const Eigen::VectorXd>& scores);

}  // namespace fsml::classify
