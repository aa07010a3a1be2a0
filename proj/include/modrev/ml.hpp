#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "modrev/recompose.hpp"

// Binary classifiers that predict model-checking verdicts from module orderings.
namespace modrev::ml {

/// x[i] is the 1-based original index of the module at position i.
struct FeatureRow {
  std::vector<int> x;
  bool label = false;

  static FeatureRow from(const Permutation& p, bool label);

  friend auto operator<=>(const FeatureRow&, const FeatureRow&) = default;
};

double sigmoid(double z);

/// Mean negative log-likelihood of labels under probabilities.
double log_loss(std::span<const double> probabilities, std::span<const FeatureRow> rows);

struct GbtParams {
  std::size_t trees = 100;
  std::size_t max_depth = 6;
  double eta = 0.1;
  double lambda = 1.0;
  double min_child_weight = 1.0;

  friend bool operator==(const GbtParams&, const GbtParams&) = default;
};

struct TreeNode {
  // Internal: rows with x[feature] < threshold go left.
  int feature = -1;
  double threshold = 0;
  int left = -1;
  int right = -1;
  double value = 0;  // leaf contribution before eta scaling

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double evaluate(std::span<const int> x) const;
  std::size_t depth() const;
  friend bool operator==(const Tree&, const Tree&) = default;
};

struct GbtModel {
  GbtParams params;
  std::size_t n_features = 0;
  double base_score = 0;  // initial log-odds
  bool degenerate = false;
  std::vector<Tree> trees;
  std::vector<double> loss_history;  // training log-loss after each round

  friend bool operator==(const GbtModel&, const GbtModel&) = default;
};

/// Gradient boosting on logistic loss with exact greedy splits.
///
/// Rows are put in canonical order before fitting, so the model depends only
/// on the multiset of rows. Split ties go to the lowest feature index, then
/// the lowest threshold. A single-class input yields a degenerate constant
/// model at the clamped empirical rate. Throws std::invalid_argument on empty
/// input or ragged rows.
GbtModel train_gbt(std::vector<FeatureRow> rows, const GbtParams& params = {});

/// Probability of the positive class. Throws on a dimension mismatch.
double predict(const GbtModel& model, std::span<const int> x);

nlohmann::json to_json(const GbtModel& model);
GbtModel gbt_from_json(const nlohmann::json& doc);

struct LogRegParams {
  std::size_t iterations = 500;
  double step = 0.1;
};

/// Linear model over one-hot (module, position) indicators plus a bias.
struct LogRegModel {
  std::size_t n_positions = 0;
  std::vector<double> weights;  // position * n + (module - 1)
  double bias = 0;
  bool degenerate = false;

  friend bool operator==(const LogRegModel&, const LogRegModel&) = default;
};

/// Batch gradient descent from zero weights.
LogRegModel train_logreg(std::vector<FeatureRow> rows, const LogRegParams& params = {});
double predict(const LogRegModel& model, std::span<const int> x);

/// Threshold-0.5 metrics plus rank-statistic AUC.
///
/// Undefined ratios are left empty: precision when nothing was predicted
/// positive but positives were missed, recall without positives, AUC with a
/// single class, F1 unless both precision and recall exist.
struct Metrics {
  double accuracy = 0;
  std::optional<double> auc;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t true_negatives = 0;
  std::size_t false_negatives = 0;
};

inline constexpr double kDecisionThreshold = 0.5;

/// Throws std::invalid_argument on empty input.
Metrics evaluate(std::span<const std::pair<double, bool>> scores);

/// Mann-Whitney AUC with midranks for ties; empty with a single class.
std::optional<double> auc_rank(std::span<const std::pair<double, bool>> scores);

nlohmann::json to_json(const Metrics& m);

}  // namespace modrev::ml
