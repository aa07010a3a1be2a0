#include "modrev/ml.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace modrev::ml {

namespace {

constexpr double kMaxLogOdds = 6.9;  // p in roughly [0.001, 0.999]

double clamped_logit(double p) {
  p = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return std::clamp(std::log(p / (1.0 - p)), -kMaxLogOdds, kMaxLogOdds);
}

std::size_t check_rows(std::span<const FeatureRow> rows) {
  if (rows.empty()) throw std::invalid_argument("training requires at least one row");
  const std::size_t n = rows.front().x.size();
  if (n == 0) throw std::invalid_argument("feature rows are empty");
  for (const auto& r : rows) {
    if (r.x.size() != n) throw std::invalid_argument("feature rows have different lengths");
  }
  return n;
}

bool single_class(std::span<const FeatureRow> rows) {
  return std::all_of(rows.begin(), rows.end(),
                     [&](const FeatureRow& r) { return r.label == rows.front().label; });
}

double positive_rate(std::span<const FeatureRow> rows) {
  auto pos = std::count_if(rows.begin(), rows.end(), [](const FeatureRow& r) { return r.label; });
  return static_cast<double>(pos) / static_cast<double>(rows.size());
}

// Distinct values per feature and each row's rank among them.
struct Binned {
  std::vector<std::vector<int>> values;      // values[f], ascending
  std::vector<std::vector<std::uint32_t>> code;  // code[i][f]
};

Binned bin_features(std::span<const FeatureRow> rows) {
  const std::size_t n_features = rows.front().x.size();
  Binned b;
  b.values.resize(n_features);
  b.code.assign(rows.size(), std::vector<std::uint32_t>(n_features));
  for (std::size_t f = 0; f < n_features; ++f) {
    auto& v = b.values[f];
    for (const auto& r : rows) v.push_back(r.x[f]);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      b.code[i][f] = static_cast<std::uint32_t>(
          std::lower_bound(v.begin(), v.end(), rows[i].x[f]) - v.begin());
    }
  }
  return b;
}

class TreeBuilder {
 public:
  TreeBuilder(const Binned& bins, std::span<const double> grad, std::span<const double> hess,
              const GbtParams& params)
      : bins_(bins), grad_(grad), hess_(hess), params_(params) {}

  Tree build() {
    std::vector<std::size_t> all(grad_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    grow(all, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    std::uint32_t code = 0;  // left side holds codes <= this
    double threshold = 0;
    double gain = 0;
  };

  double score(double g, double h) const { return g * g / (h + params_.lambda); }

  Split best_split(const std::vector<std::size_t>& idx, double g_total, double h_total) {
    Split best;
    const std::size_t n_features = bins_.values.size();
    for (std::size_t f = 0; f < n_features; ++f) {
      // Per-value sums, accumulated in canonical row order.
      const auto& values = bins_.values[f];
      buckets_.assign(values.size(), {0.0, 0.0});
      used_.assign(values.size(), false);
      for (auto i : idx) {
        auto c = bins_.code[i][f];
        buckets_[c].first += grad_[i];
        buckets_[c].second += hess_[i];
        used_[c] = true;
      }
      double gl = 0, hl = 0;
      std::size_t prev = values.size();
      for (std::size_t c = 0; c < values.size(); ++c) {
        if (!used_[c]) continue;
        if (prev != values.size()) {
          const double gr = g_total - gl, hr = h_total - hl;
          if (hl >= params_.min_child_weight && hr >= params_.min_child_weight) {
            const double gain = 0.5 * (score(gl, hl) + score(gr, hr) - score(g_total, h_total));
            if (gain > best.gain) {
              best.gain = gain;
              best.feature = static_cast<int>(f);
              best.code = static_cast<std::uint32_t>(prev);
              best.threshold = 0.5 * (values[prev] + values[c]);
            }
          }
        }
        gl += buckets_[c].first;
        hl += buckets_[c].second;
        prev = c;
      }
    }
    return best;
  }

  int grow(const std::vector<std::size_t>& idx, std::size_t depth) {
    double g = 0, h = 0;
    for (auto i : idx) {
      g += grad_[i];
      h += hess_[i];
    }
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    Split split;
    if (depth < params_.max_depth && idx.size() >= 2) split = best_split(idx, g, h);
    if (split.feature < 0) {
      tree_.nodes[id].value = -g / (h + params_.lambda);
      return id;
    }
    std::vector<std::size_t> left, right;
    for (auto i : idx) {
      (bins_.code[i][split.feature] <= split.code ? left : right).push_back(i);
    }
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = tree_.nodes[id];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const Binned& bins_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  const GbtParams& params_;
  Tree tree_;
  std::vector<std::pair<double, double>> buckets_;
  std::vector<bool> used_;
};

std::size_t node_depth(const Tree& t, int id) {
  const auto& n = t.nodes[id];
  if (n.is_leaf()) return 0;
  return 1 + std::max(node_depth(t, n.left), node_depth(t, n.right));
}

nlohmann::json node_to_json(const Tree& t, int id) {
  const auto& n = t.nodes[id];
  if (n.is_leaf()) return {{"leaf", n.value}};
  return {{"feature", n.feature},
          {"threshold", n.threshold},
          {"left", node_to_json(t, n.left)},
          {"right", node_to_json(t, n.right)}};
}

int node_from_json(const nlohmann::json& j, Tree& t) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.push_back({});
  if (j.contains("leaf")) {
    t.nodes[id].value = j.at("leaf").get<double>();
    return id;
  }
  const int l = node_from_json(j.at("left"), t);
  const int r = node_from_json(j.at("right"), t);
  auto& n = t.nodes[id];
  n.feature = j.at("feature").get<int>();
  n.threshold = j.at("threshold").get<double>();
  n.left = l;
  n.right = r;
  return id;
}

}  // namespace

FeatureRow FeatureRow::from(const Permutation& p, bool label) {
  FeatureRow r;
  r.x.reserve(p.size());
  for (auto v : p.order) r.x.push_back(static_cast<int>(v) + 1);
  r.label = label;
  return r;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_loss(std::span<const double> probabilities, std::span<const FeatureRow> rows) {
  if (probabilities.size() != rows.size() || rows.empty()) {
    throw std::invalid_argument("log_loss: size mismatch");
  }
  double sum = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double p = std::clamp(probabilities[i], 1e-15, 1.0 - 1e-15);
    sum -= rows[i].label ? std::log(p) : std::log(1.0 - p);
  }
  return sum / static_cast<double>(rows.size());
}

double Tree::evaluate(std::span<const int> x) const {
  int id = 0;
  while (!nodes[id].is_leaf()) {
    const auto& n = nodes[id];
    id = x[n.feature] < n.threshold ? n.left : n.right;
  }
  return nodes[id].value;
}

std::size_t Tree::depth() const { return nodes.empty() ? 0 : node_depth(*this, 0); }

GbtModel train_gbt(std::vector<FeatureRow> rows, const GbtParams& params) {
  GbtModel model;
  model.params = params;
  model.n_features = check_rows(rows);
  std::sort(rows.begin(), rows.end());

  if (single_class(rows)) {
    model.degenerate = true;
    model.base_score = clamped_logit(positive_rate(rows));
    return model;
  }
  model.base_score = clamped_logit(positive_rate(rows));

  const std::size_t n = rows.size();
  const Binned bins = bin_features(rows);
  std::vector<double> margin(n, model.base_score), prob(n), grad(n), hess(n);
  for (std::size_t round = 0; round < params.trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      prob[i] = sigmoid(margin[i]);
      grad[i] = prob[i] - (rows[i].label ? 1.0 : 0.0);
      hess[i] = std::max(prob[i] * (1.0 - prob[i]), 1e-16);
    }
    Tree tree = TreeBuilder(bins, grad, hess, params).build();
    for (std::size_t i = 0; i < n; ++i) {
      margin[i] += params.eta * tree.evaluate(rows[i].x);
      prob[i] = sigmoid(margin[i]);
    }
    model.trees.push_back(std::move(tree));
    model.loss_history.push_back(log_loss(prob, rows));
  }
  return model;
}

double predict(const GbtModel& model, std::span<const int> x) {
  if (x.size() != model.n_features) {
    throw std::invalid_argument("predict: expected " + std::to_string(model.n_features) +
                                " features, got " + std::to_string(x.size()));
  }
  double margin = model.base_score;
  for (const auto& t : model.trees) margin += model.params.eta * t.evaluate(x);
  return sigmoid(margin);
}

nlohmann::json to_json(const GbtModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : model.trees) trees.push_back(node_to_json(t, 0));
  return {
      {"format", "modrev-gbt"},
      {"version", 1},
      {"params",
       {{"trees", model.params.trees},
        {"max_depth", model.params.max_depth},
        {"eta", model.params.eta},
        {"lambda", model.params.lambda},
        {"min_child_weight", model.params.min_child_weight}}},
      {"n_features", model.n_features},
      {"base_score", model.base_score},
      {"degenerate", model.degenerate},
      {"loss_history", model.loss_history},
      {"trees", trees},
  };
}

GbtModel gbt_from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != "modrev-gbt" || doc.value("version", 0) != 1) {
    throw std::invalid_argument("not a version-1 modrev-gbt document");
  }
  GbtModel m;
  const auto& p = doc.at("params");
  m.params.trees = p.at("trees").get<std::size_t>();
  m.params.max_depth = p.at("max_depth").get<std::size_t>();
  m.params.eta = p.at("eta").get<double>();
  m.params.lambda = p.at("lambda").get<double>();
  m.params.min_child_weight = p.at("min_child_weight").get<double>();
  m.n_features = doc.at("n_features").get<std::size_t>();
  m.base_score = doc.at("base_score").get<double>();
  m.degenerate = doc.at("degenerate").get<bool>();
  m.loss_history = doc.value("loss_history", std::vector<double>{});
  for (const auto& t : doc.at("trees")) {
    Tree tree;
    node_from_json(t, tree);
    m.trees.push_back(std::move(tree));
  }
  return m;
}

LogRegModel train_logreg(std::vector<FeatureRow> rows, const LogRegParams& params) {
  LogRegModel model;
  model.n_positions = check_rows(rows);
  std::sort(rows.begin(), rows.end());
  const std::size_t n = model.n_positions;
  model.weights.assign(n * n, 0.0);
  if (single_class(rows)) {
    model.degenerate = true;
    model.bias = clamped_logit(positive_rate(rows));
    return model;
  }
  for (const auto& r : rows) {
    for (int v : r.x) {
      if (v < 1 || static_cast<std::size_t>(v) > n) {
        throw std::invalid_argument("train_logreg: module index out of range");
      }
    }
  }
  const double inv_rows = 1.0 / static_cast<double>(rows.size());
  std::vector<double> grad(n * n);
  for (std::size_t it = 0; it < params.iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0;
    for (const auto& r : rows) {
      double z = model.bias;
      for (std::size_t pos = 0; pos < n; ++pos) z += model.weights[pos * n + r.x[pos] - 1];
      const double err = sigmoid(z) - (r.label ? 1.0 : 0.0);
      grad_bias += err;
      for (std::size_t pos = 0; pos < n; ++pos) grad[pos * n + r.x[pos] - 1] += err;
    }
    model.bias -= params.step * grad_bias * inv_rows;
    for (std::size_t k = 0; k < grad.size(); ++k) {
      model.weights[k] -= params.step * grad[k] * inv_rows;
    }
  }
  return model;
}

double predict(const LogRegModel& model, std::span<const int> x) {
  const std::size_t n = model.n_positions;
  if (x.size() != n) throw std::invalid_argument("predict: dimension mismatch");
  double z = model.bias;
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (x[pos] < 1 || static_cast<std::size_t>(x[pos]) > n) {
      throw std::invalid_argument("predict: module index out of range");
    }
    z += model.weights[pos * n + x[pos] - 1];
  }
  return sigmoid(z);
}

std::optional<double> auc_rank(std::span<const std::pair<double, bool>> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scores[a].first < scores[b].first; });
  double rank_sum = 0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]].first == scores[idx[i]].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (scores[idx[k]].second) {
        rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1) / 2) / (np * static_cast<double>(n_neg));
}

Metrics evaluate(std::span<const std::pair<double, bool>> scores) {
  if (scores.empty()) throw std::invalid_argument("evaluate: no scores");
  Metrics m;
  for (const auto& [p, label] : scores) {
    const bool predicted = p >= kDecisionThreshold;
    if (predicted && label) ++m.true_positives;
    if (predicted && !label) ++m.false_positives;
    if (!predicted && !label) ++m.true_negatives;
    if (!predicted && label) ++m.false_negatives;
  }
  const double tp = static_cast<double>(m.true_positives);
  m.accuracy = (tp + static_cast<double>(m.true_negatives)) / static_cast<double>(scores.size());
  if (m.true_positives + m.false_positives > 0) {
    m.precision = tp / static_cast<double>(m.true_positives + m.false_positives);
  } else if (m.false_negatives == 0) {
    m.precision = 1.0;
  }
  if (m.true_positives + m.false_negatives > 0) {
    m.recall = tp / static_cast<double>(m.true_positives + m.false_negatives);
  }
  if (m.precision && m.recall) {
    const double s = *m.precision + *m.recall;
    m.f1 = s > 0 ? 2 * *m.precision * *m.recall / s : 0.0;
  }
  m.auc = auc_rank(scores);
  return m;
}

nlohmann::json to_json(const Metrics& m) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"accuracy", m.accuracy},
          {"auc", opt(m.auc)},
          {"precision", opt(m.precision)},
          {"recall", opt(m.recall)},
          {"f1", opt(m.f1)},
          {"tp", m.true_positives},
          {"fp", m.false_positives},
          {"tn", m.true_negatives},
          {"fn", m.false_negatives}};
}

}  // namespace modrev::ml
