#include "vecscan/gbdt.hpp"

#include <algorithm>
#include <cmath>

namespace vecscan {

namespace {

inline double sigmoid(double f) { return 1.0 / (1.0 + std::exp(-f)); }

double logloss(const std::vector<double>& scores, const std::vector<uint8_t>& labels) {
  double total = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    double p = std::clamp(sigmoid(scores[i]), 1e-12, 1.0 - 1e-12);
    total -= labels[i] ? std::log(p) : std::log(1.0 - p);
  }
  return total / double(labels.size());
}

struct SplitResult {
  double gain = 0.0;
  int16_t feature = -1;
  float threshold = 0.f;
};

struct TreeBuilder {
  const std::vector<float>& x;
  uint32_t nf;
  const std::vector<double>& grad;
  const std::vector<double>& hess;
  const GbdtConfig& cfg;
  GbdtTree tree;

  float leaf_value(double g, double h) const {
    return float(-g / (h + cfg.lambda)) * cfg.learning_rate;
  }

  SplitResult best_split(const std::vector<uint32_t>& rows, double g_sum, double h_sum) const {
    SplitResult best;
    double parent = g_sum * g_sum / (h_sum + cfg.lambda);
    std::vector<std::pair<float, uint32_t>> sorted;
    sorted.reserve(rows.size());
    for (int16_t f = 0; f < int16_t(nf); ++f) {
      sorted.clear();
      for (uint32_t r : rows) sorted.emplace_back(x[size_t(r) * nf + f], r);
      std::sort(sorted.begin(), sorted.end());
      double gl = 0.0, hl = 0.0;
      for (size_t i = 0; i + 1 < sorted.size(); ++i) {
        uint32_t r = sorted[i].second;
        gl += grad[r];
        hl += hess[r];
        if (sorted[i].first == sorted[i + 1].first) continue;  // no boundary here
        size_t left_n = i + 1, right_n = sorted.size() - left_n;
        if (left_n < cfg.min_leaf || right_n < cfg.min_leaf) continue;
        double gr = g_sum - gl, hr = h_sum - hl;
        double gain = gl * gl / (hl + cfg.lambda) + gr * gr / (hr + cfg.lambda) - parent;
        if (gain > best.gain + 1e-12) {
          best.gain = gain;
          best.feature = f;
          // midpoint keeps the comparison x <= threshold stable
          best.threshold = sorted[i].first + (sorted[i + 1].first - sorted[i].first) * 0.5f;
        }
      }
    }
    return best;
  }

  uint16_t build(const std::vector<uint32_t>& rows, uint32_t depth) {
    double g_sum = 0.0, h_sum = 0.0;
    for (uint32_t r : rows) {
      g_sum += grad[r];
      h_sum += hess[r];
    }
    uint16_t idx = uint16_t(tree.nodes.size());
    tree.nodes.emplace_back();
    if (depth >= cfg.max_depth || rows.size() < size_t(2) * cfg.min_leaf) {
      tree.nodes[idx].value = leaf_value(g_sum, h_sum);
      return idx;
    }
    SplitResult s = best_split(rows, g_sum, h_sum);
    if (s.feature < 0) {
      tree.nodes[idx].value = leaf_value(g_sum, h_sum);
      return idx;
    }
    std::vector<uint32_t> left, right;
    for (uint32_t r : rows)
      (x[size_t(r) * nf + s.feature] <= s.threshold ? left : right).push_back(r);
    tree.nodes[idx].feature = s.feature;
    tree.nodes[idx].threshold = s.threshold;
    uint16_t l = build(left, depth + 1);
    uint16_t r = build(right, depth + 1);
    tree.nodes[idx].left = l;
    tree.nodes[idx].right = r;
    return idx;
  }
};

float tree_predict(const GbdtTree& t, std::span<const float> f) {
  uint16_t i = 0;
  while (t.nodes[i].feature >= 0)
    i = f[t.nodes[i].feature] <= t.nodes[i].threshold ? t.nodes[i].left : t.nodes[i].right;
  return t.nodes[i].value;
}

}  // namespace

GbdtModel GbdtModel::train(const std::vector<float>& features, uint32_t n_features,
                           const std::vector<uint8_t>& labels, const GbdtConfig& config) {
  const size_t n = labels.size();
  if (n_features == 0 || features.size() != n * n_features)
    throw std::invalid_argument("gbdt: feature matrix shape mismatch");
  if (n < 2) throw std::invalid_argument("gbdt: need at least 2 samples");

  GbdtModel m;
  m.n_features_ = n_features;
  m.seed_ = config.seed;

  size_t positives = 0;
  for (uint8_t y : labels) positives += y;
  if (positives == 0 || positives == n) {
    // Degenerate single-class labels: constant predictor, flagged.
    m.constant_ = true;
    m.f0_ = positives == 0 ? -10.f : 10.f;
    std::vector<double> scores(n, m.f0_);
    m.base_logloss_ = m.final_logloss_ = logloss(scores, labels);
    return m;
  }

  double p_bar = double(positives) / double(n);
  m.f0_ = float(std::log(p_bar / (1.0 - p_bar)));

  std::vector<double> scores(n, m.f0_);
  m.base_logloss_ = logloss(scores, labels);

  std::vector<double> grad(n), hess(n);
  std::vector<uint32_t> all(n);
  for (size_t i = 0; i < n; ++i) all[i] = uint32_t(i);

  for (uint32_t round = 0; round < config.n_trees; ++round) {
    for (size_t i = 0; i < n; ++i) {
      double p = sigmoid(scores[i]);
      grad[i] = p - double(labels[i]);
      hess[i] = std::max(p * (1.0 - p), 1e-12);
    }
    TreeBuilder builder{features, n_features, grad, hess, config, {}};
    builder.build(all, 0);
    for (size_t i = 0; i < n; ++i)
      scores[i] += tree_predict(builder.tree, {features.data() + i * n_features, n_features});
    m.trees_.push_back(std::move(builder.tree));
  }
  m.final_logloss_ = logloss(scores, labels);
  return m;
}

float GbdtModel::predict(std::span<const float> features) const {
  if (features.size() != n_features_) throw std::invalid_argument("gbdt: feature schema mismatch");
  double f = f0_;
  for (const GbdtTree& t : trees_) f += tree_predict(t, features);
  return float(sigmoid(f));
}

void GbdtModel::serialize(ByteWriter& w) const {
  w.pod(f0_);
  w.pod(n_features_);
  w.pod(uint8_t(constant_));
  w.pod(seed_);
  w.pod(base_logloss_);
  w.pod(final_logloss_);
  w.pod(uint32_t(trees_.size()));
  for (const GbdtTree& t : trees_) w.vec(t.nodes);
}

GbdtModel GbdtModel::deserialize(ByteReader& r) {
  GbdtModel m;
  m.f0_ = r.pod<float>();
  m.n_features_ = r.pod<uint32_t>();
  m.constant_ = r.pod<uint8_t>() != 0;
  m.seed_ = r.pod<uint64_t>();
  m.base_logloss_ = r.pod<double>();
  m.final_logloss_ = r.pod<double>();
  uint32_t nt = r.pod<uint32_t>();
  m.trees_.resize(nt);
  for (uint32_t i = 0; i < nt; ++i) m.trees_[i].nodes = r.vec<GbdtNode>();
  return m;
}

double binary_auc(const std::vector<float>& scores, const std::vector<uint8_t>& labels) {
  std::vector<std::pair<float, uint8_t>> pairs;
  pairs.reserve(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) pairs.emplace_back(scores[i], labels[i]);
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double pos = 0, neg = 0, won = 0;
  size_t i = 0;
  while (i < pairs.size()) {
    size_t j = i;
    double tie_pos = 0, tie_neg = 0;
    while (j < pairs.size() && pairs[j].first == pairs[i].first) {
      (pairs[j].second ? tie_pos : tie_neg) += 1;
      ++j;
    }
    won += tie_pos * (neg + tie_neg * 0.5);
    pos += tie_pos;
    neg += tie_neg;
    i = j;
  }
  if (pos == 0 || neg == 0) return 0.5;
  return won / (pos * neg);
}

}  // namespace vecscan
