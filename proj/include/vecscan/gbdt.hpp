#pragma once

#include <span>
#include <vector>

#include "vecscan/serialize.hpp"

namespace vecscan {

struct GbdtConfig {
  uint32_t n_trees = 50;
  uint32_t max_depth = 4;
  float learning_rate = 0.1f;
  float lambda = 1.0f;    // L2 regularization on leaf values
  uint32_t min_leaf = 5;
  uint64_t seed = 0;      // recorded for reproducibility bookkeeping
};

struct GbdtNode {
  int16_t feature = -1;   // -1 marks a leaf
  float threshold = 0.f;  // left if x[feature] <= threshold
  uint16_t left = 0;
  uint16_t right = 0;
  float value = 0.f;      // leaf addend, learning rate already applied
};

struct GbdtTree {
  std::vector<GbdtNode> nodes;
};

// Additive-logistic ensemble of depth-limited regression trees fit with
// Newton leaf values. No row/feature sampling, so training is fully
// deterministic for a fixed input.
class GbdtModel {
 public:
  GbdtModel() = default;

  // features is row-major n x n_features; labels are 0/1.
  static GbdtModel train(const std::vector<float>& features, uint32_t n_features,
                         const std::vector<uint8_t>& labels, const GbdtConfig& config = {});

  float predict(std::span<const float> features) const;  // probability in (0,1)

  bool is_constant() const { return constant_; }
  uint32_t n_features() const { return n_features_; }
  double training_logloss() const { return final_logloss_; }
  double constant_logloss() const { return base_logloss_; }

  void serialize(ByteWriter& w) const;
  static GbdtModel deserialize(ByteReader& r);

 private:
  float f0_ = 0.f;
  uint32_t n_features_ = 0;
  bool constant_ = false;
  uint64_t seed_ = 0;
  std::vector<GbdtTree> trees_;
  double base_logloss_ = 0.0;
  double final_logloss_ = 0.0;
};

// Rank-based AUC (equal scores contribute half); diagnostics for tests.
double binary_auc(const std::vector<float>& scores, const std::vector<uint8_t>& labels);

}  // namespace vecscan
