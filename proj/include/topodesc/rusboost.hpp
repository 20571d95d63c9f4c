#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace topodesc {

/// Dense row-major sample matrix with binary labels.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  std::vector<std::string> feature_names;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0), labels(r, 0) {}

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  const double* row(std::size_t r) const { return &values[r * cols]; }

  FeatureMatrix subset(const std::vector<std::size_t>& row_ids) const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;     // rows with value <= threshold
  int right = -1;
  double probability = 0.0;  // weighted class-1 fraction at this node
};

class DecisionTree {
 public:
  std::vector<TreeNode> nodes;
  int max_depth = 3;

  double probability(const double* row) const;
  int vote(const double* row) const { return probability(row) >= 0.5 ? 1 : 0; }
  int depth() const;
};

/// How majority rows are drawn each round. The retained rows always train
/// with their current boosting weights.
enum class MajoritySampling { uniform, weighted };

struct RusBoostConfig {
  int rounds = 100;
  int max_depth = 3;
  /// Majority rows kept per round as a multiple of the minority count.
  double undersample_ratio = 1.0;
  /// false turns the learner into plain AdaBoost on the full weighted set.
  bool undersample = true;
  int max_retries = 10;
  MajoritySampling sampling = MajoritySampling::uniform;
  std::uint64_t seed = 1;
};

struct BoostedEnsemble {
  RusBoostConfig config;
  std::vector<DecisionTree> trees;
  std::vector<double> alphas;
  std::vector<std::string> feature_names;
  std::size_t feature_count = 0;
  /// Raw alpha-weighted Gini decrease per feature (see gini_importance).
  std::vector<double> importance_raw;
  /// Set when no weak learner beat chance and the model fell back to the prior.
  bool degenerate = false;
};

/// Vote weight assigned to a round with zero weighted error.
double capped_alpha();

/// Weighted Gini tree on the rows with nonzero weight.
DecisionTree fit_tree(const FeatureMatrix& data, const std::vector<double>& weights, int max_depth,
                      std::vector<double>* importance = nullptr, double importance_scale = 1.0);

/// Optional hook observing boosting weights after each accepted round.
using WeightObserver = void (*)(const std::vector<double>& weights, void* context);

BoostedEnsemble train_rusboost(const FeatureMatrix& data, const RusBoostConfig& config,
                               WeightObserver observer = nullptr, void* context = nullptr);

struct Prediction {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
};

/// Score = sum_t alpha_t * vote_t / sum_t alpha_t (the [-1,1] margin mapped to
/// [0,1]); label = score >= 0.5.
Prediction predict(const BoostedEnsemble& ensemble, const FeatureMatrix& rows);

/// Normalized per-feature importance (sums to 1, or all zeros when no split exists).
std::vector<double> gini_importance(const BoostedEnsemble& ensemble);

void save_model(const BoostedEnsemble& ensemble, const std::filesystem::path& path);
BoostedEnsemble load_model(const std::filesystem::path& path);
std::string model_to_json(const BoostedEnsemble& ensemble);
BoostedEnsemble model_from_json(const std::string& text);

}  // namespace topodesc
