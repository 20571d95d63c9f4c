#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "topodesc/descriptors.hpp"
#include "topodesc/features.hpp"
#include "topodesc/rusboost.hpp"

namespace topodesc {

/// Dice similarity 2|X n Y| / (|X| + |Y|) over indicator vectors; 1 when both are empty.
double dsc(const std::vector<std::uint8_t>& predicted, const std::vector<std::uint8_t>& truth);

/// Trains on a matrix and returns a predictor for new rows.
using Predictor = std::function<std::vector<std::uint8_t>(const FeatureMatrix&)>;
using Trainer = std::function<Predictor(const FeatureMatrix& train)>;

Trainer rusboost_trainer(const RusBoostConfig& config);

struct HyperGrid {
  std::vector<int> rounds{50, 100, 200};
  std::vector<int> depths{1, 3, 5};
};

struct CvResult {
  RusBoostConfig best;
  double best_score = 0.0;
  struct Entry {
    int rounds;
    int depth;
    double mean_dsc;
  };
  std::vector<Entry> entries;
};

/// Stratified k-fold selection of (rounds, depth) by mean fold DSC; ties keep
/// the earlier grid entry.
CvResult cross_validate(const FeatureMatrix& data, const RusBoostConfig& base, const HyperGrid& grid,
                        int folds, std::uint64_t seed);

struct ExperimentPlan {
  std::vector<std::string> train_ids;
  std::vector<std::string> eval_ids;
  double class1_fraction = 0.5;
  double class2_fraction = 0.3;
  int repetitions = 10;
  int folds = 5;
  bool tune = true;
  HyperGrid grid;
  std::uint64_t seed = 1;

  void validate() const;
};

struct RunResult {
  std::vector<double> dsc_values;
  double median = 0.0;
  double std = 0.0;
  std::vector<RusBoostConfig> chosen;

  static RunResult summarize(std::vector<double> values);
};

double median_of(std::vector<double> values);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_std(const std::vector<double>& values);

/// Random class-stratified subset of row indices with exact per-class counts
/// round(fraction * count), sorted ascending.
std::vector<std::size_t> sample_training_rows(const std::vector<std::uint8_t>& labels, double class1_fraction,
                                              double class2_fraction, std::uint64_t seed);

/// Repeated train-on-subset / evaluate-on-held-out-maps protocol. With
/// `trainer` unset, RUSBoost with `classifier` is used and, when the plan
/// asks for it, tuned by cross-validation on each training subset.
RunResult run_experiment(const ExperimentPlan& plan, const FeatureTable& table,
                         const RusBoostConfig& classifier, const Trainer& trainer = {});

/// Per-feature Fisher score (mu1 - mu2)^2 / (var1 + var2) with population
/// variances; 0 where both variances vanish.
std::vector<double> fisher_scores(const FeatureMatrix& data);
/// Fisher map over persistence images; all images must share one config.
std::vector<double> fisher_map(const std::vector<PersistenceImage>& images,
                               const std::vector<std::uint8_t>& labels);

struct WilcoxonResult {
  double statistic = 0.0;  // sum of ranks of positive differences
  double p_value = 1.0;
  std::size_t n = 0;       // nonzero differences
  bool exact = false;
};

/// Two-sided paired signed-rank test. Zero differences are dropped, ties get
/// mid-ranks; exact null distribution up to 25 nonzero differences, normal
/// approximation with tie correction beyond.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

void write_results_csv(std::ostream& out, const std::vector<std::pair<std::string, RunResult>>& rows);
void write_results_table(std::ostream& out, const std::vector<std::pair<std::string, RunResult>>& rows);

}  // namespace topodesc
