#include "topodesc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace topodesc {

double dsc(const std::vector<std::uint8_t>& predicted, const std::vector<std::uint8_t>& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("dsc: label vectors differ in length");
  std::size_t x = 0, y = 0, both = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool a = predicted[i] != 0, b = truth[i] != 0;
    x += a;
    y += b;
    both += a && b;
  }
  if (x + y == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(x + y);
}

Trainer rusboost_trainer(const RusBoostConfig& config) {
  return [config](const FeatureMatrix& train) -> Predictor {
    auto model = std::make_shared<BoostedEnsemble>(train_rusboost(train, config));
    return [model](const FeatureMatrix& rows) { return predict(*model, rows).labels; };
  };
}

namespace {

std::vector<int> stratified_folds(const std::vector<std::uint8_t>& labels, int folds, std::uint64_t seed) {
  std::vector<int> fold(labels.size(), 0);
  std::mt19937_64 rng(seed);
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if ((labels[i] != 0) == (cls == 1)) idx.push_back(i);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < idx.size(); ++k) fold[idx[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  }
  return fold;
}

}  // namespace

CvResult cross_validate(const FeatureMatrix& data, const RusBoostConfig& base, const HyperGrid& grid,
                        int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  const auto fold = stratified_folds(data.labels, folds, seed);
  CvResult result;
  result.best = base;
  result.best_score = -1.0;
  for (int rounds : grid.rounds) {
    for (int depth : grid.depths) {
      RusBoostConfig cfg = base;
      cfg.rounds = rounds;
      cfg.max_depth = depth;
      double total = 0.0;
      int used = 0;
      for (int k = 0; k < folds; ++k) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < data.rows; ++i) (fold[i] == k ? test : train).push_back(i);
        const auto tm = data.subset(train);
        const auto vm = data.subset(test);
        const auto classes = std::accumulate(tm.labels.begin(), tm.labels.end(), std::size_t{0});
        if (test.empty() || classes == 0 || classes == tm.rows) continue;
        const auto model = train_rusboost(tm, cfg);
        total += dsc(predict(model, vm).labels, vm.labels);
        ++used;
      }
      const double mean = used ? total / used : 0.0;
      result.entries.push_back({rounds, depth, mean});
      if (mean > result.best_score) {
        result.best_score = mean;
        result.best = cfg;
      }
    }
  }
  return result;
}

void ExperimentPlan::validate() const {
  if (!(class1_fraction > 0.0 && class1_fraction <= 1.0) || !(class2_fraction > 0.0 && class2_fraction <= 1.0))
    throw std::invalid_argument("class fractions must lie in (0, 1]");
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (tune && folds < 2) throw std::invalid_argument("folds must be >= 2");
  for (const auto& id : train_ids)
    if (std::find(eval_ids.begin(), eval_ids.end(), id) != eval_ids.end())
      throw std::invalid_argument("map '" + id + "' is in both the training and evaluation sets");
  if (train_ids.empty() || eval_ids.empty()) throw std::invalid_argument("plan needs training and evaluation maps");
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double sample_std(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(sorted.size() - 1));
}

RunResult RunResult::summarize(std::vector<double> values) {
  RunResult r;
  r.median = median_of(values);
  r.std = sample_std(values);
  r.dsc_values = std::move(values);
  return r;
}

std::vector<std::size_t> sample_training_rows(const std::vector<std::uint8_t>& labels, double class1_fraction,
                                              double class2_fraction, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> out;
  for (int cls = 1; cls >= 0; --cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if ((labels[i] != 0) == (cls == 1)) idx.push_back(i);
    const double fraction = cls == 1 ? class1_fraction : class2_fraction;
    const auto keep = std::min(idx.size(), static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size()))));
    std::shuffle(idx.begin(), idx.end(), rng);
    out.insert(out.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  std::sort(out.begin(), out.end());
  return out;
}

RunResult run_experiment(const ExperimentPlan& plan, const FeatureTable& table,
                         const RusBoostConfig& classifier, const Trainer& trainer) {
  plan.validate();
  const auto train_rows = table.rows_for(plan.train_ids);
  const auto eval_rows = table.rows_for(plan.eval_ids);
  if (train_rows.empty()) throw std::invalid_argument("run_experiment: no features for the training maps");
  if (eval_rows.empty()) throw std::invalid_argument("run_experiment: empty evaluation set");
  for (auto i : train_rows)
    if (table.rows[i].label < 0) throw std::invalid_argument("run_experiment: unlabeled training patch");
  for (auto i : eval_rows)
    if (table.rows[i].label < 0) throw std::invalid_argument("run_experiment: unlabeled evaluation patch");

  const auto eval = table.matrix(eval_rows);
  const auto train_all = table.matrix(train_rows);

  std::vector<double> values;
  std::vector<RusBoostConfig> chosen;
  for (int rep = 0; rep < plan.repetitions; ++rep) {
    const std::uint64_t seed = plan.seed + static_cast<std::uint64_t>(rep);
    const auto subset = train_all.subset(
        sample_training_rows(train_all.labels, plan.class1_fraction, plan.class2_fraction, seed));
    Predictor predictor;
    if (trainer) {
      predictor = trainer(subset);
    } else {
      RusBoostConfig cfg = classifier;
      cfg.seed = seed;
      if (plan.tune) cfg = cross_validate(subset, cfg, plan.grid, plan.folds, seed).best;
      chosen.push_back(cfg);
      predictor = rusboost_trainer(cfg)(subset);
    }
    values.push_back(dsc(predictor(eval), eval.labels));
  }
  auto result = RunResult::summarize(std::move(values));
  result.chosen = std::move(chosen);
  return result;
}

std::vector<double> fisher_scores(const FeatureMatrix& data) {
  std::vector<double> out(data.cols, 0.0);
  std::size_t n[2] = {0, 0};
  for (auto l : data.labels) ++n[l ? 1 : 0];
  if (n[0] == 0 || n[1] == 0) throw std::invalid_argument("fisher: both classes must be present");
  for (std::size_t f = 0; f < data.cols; ++f) {
    double mean[2] = {0, 0}, var[2] = {0, 0};
    for (std::size_t r = 0; r < data.rows; ++r) mean[data.labels[r] ? 1 : 0] += data.at(r, f);
    for (int c = 0; c < 2; ++c) mean[c] /= static_cast<double>(n[c]);
    for (std::size_t r = 0; r < data.rows; ++r) {
      const int c = data.labels[r] ? 1 : 0;
      const double d = data.at(r, f) - mean[c];
      var[c] += d * d;
    }
    for (int c = 0; c < 2; ++c) var[c] /= static_cast<double>(n[c]);
    const double denom = var[0] + var[1];
    const double diff = mean[1] - mean[0];
    out[f] = denom > 0.0 ? diff * diff / denom : 0.0;
  }
  return out;
}

std::vector<double> fisher_map(const std::vector<PersistenceImage>& images, const std::vector<std::uint8_t>& labels) {
  if (images.empty()) throw std::invalid_argument("fisher_map: no images");
  if (images.size() != labels.size()) throw std::invalid_argument("fisher_map: label count mismatch");
  const auto& config = images.front().config;
  FeatureMatrix m(images.size(), images.front().pixels.size());
  for (std::size_t r = 0; r < images.size(); ++r) {
    if (!(images[r].config == config)) throw std::invalid_argument("fisher_map: mixed PI configurations");
    std::copy(images[r].pixels.begin(), images[r].pixels.end(), &m.values[r * m.cols]);
    m.labels[r] = labels[r];
  }
  return fisher_scores(m);
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: samples must be paired");
  if (a.size() < 5) throw std::invalid_argument("wilcoxon: need at least 5 pairs");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] - b[i] != 0.0) diffs.push_back(a[i] - b[i]);
  if (diffs.empty()) throw std::invalid_argument("wilcoxon: all differences are zero");

  const std::size_t n = diffs.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto x, auto y) { return std::abs(diffs[x]) < std::abs(diffs[y]); });
  // Twice the mid-rank keeps tied ranks integral.
  std::vector<long> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(diffs[idx[j + 1]]) == std::abs(diffs[idx[i]])) ++j;
    const long r2 = static_cast<long>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) rank2[idx[k]] = r2;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  long w2 = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (diffs[i] > 0) w2 += rank2[i];

  WilcoxonResult res;
  res.statistic = 0.5 * static_cast<double>(w2);
  res.n = n;
  if (n <= 25) {
    res.exact = true;
    const long total2 = std::accumulate(rank2.begin(), rank2.end(), 0L);
    std::vector<double> count(static_cast<std::size_t>(total2) + 1, 0.0);
    count[0] = 1.0;
    long reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
      reach += rank2[i];
      for (long s = reach; s >= rank2[i]; --s)
        count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - rank2[i])];
    }
    const double outcomes = std::ldexp(1.0, static_cast<int>(n));
    double lower = 0.0, upper = 0.0;
    for (long s = 0; s <= total2; ++s) {
      if (s <= w2) lower += count[static_cast<std::size_t>(s)];
      if (s >= w2) upper += count[static_cast<std::size_t>(s)];
    }
    res.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / outcomes);
  } else {
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double dev = std::abs(res.statistic - mean);
    const double z = var > 0.0 ? std::max(0.0, dev - 0.5) / std::sqrt(var) : 0.0;
    res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  }
  return res;
}

void write_results_csv(std::ostream& out, const std::vector<std::pair<std::string, RunResult>>& rows) {
  std::size_t reps = 0;
  for (const auto& [name, r] : rows) reps = std::max(reps, r.dsc_values.size());
  out << "config,repetitions";
  for (std::size_t k = 0; k < reps; ++k) out << ",dsc_" << std::setw(2) << std::setfill('0') << k << std::setfill(' ');
  out << ",median,std\n";
  const auto old_precision = out.precision(17);
  for (const auto& [name, r] : rows) {
    out << name << ',' << r.dsc_values.size();
    for (std::size_t k = 0; k < reps; ++k) {
      out << ',';
      if (k < r.dsc_values.size()) out << r.dsc_values[k];
    }
    out << ',' << r.median << ',' << r.std << '\n';
  }
  out.precision(old_precision);
}

void write_results_table(std::ostream& out, const std::vector<std::pair<std::string, RunResult>>& rows) {
  std::size_t width = 10;
  for (const auto& [name, r] : rows) width = std::max(width, name.size());
  out << std::left << std::setw(static_cast<int>(width)) << "descriptor" << "  DSC (median +- std)\n";
  out << std::string(width + 22, '-') << '\n';
  for (const auto& [name, r] : rows)
    out << std::left << std::setw(static_cast<int>(width)) << name << "  " << std::fixed << std::setprecision(4)
        << r.median << " +- " << r.std << '\n';
  out << std::defaultfloat;
}

}  // namespace topodesc
