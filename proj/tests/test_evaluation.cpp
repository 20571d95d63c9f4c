#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "topodesc/evaluation.hpp"

using namespace topodesc;

namespace {

using Labels = std::vector<std::uint8_t>;

// Two-sided p by enumerating all 2^n sign assignments of the ranked magnitudes.
double brute_force_p(const std::vector<double>& d) {
  std::vector<double> mag;
  for (double v : d)
    if (v != 0.0) mag.push_back(std::abs(v));
  const std::size_t n = mag.size();
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      below += mag[j] < mag[i];
      equal += mag[j] == mag[i];
    }
    rank[i] = below + (equal + 1) / 2.0;
  }
  double observed = 0;
  for (std::size_t i = 0, k = 0; i < d.size(); ++i)
    if (d[i] != 0.0) observed += d[i] > 0 ? rank[k++] : (k++, 0.0);
  double lower = 0, upper = 0;
  const std::uint32_t total = 1u << n;
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) w += rank[i];
    lower += w <= observed + 1e-9;
    upper += w >= observed - 1e-9;
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / total);
}

FeatureTable toy_table(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  FeatureTable t;
  t.columns = {"f0", "f1"};
  for (const char* id : {"a", "b", "c"})
    for (std::size_t k = 0; k < 120; ++k) {
      FeatureRow r;
      r.source_id = id;
      r.row = k;
      r.label = k % 5 == 0 ? 1 : 0;
      r.values = {noise(rng) + 2.0 * r.label, noise(rng)};
      t.rows.push_back(r);
    }
  return t;
}

Trainer constant_trainer(std::uint8_t label) {
  return [label](const FeatureMatrix&) -> Predictor {
    return [label](const FeatureMatrix& rows) { return Labels(rows.rows, label); };
  };
}

}  // namespace

TEST_CASE("dsc unit cases") {
  CHECK(dsc({1, 1, 0, 1}, {1, 1, 0, 1}) == 1.0);
  CHECK(dsc({1, 1, 0, 0}, {0, 0, 1, 1}) == 0.0);
  CHECK(dsc({1, 1, 1, 1, 0, 0}, {1, 1, 0, 0, 1, 1}) == 0.5);
  CHECK(dsc({0, 0}, {0, 0}) == 1.0);
  CHECK(dsc({0, 0}, {0, 1}) == 0.0);
  CHECK_THROWS(dsc({1}, {1, 0}));
}

TEST_CASE("dsc symmetry and identity") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    Labels x(n), y(n);
    for (auto& v : x) v = rng() % 2;
    for (auto& v : y) v = rng() % 2;
    const double d = dsc(x, y);
    REQUIRE(d == dsc(y, x));
    REQUIRE(d >= 0.0);
    REQUIRE(d <= 1.0);
    REQUIRE((d == 1.0) == (x == y));
  }
}

TEST_CASE("median and sample std") {
  CHECK(median_of({3, 1, 2}) == 2);
  CHECK(median_of({4, 1, 2, 3}) == 2.5);
  CHECK(sample_std({1, 2, 3, 4}) == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(sample_std({7}) == 0.0);
  const auto r = RunResult::summarize({0.5, 0.9, 0.7});
  CHECK(r.median == median_of(r.dsc_values));
  CHECK(r.std == sample_std(r.dsc_values));
}

TEST_CASE("training subsets have exact class counts") {
  Labels labels(100, 0);
  for (std::size_t i = 0; i < 17; ++i) labels[i * 5] = 1;
  const auto rows = sample_training_rows(labels, 0.5, 0.3, 4);
  std::size_t pos = 0;
  for (auto r : rows) pos += labels[r];
  CHECK(pos == 9);                 // round(8.5) away from zero
  CHECK(rows.size() - pos == 25);  // round(0.3 * 83)
  CHECK(std::is_sorted(rows.begin(), rows.end()));
  CHECK(sample_training_rows(labels, 0.5, 0.3, 4) == rows);
  CHECK(sample_training_rows(labels, 0.5, 0.3, 5) != rows);
}

TEST_CASE("plan validation") {
  ExperimentPlan p;
  p.train_ids = {"a"};
  p.eval_ids = {"b"};
  CHECK_NOTHROW(p.validate());
  p.eval_ids = {"a"};
  CHECK_THROWS(p.validate());
  p.eval_ids = {"b"};
  p.class1_fraction = 0;
  CHECK_THROWS(p.validate());
  p.class1_fraction = 1.0;
  p.repetitions = 0;
  CHECK_THROWS(p.validate());
}

TEST_CASE("run_experiment with stub classifiers") {
  const auto table = toy_table(1);
  ExperimentPlan plan;
  plan.train_ids = {"a", "b"};
  plan.eval_ids = {"c"};
  plan.repetitions = 4;
  // Oracle stub: the feature f0 carries the label exactly when noise is removed.
  auto exact = table;
  for (auto& r : exact.rows) r.values[0] = r.label;
  const Trainer oracle = [](const FeatureMatrix&) -> Predictor {
    return [](const FeatureMatrix& rows) {
      Labels out(rows.rows);
      for (std::size_t r = 0; r < rows.rows; ++r) out[r] = rows.at(r, 0) > 0.5;
      return out;
    };
  };
  const auto perfect = run_experiment(plan, exact, RusBoostConfig{}, oracle);
  CHECK(perfect.dsc_values == std::vector<double>(4, 1.0));
  CHECK(perfect.median == 1.0);
  CHECK(perfect.std == 0.0);
  const auto none = run_experiment(plan, table, RusBoostConfig{}, constant_trainer(0));
  CHECK(none.dsc_values == std::vector<double>(4, 0.0));
}

TEST_CASE("run_experiment with RUSBoost is reproducible") {
  const auto table = toy_table(2);
  ExperimentPlan plan;
  plan.train_ids = {"a", "b"};
  plan.eval_ids = {"c"};
  plan.repetitions = 3;
  plan.tune = false;
  RusBoostConfig c;
  c.rounds = 10;
  const auto r1 = run_experiment(plan, table, c);
  const auto r2 = run_experiment(plan, table, c);
  CHECK(r1.dsc_values == r2.dsc_values);
  CHECK(r1.chosen.size() == 3);
  CHECK(r1.chosen[1].seed == plan.seed + 1);
  CHECK(r1.median > 0.4);
}

TEST_CASE("run_experiment errors") {
  const auto table = toy_table(3);
  ExperimentPlan plan;
  plan.train_ids = {"a"};
  plan.eval_ids = {"zzz"};
  CHECK_THROWS_AS(run_experiment(plan, table, RusBoostConfig{}), std::invalid_argument);
  plan.train_ids = {"missing"};
  plan.eval_ids = {"c"};
  CHECK_THROWS_AS(run_experiment(plan, table, RusBoostConfig{}), std::invalid_argument);
  auto unlabeled = table;
  for (auto& r : unlabeled.rows)
    if (r.source_id == "c") r.label = -1;
  plan.train_ids = {"a"};
  CHECK_THROWS_AS(run_experiment(plan, unlabeled, RusBoostConfig{}), std::invalid_argument);
}

TEST_CASE("cross-validation picks from the grid") {
  const auto table = toy_table(4);
  const auto m = table.matrix(table.rows_for({"a", "b"}));
  HyperGrid grid{{5, 10}, {1, 2}};
  const auto cv = cross_validate(m, RusBoostConfig{}, grid, 3, 1);
  CHECK(cv.entries.size() == 4);
  const auto best = std::max_element(cv.entries.begin(), cv.entries.end(),
                                     [](const auto& a, const auto& b) { return a.mean_dsc < b.mean_dsc; });
  CHECK(cv.best.rounds == best->rounds);
  CHECK(cv.best.max_depth == best->depth);
  CHECK(cv.best_score == best->mean_dsc);
  CHECK_THROWS(cross_validate(m, RusBoostConfig{}, grid, 1, 1));
}

TEST_CASE("fisher scores") {
  FeatureMatrix m(4, 3);
  m.labels = {0, 0, 1, 1};
  const double f1[] = {1, 3, 1, 3};  // identical class distributions
  const double f2[] = {-1, 1, 1.5, 3.5};  // shift 2.5, unit variance per class
  for (std::size_t r = 0; r < 4; ++r) {
    m.at(r, 0) = 2.0;
    m.at(r, 1) = f1[r];
    m.at(r, 2) = f2[r];
  }
  const auto s = fisher_scores(m);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == 0.0);
  CHECK(s[2] == doctest::Approx(2.5 * 2.5 / 2.0));
  auto shifted = m;
  for (std::size_t r = 0; r < 4; ++r) shifted.at(r, 2) += 10.0;
  CHECK(fisher_scores(shifted)[2] == doctest::Approx(s[2]));
  FeatureMatrix single(2, 1);
  CHECK_THROWS(fisher_scores(single));
}

TEST_CASE("fisher map over persistence images") {
  PiConfig c;
  c.resolution = 2;
  PersistenceImage a{c, {0, 0, 0, 1}}, b{c, {0, 0, 0, 3}}, d{c, {0, 0, 0, 5}}, e{c, {0, 0, 0, 7}};
  const auto map = fisher_map({a, b, d, e}, {0, 0, 1, 1});
  CHECK(map.size() == 4);
  CHECK(map[3] == doctest::Approx(16.0 / 2.0));
  auto other = c;
  other.sigma = 0.5;
  PersistenceImage f{other, {0, 0, 0, 1}};
  CHECK_THROWS(fisher_map({a, f}, {0, 1}));
}

TEST_CASE("wilcoxon constant shift") {
  std::vector<double> b = {0.1, 0.4, 0.3, 0.9, 0.5, 0.2, 0.8, 0.7, 0.6, 0.05};
  std::vector<double> a = b;
  for (auto& v : a) v += 0.25;
  const auto r = wilcoxon_signed_rank(a, b);
  CHECK(r.exact);
  CHECK(r.n == 10);
  CHECK(r.statistic == 55);
  CHECK(r.p_value == doctest::Approx(2.0 / 1024.0).epsilon(1e-12));
  CHECK(r.p_value <= 0.01);
}

TEST_CASE("wilcoxon exact branch matches enumeration") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 5 + rng() % 8;
    std::vector<double> a(n), b(n, 0.0), d(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Small integer differences produce ties and zeros.
      a[i] = static_cast<double>(static_cast<int>(rng() % 9) - 4);
      d[i] = a[i];
    }
    if (std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; })) continue;
    const auto r = wilcoxon_signed_rank(a, b);
    REQUIRE(r.exact);
    REQUIRE(r.p_value == doctest::Approx(brute_force_p(d)).epsilon(1e-12));
  }
}

TEST_CASE("wilcoxon normal approximation tracks the exact distribution") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 30;
    std::vector<double> a(n), b(n, 0.0);
    for (auto& v : a) v = z(rng) + 0.3;
    const auto r = wilcoxon_signed_rank(a, b);
    REQUIRE_FALSE(r.exact);
    // Exact two-sided p by dynamic programming over integer ranks (no ties).
    std::vector<double> count(n * (n + 1) / 2 + 1, 0.0);
    count[0] = 1;
    for (std::size_t k = 1; k <= n; ++k)
      for (std::size_t s = count.size() - 1; s >= k; --s) count[s] += count[s - k];
    const auto w = static_cast<std::size_t>(r.statistic);
    double lower = 0, upper = 0;
    for (std::size_t s = 0; s < count.size(); ++s) {
      if (s <= w) lower += count[s];
      if (s >= w) upper += count[s];
    }
    const double exact = std::min(1.0, 2.0 * std::min(lower, upper) / std::ldexp(1.0, 30));
    REQUIRE(std::abs(r.p_value - exact) < 0.01);
  }
}

TEST_CASE("wilcoxon p-values are uniform under the null") {
  for (std::size_t n : {20u, 40u}) {
    std::mt19937_64 rng(100 + n);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> p;
    for (int sim = 0; sim < 500; ++sim) {
      std::vector<double> a(n), b(n);
      for (auto& v : a) v = z(rng);
      for (auto& v : b) v = z(rng);
      p.push_back(wilcoxon_signed_rank(a, b).p_value);
    }
    std::sort(p.begin(), p.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double hi = static_cast<double>(i + 1) / p.size(), lo = static_cast<double>(i) / p.size();
      ks = std::max({ks, hi - p[i], p[i] - lo});
    }
    // Critical value of the one-sample KS statistic at alpha 0.05.
    CHECK(ks < 1.358 / std::sqrt(500.0));
  }
}

TEST_CASE("wilcoxon preconditions") {
  CHECK_THROWS(wilcoxon_signed_rank({1, 2, 3, 4}, {0, 0, 0, 0}));
  CHECK_THROWS(wilcoxon_signed_rank({1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}));
  CHECK_THROWS(wilcoxon_signed_rank({1, 2, 3, 4, 5}, {1, 2, 3, 4}));
}

TEST_CASE("results CSV and table") {
  std::vector<std::pair<std::string, RunResult>> rows = {{"pi_r16", RunResult::summarize({0.5, 0.75})},
                                                          {"pd_agg", RunResult::summarize({0.25})}};
  std::ostringstream csv;
  write_results_csv(csv, rows);
  CHECK(csv.str() ==
        "config,repetitions,dsc_00,dsc_01,median,std\n"
        "pi_r16,2,0.5,0.75,0.625,0.17677669529663689\n"
        "pd_agg,1,0.25,,0.25,0\n");
  std::ostringstream table;
  write_results_table(table, rows);
  CHECK(table.str().find("pi_r16") != std::string::npos);
  CHECK(table.str().find("0.6250 +- 0.1768") != std::string::npos);
}
