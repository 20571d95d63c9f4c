#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "blobs.hpp"
#include "test_util.hpp"
#include "topodesc/rusboost.hpp"

using namespace topodesc;

namespace {

FeatureMatrix separable(std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FeatureMatrix m(rows, 2);
  for (std::size_t r = 0; r < rows; ++r) {
    m.at(r, 0) = u(rng);
    m.at(r, 1) = u(rng);
    m.labels[r] = m.at(r, 0) + 0.5 * m.at(r, 1) > 0.2 ? 1 : 0;
  }
  return m;
}

double accuracy(const FeatureMatrix& m, const std::vector<std::uint8_t>& labels) {
  std::size_t ok = 0;
  for (std::size_t r = 0; r < m.rows; ++r) ok += labels[r] == m.labels[r];
  return static_cast<double>(ok) / static_cast<double>(m.rows);
}

void check_distribution(const std::vector<double>& w, void* ctx) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  auto* failures = static_cast<int*>(ctx);
  if (std::abs(total - 1.0) > 1e-12) ++*failures;
  for (double v : w)
    if (v < 0.0) ++*failures;
}

}  // namespace

TEST_CASE("single tree fits a threshold exactly") {
  FeatureMatrix m(6, 1);
  const double xs[] = {0.1, 0.2, 0.3, 0.7, 0.8, 0.9};
  for (std::size_t r = 0; r < 6; ++r) {
    m.at(r, 0) = xs[r];
    m.labels[r] = r >= 3;
  }
  std::vector<double> importance;
  const auto tree = fit_tree(m, std::vector<double>(6, 1.0 / 6), 1, &importance);
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.nodes[0].feature == 0);
  CHECK(tree.nodes[0].threshold == doctest::Approx(0.5));
  CHECK(tree.depth() == 1);
  // Root Gini 0.5, children pure: decrease 0.5 per unit weight.
  CHECK(importance[0] == doctest::Approx(0.5));
  for (std::size_t r = 0; r < 6; ++r) CHECK(tree.vote(m.row(r)) == m.labels[r]);
}

TEST_CASE("split ties prefer the lowest feature index") {
  FeatureMatrix m(4, 3);
  for (std::size_t r = 0; r < 4; ++r) {
    m.labels[r] = r >= 2;
    for (std::size_t c = 0; c < 3; ++c) m.at(r, c) = static_cast<double>(r);
  }
  m.at(0, 0) = m.at(1, 0) = m.at(2, 0) = m.at(3, 0) = 5.0;  // constant column
  const auto tree = fit_tree(m, std::vector<double>(4, 0.25), 2);
  CHECK(tree.nodes[0].feature == 1);
  CHECK(tree.depth() == 1);
}

TEST_CASE("tree depth is bounded and leaf probabilities are valid") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = testing::imbalanced_blobs(300, 4, 0.3, 1.0, seed);
    for (int depth = 1; depth <= 8; ++depth) {
      const auto tree = fit_tree(m, std::vector<double>(m.rows, 1.0 / m.rows), depth);
      REQUIRE(tree.depth() <= depth);
      for (const auto& n : tree.nodes) {
        REQUIRE(n.probability >= 0.0);
        REQUIRE(n.probability <= 1.0);
        if (n.feature >= 0) {
          REQUIRE(n.left > 0);
          REQUIRE(n.right > 0);
          REQUIRE(static_cast<std::size_t>(n.right) < tree.nodes.size());
        }
      }
    }
  }
  CHECK_THROWS(fit_tree(separable(10, 1), std::vector<double>(10, 0.1), 0));
  CHECK_THROWS(fit_tree(separable(10, 1), std::vector<double>(10, 0.1), 9));
}

TEST_CASE("separable data reaches zero training error") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = separable(200, seed);
    RusBoostConfig c;
    c.rounds = 10;
    c.seed = seed;
    const auto model = train_rusboost(m, c);
    CHECK(accuracy(m, predict(model, m).labels) == 1.0);
    CHECK_FALSE(model.degenerate);
  }
}

TEST_CASE("random labels stay near the prior") {
  int within = 0;
  double mean_gap = 0.0;
  const std::size_t test_rows = 400;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    FeatureMatrix all(200 + test_rows, 3);
    for (std::size_t r = 0; r < all.rows; ++r) {
      for (std::size_t c = 0; c < 3; ++c) all.at(r, c) = u(rng);
      all.labels[r] = u(rng) < 0.5 ? 1 : 0;
    }
    std::vector<std::size_t> train(200), test(test_rows);
    std::iota(train.begin(), train.end(), 0);
    std::iota(test.begin(), test.end(), 200);
    const auto tr = all.subset(train), te = all.subset(test);
    RusBoostConfig c;
    c.rounds = 10;
    c.seed = seed;
    const double acc = accuracy(te, predict(train_rusboost(tr, c), te).labels);
    // Accuracy of always predicting the training majority class.
    double train_pos = 0, test_pos = 0;
    for (auto l : tr.labels) train_pos += l;
    for (auto l : te.labels) test_pos += l;
    const double p = (2 * train_pos >= static_cast<double>(tr.rows) ? test_pos : test_rows - test_pos) / test_rows;
    // Both accuracies carry binomial noise, so the band uses the std of their difference.
    const double band = 3.0 * std::sqrt(2.0 * p * (1.0 - p) / test_rows);
    within += std::abs(acc - p) <= band;
    mean_gap += (acc - p) / 50.0;
  }
  CHECK(within >= 48);
  CHECK(std::abs(mean_gap) <= 3.0 * std::sqrt(2.0) * 0.025 / std::sqrt(50.0));
}

TEST_CASE("undersampling improves minority recall over plain boosting") {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto train = testing::imbalanced_blobs(1200, 2, 0.166, 1.2, 100 + seed);
    const auto test = testing::imbalanced_blobs(1200, 2, 0.166, 1.2, 200 + seed);
    RusBoostConfig c;
    c.rounds = 20;
    c.seed = seed;
    const double rus = testing::minority_recall(test, predict(train_rusboost(train, c), test).labels);
    c.undersample = false;
    const double ada = testing::minority_recall(test, predict(train_rusboost(train, c), test).labels);
    wins += rus > ada;
  }
  CHECK(wins >= 8);
}

TEST_CASE("boosting weights remain a distribution") {
  int failures = 0;
  const auto m = testing::imbalanced_blobs(500, 3, 0.2, 0.8, 9);
  RusBoostConfig c;
  c.rounds = 30;
  train_rusboost(m, c, check_distribution, &failures);
  CHECK(failures == 0);
}

TEST_CASE("fixed seed is deterministic") {
  const auto m = testing::imbalanced_blobs(400, 5, 0.2, 0.7, 3);
  RusBoostConfig c;
  c.rounds = 25;
  c.seed = 77;
  const auto a = train_rusboost(m, c), b = train_rusboost(m, c);
  CHECK(model_to_json(a) == model_to_json(b));
  CHECK(predict(a, m).scores == predict(b, m).scores);
  c.seed = 78;
  CHECK(model_to_json(train_rusboost(m, c)) != model_to_json(a));
}

TEST_CASE("scaling one feature column leaves predictions unchanged") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = testing::imbalanced_blobs(300, 3, 0.25, 0.9, seed);
    auto scaled = m;
    for (std::size_t r = 0; r < m.rows; ++r) scaled.at(r, 1) *= 3.7;
    RusBoostConfig c;
    c.rounds = 15;
    c.seed = seed;
    CHECK(predict(train_rusboost(m, c), m).labels == predict(train_rusboost(scaled, c), scaled).labels);
  }
}

TEST_CASE("predicted labels follow row permutations") {
  const auto m = testing::imbalanced_blobs(300, 3, 0.25, 0.9, 5);
  RusBoostConfig c;
  c.rounds = 15;
  const auto model = train_rusboost(m, c);
  std::vector<std::size_t> perm(m.rows);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(1);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto base = predict(model, m).labels;
  const auto shuffled = predict(model, m.subset(perm)).labels;
  for (std::size_t k = 0; k < perm.size(); ++k) REQUIRE(shuffled[k] == base[perm[k]]);
}

TEST_CASE("prediction conventions") {
  DecisionTree yes, no;
  yes.nodes.push_back({-1, 0, -1, -1, 0.9});
  no.nodes.push_back({-1, 0, -1, -1, 0.1});
  BoostedEnsemble e;
  e.feature_count = 1;
  e.trees = {yes};
  e.alphas = {1.0};
  FeatureMatrix row(1, 1);
  CHECK(predict(e, row).labels[0] == 1);
  e.trees = {no};
  CHECK(predict(e, row).labels[0] == 0);
  e.trees = {yes, no};
  e.alphas = {0.7, 0.7};
  CHECK(predict(e, row).scores[0] == 0.5);
  CHECK(predict(e, row).labels[0] == 1);
  FeatureMatrix wrong(1, 2);
  CHECK_THROWS_AS(predict(e, wrong), std::invalid_argument);
  e.feature_names = {"a"};
  row.feature_names = {"b"};
  CHECK_THROWS_AS(predict(e, row), std::invalid_argument);
  CHECK_THROWS_AS(predict(BoostedEnsemble{}, row), std::invalid_argument);
}

TEST_CASE("single informative feature dominates importance") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FeatureMatrix m(400, 4);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < 4; ++c) m.at(r, c) = u(rng);
    m.labels[r] = m.at(r, 0) > 0.6 ? 1 : 0;
  }
  RusBoostConfig c;
  c.rounds = 10;
  c.max_depth = 1;
  const auto imp = gini_importance(train_rusboost(m, c));
  CHECK(imp[0] == doctest::Approx(1.0));
  CHECK(std::accumulate(imp.begin(), imp.end(), 0.0) == doctest::Approx(1.0));
  CHECK_THROWS(gini_importance(BoostedEnsemble{}));
}

TEST_CASE("duplicated informative feature splits the same importance") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto base = testing::imbalanced_blobs(400, 3, 0.3, 0.0, seed);
    for (std::size_t r = 0; r < base.rows; ++r) base.at(r, 0) += base.labels[r] ? 1.5 : 0.0;
    FeatureMatrix dup(base.rows, 4);
    dup.labels = base.labels;
    for (std::size_t r = 0; r < base.rows; ++r) {
      dup.at(r, 0) = base.at(r, 0);
      dup.at(r, 1) = base.at(r, 0);
      dup.at(r, 2) = base.at(r, 1);
      dup.at(r, 3) = base.at(r, 2);
    }
    RusBoostConfig c;
    c.rounds = 20;
    c.seed = seed;
    const auto single = gini_importance(train_rusboost(base, c));
    const auto twin = gini_importance(train_rusboost(dup, c));
    CHECK(twin[0] + twin[1] == doctest::Approx(single[0]).epsilon(1e-9));
  }
}

TEST_CASE("degenerate and invalid inputs") {
  FeatureMatrix constant(20, 2);
  for (std::size_t r = 0; r < 20; ++r) constant.labels[r] = r < 5;
  const auto model = train_rusboost(constant, RusBoostConfig{});
  CHECK(model.degenerate);
  CHECK(model.trees.size() == 1);
  CHECK(predict(model, constant).labels == std::vector<std::uint8_t>(20, 0));
  CHECK(gini_importance(model) == std::vector<double>{0, 0});

  FeatureMatrix one_class(10, 1);
  CHECK_THROWS_AS(train_rusboost(one_class, RusBoostConfig{}), std::invalid_argument);
  auto bad = separable(10, 1);
  bad.at(0, 0) = std::nan("");
  CHECK_THROWS_AS(train_rusboost(bad, RusBoostConfig{}), std::invalid_argument);
  RusBoostConfig zero;
  zero.rounds = 0;
  CHECK_THROWS_AS(train_rusboost(separable(10, 1), zero), std::invalid_argument);
}

TEST_CASE("perfect first round stops with the capped alpha") {
  FeatureMatrix m(4, 1);
  for (std::size_t r = 0; r < 4; ++r) {
    m.at(r, 0) = static_cast<double>(r);
    m.labels[r] = r >= 2;
  }
  const auto model = train_rusboost(m, RusBoostConfig{});
  CHECK(model.trees.size() == 1);
  CHECK(model.alphas[0] == doctest::Approx(0.5 * std::log(1e6)));
}

TEST_CASE("model JSON round trip") {
  const auto m = testing::imbalanced_blobs(200, 3, 0.25, 1.0, 2);
  auto data = m;
  data.feature_names = {"f0", "f1", "f2"};
  RusBoostConfig c;
  c.rounds = 12;
  const auto model = train_rusboost(data, c);
  const auto path = testing::temp_dir("rusboost") / "model.json";
  save_model(model, path);
  const auto back = load_model(path);
  CHECK(model_to_json(back) == model_to_json(model));
  CHECK(predict(back, data).scores == predict(model, data).scores);
  c.sampling = MajoritySampling::weighted;
  const auto weighted = train_rusboost(data, c);
  CHECK(load_model((save_model(weighted, path), path)).config.sampling == MajoritySampling::weighted);
  CHECK(back.feature_names == data.feature_names);
  CHECK_THROWS(model_from_json(R"({"schema":"other"})"));
  CHECK_THROWS(load_model(testing::temp_dir("rusboost") / "missing.json"));
}
