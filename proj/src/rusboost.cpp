#include "topodesc/rusboost.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace topodesc {

FeatureMatrix FeatureMatrix::subset(const std::vector<std::size_t>& row_ids) const {
  FeatureMatrix out(row_ids.size(), cols);
  out.feature_names = feature_names;
  for (std::size_t r = 0; r < row_ids.size(); ++r) {
    std::copy_n(row(row_ids[r]), cols, &out.values[r * cols]);
    out.labels[r] = labels[row_ids[r]];
  }
  return out;
}

double DecisionTree::probability(const double* row) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(node)];
    node = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].probability;
}

int DecisionTree::depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].feature < 0) continue;
    for (int child : {nodes[i].left, nodes[i].right}) {
      depth[static_cast<std::size_t>(child)] = depth[i] + 1;
      deepest = std::max(deepest, depth[i] + 1);
    }
  }
  return deepest;
}

double capped_alpha() { return 0.5 * std::log(1e6); }

namespace {

struct Presorted {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint32_t> order;  // [feature][rank] -> row
  std::vector<std::uint8_t> constant;

  explicit Presorted(const FeatureMatrix& data) : rows(data.rows), cols(data.cols) {
    order.resize(rows * cols);
    constant.assign(cols, 1);
    std::vector<std::uint32_t> idx(rows);
    for (std::size_t f = 0; f < cols; ++f) {
      std::iota(idx.begin(), idx.end(), 0u);
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return data.at(a, f) < data.at(b, f); });
      std::copy(idx.begin(), idx.end(), order.begin() + static_cast<std::ptrdiff_t>(f * rows));
      if (rows > 0 && data.at(idx.front(), f) < data.at(idx.back(), f)) constant[f] = 0;
    }
  }
  const std::uint32_t* feature(std::size_t f) const { return &order[f * rows]; }
};

double gini(double w0, double w1) {
  const double w = w0 + w1;
  if (w <= 0.0) return 0.0;
  const double p0 = w0 / w, p1 = w1 / w;
  return 1.0 - p0 * p0 - p1 * p1;
}

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

struct NodeStats {
  double w0 = 0.0;
  double w1 = 0.0;
  std::size_t count = 0;
};

DecisionTree fit_presorted(const FeatureMatrix& data, const Presorted& sorted,
                           const std::vector<double>& weights, int max_depth,
                           std::vector<double>* importance, double importance_scale) {
  DecisionTree tree;
  tree.max_depth = max_depth;
  const std::size_t n = data.rows;
  std::vector<int> assign(n, -1);
  NodeStats root;
  for (std::size_t r = 0; r < n; ++r) {
    if (weights[r] <= 0.0) continue;
    assign[r] = 0;
    (data.labels[r] ? root.w1 : root.w0) += weights[r];
    ++root.count;
  }
  tree.nodes.push_back({-1, 0.0, -1, -1, 0.0});
  std::vector<NodeStats> stats{root};
  const double total_weight = root.w0 + root.w1;
  std::vector<int> frontier{0};

  for (int level = 0; level < max_depth && !frontier.empty(); ++level) {
    // Slots for nodes at this level that can still be split.
    std::vector<int> slot_of(tree.nodes.size(), -1);
    std::vector<int> open;
    for (int node : frontier) {
      const auto& s = stats[static_cast<std::size_t>(node)];
      if (s.w0 > 0.0 && s.w1 > 0.0 && s.count >= 2) {
        slot_of[static_cast<std::size_t>(node)] = static_cast<int>(open.size());
        open.push_back(node);
      }
    }
    if (open.empty()) break;

    std::vector<SplitCandidate> best(open.size());
    std::vector<double> left0(open.size()), left1(open.size()), last(open.size());
    std::vector<std::uint8_t> seen(open.size());
    for (std::size_t f = 0; f < data.cols; ++f) {
      if (sorted.constant[f]) continue;
      std::fill(left0.begin(), left0.end(), 0.0);
      std::fill(left1.begin(), left1.end(), 0.0);
      std::fill(seen.begin(), seen.end(), 0);
      const std::uint32_t* rows = sorted.feature(f);
      for (std::size_t k = 0; k < n; ++k) {
        const std::uint32_t r = rows[k];
        const int node = assign[r];
        if (node < 0) continue;
        const int slot = slot_of[static_cast<std::size_t>(node)];
        if (slot < 0) continue;
        const auto s = static_cast<std::size_t>(slot);
        const double v = data.at(r, f);
        if (seen[s] && v > last[s]) {
          const auto& ns = stats[static_cast<std::size_t>(node)];
          const double r0 = ns.w0 - left0[s], r1 = ns.w1 - left1[s];
          const double gain = (ns.w0 + ns.w1) * gini(ns.w0, ns.w1) -
                              (left0[s] + left1[s]) * gini(left0[s], left1[s]) -
                              (r0 + r1) * gini(r0, r1);
          if (gain > best[s].gain && gain > 1e-14 * (ns.w0 + ns.w1)) {
            double t = last[s] + (v - last[s]) / 2.0;
            if (!(t < v)) t = last[s];
            best[s] = {gain, static_cast<int>(f), t};
          }
        }
        (data.labels[r] ? left1[s] : left0[s]) += weights[r];
        last[s] = v;
        seen[s] = 1;
      }
    }

    std::vector<int> next;
    std::vector<int> left_child(tree.nodes.size(), -1), right_child(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < open.size(); ++s) {
      if (best[s].feature < 0) continue;
      const auto node = static_cast<std::size_t>(open[s]);
      const int l = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back({-1, 0.0, -1, -1, 0.0});
      tree.nodes.push_back({-1, 0.0, -1, -1, 0.0});
      stats.emplace_back();
      stats.emplace_back();
      tree.nodes[node].feature = best[s].feature;
      tree.nodes[node].threshold = best[s].threshold;
      tree.nodes[node].left = l;
      tree.nodes[node].right = l + 1;
      left_child[node] = l;
      right_child[node] = l + 1;
      next.push_back(l);
      next.push_back(l + 1);
      if (importance && total_weight > 0.0)
        (*importance)[static_cast<std::size_t>(best[s].feature)] +=
            importance_scale * best[s].gain / total_weight;
    }
    for (std::size_t r = 0; r < n; ++r) {
      const int node = assign[r];
      if (node < 0 || static_cast<std::size_t>(node) >= left_child.size()) continue;
      const auto nd = static_cast<std::size_t>(node);
      if (left_child[nd] < 0) continue;
      const auto& split = tree.nodes[nd];
      const int child = data.at(r, static_cast<std::size_t>(split.feature)) <= split.threshold
                            ? left_child[nd]
                            : right_child[nd];
      assign[r] = child;
      auto& cs = stats[static_cast<std::size_t>(child)];
      (data.labels[r] ? cs.w1 : cs.w0) += weights[r];
      ++cs.count;
    }
    frontier = std::move(next);
  }

  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const double w = stats[i].w0 + stats[i].w1;
    tree.nodes[i].probability = w > 0.0 ? stats[i].w1 / w : 0.0;
  }
  return tree;
}

void check_matrix(const FeatureMatrix& data) {
  if (data.values.size() != data.rows * data.cols || data.labels.size() != data.rows)
    throw std::invalid_argument("feature matrix shape mismatch");
  for (double v : data.values)
    if (!std::isfinite(v)) throw std::invalid_argument("feature matrix has non-finite values");
}

}  // namespace

DecisionTree fit_tree(const FeatureMatrix& data, const std::vector<double>& weights, int max_depth,
                      std::vector<double>* importance, double importance_scale) {
  check_matrix(data);
  if (weights.size() != data.rows) throw std::invalid_argument("weight count mismatch");
  if (max_depth < 1 || max_depth > 8) throw std::invalid_argument("tree depth must lie in [1, 8]");
  if (importance) importance->assign(data.cols, 0.0);
  const Presorted sorted(data);
  return fit_presorted(data, sorted, weights, max_depth, importance, importance_scale);
}

BoostedEnsemble train_rusboost(const FeatureMatrix& data, const RusBoostConfig& config,
                               WeightObserver observer, void* context) {
  check_matrix(data);
  if (config.rounds < 1) throw std::invalid_argument("RUSBoost needs at least one round");
  if (config.max_depth < 1 || config.max_depth > 8)
    throw std::invalid_argument("tree depth must lie in [1, 8]");
  if (!(config.undersample_ratio > 0.0)) throw std::invalid_argument("undersample ratio must be > 0");

  const std::size_t n = data.rows;
  std::vector<std::size_t> class_rows[2];
  for (std::size_t r = 0; r < n; ++r) class_rows[data.labels[r] ? 1 : 0].push_back(r);
  if (class_rows[0].empty() || class_rows[1].empty())
    throw std::invalid_argument("RUSBoost needs both classes in the training data");
  const int minority = class_rows[1].size() <= class_rows[0].size() ? 1 : 0;
  const auto& minority_rows = class_rows[minority];
  const auto& majority_rows = class_rows[1 - minority];
  const std::size_t keep_majority = std::min(
      majority_rows.size(),
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(
                                   config.undersample_ratio * static_cast<double>(minority_rows.size())))));

  BoostedEnsemble model;
  model.config = config;
  model.feature_names = data.feature_names;
  model.feature_count = data.cols;
  model.importance_raw.assign(data.cols, 0.0);

  const Presorted sorted(data);
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<double> sample_w(n), tree_importance(data.cols);
  std::vector<std::uint8_t> votes(n);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<double, std::size_t>> keys;

  for (int round = 0; round < config.rounds; ++round) {
    bool accepted = false;
    bool perfect = false;
    for (int attempt = 0; attempt <= config.max_retries && !accepted; ++attempt) {
      std::fill(sample_w.begin(), sample_w.end(), 0.0);
      if (config.undersample) {
        for (auto r : minority_rows) sample_w[r] = w[r];
        // Sampling without replacement via exponential keys; unit weights make it uniform.
        keys.clear();
        for (auto r : majority_rows) {
          const double u = std::max(unit(rng), std::numeric_limits<double>::min());
          const double wr = config.sampling == MajoritySampling::weighted ? w[r] : 1.0;
          keys.emplace_back(wr > 0.0 ? std::log(u) / wr : -std::numeric_limits<double>::infinity(), r);
        }
        std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(keep_majority),
                          keys.end(), [](const auto& a, const auto& b) {
                            return a.first > b.first || (a.first == b.first && a.second < b.second);
                          });
        for (std::size_t k = 0; k < keep_majority; ++k) sample_w[keys[k].second] = w[keys[k].second];
      } else {
        sample_w = w;
      }
      const double mass = std::accumulate(sample_w.begin(), sample_w.end(), 0.0);
      if (mass <= 0.0) break;
      for (auto& v : sample_w) v /= mass;

      std::fill(tree_importance.begin(), tree_importance.end(), 0.0);
      auto tree = fit_presorted(data, sorted, sample_w, config.max_depth, &tree_importance, 1.0);
      double error = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        votes[r] = static_cast<std::uint8_t>(tree.vote(data.row(r)));
        if (votes[r] != data.labels[r]) error += w[r];
      }
      if (error >= 0.5) continue;
      accepted = true;
      double alpha;
      if (error <= 0.0) {
        alpha = capped_alpha();
        perfect = true;
      } else {
        alpha = 0.5 * std::log((1.0 - error) / error);
      }
      for (std::size_t f = 0; f < data.cols; ++f) model.importance_raw[f] += alpha * tree_importance[f];
      model.trees.push_back(std::move(tree));
      model.alphas.push_back(alpha);
      if (!perfect) {
        const double up = std::exp(alpha), down = std::exp(-alpha);
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          w[r] *= votes[r] != data.labels[r] ? up : down;
          total += w[r];
        }
        for (auto& v : w) v /= total;
      }
      if (observer) observer(w, context);
    }
    if (!accepted || perfect) break;
  }

  if (model.trees.empty()) {
    // Nothing beat chance: fall back to the weighted class prior.
    double w1 = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      if (data.labels[r]) w1 += w[r];
    DecisionTree prior;
    prior.max_depth = config.max_depth;
    prior.nodes.push_back({-1, 0.0, -1, -1, w1});
    const double error = std::min(w1, 1.0 - w1);
    model.trees.push_back(prior);
    model.alphas.push_back(error > 0.0 ? 0.5 * std::log((1.0 - error) / error) : capped_alpha());
    model.degenerate = true;
  }
  return model;
}

Prediction predict(const BoostedEnsemble& ensemble, const FeatureMatrix& rows) {
  if (ensemble.trees.empty()) throw std::invalid_argument("predict: ensemble has no trees");
  if (rows.cols != ensemble.feature_count)
    throw std::invalid_argument("predict: expected " + std::to_string(ensemble.feature_count) +
                                " features, got " + std::to_string(rows.cols));
  if (!rows.feature_names.empty() && !ensemble.feature_names.empty() &&
      rows.feature_names != ensemble.feature_names)
    throw std::invalid_argument("predict: feature names do not match the training schema");
  const double alpha_sum = std::accumulate(ensemble.alphas.begin(), ensemble.alphas.end(), 0.0);
  Prediction out;
  out.scores.resize(rows.rows);
  out.labels.resize(rows.rows);
  for (std::size_t r = 0; r < rows.rows; ++r) {
    double s = 0.0;
    for (std::size_t t = 0; t < ensemble.trees.size(); ++t)
      s += ensemble.alphas[t] * ensemble.trees[t].vote(rows.row(r));
    const double score = alpha_sum > 0.0 ? s / alpha_sum : 0.5;
    out.scores[r] = score;
    out.labels[r] = score >= 0.5 ? 1 : 0;
  }
  return out;
}

std::vector<double> gini_importance(const BoostedEnsemble& ensemble) {
  if (ensemble.trees.empty()) throw std::invalid_argument("gini_importance: untrained ensemble");
  std::vector<double> out = ensemble.importance_raw;
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  if (total > 0.0)
    for (auto& v : out) v /= total;
  return out;
}

namespace {
constexpr const char* kSchema = "topodesc.rusboost.v1";
}

std::string model_to_json(const BoostedEnsemble& m) {
  nlohmann::json j;
  j["schema"] = kSchema;
  j["config"] = {{"rounds", m.config.rounds},
                 {"max_depth", m.config.max_depth},
                 {"undersample_ratio", m.config.undersample_ratio},
                 {"undersample", m.config.undersample},
                 {"max_retries", m.config.max_retries},
                 {"majority_sampling", m.config.sampling == MajoritySampling::weighted ? "weighted" : "uniform"},
                 {"seed", m.config.seed}};
  j["feature_names"] = m.feature_names;
  j["feature_count"] = m.feature_count;
  j["alphas"] = m.alphas;
  j["importance_raw"] = m.importance_raw;
  j["importance"] = gini_importance(m);
  j["degenerate"] = m.degenerate;
  auto trees = nlohmann::json::array();
  for (const auto& t : m.trees) {
    auto nodes = nlohmann::json::array();
    for (const auto& n : t.nodes)
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.probability});
    trees.push_back({{"max_depth", t.max_depth}, {"nodes", nodes}});
  }
  j["trees"] = trees;
  return j.dump(1);
}

BoostedEnsemble model_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("schema", "") != kSchema)
    throw std::runtime_error("model JSON: unsupported schema '" + j.value("schema", "") + "'");
  BoostedEnsemble m;
  const auto& c = j.at("config");
  m.config.rounds = c.at("rounds");
  m.config.max_depth = c.at("max_depth");
  m.config.undersample_ratio = c.at("undersample_ratio");
  m.config.undersample = c.at("undersample");
  m.config.max_retries = c.at("max_retries");
  m.config.sampling = c.value("majority_sampling", std::string("uniform")) == "weighted"
                          ? MajoritySampling::weighted
                          : MajoritySampling::uniform;
  m.config.seed = c.at("seed");
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.feature_count = j.at("feature_count");
  m.alphas = j.at("alphas").get<std::vector<double>>();
  m.importance_raw = j.at("importance_raw").get<std::vector<double>>();
  m.degenerate = j.value("degenerate", false);
  for (const auto& jt : j.at("trees")) {
    DecisionTree t;
    t.max_depth = jt.at("max_depth");
    for (const auto& jn : jt.at("nodes"))
      t.nodes.push_back({jn[0].get<int>(), jn[1].get<double>(), jn[2].get<int>(), jn[3].get<int>(),
                         jn[4].get<double>()});
    m.trees.push_back(std::move(t));
  }
  if (m.trees.size() != m.alphas.size()) throw std::runtime_error("model JSON: trees/alphas mismatch");
  return m;
}

void save_model(const BoostedEnsemble& ensemble, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model: " + path.string());
  out << model_to_json(ensemble) << '\n';
}

BoostedEnsemble load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read model: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

}  // namespace topodesc
