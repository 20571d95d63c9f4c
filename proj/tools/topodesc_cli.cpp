#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "topodesc/evaluation.hpp"
#include "topodesc/features.hpp"
#include "topodesc/manifest.hpp"
#include "topodesc/render.hpp"
#include "topodesc/synthetic.hpp"

namespace fs = std::filesystem;
using namespace topodesc;

namespace {

template <typename E>
E parse_enum(const std::string& value, const std::map<std::string, E>& names, const char* what) {
  const auto it = names.find(value);
  if (it == names.end()) throw std::invalid_argument(std::string("unknown ") + what + " '" + value + "'");
  return it->second;
}

const std::map<std::string, InputChannel> kInputs = {{"depth", InputChannel::depth},
                                                     {"clbp_s", InputChannel::clbp_s},
                                                     {"clbp_m", InputChannel::clbp_m},
                                                     {"clbp_sm", InputChannel::clbp_sm}};
const std::map<std::string, DescriptorKind> kDescriptors = {
    {"pd_agg", DescriptorKind::pd_agg}, {"pi", DescriptorKind::pi}, {"both", DescriptorKind::both}};
const std::map<std::string, DimensionMode> kDims = {{"merged", DimensionMode::merged},
                                                    {"h0", DimensionMode::h0},
                                                    {"h1", DimensionMode::h1},
                                                    {"per_dim", DimensionMode::per_dim}};
const std::map<std::string, Normalization::Mode> kNorms = {{"none", Normalization::Mode::none},
                                                           {"minmax", Normalization::Mode::minmax},
                                                           {"global", Normalization::Mode::global}};
const std::map<std::string, ClbpEncoding> kEncodings = {{"riu2", ClbpEncoding::riu2}, {"ri", ClbpEncoding::ri}};
const std::map<std::string, Direction> kDirections = {{"sublevel", Direction::sublevel},
                                                      {"superlevel", Direction::superlevel}};
const std::map<std::string, EssentialPolicy> kEssential = {{"cap_at_max", EssentialPolicy::cap_at_max},
                                                           {"drop_essential", EssentialPolicy::drop_essential}};
const std::map<std::string, ClbpThresholdScope> kScopes = {{"map", ClbpThresholdScope::map},
                                                           {"patch", ClbpThresholdScope::patch}};
const std::map<std::string, PiPlane> kPlanes = {{"birth_death", PiPlane::birth_death},
                                                {"birth_persistence", PiPlane::birth_persistence}};
const std::map<std::string, MajoritySampling> kSampling = {{"uniform", MajoritySampling::uniform},
                                                           {"weighted", MajoritySampling::weighted}};

std::vector<std::string> keys_of(const auto& names) {
  std::vector<std::string> out;
  for (const auto& [k, v] : names) out.push_back(k);
  return out;
}

// Option values as parsed; converted into library configs after parsing.
struct PiArgs {
  std::size_t resolution = 16;
  double sigma = 0.001;
  bool weighted = false;
  double birth_lo = 0.0, birth_hi = 1.0, death_lo = 0.0, death_hi = 1.0;
  double max_persistence = 0.0;
  std::string plane = "birth_death";

  void add(CLI::App* app) {
    app->add_option("--pi-resolution", resolution, "Persistence image side length");
    app->add_option("--pi-sigma", sigma, "Gaussian standard deviation");
    app->add_flag("--pi-weighted", weighted, "Weight points by persistence");
    app->add_option("--pi-birth-lo", birth_lo);
    app->add_option("--pi-birth-hi", birth_hi);
    app->add_option("--pi-death-lo", death_lo);
    app->add_option("--pi-death-hi", death_hi);
    app->add_option("--pi-max-persistence", max_persistence,
                    "Weight ramp saturation; 0 uses the training maximum");
    app->add_option("--pi-plane", plane)->check(CLI::IsMember(keys_of(kPlanes)));
  }
  PiConfig config() const {
    PiConfig c;
    c.resolution = resolution;
    c.sigma = sigma;
    c.weighted = weighted;
    c.birth_lo = birth_lo;
    c.birth_hi = birth_hi;
    c.death_lo = death_lo;
    c.death_hi = death_hi;
    if (max_persistence > 0.0) c.max_persistence = max_persistence;
    c.plane = parse_enum(plane, kPlanes, "PI plane");
    return c;
  }
};

struct FeatureArgs {
  std::size_t patch_size = 128;
  std::size_t patch_step = 16;
  double label_threshold = 0.5;
  std::string normalization = "global";
  std::string input = "depth";
  int clbp_radius = 5;
  int clbp_samples = 16;
  std::string clbp_encoding = "ri";
  std::string clbp_threshold = "map";
  std::string direction = "sublevel";
  std::string essential = "cap_at_max";
  std::string dims = "merged";
  std::string descriptor = "pi";
  bool keep_zero_length = false;
  PiArgs pi;
  std::size_t threads = 0;

  void add(CLI::App* app) {
    app->add_option("--patch-size", patch_size, "Patch side in pixels");
    app->add_option("--patch-step", patch_step, "Step between patch origins");
    app->add_option("--label-threshold", label_threshold, "Class-1 pixel fraction for a positive patch");
    app->add_option("--normalization", normalization)->check(CLI::IsMember(keys_of(kNorms)));
    app->add_option("--input", input, "Scalar field fed to the filtration")->check(CLI::IsMember(keys_of(kInputs)));
    app->add_option("--clbp-radius", clbp_radius);
    app->add_option("--clbp-samples", clbp_samples);
    app->add_option("--clbp-encoding", clbp_encoding)->check(CLI::IsMember(keys_of(kEncodings)));
    app->add_option("--clbp-threshold", clbp_threshold, "Scope of the CLBP_M magnitude mean")
        ->check(CLI::IsMember(keys_of(kScopes)));
    app->add_option("--direction", direction)->check(CLI::IsMember(keys_of(kDirections)));
    app->add_option("--essential", essential)->check(CLI::IsMember(keys_of(kEssential)));
    app->add_option("--dims", dims, "Homology dimensions feeding the descriptors")
        ->check(CLI::IsMember(keys_of(kDims)));
    app->add_option("--descriptor", descriptor)->check(CLI::IsMember(keys_of(kDescriptors)));
    app->add_flag("--keep-zero-length", keep_zero_length, "Keep zero-length intervals in the descriptors");
    pi.add(app);
    app->add_option("--threads", threads, "Worker threads; 0 means all cores");
  }
  FeatureConfig config() const {
    FeatureConfig c;
    c.patch_size = patch_size;
    c.patch_step = patch_step;
    c.label_threshold = label_threshold;
    c.normalization = parse_enum(normalization, kNorms, "normalization");
    c.input = parse_enum(input, kInputs, "input");
    c.clbp.radius = clbp_radius;
    c.clbp.samples = clbp_samples;
    c.clbp.encoding = parse_enum(clbp_encoding, kEncodings, "CLBP encoding");
    c.clbp_threshold = parse_enum(clbp_threshold, kScopes, "CLBP threshold scope");
    c.direction = parse_enum(direction, kDirections, "direction");
    c.essential = parse_enum(essential, kEssential, "essential policy");
    c.dims = parse_enum(dims, kDims, "dimension mode");
    c.descriptor = parse_enum(descriptor, kDescriptors, "descriptor");
    c.drop_zero_length = !keep_zero_length;
    c.pi = pi.config();
    if (pi.max_persistence > 0.0) c.pi_max_persistence = pi.max_persistence;
    c.threads = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    if (c.input != InputChannel::depth) c.clbp.validate();
    return c;
  }
};

struct ClassifierArgs {
  int rounds = 100;
  int depth = 3;
  double undersample_ratio = 1.0;
  bool no_undersample = false;
  std::string majority_sampling = "uniform";
  int max_retries = 10;

  void add(CLI::App* app) {
    app->add_option("--rounds", rounds, "Boosting rounds");
    app->add_option("--depth", depth, "Tree depth");
    app->add_option("--undersample-ratio", undersample_ratio, "Majority rows kept per minority row");
    app->add_flag("--no-undersample", no_undersample, "Plain AdaBoost on the full weighted set");
    app->add_option("--majority-sampling", majority_sampling)->check(CLI::IsMember(keys_of(kSampling)));
    app->add_option("--max-retries", max_retries, "Redraws for rounds with error >= 0.5");
  }
  RusBoostConfig config(std::uint64_t seed) const {
    RusBoostConfig c;
    c.rounds = rounds;
    c.max_depth = depth;
    c.undersample_ratio = undersample_ratio;
    c.undersample = !no_undersample;
    c.sampling = parse_enum(majority_sampling, kSampling, "majority sampling");
    c.max_retries = max_retries;
    c.seed = seed;
    return c;
  }
};

struct GridArgs {
  std::vector<int> rounds{50, 100, 200};
  std::vector<int> depths{1, 3, 5};
  int folds = 5;

  void add(CLI::App* app) {
    app->add_option("--grid-rounds", rounds, "Rounds tried by cross-validation")->delimiter(',');
    app->add_option("--grid-depths", depths, "Depths tried by cross-validation")->delimiter(',');
    app->add_option("--folds", folds, "Cross-validation folds");
  }
  HyperGrid grid() const { return {rounds, depths}; }
};

// Writes `<out>.config`: every option of the subcommand as `sub.key = value`,
// readable back with `topodesc --config <file> <sub>`.
void write_sidecar(CLI::App* sub, const fs::path& out) {
  const fs::path path = out.string() + ".config";
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file << "# topodesc " << sub->get_name() << "; rerun with: topodesc --config " << path.filename().string() << ' '
       << sub->get_name() << '\n';
  std::istringstream lines(sub->config_to_str(true, false));
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (line.empty() || line[0] == '#' || line[0] == '[' || eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    if (key == "help") continue;
    file << sub->get_name() << '.' << key << " = " << line.substr(eq + 1) << '\n';
  }
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

FeatureTable load_features(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open feature CSV " + path.string());
  return read_feature_csv(in);
}

PersistenceDiagram load_diagram(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open diagram CSV " + path.string());
  return read_diagram_csv(in);
}

std::vector<std::size_t> labeled_rows(const FeatureTable& table, const std::vector<std::size_t>& rows) {
  std::vector<std::size_t> out;
  for (auto r : rows)
    if (table.rows[r].label >= 0) out.push_back(r);
  return out;
}

std::vector<std::size_t> all_rows(const FeatureTable& table) {
  std::vector<std::size_t> rows(table.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return rows;
}

// Positions of the pi_ columns and the side of the square grid they form.
std::pair<std::vector<std::size_t>, std::size_t> pi_columns(const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i].rfind("pi_", 0) == 0) idx.push_back(i);
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(idx.size()))));
  if (idx.empty() || side * side != idx.size())
    throw std::invalid_argument("features do not contain a single square persistence image block");
  return {idx, side};
}

std::string sanitize(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological descriptors for depth-map micro-geometry classification"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "Read options from a sidecar config");
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic labeled dataset and its manifest");
  fs::path gen_out;
  std::size_t gen_count = 4, gen_size = 512, gen_train = 0;
  double gen_fraction = 0.166;
  std::uint64_t gen_seed = 1;
  std::string gen_format = "text";
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--count", gen_count, "Number of maps");
  gen->add_option("--size", gen_size, "Map side in pixels");
  gen->add_option("--train-count", gen_train, "Maps in the training split; 0 means half");
  gen->add_option("--fraction", gen_fraction, "Target class-1 pixel fraction");
  gen->add_option("--seed", gen_seed);
  gen->add_option("--format", gen_format, "Depth file format; png16 stores a min-max rescaled copy")
      ->check(CLI::IsMember({"text", "png16"}));

  // extract
  auto* ext = app.add_subcommand("extract", "Compute patch diagrams and descriptor features");
  fs::path ext_manifest, ext_depth, ext_mask, ext_out, ext_diagrams, ext_cells;
  std::string ext_id = "map";
  std::size_t ext_dump_patch = 0;
  FeatureArgs ext_features;
  ext->add_option("--manifest", ext_manifest, "Dataset manifest CSV");
  ext->add_option("--depth", ext_depth, "Single depth map (instead of a manifest)");
  ext->add_option("--mask", ext_mask, "Mask for --depth");
  ext->add_option("--id", ext_id, "Source id for --depth");
  ext->add_option("--out", ext_out, "Feature CSV")->required();
  ext->add_option("--diagrams", ext_diagrams, "Directory for per-patch diagram CSVs");
  ext->add_option("--dump-cells", ext_cells, "Debug: write the filtration cells of one patch as CSV");
  ext->add_option("--dump-patch", ext_dump_patch, "Patch index for --dump-cells");
  ext_features.add(ext);

  // train
  auto* trn = app.add_subcommand("train", "Train a RUSBoost model on feature rows");
  fs::path trn_features, trn_manifest, trn_out, trn_report;
  std::vector<std::string> trn_ids;
  std::uint64_t trn_seed = 1;
  bool trn_no_tune = false;
  ClassifierArgs trn_clf;
  GridArgs trn_grid;
  trn->add_option("--features", trn_features)->required();
  trn->add_option("--manifest", trn_manifest, "Use the rows of the manifest's training maps");
  trn->add_option("--train-ids", trn_ids, "Training map ids")->delimiter(',');
  trn->add_option("--out", trn_out, "Model JSON")->required();
  trn->add_option("--seed", trn_seed);
  trn->add_flag("--no-tune", trn_no_tune, "Skip cross-validated selection of rounds and depth");
  trn->add_option("--cv-report", trn_report, "Cross-validation report CSV; defaults to <out>.cv.csv");
  trn_clf.add(trn);
  trn_grid.add(trn);

  // predict
  auto* prd = app.add_subcommand("predict", "Label feature rows with a trained model");
  fs::path prd_model, prd_features, prd_manifest, prd_out;
  std::string prd_split;
  prd->add_option("--model", prd_model)->required();
  prd->add_option("--features", prd_features)->required();
  prd->add_option("--manifest", prd_manifest);
  prd->add_option("--split", prd_split, "Restrict to maps of this manifest split")->check(CLI::IsMember({"", "train", "eval"}));
  prd->add_option("--out", prd_out, "Prediction CSV")->required();

  // evaluate
  auto* evl = app.add_subcommand("evaluate", "Repeated-subset training and DSC on the evaluation maps");
  std::vector<fs::path> evl_features;
  std::vector<std::string> evl_names, evl_train_ids, evl_eval_ids;
  fs::path evl_manifest, evl_out, evl_table;
  ExperimentPlan plan_defaults;
  double evl_c1 = plan_defaults.class1_fraction, evl_c2 = plan_defaults.class2_fraction;
  int evl_reps = plan_defaults.repetitions;
  bool evl_no_tune = false;
  std::uint64_t evl_seed = 1;
  ClassifierArgs evl_clf;
  GridArgs evl_grid;
  evl->add_option("--features", evl_features, "Feature CSV; repeat to compare descriptors")->required();
  evl->add_option("--name", evl_names, "Row name per feature CSV");
  evl->add_option("--manifest", evl_manifest, "Manifest providing the train/eval split");
  evl->add_option("--train-ids", evl_train_ids)->delimiter(',');
  evl->add_option("--eval-ids", evl_eval_ids)->delimiter(',');
  evl->add_option("--out", evl_out, "Results CSV")->required();
  evl->add_option("--table", evl_table, "Human-readable results table");
  evl->add_option("--class1-fraction", evl_c1);
  evl->add_option("--class2-fraction", evl_c2);
  evl->add_option("--repetitions", evl_reps);
  evl->add_flag("--no-tune", evl_no_tune, "Skip cross-validated selection of rounds and depth");
  evl->add_option("--seed", evl_seed);
  evl_clf.add(evl);
  evl_grid.add(evl);

  // render
  auto* rnd = app.add_subcommand("render", "Draw a diagram, persistence image, importance or Fisher map");
  std::string rnd_kind = "diagram";
  fs::path rnd_input, rnd_out, rnd_manifest;
  std::size_t rnd_size = 512;
  PiArgs rnd_pi;
  rnd->add_option("--kind", rnd_kind)->check(CLI::IsMember({"diagram", "pi", "importance", "fisher"}));
  rnd->add_option("--input", rnd_input, "Diagram CSV, model JSON or feature CSV")->required();
  rnd->add_option("--out", rnd_out, "PNG path")->required();
  rnd->add_option("--size", rnd_size, "Image side in pixels");
  rnd->add_option("--manifest", rnd_manifest, "For fisher: restrict to training maps");
  rnd_pi.add(rnd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "topodesc: error kind=usage message=\"" << sanitize(e.what()) << "\"\n";
    return 2;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    if (active == gen) {
      if (gen_count < 1) throw std::invalid_argument("--count must be >= 1");
      fs::create_directories(gen_out);
      const auto specs = benchmark_specs(gen_count, gen_size, gen_size, gen_fraction, gen_seed);
      const std::size_t train_count = gen_train ? std::min(gen_train, gen_count) : std::max<std::size_t>(1, gen_count / 2);
      std::vector<std::pair<DepthMap, LabelMask>> maps;
      for (const auto& s : specs) maps.push_back(generate(s));
      double lo = 0.0, hi = 1.0;
      if (gen_format == "png16") {
        std::vector<const DepthMap*> all;
        for (auto& m : maps) all.push_back(&m.first);
        std::tie(lo, hi) = value_bounds(all);
        if (!(hi > lo)) hi = lo + 1.0;
      }
      std::vector<ManifestEntry> entries;
      for (std::size_t k = 0; k < maps.size(); ++k) {
        char id[32];
        std::snprintf(id, sizeof id, "map%02zu", k);
        ManifestEntry e;
        e.id = id;
        e.split = k < train_count ? "train" : "eval";
        if (gen_format == "png16") {
          DepthMap scaled = maps[k].first;
          for (auto& v : scaled.values) v = (v - lo) / (hi - lo);
          e.depth_path = e.id + "_depth.png";
          save_depth_map_png16(scaled, gen_out / e.depth_path);
        } else {
          e.depth_path = e.id + "_depth.txt";
          save_depth_map_text(maps[k].first, gen_out / e.depth_path);
        }
        e.mask_path = e.id + "_mask.png";
        save_label_mask(maps[k].second, gen_out / *e.mask_path);
        entries.push_back(std::move(e));
      }
      write_manifest(entries, gen_out / "manifest.csv");
      write_sidecar(gen, gen_out / "manifest.csv");
      std::cout << "wrote " << entries.size() << " maps to " << gen_out.string() << '\n';
    } else if (active == ext) {
      std::vector<LabeledMap> maps;
      if (!ext_manifest.empty()) {
        maps = load_maps(read_manifest(ext_manifest));
      } else if (!ext_depth.empty()) {
        LabeledMap m;
        m.id = ext_id;
        m.depth = load_depth_map(ext_depth);
        if (!ext_mask.empty()) m.mask = load_label_mask(ext_mask);
        maps.push_back(std::move(m));
      } else {
        throw std::invalid_argument("extract needs --manifest or --depth");
      }
      const auto config = ext_features.config();
      const auto diagrams = compute_patch_diagrams(maps, config);
      const auto table = describe_patches(diagrams, config);
      auto out = open_out(ext_out);
      write_feature_csv(table, out);
      if (!ext_diagrams.empty()) {
        fs::create_directories(ext_diagrams);
        for (const auto& p : diagrams)
          for (std::size_t c = 0; c < p.channels.size(); ++c) {
            std::string name = p.source_id + "_r" + std::to_string(p.row) + "_c" + std::to_string(p.col);
            if (p.channels.size() > 1) name += "_ch" + std::to_string(c);
            std::ofstream d(ext_diagrams / (name + ".csv"));
            write_diagram_csv(p.channels[c], d);
          }
      }
      if (!ext_cells.empty()) {
        if (config.input != InputChannel::depth) throw std::invalid_argument("--dump-cells supports depth input only");
        std::vector<Patch> patches;
        for (const auto& m : maps) {
          auto ps = extract_patches(m.depth, nullptr, config.patch_size, config.patch_step, config.label_threshold, m.id);
          patches.insert(patches.end(), ps.begin(), ps.end());
        }
        if (ext_dump_patch >= patches.size()) throw std::invalid_argument("--dump-patch out of range");
        const auto f = build_filtration(patches[ext_dump_patch], config.direction);
        auto cells = open_out(ext_cells);
        write_cells_csv(f, cells);
      }
      write_sidecar(ext, ext_out);
      std::cout << "wrote " << table.rows.size() << " feature rows with " << table.columns.size() << " columns\n";
    } else if (active == trn) {
      const auto table = load_features(trn_features);
      std::vector<std::string> ids = trn_ids;
      if (!trn_manifest.empty()) ids = ids_with_split(read_manifest(trn_manifest), "train");
      const auto rows = labeled_rows(table, ids.empty() ? all_rows(table) : table.rows_for(ids));
      if (rows.empty()) throw std::invalid_argument("no labeled training rows");
      const auto data = table.matrix(rows);
      auto config = trn_clf.config(trn_seed);
      if (!trn_no_tune) {
        const auto cv = cross_validate(data, config, trn_grid.grid(), trn_grid.folds, trn_seed);
        config = cv.best;
        const fs::path report = trn_report.empty() ? fs::path(trn_out.string() + ".cv.csv") : trn_report;
        auto out = open_out(report);
        out << "rounds,depth,mean_dsc\n";
        out.precision(17);
        for (const auto& e : cv.entries) out << e.rounds << ',' << e.depth << ',' << e.mean_dsc << '\n';
      }
      const auto model = train_rusboost(data, config);
      if (trn_out.has_parent_path()) fs::create_directories(trn_out.parent_path());
      save_model(model, trn_out);
      write_sidecar(trn, trn_out);
      std::cout << "trained " << model.trees.size() << " trees on " << data.rows << " rows"
                << (model.degenerate ? " (degenerate: prior only)" : "") << '\n';
    } else if (active == prd) {
      const auto model = load_model(prd_model);
      const auto table = load_features(prd_features);
      std::vector<std::size_t> rows = all_rows(table);
      if (!prd_split.empty()) {
        if (prd_manifest.empty()) throw std::invalid_argument("--split needs --manifest");
        rows = table.rows_for(ids_with_split(read_manifest(prd_manifest), prd_split));
      }
      const auto result = predict(model, table.matrix(rows));
      auto out = open_out(prd_out);
      out << "source_id,row,col,score,label\n";
      out.precision(17);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = table.rows[rows[k]];
        out << r.source_id << ',' << r.row << ',' << r.col << ',' << result.scores[k] << ','
            << static_cast<int>(result.labels[k]) << '\n';
      }
      write_sidecar(prd, prd_out);
      std::cout << "predicted " << rows.size() << " rows\n";
    } else if (active == evl) {
      ExperimentPlan plan;
      if (!evl_manifest.empty()) {
        const auto entries = read_manifest(evl_manifest);
        plan.train_ids = ids_with_split(entries, "train");
        plan.eval_ids = ids_with_split(entries, "eval");
      }
      if (!evl_train_ids.empty()) plan.train_ids = evl_train_ids;
      if (!evl_eval_ids.empty()) plan.eval_ids = evl_eval_ids;
      plan.class1_fraction = evl_c1;
      plan.class2_fraction = evl_c2;
      plan.repetitions = evl_reps;
      plan.folds = evl_grid.folds;
      plan.tune = !evl_no_tune;
      plan.grid = evl_grid.grid();
      plan.seed = evl_seed;
      if (!evl_names.empty() && evl_names.size() != evl_features.size())
        throw std::invalid_argument("--name must be given once per --features");
      std::vector<std::pair<std::string, RunResult>> results;
      for (std::size_t k = 0; k < evl_features.size(); ++k) {
        const auto table = load_features(evl_features[k]);
        const std::string name = evl_names.empty() ? evl_features[k].stem().string() : evl_names[k];
        results.emplace_back(name, run_experiment(plan, table, evl_clf.config(evl_seed)));
      }
      auto out = open_out(evl_out);
      write_results_csv(out, results);
      std::ostringstream table;
      write_results_table(table, results);
      if (results.size() == 2 && plan.repetitions >= 5) {
        try {
          const auto w = wilcoxon_signed_rank(results[0].second.dsc_values, results[1].second.dsc_values);
          table << "wilcoxon " << results[0].first << " vs " << results[1].first << ": W+ = " << w.statistic
                << ", p = " << w.p_value << (w.exact ? " (exact)" : " (normal)") << '\n';
        } catch (const std::invalid_argument& e) {
          table << "wilcoxon: " << e.what() << '\n';
        }
      }
      std::cout << table.str();
      if (!evl_table.empty()) open_out(evl_table) << table.str();
      write_sidecar(evl, evl_out);
    } else if (active == rnd) {
      io::RgbImage image;
      if (rnd_kind == "diagram") {
        image = render_diagram(load_diagram(rnd_input), rnd_size);
      } else if (rnd_kind == "pi") {
        auto diagram = load_diagram(rnd_input);
        const auto config = rnd_pi.config();
        // Essential deaths have no value range here; cap them at the top of the death axis.
        diagram.value_max = config.death_hi;
        const auto pi = persistence_image(finitize(diagram, EssentialPolicy::cap_at_max), config);
        image = render_heatmap(pi.pixels, config.resolution, rnd_size);
      } else if (rnd_kind == "importance") {
        const auto model = load_model(rnd_input);
        const auto importance = gini_importance(model);
        const auto [idx, side] = pi_columns(model.feature_names);
        std::vector<double> grid;
        for (auto i : idx) grid.push_back(importance[i]);
        image = render_heatmap(grid, side, rnd_size);
      } else {
        const auto table = load_features(rnd_input);
        auto rows = all_rows(table);
        if (!rnd_manifest.empty()) rows = table.rows_for(ids_with_split(read_manifest(rnd_manifest), "train"));
        const auto data = table.matrix(labeled_rows(table, rows));
        const auto scores = fisher_scores(data);
        const auto [idx, side] = pi_columns(table.columns);
        std::vector<double> grid;
        for (auto i : idx) grid.push_back(scores[i]);
        image = render_heatmap(grid, side, rnd_size);
      }
      if (rnd_out.has_parent_path()) fs::create_directories(rnd_out.parent_path());
      io::write_rgb_png(image, rnd_out);
      write_sidecar(rnd, rnd_out);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "topodesc: error kind=invalid_argument command=" << active->get_name() << " message=\""
              << sanitize(e.what()) << "\"\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "topodesc: error kind=runtime command=" << active->get_name() << " message=\""
              << sanitize(e.what()) << "\"\n";
    return 1;
  }
  return 0;
}
