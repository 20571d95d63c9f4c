#include "topodesc/features.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "topodesc/parallel.hpp"

namespace topodesc {

std::vector<std::size_t> FeatureTable::rows_for(const std::vector<std::string>& ids) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (std::find(ids.begin(), ids.end(), rows[i].source_id) != ids.end()) out.push_back(i);
  return out;
}

FeatureMatrix FeatureTable::matrix(const std::vector<std::size_t>& row_ids) const {
  FeatureMatrix m(row_ids.size(), columns.size());
  m.feature_names = columns;
  for (std::size_t r = 0; r < row_ids.size(); ++r) {
    const auto& src = rows[row_ids[r]];
    if (src.values.size() != columns.size()) throw std::invalid_argument("feature row width mismatch");
    std::copy(src.values.begin(), src.values.end(), &m.values[r * m.cols]);
    m.labels[r] = src.label == 1 ? 1 : 0;
  }
  return m;
}

std::size_t channel_count(InputChannel input) { return input == InputChannel::clbp_sm ? 2 : 1; }

namespace {

struct Channels {
  std::vector<DepthMap> fields;
  std::optional<LabelMask> mask;
  // CLBP internals, kept for patch-scoped magnitude thresholds.
  std::optional<ClbpMaps> clbp;
  std::vector<double> differences;
  std::vector<bool> is_m;
};

Channels make_channels(const LabeledMap& map, const FeatureConfig& config) {
  Channels ch;
  if (config.input == InputChannel::depth) {
    ch.fields.push_back(map.depth);
    ch.is_m.push_back(false);
    ch.mask = map.mask;
    return ch;
  }
  ch.clbp = clbp_maps(map.depth, config.clbp);
  if (config.clbp_threshold == ClbpThresholdScope::patch)
    ch.differences = clbp_differences(map.depth, config.clbp);
  if (config.input == InputChannel::clbp_s || config.input == InputChannel::clbp_sm) {
    ch.fields.push_back(clbp_to_patch(*ch.clbp, ClbpComponent::s));
    ch.is_m.push_back(false);
  }
  if (config.input == InputChannel::clbp_m || config.input == InputChannel::clbp_sm) {
    ch.fields.push_back(clbp_to_patch(*ch.clbp, ClbpComponent::m));
    ch.is_m.push_back(true);
  }
  if (map.mask) {
    const auto off = ch.clbp->offset;
    LabelMask crop(ch.clbp->width, ch.clbp->height);
    for (std::size_t r = 0; r < crop.height; ++r)
      for (std::size_t c = 0; c < crop.width; ++c) crop.at(r, c) = map.mask->at(r + off, c + off);
    ch.mask = std::move(crop);
  }
  return ch;
}

std::vector<DimensionSelection> dimension_blocks(DimensionMode mode) {
  switch (mode) {
    case DimensionMode::merged: return {DimensionSelection::merged};
    case DimensionMode::h0: return {DimensionSelection::h0};
    case DimensionMode::h1: return {DimensionSelection::h1};
    case DimensionMode::per_dim: return {DimensionSelection::h0, DimensionSelection::h1};
  }
  return {DimensionSelection::merged};
}

}  // namespace

std::vector<PatchDiagrams> compute_patch_diagrams(const std::vector<LabeledMap>& maps,
                                                  const FeatureConfig& config) {
  if (maps.empty()) throw std::invalid_argument("no input maps");
  std::vector<Channels> channels;
  channels.reserve(maps.size());
  for (const auto& m : maps) {
    if (m.mask && (m.mask->width != m.depth.width || m.mask->height != m.depth.height))
      throw std::invalid_argument("mask dimensions do not match depth map '" + m.id + "'");
    channels.push_back(make_channels(m, config));
  }

  Normalization norm;
  norm.mode = config.normalization;
  if (config.normalization == Normalization::Mode::global) {
    if (config.input == InputChannel::depth) {
      std::vector<const DepthMap*> train;
      for (std::size_t i = 0; i < maps.size(); ++i)
        if (maps[i].train) train.push_back(&channels[i].fields[0]);
      if (train.empty())
        for (auto& c : channels) train.push_back(&c.fields[0]);
      auto [lo, hi] = value_bounds(train);
      if (!(hi > lo)) hi = lo + 1.0;
      norm = Normalization::global_bounds(lo, hi);
    } else {
      norm = Normalization::global_bounds(
          0.0, static_cast<double>(code_count(config.clbp.encoding, config.clbp.samples) - 1));
    }
  }

  struct Job {
    std::size_t map;
    std::vector<Patch> patches;  // one per channel
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < maps.size(); ++m) {
    const auto& ch = channels[m];
    std::vector<std::vector<Patch>> per_channel;
    for (std::size_t c = 0; c < ch.fields.size(); ++c)
      per_channel.push_back(extract_patches(ch.fields[c], ch.mask ? &*ch.mask : nullptr, config.patch_size,
                                            config.patch_step, config.label_threshold, maps[m].id));
    for (std::size_t p = 0; p < per_channel[0].size(); ++p) {
      Job job{m, {}};
      for (auto& pc : per_channel) job.patches.push_back(std::move(pc[p]));
      jobs.push_back(std::move(job));
    }
  }

  std::vector<PatchDiagrams> out(jobs.size());
  parallel_for(jobs.size(), config.threads, [&](std::size_t j) {
    auto& job = jobs[j];
    const auto& ch = channels[job.map];
    auto& rec = out[j];
    const auto& first = job.patches[0];
    rec.source_id = maps[job.map].id;
    rec.row = first.row;
    rec.col = first.col;
    rec.label = first.label.value_or(-1);
    rec.train = maps[job.map].train;
    for (std::size_t c = 0; c < job.patches.size(); ++c) {
      Patch patch = std::move(job.patches[c]);
      if (ch.is_m[c] && config.clbp_threshold == ClbpThresholdScope::patch) {
        const auto codes = clbp_m_window(ch.differences, *ch.clbp, config.clbp, patch.row, patch.col,
                                         patch.size);
        for (std::size_t k = 0; k < codes.size(); ++k) patch.values[k] = codes[k];
      }
      const auto normalized = normalize_patch(patch, norm);
      const auto filtration = build_filtration(normalized.patch, config.direction);
      auto diagram = finitize(compute_persistence(filtration), config.essential);
      if (config.drop_zero_length)
        std::erase_if(diagram.points, [](const DiagramPoint& p) { return p.death == p.birth; });
      diagram.points.shrink_to_fit();
      rec.channels.push_back(std::move(diagram));
    }
  });
  return out;
}

double max_training_persistence(const std::vector<PatchDiagrams>& patches, const FeatureConfig& config) {
  double best = 0.0;
  const auto blocks = dimension_blocks(config.dims);
  bool any_train = std::any_of(patches.begin(), patches.end(), [](const auto& p) { return p.train; });
  for (const auto& p : patches) {
    if (any_train && !p.train) continue;
    for (const auto& d : p.channels)
      for (const auto& pt : d.points) {
        const bool wanted = std::any_of(blocks.begin(), blocks.end(), [&](DimensionSelection s) {
          return s == DimensionSelection::merged || (s == DimensionSelection::h0) == (pt.dim == 0);
        });
        if (wanted && !pt.essential()) best = std::max(best, pt.persistence());
      }
  }
  return best;
}

std::vector<std::string> feature_columns(const FeatureConfig& config) {
  std::vector<std::string> names;
  const std::size_t blocks = channel_count(config.input) * dimension_blocks(config.dims).size();
  const std::size_t pi_size = config.pi.resolution * config.pi.resolution;
  std::size_t agg = 0, pi = 0;
  char buf[32];
  for (std::size_t b = 0; b < blocks; ++b) {
    if (config.descriptor != DescriptorKind::pi)
      for (std::size_t k = 0; k < PdAggDescriptor::kSize; ++k) {
        std::snprintf(buf, sizeof buf, "pd_agg_%02zu", agg++);
        names.emplace_back(buf);
      }
    if (config.descriptor != DescriptorKind::pd_agg)
      for (std::size_t k = 0; k < pi_size; ++k) {
        std::snprintf(buf, sizeof buf, "pi_%04zu", pi++);
        names.emplace_back(buf);
      }
  }
  return names;
}

FeatureTable describe_patches(const std::vector<PatchDiagrams>& patches, const FeatureConfig& config) {
  FeatureTable table;
  table.columns = feature_columns(config);
  PiConfig pi = config.pi;
  if (pi.weighted)
    pi.max_persistence = config.pi_max_persistence.value_or(max_training_persistence(patches, config));
  if (config.descriptor != DescriptorKind::pd_agg) pi.validate();
  const auto blocks = dimension_blocks(config.dims);

  table.rows.resize(patches.size());
  parallel_for(patches.size(), config.threads, [&](std::size_t i) {
    const auto& p = patches[i];
    auto& row = table.rows[i];
    row.source_id = p.source_id;
    row.row = p.row;
    row.col = p.col;
    row.label = p.label;
    row.values.reserve(table.columns.size());
    for (const auto& diagram : p.channels) {
      for (auto sel : blocks) {
        const auto d = select_dimensions(diagram, sel);
        if (config.descriptor != DescriptorKind::pi) {
          const auto agg = pd_agg(d, config.drop_zero_length);
          row.values.insert(row.values.end(), agg.values.begin(), agg.values.end());
        }
        if (config.descriptor != DescriptorKind::pd_agg) {
          const auto image = persistence_image(d, pi);
          row.values.insert(row.values.end(), image.pixels.begin(), image.pixels.end());
        }
      }
    }
  });
  return table;
}

FeatureTable extract_features(const std::vector<LabeledMap>& maps, const FeatureConfig& config) {
  return describe_patches(compute_patch_diagrams(maps, config), config);
}

void write_feature_csv(const FeatureTable& table, std::ostream& out) {
  out << "source_id,row,col,label";
  for (const auto& c : table.columns) out << ',' << c;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& r : table.rows) {
    out << r.source_id << ',' << r.row << ',' << r.col << ',' << r.label;
    for (double v : r.values) out << ',' << v;
    out << '\n';
  }
  out.precision(old_precision);
}

FeatureTable read_feature_csv(std::istream& in) {
  FeatureTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("feature CSV: empty input");
  {
    std::istringstream header(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(header, cell, ',')) cells.push_back(cell);
    if (cells.size() < 4 || cells[0] != "source_id" || cells[1] != "row" || cells[2] != "col" ||
        cells[3] != "label")
      throw std::runtime_error("feature CSV: header must start with source_id,row,col,label");
    table.columns.assign(cells.begin() + 4, cells.end());
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    FeatureRow row;
    std::size_t start = 0, field = 0;
    row.values.reserve(table.columns.size());
    while (start <= line.size()) {
      auto end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      const std::string cell = line.substr(start, end - start);
      switch (field) {
        case 0: row.source_id = cell; break;
        case 1: row.row = std::stoul(cell); break;
        case 2: row.col = std::stoul(cell); break;
        case 3: row.label = std::stoi(cell); break;
        default: row.values.push_back(std::stod(cell));
      }
      ++field;
      start = end + 1;
    }
    if (row.values.size() != table.columns.size())
      throw std::runtime_error("feature CSV: wrong field count on line " + std::to_string(line_no));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string to_string(InputChannel v) {
  switch (v) {
    case InputChannel::depth: return "depth";
    case InputChannel::clbp_s: return "clbp_s";
    case InputChannel::clbp_m: return "clbp_m";
    case InputChannel::clbp_sm: return "clbp_sm";
  }
  return "?";
}
std::string to_string(DescriptorKind v) {
  switch (v) {
    case DescriptorKind::pd_agg: return "pd_agg";
    case DescriptorKind::pi: return "pi";
    case DescriptorKind::both: return "both";
  }
  return "?";
}
std::string to_string(DimensionMode v) {
  switch (v) {
    case DimensionMode::merged: return "merged";
    case DimensionMode::h0: return "h0";
    case DimensionMode::h1: return "h1";
    case DimensionMode::per_dim: return "per_dim";
  }
  return "?";
}
std::string to_string(Normalization::Mode v) {
  switch (v) {
    case Normalization::Mode::none: return "none";
    case Normalization::Mode::minmax: return "minmax";
    case Normalization::Mode::global: return "global";
  }
  return "?";
}
std::string to_string(ClbpEncoding v) { return v == ClbpEncoding::riu2 ? "riu2" : "ri"; }
std::string to_string(Direction v) { return v == Direction::sublevel ? "sublevel" : "superlevel"; }
std::string to_string(EssentialPolicy v) {
  return v == EssentialPolicy::cap_at_max ? "cap_at_max" : "drop_essential";
}

}  // namespace topodesc
