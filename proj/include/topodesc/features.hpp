#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "topodesc/clbp.hpp"
#include "topodesc/descriptors.hpp"
#include "topodesc/filtration.hpp"
#include "topodesc/grid.hpp"
#include "topodesc/persistence.hpp"
#include "topodesc/rusboost.hpp"

namespace topodesc {

/// A depth map with optional ground truth, tagged for training or evaluation.
struct LabeledMap {
  std::string id;
  DepthMap depth;
  std::optional<LabelMask> mask;
  bool train = true;
};

enum class InputChannel { depth, clbp_s, clbp_m, clbp_sm };
enum class DescriptorKind { pd_agg, pi, both };
enum class DimensionMode { merged, h0, h1, per_dim };
enum class ClbpThresholdScope { map, patch };

struct FeatureConfig {
  std::size_t patch_size = 128;
  std::size_t patch_step = 16;
  double label_threshold = 0.5;
  Normalization::Mode normalization = Normalization::Mode::global;
  InputChannel input = InputChannel::depth;
  ClbpConfig clbp;
  ClbpThresholdScope clbp_threshold = ClbpThresholdScope::map;
  Direction direction = Direction::sublevel;
  EssentialPolicy essential = EssentialPolicy::cap_at_max;
  DimensionMode dims = DimensionMode::merged;
  DescriptorKind descriptor = DescriptorKind::pi;
  bool drop_zero_length = true;
  PiConfig pi;
  /// When weighted PI is requested and this is unset, the maximum finite
  /// persistence over training patches is used.
  std::optional<double> pi_max_persistence;
  std::size_t threads = 1;
};

/// Finitized diagrams of one patch, one per input channel.
struct PatchDiagrams {
  std::string source_id;
  std::size_t row = 0;
  std::size_t col = 0;
  int label = -1;
  bool train = true;
  std::vector<PersistenceDiagram> channels;
};

struct FeatureRow {
  std::string source_id;
  std::size_t row = 0;
  std::size_t col = 0;
  int label = -1;  // -1 when unlabeled
  std::vector<double> values;
};

struct FeatureTable {
  std::vector<std::string> columns;
  std::vector<FeatureRow> rows;

  std::vector<std::size_t> rows_for(const std::vector<std::string>& source_ids) const;
  FeatureMatrix matrix(const std::vector<std::size_t>& row_ids) const;
};

std::size_t channel_count(InputChannel input);

/// Patch persistence diagrams for every map (raw diagrams are finitized by
/// config.essential). Output is ordered by map, then patch origin.
std::vector<PatchDiagrams> compute_patch_diagrams(const std::vector<LabeledMap>& maps,
                                                  const FeatureConfig& config);

/// Largest finite persistence over training patches after dimension selection.
double max_training_persistence(const std::vector<PatchDiagrams>& patches, const FeatureConfig& config);

std::vector<std::string> feature_columns(const FeatureConfig& config);

FeatureTable describe_patches(const std::vector<PatchDiagrams>& patches, const FeatureConfig& config);

FeatureTable extract_features(const std::vector<LabeledMap>& maps, const FeatureConfig& config);

/// CSV header: source_id,row,col,label,<feature columns>.
void write_feature_csv(const FeatureTable& table, std::ostream& out);
FeatureTable read_feature_csv(std::istream& in);

std::string to_string(InputChannel v);
std::string to_string(DescriptorKind v);
std::string to_string(DimensionMode v);
std::string to_string(Normalization::Mode v);
std::string to_string(ClbpEncoding v);
std::string to_string(Direction v);
std::string to_string(EssentialPolicy v);

}  // namespace topodesc
