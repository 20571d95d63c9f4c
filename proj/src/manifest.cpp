#include "topodesc/manifest.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace topodesc {

namespace fs = std::filesystem;

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  std::string line;
  if (!std::getline(in, line) || line.rfind("id,depth_path,mask_path,split", 0) != 0)
    throw std::runtime_error("manifest header must be id,depth_path,mask_path,split");
  std::vector<ManifestEntry> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 4) throw std::runtime_error("manifest line " + std::to_string(line_no) + ": expected 4 fields");
    ManifestEntry e;
    e.id = cells[0];
    e.depth_path = resolve(cells[1]);
    if (!cells[2].empty()) e.mask_path = resolve(cells[2]);
    e.split = cells[3];
    if (e.split != "train" && e.split != "eval")
      throw std::runtime_error("manifest line " + std::to_string(line_no) + ": split must be train or eval");
    out.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  const auto base = path.parent_path();
  auto rel = [&](const fs::path& p) { return p.is_absolute() ? p.lexically_relative(fs::absolute(base)) : p; };
  out << "id,depth_path,mask_path,split\n";
  for (const auto& e : entries)
    out << e.id << ',' << rel(e.depth_path).generic_string() << ','
        << (e.mask_path ? rel(*e.mask_path).generic_string() : std::string()) << ',' << e.split << '\n';
}

std::vector<LabeledMap> load_maps(const std::vector<ManifestEntry>& entries) {
  std::vector<LabeledMap> maps;
  for (const auto& e : entries) {
    LabeledMap m;
    m.id = e.id;
    m.depth = load_depth_map(e.depth_path);
    if (e.mask_path) m.mask = load_label_mask(*e.mask_path);
    m.train = e.split == "train";
    maps.push_back(std::move(m));
  }
  return maps;
}

std::vector<std::string> ids_with_split(const std::vector<ManifestEntry>& entries, const std::string& split) {
  std::vector<std::string> ids;
  for (const auto& e : entries)
    if (e.split == split) ids.push_back(e.id);
  return ids;
}

}  // namespace topodesc
