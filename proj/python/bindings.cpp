#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>

#include "topodesc/clbp.hpp"
#include "topodesc/descriptors.hpp"
#include "topodesc/evaluation.hpp"
#include "topodesc/features.hpp"
#include "topodesc/filtration.hpp"
#include "topodesc/persistence.hpp"
#include "topodesc/rusboost.hpp"
#include "topodesc/synthetic.hpp"

namespace py = pybind11;
using namespace topodesc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

template <typename E>
E lookup(const std::string& name, const std::map<std::string, E>& table) {
  const auto it = table.find(name);
  if (it == table.end()) throw py::value_error("unknown option '" + name + "'");
  return it->second;
}

Direction direction_of(const std::string& s) {
  return lookup<Direction>(s, {{"sublevel", Direction::sublevel}, {"superlevel", Direction::superlevel}});
}

DepthMap to_map(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  DepthMap m(a.shape(1), a.shape(0));
  std::copy(a.data(), a.data() + a.size(), m.values.begin());
  return m;
}

Array diagram_array(const PersistenceDiagram& d) {
  Array out({static_cast<py::ssize_t>(d.points.size()), py::ssize_t{3}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < d.points.size(); ++i) {
    v(i, 0) = d.points[i].dim;
    v(i, 1) = d.points[i].birth;
    v(i, 2) = d.points[i].death;
  }
  return out;
}

PersistenceDiagram from_array(const Array& a) {
  if (a.size() == 0) return {};
  if (a.ndim() != 2 || a.shape(1) != 3) throw py::value_error("diagram must have shape (n, 3): dim, birth, death");
  PersistenceDiagram d;
  auto v = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) d.points.push_back({static_cast<int>(v(i, 0)), v(i, 1), v(i, 2)});
  return d;
}

CubicalFiltration filtration_of(const Array& pixels, const std::string& direction) {
  if (pixels.ndim() != 2) throw py::value_error("expected a 2-D array");
  return build_filtration(pixels.shape(0), pixels.shape(1), std::span<const double>(pixels.data(), pixels.size()),
                          direction_of(direction));
}

FeatureMatrix to_matrix(const Array& x, const ByteArray* y) {
  if (x.ndim() != 2) throw py::value_error("X must be 2-D");
  FeatureMatrix m(x.shape(0), x.shape(1));
  std::copy(x.data(), x.data() + x.size(), m.values.begin());
  if (y) {
    if (y->size() != x.shape(0)) throw py::value_error("y length must match the rows of X");
    std::copy(y->data(), y->data() + y->size(), m.labels.begin());
  }
  return m;
}

Array vector_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

template <typename T>
py::array_t<T> grid_array(const std::vector<T>& v, std::size_t rows, std::size_t cols) {
  py::array_t<T> out({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cubical persistence, persistence images, CLBP and RUSBoost";

  m.def(
      "persistence",
      [](const Array& pixels, const std::string& direction) {
        return diagram_array(compute_persistence(filtration_of(pixels, direction)));
      },
      py::arg("pixels"), py::arg("direction") = "sublevel",
      "Persistence diagram of a 2-D array as rows (dim, birth, death); essential deaths are inf.");
  m.def(
      "oracle_persistence",
      [](const Array& pixels, const std::string& direction) {
        return diagram_array(oracle_persistence(filtration_of(pixels, direction)));
      },
      py::arg("pixels"), py::arg("direction") = "sublevel");
  m.def(
      "betti_numbers",
      [](const Array& pixels, double r, const std::string& direction) {
        const auto b = betti_numbers(filtration_of(pixels, direction), r);
        return py::make_tuple(b.b0, b.b1);
      },
      py::arg("pixels"), py::arg("r"), py::arg("direction") = "sublevel");

  m.attr("PD_AGG_NAMES") = PdAggDescriptor::names();
  m.def(
      "pd_agg",
      [](const Array& diagram, bool drop_zero_length) {
        const auto a = pd_agg(from_array(diagram), drop_zero_length);
        return vector_array({a.values.begin(), a.values.end()});
      },
      py::arg("diagram"), py::arg("drop_zero_length") = false);
  m.def(
      "persistence_image",
      [](const Array& diagram, std::size_t resolution, double sigma, bool weighted, double max_persistence,
         std::pair<double, double> birth_range, std::pair<double, double> death_range, const std::string& plane) {
        PiConfig c;
        c.resolution = resolution;
        c.sigma = sigma;
        c.weighted = weighted;
        c.max_persistence = max_persistence;
        std::tie(c.birth_lo, c.birth_hi) = birth_range;
        std::tie(c.death_lo, c.death_hi) = death_range;
        c.plane = lookup<PiPlane>(plane, {{"birth_death", PiPlane::birth_death},
                                          {"birth_persistence", PiPlane::birth_persistence}});
        const auto pi = persistence_image(from_array(diagram), c);
        return grid_array(pi.pixels, resolution, resolution);
      },
      py::arg("diagram"), py::arg("resolution") = 16, py::arg("sigma") = 0.001, py::arg("weighted") = false,
      py::arg("max_persistence") = 1.0, py::arg("birth_range") = std::pair{0.0, 1.0},
      py::arg("death_range") = std::pair{0.0, 1.0}, py::arg("plane") = "birth_death",
      "Persistence image; row i is death bin i, column j is birth bin j.");

  m.def(
      "clbp",
      [](const Array& depth, int radius, int samples, const std::string& encoding) {
        ClbpConfig c;
        c.radius = radius;
        c.samples = samples;
        c.encoding = lookup<ClbpEncoding>(encoding, {{"riu2", ClbpEncoding::riu2}, {"ri", ClbpEncoding::ri}});
        const auto maps = clbp_maps(to_map(depth), c);
        return py::make_tuple(grid_array(maps.s_map, maps.height, maps.width),
                              grid_array(maps.m_map, maps.height, maps.width), maps.magnitude_threshold);
      },
      py::arg("depth"), py::arg("radius") = 5, py::arg("samples") = 16, py::arg("encoding") = "ri",
      "CLBP_S and CLBP_M code maps over the valid interior, plus the magnitude threshold.");

  m.def(
      "generate_synthetic",
      [](std::size_t size, double fraction, std::uint64_t seed) {
        const auto spec = benchmark_specs(1, size, size, fraction, seed).front();
        const auto [depth, mask] = generate(spec);
        return py::make_tuple(grid_array(depth.values, depth.height, depth.width),
                              grid_array(mask.labels, mask.height, mask.width));
      },
      py::arg("size") = 512, py::arg("fraction") = 0.166, py::arg("seed") = 1,
      "Synthetic depth map with engraved strokes and its class-1 mask.");

  m.def(
      "patch_features",
      [](const Array& depth, std::optional<ByteArray> mask, std::size_t patch_size, std::size_t patch_step,
         const std::string& descriptor, std::size_t pi_resolution, double pi_sigma, std::size_t threads) {
        LabeledMap map;
        map.id = "map";
        map.depth = to_map(depth);
        if (mask) {
          if (mask->ndim() != 2 || mask->shape(0) != depth.shape(0) || mask->shape(1) != depth.shape(1))
            throw py::value_error("mask shape must match depth");
          LabelMask lm(depth.shape(1), depth.shape(0));
          std::copy(mask->data(), mask->data() + mask->size(), lm.labels.begin());
          map.mask = std::move(lm);
        }
        FeatureConfig c;
        c.patch_size = patch_size;
        c.patch_step = patch_step;
        c.descriptor = lookup<DescriptorKind>(
            descriptor, {{"pi", DescriptorKind::pi}, {"pd_agg", DescriptorKind::pd_agg}, {"both", DescriptorKind::both}});
        c.pi.resolution = pi_resolution;
        c.pi.sigma = pi_sigma;
        c.threads = std::max<std::size_t>(1, threads);
        const auto table = extract_features({map}, c);
        std::vector<double> values;
        std::vector<int> labels;
        std::vector<std::size_t> origins;
        for (const auto& r : table.rows) {
          values.insert(values.end(), r.values.begin(), r.values.end());
          labels.push_back(r.label);
          origins.push_back(r.row);
          origins.push_back(r.col);
        }
        return py::make_tuple(grid_array(values, table.rows.size(), table.columns.size()),
                              py::array_t<int>(static_cast<py::ssize_t>(labels.size()), labels.data()),
                              grid_array(origins, table.rows.size(), 2), table.columns);
      },
      py::arg("depth"), py::arg("mask") = py::none(), py::arg("patch_size") = 128, py::arg("patch_step") = 16,
      py::arg("descriptor") = "pi", py::arg("pi_resolution") = 16, py::arg("pi_sigma") = 0.001,
      py::arg("threads") = 1,
      "Per-patch descriptors of one map under global normalization: (X, labels, origins, column names).");

  py::class_<BoostedEnsemble>(m, "RusBoost")
      .def_static(
          "fit",
          [](const Array& x, const ByteArray& y, int rounds, int max_depth, double undersample_ratio,
             bool undersample, const std::string& sampling, std::uint64_t seed) {
            RusBoostConfig c;
            c.rounds = rounds;
            c.max_depth = max_depth;
            c.undersample_ratio = undersample_ratio;
            c.undersample = undersample;
            c.sampling = lookup<MajoritySampling>(
                sampling, {{"uniform", MajoritySampling::uniform}, {"weighted", MajoritySampling::weighted}});
            c.seed = seed;
            return train_rusboost(to_matrix(x, &y), c);
          },
          py::arg("X"), py::arg("y"), py::arg("rounds") = 100, py::arg("max_depth") = 3,
          py::arg("undersample_ratio") = 1.0, py::arg("undersample") = true, py::arg("sampling") = "uniform",
          py::arg("seed") = 1)
      .def(
          "predict",
          [](const BoostedEnsemble& model, const Array& x) {
            const auto p = predict(model, to_matrix(x, nullptr));
            ByteArray labels(static_cast<py::ssize_t>(p.labels.size()));
            std::copy(p.labels.begin(), p.labels.end(), labels.mutable_data());
            return py::make_tuple(vector_array(p.scores), labels);
          },
          py::arg("X"), "Returns (scores, labels); a label is 1 when its score is >= 0.5.")
      .def("feature_importance", [](const BoostedEnsemble& model) { return vector_array(gini_importance(model)); })
      .def("to_json", &model_to_json)
      .def_static("from_json", &model_from_json)
      .def_property_readonly("n_trees", [](const BoostedEnsemble& model) { return model.trees.size(); })
      .def_property_readonly("degenerate", [](const BoostedEnsemble& model) { return model.degenerate; });

  m.def(
      "dsc",
      [](const ByteArray& predicted, const ByteArray& truth) {
        return dsc({predicted.data(), predicted.data() + predicted.size()},
                   {truth.data(), truth.data() + truth.size()});
      },
      py::arg("predicted"), py::arg("truth"));
  m.def(
      "wilcoxon",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto r = wilcoxon_signed_rank(a, b);
        py::dict out;
        out["statistic"] = r.statistic;
        out["p_value"] = r.p_value;
        out["n"] = r.n;
        out["exact"] = r.exact;
        return out;
      },
      py::arg("a"), py::arg("b"), "Two-sided Wilcoxon signed-rank test on paired samples.");
  m.def(
      "fisher_scores",
      [](const Array& x, const ByteArray& y) { return vector_array(fisher_scores(to_matrix(x, &y))); },
      py::arg("X"), py::arg("y"));

  py::register_exception<std::invalid_argument>(m, "InvalidArgument", PyExc_ValueError);
}
