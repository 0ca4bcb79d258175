// Python bindings. Records and reports cross the boundary as plain dicts via JSON.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spatial_trust/pipeline.hpp"
#include "spatial_trust/scenegraph.hpp"

namespace py = pybind11;
using namespace spatial_trust;

namespace {

py::object to_py(const nlohmann::ordered_json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_py(const py::handle& obj) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

std::vector<Sample> samples_from_py(const py::list& records) {
  std::vector<Sample> out;
  out.reserve(records.size());
  for (const py::handle& r : records) out.push_back(sample_from_json(from_py(r)));
  return out;
}

py::list samples_to_py(const std::vector<Sample>& samples) {
  py::list out;
  for (const Sample& s : samples) out.append(to_py(sample_to_json(s)));
  return out;
}

std::vector<std::uint8_t> as_labels(const std::vector<bool>& v) { return {v.begin(), v.end()}; }

gbdt::FeatureMatrix as_matrix(const std::vector<std::vector<double>>& rows) {
  gbdt::FeatureMatrix m;
  for (const auto& r : rows) m.append_row(r);
  return m;
}

py::dict coverage_to_py(const eval::CoveragePoint& p) {
  py::dict d;
  d["target"] = p.target_accuracy;
  d["coverage"] = p.coverage;
  d["achieved_accuracy"] = p.achieved_accuracy;
  d["retained"] = p.retained;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Vision-based confidence estimation for VLM spatial predictions";

  py::register_exception<DatasetError>(m, "DatasetError", PyExc_ValueError);
  py::register_exception<gbdt::TrainingError>(m, "TrainingError", PyExc_ValueError);
  py::register_exception<gbdt::ModelFormatError>(m, "ModelFormatError", PyExc_ValueError);

  m.def("generate", [](std::size_t n, std::uint64_t seed, const py::dict& overrides) {
        synth::SynthConfig c = synth::config_from_json(from_py(overrides));
        c.n_samples = n;
        c.seed = seed;
        return samples_to_py(synth::generate(c).samples);
      },
      py::arg("n"), py::arg("seed") = 42, py::arg("overrides") = py::dict(),
      "Synthetic records; overrides uses generator config field names.");

  m.def("parse_dataset", [](const std::string& path) { return samples_to_py(parse_dataset(path)); }, py::arg("path"));
  m.def("write_dataset", [](const std::string& path, const py::list& records) {
        write_dataset(path, samples_from_py(records));
      },
      py::arg("path"), py::arg("records"));

  m.def("extract_features", [](const py::dict& record, double near_kappa, bool adjust, bool normalize) {
        GeometryOptions opt{near_kappa, adjust, normalize};
        const auto f = extract_features(sample_from_json(from_py(record)), opt).features.to_array();
        return std::vector<double>(f.begin(), f.end());
      },
      py::arg("record"), py::arg("near_kappa") = 1.0, py::arg("adjust_for_detection_quality") = true,
      py::arg("normalize_by_image_width") = false,
      "[alpha_geo, alpha_sep, detection_quality, token_confidence]");
  m.attr("FEATURE_NAMES") = std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end());

  m.def("iou", [](std::array<double, 4> a, std::array<double, 4> b) {
    return iou({a[0], a[1], a[2], a[3]}, {b[0], b[1], b[2], b[3]});
  });

  m.def("auroc", [](const std::vector<double>& s, const std::vector<bool>& y) { return eval::auroc(s, as_labels(y)); },
        py::arg("scores"), py::arg("labels"));
  m.def("youden_threshold", [](const std::vector<double>& s, const std::vector<bool>& y) {
        return eval::youden_threshold(s, as_labels(y));
      },
      py::arg("scores"), py::arg("labels"));
  m.def("coverage_at_accuracy", [](const std::vector<double>& s, const std::vector<bool>& c, double target) {
        return coverage_to_py(eval::coverage_at_accuracy(s, as_labels(c), target));
      },
      py::arg("scores"), py::arg("correct"), py::arg("target"));

  m.def("sweep_tau", [](const py::list& records, const std::vector<double>& conf, const std::vector<double>& taus) {
        py::list out;
        for (const auto& g : graph::sweep_tau(samples_from_py(records), conf, taus)) {
          py::dict d;
          d["tau"] = g.tau;
          d["precision"] = g.precision;
          d["coverage"] = g.edge_coverage;
          d["f1"] = g.f1;
          d["retained"] = g.retained;
          d["total"] = g.total;
          out.append(d);
        }
        return out;
      },
      py::arg("records"), py::arg("confidences"), py::arg("taus"));

  py::class_<gbdt::GbdtModel>(m, "Model")
      .def("predict_proba", [](const gbdt::GbdtModel& self, const std::vector<std::vector<double>>& rows) {
        return self.predict_proba(as_matrix(rows));
      })
      .def("feature_importance", [](const gbdt::GbdtModel& self) { return gbdt::feature_importance(self); })
      .def("save", [](const gbdt::GbdtModel& self, const std::string& path) { gbdt::save_model(self, path); })
      .def("to_dict", [](const gbdt::GbdtModel& self) { return to_py(gbdt::model_to_json(self)); })
      .def_property_readonly("n_trees", [](const gbdt::GbdtModel& self) { return self.trees.size(); })
      .def_readonly("decision_threshold", &gbdt::GbdtModel::decision_threshold);

  m.def("train", [](const std::vector<std::vector<double>>& rows, const std::vector<bool>& labels, int n_trees,
                    double learning_rate, int max_depth, double l1_alpha, double l2_lambda) {
        gbdt::TrainConfig c;
        c.n_trees = n_trees;
        c.learning_rate = learning_rate;
        c.max_depth = max_depth;
        c.l1_alpha = l1_alpha;
        c.l2_lambda = l2_lambda;
        return gbdt::train(as_matrix(rows), as_labels(labels), c);
      },
      py::arg("features"), py::arg("labels"), py::arg("n_trees") = 100, py::arg("learning_rate") = 0.03,
      py::arg("max_depth") = 3, py::arg("l1_alpha") = 0.5, py::arg("l2_lambda") = 2.0);
  m.def("load_model", &gbdt::load_model, py::arg("path"));
}
