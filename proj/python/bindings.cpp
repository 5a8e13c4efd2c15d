// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "probekit/attnmap.hpp"
#include "probekit/baselines.hpp"
#include "probekit/checkpoint.hpp"
#include "probekit/error.hpp"
#include "probekit/featurestore.hpp"
#include "probekit/gendereval.hpp"
#include "probekit/io.hpp"
#include "probekit/metrics.hpp"
#include "probekit/probe.hpp"

namespace py = pybind11;
using namespace probekit;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

HiddenStates to_states(const FloatArray& x) {
  if (x.ndim() != 2) throw DimensionMismatch("hidden states must be a 2-D array (L, d)");
  HiddenStates out(static_cast<std::size_t>(x.shape(0)), static_cast<std::size_t>(x.shape(1)));
  std::copy(x.data(), x.data() + x.size(), out.values.begin());
  return out;
}

py::array_t<float> to_array(const HiddenStates& x) {
  py::array_t<float> out({x.length, x.dim});
  std::copy(x.values.begin(), x.values.end(), out.mutable_data());
  return out;
}

py::dict sequence_dict(const FeatureSequence& seq) {
  py::dict d;
  d["segment_id"] = seq.segment_id;
  d["speaker_id"] = seq.speaker_id;
  d["gender"] = std::string(to_string(seq.gender));
  d["states"] = to_array(seq.states);
  return d;
}

FeatureSequence from_dict(const py::dict& d) {
  return {d["segment_id"].cast<std::string>(), d["speaker_id"].cast<std::string>(),
          parse_gender(d["gender"].cast<std::string>()), to_states(d["states"].cast<FloatArray>())};
}

}  // namespace

PYBIND11_MODULE(_probekit, m) {
  m.doc() = "Probing classifiers over sequences of hidden states";

  // Every library error derives from probekit.Error, itself a RuntimeError.
  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<ArgumentError> argument_error(m, "ArgumentError", error.ptr());
  static py::exception<DimensionMismatch> dimension_mismatch(m, "DimensionMismatch", error.ptr());
  static py::exception<ValidationError> validation_error(m, "ValidationError", error.ptr());
  static py::exception<FormatError> format_error(m, "FormatError", error.ptr());
  static py::exception<IoError> io_error(m, "IoError", error.ptr());
  static py::exception<InfeasibleSplit> infeasible_split(m, "InfeasibleSplit", error.ptr());
  static py::exception<ConflictError> conflict_error(m, "ConflictError", error.ptr());
  static py::exception<TrainingError> training_error(m, "TrainingError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ArgumentError& e) {
      argument_error(e.what());
    } catch (const DimensionMismatch& e) {
      dimension_mismatch(e.what());
    } catch (const ValidationError& e) {
      validation_error(e.what());
    } catch (const FormatError& e) {
      format_error(e.what());
    } catch (const IoError& e) {
      io_error(e.what());
    } catch (const InfeasibleSplit& e) {
      infeasible_split(e.what());
    } catch (const ConflictError& e) {
      conflict_error(e.what());
    } catch (const TrainingError& e) {
      training_error(e.what());
    } catch (const Error& e) {
      error(e.what());
    }
  });

  m.def(
      "write_pack",
      [](const std::vector<py::dict>& sequences, const std::filesystem::path& path) {
        std::vector<FeatureSequence> seqs;
        for (const auto& d : sequences) seqs.push_back(from_dict(d));
        return manifest_to_jsonl(write_pack(seqs, path));
      },
      py::arg("sequences"), py::arg("path"), "Writes a feature pack; returns its manifest as JSON lines.");
  m.def(
      "read_pack",
      [](const std::filesystem::path& path, std::optional<std::string> manifest_jsonl) {
        DatasetManifest manifest = scan_pack(path);
        if (manifest_jsonl) {
          manifest = parse_manifest_jsonl(*manifest_jsonl);
          manifest.pack_path = path.string();
          manifest.dim = read_pack_header(path).dim;
        }
        py::list out;
        for (const auto& seq : read_pack(path, manifest)) out.append(sequence_dict(seq));
        return out;
      },
      py::arg("path"), py::arg("manifest_jsonl") = py::none());

  py::class_<ProbeParams>(m, "ProbeParams")
      .def(py::init<std::size_t, std::size_t>(), py::arg("dim"), py::arg("num_classes") = 2)
      .def_property_readonly("dim", &ProbeParams::dim)
      .def_property_readonly("num_classes", &ProbeParams::num_classes)
      .def_property_readonly("parameter_count", &ProbeParams::parameter_count)
      .def("flatten", &ProbeParams::flatten)
      .def("unflatten", [](ProbeParams& p, const std::vector<double>& flat) { p.unflatten(flat); });
  m.def("init_params", &init_params, py::arg("dim"), py::arg("seed"), py::arg("num_classes") = 2);
  m.def(
      "forward",
      [](const ProbeParams& params, const FloatArray& x) {
        const auto out = forward(params, to_states(x));
        py::dict d;
        d["probs"] = out.probs;
        d["attention"] = out.attn;
        d["pooled"] = out.pooled;
        return d;
      },
      py::arg("params"), py::arg("states"));
  m.def(
      "loss_and_grads",
      [](const ProbeParams& params, const FloatArray& x, std::size_t label) {
        const auto r = loss_and_grads(params, to_states(x), label);
        return py::make_tuple(r.loss, r.grads.flatten());
      },
      py::arg("params"), py::arg("states"), py::arg("label"));

  m.def(
      "predict_checkpoint",
      [](const std::filesystem::path& checkpoint, const FloatArray& x) {
        const auto c = load_checkpoint(checkpoint);
        const auto p = predict(c, {"", "", Gender::She, to_states(x)});
        py::dict d;
        d["label"] = c.labels.at(p.label);
        d["probs"] = p.probs;
        d["attention"] = p.attention;
        return d;
      },
      py::arg("checkpoint"), py::arg("states"));

  m.def("pool_max", [](const FloatArray& x) { return pool_max(to_states(x)); });
  m.def("pool_mean", [](const FloatArray& x) { return pool_mean(to_states(x)); });
  m.def("positional_indices", &positional_indices, py::arg("length"));

  m.def(
      "resample", [](const std::vector<double>& w, std::size_t length) { return resample(w, length); },
      py::arg("weights"), py::arg("length") = kDefaultCurveLength);
  m.def(
      "early_mass",
      [](const std::vector<std::vector<double>>& curves, double fraction) {
        return early_mass(aggregate(curves), fraction);
      },
      py::arg("curves"), py::arg("fraction"), "Early mass of the mean of equal-length curves.");

  m.def(
      "classification_report_json",
      [](const std::vector<std::size_t>& preds, const std::vector<std::size_t>& labels) {
        const std::vector<std::string> names = {"She", "He"};
        return classification_report(preds, labels).to_json(names).dump();
      },
      py::arg("preds"), py::arg("labels"));
  m.def(
      "linreg_json",
      [](const std::vector<double>& x, const std::vector<double>& y) { return linreg(x, y).to_json().dump(); },
      py::arg("x"), py::arg("y"));
  m.def(
      "gender_score_json",
      [](const std::string& outputs_tsv, const std::string& annotations_tsv, std::optional<std::string> judgments) {
        auto s = score(parse_outputs_tsv(outputs_tsv), parse_annotations_tsv(annotations_tsv));
        if (judgments) s = merge_manual(s, parse_judgments_tsv(*judgments));
        return s.to_json().dump();
      },
      py::arg("outputs_tsv"), py::arg("annotations_tsv"), py::arg("judgments_tsv") = py::none());
}
