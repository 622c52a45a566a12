// Python bindings. Vectors and volumes cross the boundary as numpy arrays
// (float64); names are plain strings parsed as compound terms.
#include "cli/commands.hpp"

#include "semvol/ablation.hpp"
#include "semvol/encoder.hpp"
#include "semvol/error.hpp"
#include "semvol/io_formats.hpp"
#include "semvol/loss.hpp"
#include "semvol/pca.hpp"
#include "semvol/presets.hpp"
#include "semvol/vocabulary.hpp"
#include "semvol/volume.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace semvol;

namespace {

std::vector<CompoundTerm> parse_terms(const std::vector<std::string>& names) {
  std::vector<CompoundTerm> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(CompoundTerm::parse(n));
  return out;
}

std::vector<std::string> display(std::span<const CompoundTerm> terms) {
  std::vector<std::string> out;
  for (const auto& t : terms) out.push_back(t.display());
  return out;
}

Vocabulary vocabulary_of(const std::vector<std::string>& entries) {
  return Vocabulary(parse_terms(entries), 0);
}

py::array_t<double> to_numpy(const Volume& v) {
  const auto s = v.shape();
  py::array_t<double> out({s[0], s[1], s[2], s[3]});
  std::copy(v.data().begin(), v.data().end(), out.mutable_data());
  return out;
}

Volume from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 4) throw DataError("volume arrays must be 4-dimensional (C, T, H, W)");
  Volume v(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
           static_cast<std::size_t>(a.shape(2)), static_cast<std::size_t>(a.shape(3)));
  std::copy(a.data(), a.data() + a.size(), v.data().begin());
  return v;
}

DType parse_dtype(const std::string& s) {
  if (s == "f32") return DType::F32;
  if (s == "f64") return DType::F64;
  throw DataError("dtype must be 'f32' or 'f64'");
}

Matrix table_matrix(const EmbeddingTable& t) {
  Matrix m(static_cast<Eigen::Index>(t.size()), static_cast<Eigen::Index>(t.dimension()));
  for (std::size_t i = 0; i < t.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = t.vector(i);
  return m;
}

EmbeddingTable table_from(const std::vector<std::string>& terms, const Matrix& vectors) {
  if (static_cast<std::size_t>(vectors.rows()) != terms.size()) {
    throw DataError("need one vector row per term");
  }
  EmbeddingTable t(static_cast<std::size_t>(vectors.cols()));
  for (std::size_t i = 0; i < terms.size(); ++i) {
    t.add(terms[i], vectors.row(static_cast<Eigen::Index>(i)).transpose());
  }
  return t;
}

Keypoint keypoint_from(const py::handle& h) {
  Keypoint k;
  if (py::isinstance<py::dict>(h)) {
    const auto d = h.cast<py::dict>();
    k.name = CompoundTerm::parse(d["name"].cast<std::string>());
    k.x = d["x"].cast<double>();
    k.y = d["y"].cast<double>();
    if (d.contains("score")) k.score = d["score"].cast<double>();
    if (d.contains("kind")) {
      const auto kind = d["kind"].cast<std::string>();
      if (kind != "joint" && kind != "object") throw DataError("unknown kind '" + kind + "'");
      k.kind = kind == "object" ? KeypointKind::Object : KeypointKind::Joint;
    }
    return k;
  }
  const auto t = h.cast<py::sequence>();
  if (t.size() < 3 || t.size() > 4) throw DataError("keypoint tuples are (name, x, y[, score])");
  k.name = CompoundTerm::parse(t[0].cast<std::string>());
  k.x = t[1].cast<double>();
  k.y = t[2].cast<double>();
  if (t.size() == 4) k.score = t[3].cast<double>();
  return k;
}

}  // namespace

PYBIND11_MODULE(semvol, m) {
  m.doc() = "Semantic volumes: word-vector reduction and keypoint volume rendering";

  static py::exception<DataError> data_error(m, "DataError", PyExc_ValueError);
  static py::exception<NumericError> numeric_error(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DataError& e) {
      py::set_error(data_error, e.what());
    } catch (const NumericError& e) {
      py::set_error(numeric_error, e.what());
    }
  });

  // --- embeddings -------------------------------------------------------------
  py::class_<EmbeddingTable>(m, "Table", "Word -> vector table with case-insensitive lookup")
      .def(py::init<std::size_t>(), py::arg("dimension"))
      .def(py::init(&table_from), py::arg("terms"), py::arg("vectors"),
           "Build from a term list and an (N, D) array")
      .def_static(
          "load",
          [](const std::filesystem::path& path, bool merge_case_variants) {
            VecReadOptions opt;
            opt.merge_case_variants = merge_case_variants;
            return load_vec_table(path, opt);
          },
          py::arg("path"), py::arg("merge_case_variants") = false)
      .def("save", [](const EmbeddingTable& t, const std::filesystem::path& p) { save_vec_table(p, t); })
      .def_property_readonly("dimension", &EmbeddingTable::dimension)
      .def_property_readonly("terms", &EmbeddingTable::terms)
      .def_property_readonly("vectors", &table_matrix, "(N, D) copy of the vectors")
      .def("add", &EmbeddingTable::add, py::arg("term"), py::arg("vector"))
      .def("__len__", &EmbeddingTable::size)
      .def("__contains__", &EmbeddingTable::contains)
      .def("__getitem__", [](const EmbeddingTable& t, const std::string& term) -> Vector { return t.at(term); })
      .def("compose", [](const EmbeddingTable& t, const std::string& term) {
        return compose_compound(t, CompoundTerm::parse(term));
      }, "Vector of a compound term (phrase entry, else mean of its tokens)")
      .def("__eq__", [](const EmbeddingTable& a, const EmbeddingTable& b) { return a == b; });

  m.def("cosine", &cosine, py::arg("a"), py::arg("b"));
  m.def(
      "cosine_matrix",
      [](const EmbeddingTable& t, const std::vector<std::string>& terms) {
        return pairwise_cosine_matrix(t, parse_terms(terms));
      },
      py::arg("table"), py::arg("terms"));
  m.def(
      "similarity_csv",
      [](const EmbeddingTable& t, const std::vector<std::string>& terms) {
        const auto parsed = parse_terms(terms);
        return export_similarity_csv(pairwise_cosine_matrix(t, parsed), display(parsed));
      },
      py::arg("table"), py::arg("terms"));

  // --- vocabulary -------------------------------------------------------------
  m.def(
      "build_vocabulary",
      [](const std::vector<std::string>& seeds, const std::vector<std::string>& expansion,
         std::size_t size, const EmbeddingTable& table) {
        return display(build_vocabulary(parse_terms(seeds), expansion, size, table).entries());
      },
      py::arg("seeds"), py::arg("expansion"), py::arg("size"), py::arg("table"),
      "Seeds first, then expansion words present in the table, up to `size` entries");
  m.def(
      "flatten_tokens",
      [](const std::vector<std::string>& entries) { return flatten_tokens(vocabulary_of(entries)); },
      py::arg("entries"));
  m.def(
      "class_list",
      [](const std::string& name) {
        auto list = presets::class_list(name);
        if (!list) throw DataError("unknown class list '" + name + "'");
        return display(*list);
      },
      py::arg("name"), "Built-in class lists: 17, 32, 17+7, 32+12");

  // --- reducer ----------------------------------------------------------------
  m.def(
      "pairwise_cosine_loss",
      [](const EmbeddingTable& original, const EmbeddingTable& reduced,
         const std::vector<std::string>& entries) {
        return pairwise_cosine_loss(original, reduced, vocabulary_of(entries));
      },
      py::arg("original"), py::arg("reduced"), py::arg("entries"));
  m.def(
      "ring_penalty",
      [](const std::vector<Vector>& vectors, double radius) { return ring_penalty(vectors, radius); },
      py::arg("vectors"), py::arg("radius") = 1.0);

  py::enum_<Normalization>(m, "Normalization")
      .value("RING_LOSS", Normalization::RingLoss)
      .value("POST_HOC_UNIT", Normalization::PostHocUnit)
      .value("NONE", Normalization::None);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("output_dim", &TrainConfig::output_dim)
      .def_readwrite("hidden_dims", &TrainConfig::hidden_dims)
      .def_readwrite("ring_loss_weight", &TrainConfig::ring_loss_weight)
      .def_readwrite("ring_radius", &TrainConfig::ring_radius)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("normalization", &TrainConfig::normalization)
      .def_readwrite("early_stop_window", &TrainConfig::early_stop_window)
      .def_readwrite("early_stop_delta", &TrainConfig::early_stop_delta);

  py::class_<EncoderModel>(m, "Encoder")
      .def_property_readonly("layer_dims", &EncoderModel::layer_dims)
      .def_property_readonly("parameter_count", &EncoderModel::parameter_count)
      .def_property_readonly("weights", [](const EncoderModel& e) {
        std::vector<Matrix> w;
        for (const auto& l : e.layers()) w.push_back(l.weight);
        return w;
      })
      .def_property_readonly("biases", [](const EncoderModel& e) {
        std::vector<Vector> b;
        for (const auto& l : e.layers()) b.push_back(l.bias);
        return b;
      })
      .def("forward", py::overload_cast<const Vector&>(&EncoderModel::forward, py::const_),
           py::arg("input"))
      .def("save",
           [](const EncoderModel& e, const std::filesystem::path& p, const TrainConfig& cfg) {
             save_checkpoint(p, e, cfg);
           },
           py::arg("path"), py::arg("config"))
      .def_static(
          "load",
          [](const std::filesystem::path& p) {
            Checkpoint c = load_checkpoint(p);
            return py::make_tuple(std::move(c.model), std::move(c.config));
          },
          py::arg("path"), "Returns (encoder, config)")
      .def("__eq__", [](const EncoderModel& a, const EncoderModel& b) { return a == b; });

  m.def(
      "train_encoder",
      [](const EmbeddingTable& original, const std::vector<std::string>& entries,
         const TrainConfig& cfg) {
        TrainResult r = [&] {
          py::gil_scoped_release release;
          return train_encoder(original, vocabulary_of(entries), cfg);
        }();
        Matrix history(static_cast<Eigen::Index>(r.report.history.size()), 4);
        for (std::size_t i = 0; i < r.report.history.size(); ++i) {
          const auto& e = r.report.history[i];
          history.row(static_cast<Eigen::Index>(i)) << static_cast<double>(e.epoch), e.pair_loss,
              e.ring_penalty, e.total;
        }
        py::dict out;
        out["encoder"] = std::move(r.model);
        out["reduced"] = std::move(r.reduced);
        out["history"] = history;
        out["final_pair_loss"] = r.report.final_pair_loss;
        out["final_ring_penalty"] = r.report.final_ring_penalty;
        out["early_stopped"] = r.report.early_stopped;
        return out;
      },
      py::arg("original"), py::arg("entries"), py::arg("config") = TrainConfig{},
      "Returns a dict with encoder, reduced, history (epoch, pair_loss, ring_penalty, total), "
      "final_pair_loss, final_ring_penalty and early_stopped");
  m.def(
      "pca_reduce",
      [](const EmbeddingTable& original, const std::vector<std::string>& entries,
         std::size_t dimension, std::size_t removed) {
        return pca_reduce(original, vocabulary_of(entries), dimension, removed);
      },
      py::arg("original"), py::arg("entries"), py::arg("dimension"), py::arg("removed") = 2);

  m.def(
      "random_table",
      [](const std::vector<std::string>& names, std::size_t dimension, std::uint64_t seed) {
        return generate_random_table(parse_terms(names), dimension, seed);
      },
      py::arg("names"), py::arg("dimension") = 16, py::arg("seed") = 0);
  m.def(
      "permutate_table",
      [](const EmbeddingTable& reduced, const std::vector<std::string>& names, std::uint64_t seed) {
        PermutationResult r = permutate_table(reduced, parse_terms(names), seed);
        return py::make_tuple(std::move(r.table), r.source);
      },
      py::arg("reduced"), py::arg("names"), py::arg("seed") = 0,
      "Returns (table, source) where names[i] carries the vector of names[source[i]]");
  m.def(
      "switch_table",
      [](const EmbeddingTable& reduced, const std::vector<std::string>& joints,
         const std::vector<std::string>& objects, const std::vector<std::pair<std::string, std::string>>& pairs,
         bool cyclic) {
        Pairing p;
        for (const auto& [j, o] : pairs) p.pairs.emplace_back(CompoundTerm::parse(j), CompoundTerm::parse(o));
        p.cyclic = cyclic;
        return switch_table(reduced, parse_terms(joints), parse_terms(objects), p);
      },
      py::arg("reduced"), py::arg("joints"), py::arg("objects"), py::arg("pairs"),
      py::arg("cyclic") = false);

  // --- volumes ----------------------------------------------------------------
  m.def("gaussian_weight", &gaussian_weight, py::arg("x"), py::arg("y"), py::arg("cx"),
        py::arg("cy"), py::arg("sigma") = 0.6, py::arg("score") = 1.0);

  py::enum_<Aggregation>(m, "Aggregation")
      .value("ADDITION", Aggregation::Addition)
      .value("NORMALIZED_SUM", Aggregation::NormalizedSum)
      .value("WEIGHTED_NORM", Aggregation::WeightedNorm);
  py::enum_<InstanceCombine>(m, "InstanceCombine")
      .value("SUM", InstanceCombine::Sum)
      .value("MAX", InstanceCombine::Max);

  py::class_<VolumeConfig>(m, "VolumeConfig")
      .def(py::init<>())
      .def_readwrite("height", &VolumeConfig::height)
      .def_readwrite("width", &VolumeConfig::width)
      .def_readwrite("frames", &VolumeConfig::frames)
      .def_readwrite("sigma", &VolumeConfig::sigma)
      .def_readwrite("score_threshold", &VolumeConfig::score_threshold)
      .def_readwrite("influence_epsilon", &VolumeConfig::influence_epsilon)
      .def_readwrite("aggregation", &VolumeConfig::aggregation)
      .def_readwrite("instance_combine", &VolumeConfig::instance_combine);

  py::class_<KeypointSequence>(m, "KeypointSequence")
      .def(py::init([](const py::sequence& frames, double width, double height) {
             KeypointSequence s;
             s.meta.width = width;
             s.meta.height = height;
             for (const auto& f : frames) {
               Frame frame;
               for (const auto& k : f.cast<py::sequence>()) frame.push_back(keypoint_from(k));
               s.frames.push_back(std::move(frame));
             }
             return s;
           }),
           py::arg("frames"), py::arg("width") = 0.0, py::arg("height") = 0.0,
           "Frames are lists of (name, x, y[, score]) tuples or dicts; width/height give the "
           "source resolution (0 = already in grid units)")
      .def_static("load", &load_keypoints_jsonl, py::arg("path"))
      .def("__len__", [](const KeypointSequence& s) { return s.frames.size(); })
      .def_property_readonly("names", [](const KeypointSequence& s) {
        std::vector<std::string> names;
        for (const auto& f : s.frames) {
          for (const auto& k : f) {
            if (std::find(names.begin(), names.end(), k.name.display()) == names.end()) {
              names.push_back(k.name.display());
            }
          }
        }
        return names;
      });

  m.def("prepare_sequence", &prepare_sequence, py::arg("sequence"), py::arg("config"),
        py::arg("seed") = py::none(),
        "Filter by score, rescale to the grid and resample to config.frames");
  m.def(
      "semantic_volume",
      [](const KeypointSequence& s, const EmbeddingTable& t, const VolumeConfig& cfg) {
        return to_numpy(build_semantic_volume(s, t, cfg));
      },
      py::arg("sequence"), py::arg("table"), py::arg("config"),
      "(D, T, H, W) array; one slice per frame of the (already prepared) sequence");
  m.def(
      "onehot_volume",
      [](const KeypointSequence& s, const std::vector<std::string>& classes,
         const VolumeConfig& cfg) {
        return to_numpy(build_onehot_volume(s, parse_terms(classes), cfg));
      },
      py::arg("sequence"), py::arg("classes"), py::arg("config"));

  // --- io ---------------------------------------------------------------------
  m.def(
      "save_volume",
      [](const std::filesystem::path& p, const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
         const std::string& dtype) { save_volume(p, from_numpy(a), parse_dtype(dtype)); },
      py::arg("path"), py::arg("volume"), py::arg("dtype") = "f32");
  m.def(
      "load_volume", [](const std::filesystem::path& p) { return to_numpy(load_volume(p)); },
      py::arg("path"));
  m.def(
      "volume_bytes",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
         const std::string& dtype) { return py::bytes(tensor_bytes(from_numpy(a), parse_dtype(dtype))); },
      py::arg("volume"), py::arg("dtype") = "f32");
  m.def(
      "read_volume",
      [](const py::bytes& b) { return to_numpy(read_volume(std::string_view(b))); },
      py::arg("data"));

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "semvol");
        std::ostringstream out;
        std::ostringstream err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a command-line invocation; returns (exit_code, stdout, stderr)");
}
