// pybind11 bindings for the embedgeom core.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "embedgeom/cli.hpp"
#include "embedgeom/embedding_store.hpp"
#include "embedgeom/error.hpp"
#include "embedgeom/metrics.hpp"
#include "embedgeom/pca.hpp"
#include "embedgeom/retrieval.hpp"
#include "embedgeom/sequential.hpp"
#include "embedgeom/sweep.hpp"

namespace py = pybind11;
using namespace embedgeom;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

MatrixKind parse_kind(const std::string& kind) {
  if (kind == "item") return MatrixKind::Item;
  if (kind == "query") return MatrixKind::Query;
  throw InputError("kind must be 'item' or 'query', got '" + kind + "'");
}

EmbeddingMatrix make_matrix(std::vector<std::string> ids, const FloatArray& values, const std::string& kind) {
  if (values.ndim() != 2) throw InputError("embeddings must be a 2-D array");
  const auto rows = static_cast<std::size_t>(values.shape(0));
  const auto dim = static_cast<std::size_t>(values.shape(1));
  if (rows != ids.size()) {
    throw InputError(std::to_string(ids.size()) + " ids for " + std::to_string(rows) + " rows");
  }
  std::vector<float> data(values.data(), values.data() + rows * dim);
  return EmbeddingMatrix(std::move(ids), std::move(data), dim, parse_kind(kind));
}

py::array_t<float> to_numpy(const EmbeddingMatrix& m) {
  py::array_t<float> out({m.rows(), m.dim()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

// Column-major basis (d x r) as a C-ordered numpy array of the same shape.
py::array_t<float> basis_numpy(const PcaModel& model) {
  const std::size_t d = model.source_dim();
  const std::size_t r = model.rank();
  py::array_t<float> out({d, r});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t j = 0; j < r; ++j) {
    const auto column = model.component(j);
    for (std::size_t i = 0; i < d; ++i) view(i, j) = column[i];
  }
  return out;
}

template <class T>
py::array_t<T> span_numpy(std::span<const T> values) {
  return py::array_t<T>(static_cast<py::ssize_t>(values.size()), values.data());
}

RelevanceSet make_relevance(const std::vector<std::pair<std::string, std::string>>& pairs) {
  RelevanceSet set;
  for (const auto& [q, i] : pairs) set.pairs.push_back({q, i});
  return set;
}

SessionLog make_sessions(const std::vector<std::pair<std::string, std::vector<std::string>>>& sessions) {
  SessionLog log;
  for (const auto& [user, items] : sessions) log.sessions.push_back({user, items});
  return log;
}

}  // namespace

PYBIND11_MODULE(_embedgeom, m) {
  m.doc() = "Embedding geometry analysis and zero-shot retrieval evaluation";
  m.attr("__version__") = EMBEDGEOM_VERSION;

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<EmbeddingMatrix>(m, "EmbeddingMatrix")
      .def(py::init(&make_matrix), py::arg("ids"), py::arg("values"), py::arg("kind") = "item",
           "Validated copy of an (N, d) float32 array keyed by unique ids.")
      .def_property_readonly("rows", &EmbeddingMatrix::rows)
      .def_property_readonly("dim", &EmbeddingMatrix::dim)
      .def_property_readonly("kind", [](const EmbeddingMatrix& e) { return std::string(to_string(e.kind())); })
      .def_property_readonly("ids", &EmbeddingMatrix::ids)
      .def("index_of", &EmbeddingMatrix::index_of, py::arg("id"))
      .def("to_numpy", &to_numpy, "Copy of the values as an (N, d) float32 array.")
      .def("__len__", &EmbeddingMatrix::rows)
      .def("__repr__", [](const EmbeddingMatrix& e) {
        return "<EmbeddingMatrix " + std::string(to_string(e.kind())) + " rows=" + std::to_string(e.rows()) +
               " dim=" + std::to_string(e.dim()) + ">";
      });

  m.def(
      "load_embeddings",
      [](const std::filesystem::path& path, const std::string& kind) { return load_embeddings(path, parse_kind(kind)); },
      py::arg("path"), py::arg("kind") = "item", "Load an EVEC or embedding-TSV file.");
  m.def(
      "write_embeddings",
      [](const std::filesystem::path& path, const EmbeddingMatrix& e, const std::string& format) {
        if (format != "evec" && format != "tsv") throw InputError("format must be 'evec' or 'tsv'");
        write_embeddings(path, e, format == "tsv" ? EmbeddingFormat::Tsv : EmbeddingFormat::Evec);
      },
      py::arg("path"), py::arg("matrix"), py::arg("format") = "evec");

  py::class_<RelevanceSet>(m, "RelevanceSet")
      .def(py::init(&make_relevance), py::arg("pairs"))
      .def_property_readonly("pairs",
                             [](const RelevanceSet& r) {
                               std::vector<std::pair<std::string, std::string>> out;
                               for (const auto& p : r.pairs) out.emplace_back(p.query_id, p.item_id);
                               return out;
                             })
      .def("__len__", [](const RelevanceSet& r) { return r.pairs.size(); });
  m.def("load_relevance", &load_relevance, py::arg("path"), py::arg("items"), py::arg("queries"));

  py::class_<SessionLog>(m, "SessionLog")
      .def(py::init(&make_sessions), py::arg("sessions"))
      .def_property_readonly("sessions",
                             [](const SessionLog& log) {
                               std::vector<std::pair<std::string, std::vector<std::string>>> out;
                               for (const auto& s : log.sessions) out.emplace_back(s.user_id, s.items);
                               return out;
                             })
      .def("__len__", [](const SessionLog& log) { return log.sessions.size(); });
  m.def("load_sessions", &load_sessions, py::arg("path"), py::arg("items"));

  py::class_<PcaModel>(m, "PcaModel")
      .def_property_readonly("rank", &PcaModel::rank)
      .def_property_readonly("source_dim", &PcaModel::source_dim)
      .def_property_readonly("sample_size", &PcaModel::sample_size)
      .def_property_readonly("seed", &PcaModel::seed)
      .def_property_readonly("mean", [](const PcaModel& p) { return span_numpy(p.mean()); })
      .def_property_readonly("spectrum", [](const PcaModel& p) { return span_numpy(p.spectrum()); })
      .def_property_readonly("cumulative_ratio", [](const PcaModel& p) { return span_numpy(p.cumulative_ratio()); })
      .def_property_readonly("basis", &basis_numpy, "(d, rank) array; column j is component j.")
      .def("explained_variance_ratio", &explained_variance_ratio, py::arg("k"))
      .def("effective_dimension", &effective_dimension, py::arg("epsilon"))
      .def("project", &project, py::arg("vectors"), py::arg("k"))
      .def("center", py::overload_cast<const PcaModel&, const EmbeddingMatrix&>(&center), py::arg("vectors"))
      .def("save", [](const PcaModel& p, const std::filesystem::path& path) { save_pca(path, p); }, py::arg("path"))
      .def("__repr__", [](const PcaModel& p) {
        return "<PcaModel d=" + std::to_string(p.source_dim()) + " rank=" + std::to_string(p.rank()) + ">";
      });
  m.def("fit_pca", &fit_pca, py::arg("items"), py::arg("sample_size") = 100000, py::arg("seed") = kDefaultSeed,
        py::call_guard<py::gil_scoped_release>());
  m.def("load_pca", &load_pca, py::arg("path"));
  m.def("pca_from_spectrum", &PcaModel::from_spectrum, py::arg("spectrum"));

  m.def("recall_at_k", &recall_at_k, py::arg("rank"), py::arg("k"));
  m.def("ndcg_at_k", &ndcg_at_k, py::arg("rank"), py::arg("k"));
  m.def(
      "similarity",
      [](const FloatArray& a, const FloatArray& b, const std::string& measure) {
        return similarity(std::span<const float>(a.data(), static_cast<std::size_t>(a.size())),
                          std::span<const float>(b.data(), static_cast<std::size_t>(b.size())),
                          parse_measure(measure));
      },
      py::arg("a"), py::arg("b"), py::arg("measure") = "cosine");

  py::class_<MetricReport>(m, "MetricReport")
      .def_readonly("system_label", &MetricReport::system_label)
      .def_readonly("per_unit", &MetricReport::per_unit)
      .def_readonly("rank_of_relevant", &MetricReport::rank_of_relevant)
      .def_readonly("aggregates", &MetricReport::aggregates)
      .def_readonly("degenerate_scores", &MetricReport::degenerate_scores)
      .def_property_readonly("unit_count", &MetricReport::unit_count)
      .def("__repr__", [](const MetricReport& r) {
        std::ostringstream os;
        os << "<MetricReport units=" << r.unit_count();
        for (const auto& [name, value] : r.aggregates) os << " " << name << "=" << value;
        return os.str() + ">";
      });

  py::class_<SignificanceResult>(m, "SignificanceResult")
      .def_readonly("metric", &SignificanceResult::metric)
      .def_readonly("mean_delta", &SignificanceResult::mean_delta)
      .def_readonly("p_value", &SignificanceResult::p_value)
      .def_readonly("resamples", &SignificanceResult::resamples)
      .def_readonly("seed", &SignificanceResult::seed)
      .def_readonly("units", &SignificanceResult::units)
      .def_property_readonly("significant", [](const SignificanceResult& r) { return r.p_value < 0.001; });
  m.def("paired_significance", &paired_significance, py::arg("a"), py::arg("b"), py::arg("metric"),
        py::arg("resamples") = 10000, py::arg("seed") = kDefaultSeed);

  m.def(
      "evaluate_search",
      [](const RelevanceSet& relevance, const EmbeddingMatrix& queries, const EmbeddingMatrix& items,
         std::size_t pool_size, const std::string& measure, std::uint64_t seed, std::vector<std::size_t> cutoffs,
         std::size_t workers) {
        SearchConfig config{pool_size, parse_measure(measure), seed, std::move(cutoffs), workers};
        py::gil_scoped_release release;
        return evaluate_search(relevance, queries, items, config);
      },
      py::arg("relevance"), py::arg("queries"), py::arg("items"), py::arg("pool_size") = 50,
      py::arg("measure") = "cosine", py::arg("seed") = kDefaultSeed,
      py::arg("cutoffs") = std::vector<std::size_t>{100}, py::arg("workers") = 1);

  m.def(
      "evaluate_sequential",
      [](const SessionLog& log, const EmbeddingMatrix& items, const std::string& aggregator, double lambda,
         const std::string& measure, std::vector<std::size_t> cutoffs, const std::string& scope,
         std::size_t pool_size, bool include_history, std::uint64_t seed, std::size_t workers) {
        if (scope != "full" && scope != "pool") throw InputError("scope must be 'full' or 'pool'");
        SequentialConfig config;
        config.aggregator = {parse_aggregator(aggregator), lambda};
        config.measure = parse_measure(measure);
        config.cutoffs = std::move(cutoffs);
        config.scope = scope == "pool" ? CandidateScope::SampledPool : CandidateScope::FullCatalog;
        config.pool_size = pool_size;
        config.include_history = include_history;
        config.seed = seed;
        config.workers = workers;
        py::gil_scoped_release release;
        return evaluate_sequential(log, items, config);
      },
      py::arg("sessions"), py::arg("items"), py::arg("aggregator") = "last", py::arg("lam") = 0.8,
      py::arg("measure") = "cosine", py::arg("cutoffs") = std::vector<std::size_t>{10, 50},
      py::arg("scope") = "full", py::arg("pool_size") = 50, py::arg("include_history") = false,
      py::arg("seed") = kDefaultSeed, py::arg("workers") = 1);

  py::class_<SweepCurve>(m, "SweepCurve")
      .def_readonly("metric_name", &SweepCurve::metric_name)
      .def_readonly("component_grid", &SweepCurve::component_grid)
      .def_readonly("metric_at_k", &SweepCurve::metric_at_k)
      .def_readonly("baseline_metric", &SweepCurve::baseline_metric)
      .def_readonly("rank", &SweepCurve::rank)
      .def_property_readonly("shape", [](const SweepCurve& c) { return std::string(to_string(c.shape)); })
      .def_property_readonly("epsilon_marks", [](const SweepCurve& c) {
        std::map<double, std::pair<std::size_t, double>> out;
        for (const auto& [eps, mark] : c.epsilon_marks) out[eps] = {mark.components, mark.metric};
        return out;
      });
  m.def(
      "run_sweep",
      [](const EmbeddingMatrix& items, const EmbeddingMatrix& queries, const RelevanceSet& relevance,
         const PcaModel& model, std::optional<std::vector<std::size_t>> grid, std::vector<double> epsilons,
         const std::string& metric, std::size_t pool_size, const std::string& measure, std::uint64_t seed,
         std::vector<std::size_t> cutoffs, std::size_t workers) {
        SweepSpec spec{std::move(grid), std::move(epsilons), metric};
        SearchConfig config{pool_size, parse_measure(measure), seed, std::move(cutoffs), workers};
        py::gil_scoped_release release;
        return run_sweep(items, queries, relevance, model, spec, config);
      },
      py::arg("items"), py::arg("queries"), py::arg("relevance"), py::arg("model"), py::arg("grid") = py::none(),
      py::arg("epsilons") = std::vector<double>{0.80, 0.95, 1.00}, py::arg("metric") = "",
      py::arg("pool_size") = 50, py::arg("measure") = "cosine", py::arg("seed") = kDefaultSeed,
      py::arg("cutoffs") = std::vector<std::size_t>{100}, py::arg("workers") = 1);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "embedgeom");
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
