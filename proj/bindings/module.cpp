#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "thgrl/detect.hpp"
#include "thgrl/embed.hpp"
#include "thgrl/graph.hpp"
#include "thgrl/pipeline.hpp"
#include "thgrl/represent.hpp"
#include "thgrl/tracer.hpp"
#include "thgrl/walk.hpp"

namespace py = pybind11;
using namespace thgrl;

namespace {

std::vector<double> row_copy(std::span<const double> row) {
  return {row.begin(), row.end()};
}

}  // namespace

PYBIND11_MODULE(_thgrl, m) {
  m.doc() = "traceable heterogeneous graph representation learning";

  py::class_<HetGraph>(m, "Graph")
      .def_property_readonly("vertex_count", &HetGraph::vertex_count)
      .def_property_readonly("edge_count", &HetGraph::edge_count)
      .def("find", &HetGraph::find, py::arg("key"))
      .def("key_of", &HetGraph::key_of, py::arg("vertex"))
      .def("type_of",
           [](const HetGraph& g, VertexId v) {
             return g.schema().vertex_type_name(g.type_of(v));
           },
           py::arg("vertex"))
      .def("degree", [](const HetGraph& g, VertexId v) { return g.degree(v); })
      .def("total_weight", &HetGraph::total_weight, py::arg("vertex"))
      .def("stats", [](const HetGraph& g) { return format_stats(g); });

  py::class_<DatasetSplit>(m, "Split")
      .def_readonly("train", &DatasetSplit::train)
      .def_readonly("test", &DatasetSplit::test)
      .def("gold_of", [](const DatasetSplit& s, VertexId r) { return s.gold_of(r); },
           py::arg("review"));

  m.def("load_graph",
        [](const std::filesystem::path& vertices, const std::filesystem::path& edges) {
          return load_graph(vertices, edges, Schema::standard());
        },
        py::arg("vertices"), py::arg("edges"));
  m.def("save_graph", &save_graph, py::arg("graph"), py::arg("vertices"), py::arg("edges"));
  m.def("load_split", &load_split, py::arg("graph"), py::arg("reviews"), py::arg("split"));
  m.def("apply_leakage_filter", &apply_leakage_filter, py::arg("graph"), py::arg("split"));
  m.def("build_word_aspect_edges", &build_word_aspect_edges, py::arg("graph"),
        py::arg("split"));
  m.def("load_aspects", &load_aspects, py::arg("graph"), py::arg("file"));

  py::class_<WalkConfig>(m, "WalkConfig")
      .def(py::init<>())
      .def_property(
          "mode", [](const WalkConfig& c) { return std::string(walk_mode_name(c.mode)); },
          [](WalkConfig& c, const std::string& name) { c.mode = parse_walk_mode(name); })
      .def_property(
          "weighted_relations",
          [](const WalkConfig& c) { return c.relation_choice == RelationChoice::kWeighted; },
          [](WalkConfig& c, bool w) {
            c.relation_choice = w ? RelationChoice::kWeighted : RelationChoice::kUniform;
          })
      .def_readwrite("walks_per_vertex", &WalkConfig::walks_per_vertex)
      .def_readwrite("walk_length", &WalkConfig::walk_length)
      .def_readwrite("seed", &WalkConfig::seed);

  py::class_<WalkCorpus>(m, "WalkCorpus")
      .def_readonly("paths", &WalkCorpus::paths)
      .def_property_readonly("token_count", &WalkCorpus::token_count);

  m.def("generate_corpus", &generate_corpus, py::arg("graph"), py::arg("config"));
  m.def("save_corpus", &save_corpus, py::arg("corpus"), py::arg("graph"), py::arg("file"));
  m.def("load_corpus", &load_corpus, py::arg("graph"), py::arg("file"));

  py::class_<TracerConfig>(m, "TracerConfig")
      .def(py::init<>())
      .def_readwrite("tracer_count", &TracerConfig::tracer_count)
      .def_readwrite("dirichlet_alpha", &TracerConfig::dirichlet_alpha)
      .def_readwrite("vertex_smoothing", &TracerConfig::vertex_smoothing)
      .def_readwrite("gibbs_iterations", &TracerConfig::gibbs_iterations)
      .def_readwrite("burn_in", &TracerConfig::burn_in)
      .def_readwrite("seed", &TracerConfig::seed)
      .def_property_readonly("alpha", &TracerConfig::alpha);

  py::class_<TracerModel>(m, "TracerModel")
      .def_readonly("tracer_count", &TracerModel::tracer_count)
      .def_readonly("vertex_count", &TracerModel::vertex_count)
      .def_readonly("theta", &TracerModel::theta)
      .def_readonly("beta", &TracerModel::beta)
      .def_readonly("assignments", &TracerModel::assignments)
      .def_readonly("tracer_frequency", &TracerModel::tracer_frequency);

  m.def("fit_tracers",
        [](const WalkCorpus& corpus, std::size_t vertex_count, const TracerConfig& config) {
          return fit_tracers(corpus, vertex_count, config);
        },
        py::arg("corpus"), py::arg("vertex_count"), py::arg("config"));
  m.def("capture_posterior", &capture_posterior, py::arg("model"), py::arg("vertex"),
        py::arg("path"));
  m.def("assign_tokens", &assign_tokens, py::arg("model"), py::arg("corpus"));
  m.def("vertex_tracer_posterior",
        [](const TracerModel& model, const WalkCorpus& corpus,
           const std::vector<std::vector<int>>& assignments) {
          return vertex_tracer_posterior(model, corpus, assignments);
        },
        py::arg("model"), py::arg("corpus"), py::arg("assignments"));
  m.def("log_joint", &log_joint, py::arg("model"), py::arg("corpus"));
  m.def("save_tracer_model", &save_tracer_model, py::arg("model"), py::arg("file"));
  m.def("load_tracer_model", &load_tracer_model, py::arg("file"));

  py::class_<EmbedConfig>(m, "EmbedConfig")
      .def(py::init<>())
      .def_readwrite("dimension", &EmbedConfig::dimension)
      .def_readwrite("context_window", &EmbedConfig::context_window)
      .def_readwrite("negatives", &EmbedConfig::negatives)
      .def_readwrite("initial_lr", &EmbedConfig::initial_lr)
      .def_readwrite("final_lr", &EmbedConfig::final_lr)
      .def_readwrite("epochs", &EmbedConfig::epochs)
      .def_readwrite("noise_exponent", &EmbedConfig::noise_exponent)
      .def_readwrite("tracer_weight", &EmbedConfig::tracer_weight)
      .def_readwrite("shrink_window", &EmbedConfig::shrink_window)
      .def_readwrite("deterministic", &EmbedConfig::deterministic)
      .def_readwrite("threads", &EmbedConfig::threads)
      .def_readwrite("seed", &EmbedConfig::seed);

  py::class_<EmbeddingModel>(m, "EmbeddingModel")
      .def_readonly("vertex_count", &EmbeddingModel::vertex_count)
      .def_readonly("tracer_count", &EmbeddingModel::tracer_count)
      .def_readonly("dimension", &EmbeddingModel::dimension)
      .def("vertex_vector",
           [](const EmbeddingModel& m_, VertexId v) {
             return row_copy(m_.f(static_cast<std::size_t>(v)));
           },
           py::arg("vertex"))
      .def("tracer_vector",
           [](const EmbeddingModel& m_, int t) { return row_copy(m_.f(m_.tracer_row(t))); },
           py::arg("tracer"));

  m.def("train_embeddings",
        [](const WalkCorpus& corpus, const std::vector<std::vector<int>>& assignments,
           std::size_t vertex_count, int tracer_count, const EmbedConfig& config) {
          return train_embeddings(corpus, assignments, vertex_count, tracer_count, config);
        },
        py::arg("corpus"), py::arg("assignments"), py::arg("vertex_count"),
        py::arg("tracer_count"), py::arg("config"));
  m.def("save_embeddings", &save_embeddings, py::arg("model"), py::arg("graph"),
        py::arg("file"));
  m.def("load_embeddings", &load_embeddings, py::arg("graph"), py::arg("file"));

  py::class_<IntegratedTable>(m, "IntegratedTable")
      .def_readonly("vertex_count", &IntegratedTable::vertex_count)
      .def_readonly("width", &IntegratedTable::width)
      .def_readonly("integrated", &IntegratedTable::integrated)
      .def_readonly("tracer_of", &IntegratedTable::tracer_of)
      .def("row", [](const IntegratedTable& t, VertexId v) { return row_copy(t.row(v)); },
           py::arg("vertex"));

  m.def("integrate", &integrate, py::arg("model"), py::arg("posteriors"));
  m.def("vertex_only_table", &vertex_only_table, py::arg("model"));
  m.def("pool_review",
        [](const HetGraph& graph, const IntegratedTable& table, VertexId review) {
          ReviewVector v = pool_review(graph, table, review);
          return py::make_tuple(v.values, v.word_hits);
        },
        py::arg("graph"), py::arg("table"), py::arg("review"));
  m.def("save_integrated", &save_integrated, py::arg("table"), py::arg("graph"),
        py::arg("file"));
  m.def("load_integrated", &load_integrated, py::arg("graph"), py::arg("file"));

  py::class_<DetectConfig>(m, "DetectConfig")
      .def(py::init<>())
      .def_readwrite("lambda_", &DetectConfig::lambda)
      .def_readwrite("epochs", &DetectConfig::epochs)
      .def_readwrite("normalize_embedding", &DetectConfig::normalize_embedding)
      .def_readwrite("seed", &DetectConfig::seed);

  py::class_<FeatureMatrix>(m, "FeatureMatrix")
      .def_readonly("reviews", &FeatureMatrix::reviews)
      .def_property_readonly("width",
                             [](const FeatureMatrix& f) { return f.spec.width(); });

  py::class_<DetectorModel>(m, "DetectorModel");

  py::class_<AspectMetrics>(m, "AspectMetrics")
      .def_readonly("aspect", &AspectMetrics::aspect)
      .def_readonly("tp", &AspectMetrics::tp)
      .def_readonly("fp", &AspectMetrics::fp)
      .def_readonly("fn", &AspectMetrics::fn)
      .def_readonly("precision", &AspectMetrics::precision)
      .def_readonly("recall", &AspectMetrics::recall)
      .def_readonly("f1", &AspectMetrics::f1)
      .def_readonly("support", &AspectMetrics::support);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("micro_f1", &EvalReport::micro_f1)
      .def_readonly("macro_f1", &EvalReport::macro_f1)
      .def_readonly("tp", &EvalReport::tp)
      .def_readonly("fp", &EvalReport::fp)
      .def_readonly("fn", &EvalReport::fn)
      .def_readonly("per_aspect", &EvalReport::per_aspect);

  m.def("build_features",
        [](const HetGraph& graph, const IntegratedTable* table, const DatasetSplit& split,
           const DetectConfig& config) { return build_features(graph, table, split, config); },
        py::arg("graph"), py::arg("table"), py::arg("split"), py::arg("config"));
  m.def("train_ovr", &train_ovr, py::arg("train"), py::arg("split"), py::arg("aspects"),
        py::arg("config"));
  m.def("predict", &predict, py::arg("model"), py::arg("features"));
  m.def("evaluate", &evaluate, py::arg("reviews"), py::arg("predictions"), py::arg("split"),
        py::arg("aspects"));

  py::class_<SyntheticSpec>(m, "SyntheticSpec")
      .def(py::init<>())
      .def_readwrite("shared_aspects", &SyntheticSpec::shared_aspects)
      .def_readwrite("specific_aspects", &SyntheticSpec::specific_aspects)
      .def_readwrite("products_per_domain", &SyntheticSpec::products_per_domain)
      .def_readwrite("sellers_per_domain", &SyntheticSpec::sellers_per_domain)
      .def_readwrite("customers", &SyntheticSpec::customers)
      .def_readwrite("signature_words_per_aspect", &SyntheticSpec::signature_words_per_aspect)
      .def_readwrite("noise_words", &SyntheticSpec::noise_words)
      .def_readwrite("reviews_per_domain", &SyntheticSpec::reviews_per_domain)
      .def_readwrite("words_per_review", &SyntheticSpec::words_per_review)
      .def_readwrite("customer_sharing", &SyntheticSpec::customer_sharing)
      .def_readwrite("seller_sharing", &SyntheticSpec::seller_sharing)
      .def_readwrite("word_sharing", &SyntheticSpec::word_sharing)
      .def_readwrite("affinity", &SyntheticSpec::affinity)
      .def_readwrite("theme_strength", &SyntheticSpec::theme_strength)
      .def_readwrite("shared_mention", &SyntheticSpec::shared_mention)
      .def_readwrite("product_affinity", &SyntheticSpec::product_affinity)
      .def_readwrite("cooccur_window", &SyntheticSpec::cooccur_window)
      .def_readwrite("min_cooccur", &SyntheticSpec::min_cooccur)
      .def_readwrite("train_per_aspect", &SyntheticSpec::train_per_aspect)
      .def_readwrite("seed", &SyntheticSpec::seed);

  m.def("synthesize", &synthesize, py::arg("spec"), py::arg("out_dir"));

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("vertices_file", &RunConfig::vertices_file)
      .def_readwrite("edges_file", &RunConfig::edges_file)
      .def_readwrite("reviews_file", &RunConfig::reviews_file)
      .def_readwrite("split_file", &RunConfig::split_file)
      .def_readwrite("aspects_file", &RunConfig::aspects_file)
      .def_readwrite("out_dir", &RunConfig::out_dir)
      .def_property(
          "variant", [](const RunConfig& c) { return std::string(variant_name(c.variant)); },
          [](RunConfig& c, const std::string& name) { c.variant = parse_variant(name); })
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("resume", &RunConfig::resume)
      .def_readwrite("derive_rel_edges", &RunConfig::derive_rel_edges)
      .def_readwrite("walk", &RunConfig::walk)
      .def_readwrite("tracer", &RunConfig::tracer)
      .def_readwrite("embed", &RunConfig::embed)
      .def_readwrite("detect", &RunConfig::detect);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("report", &RunResult::report)
      .def_readonly("report_file", &RunResult::report_file)
      .def_readonly("vertex_count", &RunResult::vertex_count)
      .def_readonly("edge_count", &RunResult::edge_count);

  m.def("run_pipeline", &run_pipeline, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("stage_seed", &stage_seed, py::arg("seed"), py::arg("stage"));
  m.def("config_echo", [](const RunConfig& config) { return config_echo(resolve(config)); },
        py::arg("config"));
  m.def("load_report_summary", &load_report_summary, py::arg("file"));
  m.def("format_report_table", &format_report_table, py::arg("rows"));
}
