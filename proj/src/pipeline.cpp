#include "thgrl/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "thgrl/io_util.hpp"
#include "thgrl/represent.hpp"
#include "thgrl/rng.hpp"

namespace thgrl {

Variant parse_variant(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "def") return Variant::kDef;
  if (s == "ov") return Variant::kOv;
  if (s == "ran") return Variant::kRan;
  throw std::runtime_error("unknown variant: " + name + " (use def, ov or ran)");
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kDef: return "def";
    case Variant::kOv: return "ov";
    default: return "ran";
  }
}

std::uint64_t stage_seed(std::uint64_t global_seed, const char* stage) {
  return derive_seed(global_seed, hash_label(stage));
}

RunConfig resolve(RunConfig config) {
  config.walk.seed = stage_seed(config.seed, "walk");
  config.tracer.seed = stage_seed(config.seed, "tracer");
  config.embed.seed = stage_seed(config.seed, "embed");
  config.detect.seed = stage_seed(config.seed, "detect");
  config.walk.mode = config.variant == Variant::kRan ? WalkMode::kOrdinary
                                                     : WalkMode::kHierarchical;
  return config;
}

std::string config_echo(const RunConfig& config) {
  std::map<std::string, std::string> kv;
  kv["walk.mode"] = walk_mode_name(config.walk.mode);
  kv["walk.relations"] =
      config.walk.relation_choice == RelationChoice::kUniform ? "uniform" : "weighted";
  kv["walk.walks"] = std::to_string(config.walk.walks_per_vertex);
  kv["walk.length"] = std::to_string(config.walk.walk_length);
  kv["walk.seed"] = std::to_string(config.walk.seed);
  kv["tracer.count"] = std::to_string(config.tracer.tracer_count);
  kv["tracer.alpha"] = io::format_double(config.tracer.alpha());
  kv["tracer.eta"] = io::format_double(config.tracer.vertex_smoothing);
  kv["tracer.iterations"] = std::to_string(config.tracer.gibbs_iterations);
  kv["tracer.burn_in"] = std::to_string(config.tracer.burn_in);
  kv["tracer.seed"] = std::to_string(config.tracer.seed);
  kv["embed.dimension"] = std::to_string(config.embed.dimension);
  kv["embed.window"] = std::to_string(config.embed.context_window);
  kv["embed.negatives"] = std::to_string(config.embed.negatives);
  kv["embed.initial_lr"] = io::format_double(config.embed.initial_lr);
  kv["embed.final_lr"] = io::format_double(config.embed.final_lr);
  kv["embed.epochs"] = std::to_string(config.embed.epochs);
  kv["embed.noise_exponent"] = io::format_double(config.embed.noise_exponent);
  kv["embed.tracer_weight"] = io::format_double(config.embed.tracer_weight);
  kv["embed.shrink_window"] = config.embed.shrink_window ? "1" : "0";
  kv["embed.deterministic"] = config.embed.deterministic ? "1" : "0";
  kv["embed.seed"] = std::to_string(config.embed.seed);
  kv["represent.integrated"] = config.variant == Variant::kOv ? "0" : "1";
  kv["detect.lambda"] = io::format_double(config.detect.lambda);
  kv["detect.epochs"] = std::to_string(config.detect.epochs);
  kv["detect.normalize_embedding"] = config.detect.normalize_embedding ? "1" : "0";
  kv["detect.seed"] = std::to_string(config.detect.seed);
  kv["rel_edges.derive"] = config.derive_rel_edges ? "1" : "0";
  std::ostringstream out;
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
  return out.str();
}

std::vector<VertexId> load_aspects(const HetGraph& graph, const std::filesystem::path& file) {
  std::vector<VertexId> aspects;
  int aspect_type = graph.schema().vertex_type("Aspect");
  io::for_each_data_line(file, [&](std::string_view line, std::size_t lineno) {
    VertexId a = graph.find(std::string(line));
    if (a == kNoVertex) io::fail_at(file, lineno, "unknown aspect id: " + std::string(line));
    if (graph.type_of(a) != aspect_type)
      io::fail_at(file, lineno, std::string(line) + " is not an Aspect vertex");
    if (std::find(aspects.begin(), aspects.end(), a) != aspects.end())
      io::fail_at(file, lineno, "aspect listed twice: " + std::string(line));
    aspects.push_back(a);
  });
  if (aspects.empty()) throw std::runtime_error(file.string() + ": no aspects listed");
  return aspects;
}

namespace {

void write_text(const std::filesystem::path& file, const std::string& text) {
  auto out = io::open_output(file);
  out << text;
}

}  // namespace

RunResult run_pipeline(const RunConfig& raw) {
  RunConfig config = resolve(raw);
  std::filesystem::create_directories(config.out_dir);
  write_text(config.out_dir / "config.echo", config_echo(config));

  Schema schema = Schema::standard();
  HetGraph input = load_graph(config.vertices_file, config.edges_file, schema);
  DatasetSplit split = load_split(input, config.reviews_file, config.split_file);
  HetGraph graph = apply_leakage_filter(input, split);
  if (config.derive_rel_edges) graph = build_word_aspect_edges(graph, split);
  save_graph(graph, config.out_dir / "graph.vertices.tsv", config.out_dir / "graph.edges.tsv");
  std::vector<VertexId> aspects = load_aspects(graph, config.aspects_file);

  std::filesystem::path walks_file = config.out_dir / "walks.txt";
  WalkCorpus corpus;
  if (config.resume && std::filesystem::exists(walks_file)) {
    corpus = load_corpus(graph, walks_file);
  } else {
    corpus = generate_corpus(graph, config.walk);
    save_corpus(corpus, graph, walks_file);
  }

  std::filesystem::path tracer_file = config.out_dir / "tracer_model.tsv";
  TracerModel tracer_model;
  if (config.resume && std::filesystem::exists(tracer_file)) {
    tracer_model = load_tracer_model(tracer_file);
    if (tracer_model.theta.size() != corpus.paths.size() ||
        tracer_model.vertex_count != graph.vertex_count())
      throw std::runtime_error("persisted tracer model does not match the corpus");
  } else {
    tracer_model = fit_tracers(corpus, graph.vertex_count(), config.tracer);
    save_tracer_model(tracer_model, tracer_file);
  }

  std::vector<std::vector<int>> assignments = assign_tokens(tracer_model, corpus);

  std::filesystem::path embed_file = config.out_dir / "embeddings.txt";
  EmbeddingModel embeddings;
  if (config.resume && std::filesystem::exists(embed_file)) {
    embeddings = load_embeddings(graph, embed_file);
    if (embeddings.tracer_count != tracer_model.tracer_count)
      throw std::runtime_error("persisted embeddings do not match the tracer model");
  } else {
    embeddings = train_embeddings(corpus, assignments, graph.vertex_count(),
                                  tracer_model.tracer_count, config.embed);
    save_embeddings(embeddings, graph, embed_file);
  }

  IntegratedTable table;
  if (config.variant == Variant::kOv) {
    table = vertex_only_table(embeddings);
  } else {
    auto posteriors = vertex_tracer_posterior(tracer_model, corpus, assignments);
    table = integrate(embeddings, posteriors);
  }
  save_integrated(table, graph, config.out_dir / "integrated.txt");

  auto [train_features, test_features] = build_features(graph, &table, split, config.detect);
  DetectorModel detector = train_ovr(train_features, split, aspects, config.detect);
  save_detector(detector, graph, config.out_dir / "detector.tsv");
  auto predictions = predict(detector, test_features);
  save_predictions(graph, test_features.reviews, predictions,
                   config.out_dir / "predictions.tsv");

  RunResult result;
  result.report = evaluate(test_features.reviews, predictions, split, aspects);
  result.report_file = config.out_dir / "report.txt";
  save_report(result.report, graph, result.report_file);
  result.vertex_count = graph.vertex_count();
  result.edge_count = graph.edge_count();
  return result;
}

EvalReport load_report_summary(const std::filesystem::path& file) {
  EvalReport report;
  io::for_each_data_line(file, [&](std::string_view line, std::size_t lineno) {
    auto cols = io::split(line, '\t');
    if (cols.size() != 2) io::fail_at(file, lineno, "expected key and value");
    if (cols[0] == "micro_f1")
      report.micro_f1 = io::parse_double(cols[1], file, lineno);
    else if (cols[0] == "macro_f1")
      report.macro_f1 = io::parse_double(cols[1], file, lineno);
    else if (cols[0] == "tp")
      report.tp = static_cast<std::size_t>(io::parse_long(cols[1], file, lineno));
    else if (cols[0] == "fp")
      report.fp = static_cast<std::size_t>(io::parse_long(cols[1], file, lineno));
    else if (cols[0] == "fn")
      report.fn = static_cast<std::size_t>(io::parse_long(cols[1], file, lineno));
  });
  return report;
}

std::string format_report_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::size_t label_width = 7;
  for (const auto& [label, report] : rows) label_width = std::max(label_width, label.size());
  std::ostringstream out;
  out << std::left;
  char buf[64];
  out.width(static_cast<std::streamsize>(label_width + 2));
  out << "variant";
  out << "micro_f1  macro_f1\n";
  for (const auto& [label, report] : rows) {
    out.width(static_cast<std::streamsize>(label_width + 2));
    out << label;
    std::snprintf(buf, sizeof(buf), "%.4f    %.4f\n", report.micro_f1, report.macro_f1);
    out << buf;
  }
  return out.str();
}

}  // namespace thgrl
