#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "thgrl/detect.hpp"
#include "thgrl/embed.hpp"
#include "thgrl/graph.hpp"
#include "thgrl/io_util.hpp"
#include "thgrl/pipeline.hpp"
#include "thgrl/represent.hpp"
#include "thgrl/tracer.hpp"
#include "thgrl/walk.hpp"

namespace {

// key=value settings file per subcommand. Applied at callback time so
// command-line flags always win; environment variables are never consulted.
void add_config_option(CLI::App* cmd) {
  cmd->add_option("--config", "key=value settings file; explicit flags take precedence")
      ->check(CLI::ExistingFile);
}

void apply_config(CLI::App* cmd) {
  const CLI::Option* copt = cmd->get_option("--config");
  if (copt->count() == 0) return;
  auto file = copt->as<std::string>();
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return std::string(s);
  };
  thgrl::io::for_each_data_line(file, [&](std::string_view line, std::size_t lineno) {
    auto eq = line.find('=');
    if (eq == std::string_view::npos) thgrl::io::fail_at(file, lineno, "expected key=value");
    std::string key = trim(line.substr(0, eq));
    CLI::Option* opt =
        key == "config" ? nullptr : cmd->get_option_no_throw("--" + key);
    if (opt == nullptr) thgrl::io::fail_at(file, lineno, "unknown setting: " + key);
    if (opt->count() > 0) return;  // set on the command line
    opt->add_result(trim(line.substr(eq + 1)));
    opt->run_callback();
  });
}

struct GraphArgs {
  std::string vertices;
  std::string edges;
};

void add_graph_args(CLI::App* cmd, GraphArgs& args) {
  cmd->add_option("--vertices", args.vertices, "vertex table (id, type [, label])")->required();
  cmd->add_option("--edges", args.edges, "edge table (src, dst, relation [, weight])")->required();
}

thgrl::HetGraph load(const GraphArgs& args) {
  return thgrl::load_graph(args.vertices, args.edges, thgrl::Schema::standard());
}

struct SplitArgs {
  std::string reviews;
  std::string split;
};

void add_split_args(CLI::App* cmd, SplitArgs& args) {
  cmd->add_option("--reviews", args.reviews, "review gold labels (review, aspect list)")
      ->required();
  cmd->add_option("--split", args.split, "review split (review, TRAIN|TEST)")->required();
}

void add_walk_options(CLI::App* cmd, thgrl::WalkConfig& cfg, std::string& mode,
                      std::string& relations) {
  cmd->add_option("--mode", mode, "hierarchical or ordinary")->capture_default_str();
  cmd->add_option("--relations", relations, "relation draw: uniform or weighted")
      ->capture_default_str();
  cmd->add_option("--walks", cfg.walks_per_vertex, "walks per vertex")->capture_default_str();
  cmd->add_option("--length", cfg.walk_length, "steps per walk")->capture_default_str();
}

void apply_walk_mode(thgrl::WalkConfig& cfg, const std::string& mode,
                     const std::string& relations) {
  cfg.mode = thgrl::parse_walk_mode(mode);
  if (relations == "uniform")
    cfg.relation_choice = thgrl::RelationChoice::kUniform;
  else if (relations == "weighted")
    cfg.relation_choice = thgrl::RelationChoice::kWeighted;
  else
    throw std::runtime_error("unknown relation choice: " + relations);
}

void add_tracer_options(CLI::App* cmd, thgrl::TracerConfig& cfg) {
  cmd->add_option("--tracers", cfg.tracer_count, "number of walker tracers")
      ->capture_default_str();
  cmd->add_option("--alpha", cfg.dirichlet_alpha, "path-tracer prior (<= 0: 50 / tracers)")
      ->capture_default_str();
  cmd->add_option("--eta", cfg.vertex_smoothing, "tracer-vertex smoothing")
      ->capture_default_str();
  cmd->add_option("--iterations", cfg.gibbs_iterations, "gibbs sweeps")->capture_default_str();
  cmd->add_option("--burn-in", cfg.burn_in, "sweeps ignored by monitoring")
      ->capture_default_str();
}

void add_embed_options(CLI::App* cmd, thgrl::EmbedConfig& cfg) {
  cmd->add_option("--dim", cfg.dimension, "embedding dimension")->capture_default_str();
  cmd->add_option("--window", cfg.context_window, "context window")->capture_default_str();
  cmd->add_option("--negatives", cfg.negatives, "negative samples per pair")
      ->capture_default_str();
  cmd->add_option("--initial-lr", cfg.initial_lr, "starting learning rate")
      ->capture_default_str();
  cmd->add_option("--final-lr", cfg.final_lr, "ending learning rate")->capture_default_str();
  cmd->add_option("--epochs", cfg.epochs, "passes over the corpus")->capture_default_str();
  cmd->add_option("--noise-exponent", cfg.noise_exponent, "noise distribution power")
      ->capture_default_str();
  cmd->add_option("--tracer-weight", cfg.tracer_weight,
                  "weight of the tracer half of the objective (0 disables)")
      ->capture_default_str();
  cmd->add_flag("--shrink-window", cfg.shrink_window, "sample the window size per target");
  cmd->add_option("--threads", cfg.threads, "workers for --parallel mode")
      ->capture_default_str();
}

void add_detect_options(CLI::App* cmd, thgrl::DetectConfig& cfg) {
  cmd->add_option("--lambda", cfg.lambda, "L2 regularization strength")->capture_default_str();
  cmd->add_option("--classifier-epochs", cfg.epochs, "classifier training epochs")
      ->capture_default_str();
}

int run(int argc, char** argv) {
  CLI::App app{"traceable heterogeneous graph representation learning"};
  app.require_subcommand(1);

  // build-graph
  auto* build_cmd = app.add_subcommand(
      "build-graph", "apply the test-review leakage filter and derive word-aspect edges");
  GraphArgs build_graph_args;
  SplitArgs build_split_args;
  std::string build_out_vertices, build_out_edges;
  bool build_no_filter = false, build_no_rel = false, build_stats = false;
  add_graph_args(build_cmd, build_graph_args);
  add_split_args(build_cmd, build_split_args);
  build_cmd->add_option("--out-vertices", build_out_vertices, "output vertex table")->required();
  build_cmd->add_option("--out-edges", build_out_edges, "output edge table")->required();
  build_cmd->add_flag("--no-filter", build_no_filter, "keep test review edges");
  build_cmd->add_flag("--no-rel-edges", build_no_rel, "skip word-aspect edge derivation");
  build_cmd->add_flag("--stats", build_stats, "print graph statistics");
  add_config_option(build_cmd);
  build_cmd->callback([&] {
    apply_config(build_cmd);
    thgrl::HetGraph graph = load(build_graph_args);
    thgrl::DatasetSplit split =
        thgrl::load_split(graph, build_split_args.reviews, build_split_args.split);
    if (!build_no_filter) graph = thgrl::apply_leakage_filter(graph, split);
    if (!build_no_rel) graph = thgrl::build_word_aspect_edges(graph, split);
    thgrl::save_graph(graph, build_out_vertices, build_out_edges);
    if (build_stats) std::cout << thgrl::format_stats(graph);
  });

  // walk
  auto* walk_cmd = app.add_subcommand("walk", "generate the random walk corpus");
  GraphArgs walk_graph_args;
  thgrl::WalkConfig walk_cfg;
  std::string walk_mode = "hierarchical", walk_relations = "uniform", walk_out;
  add_graph_args(walk_cmd, walk_graph_args);
  add_walk_options(walk_cmd, walk_cfg, walk_mode, walk_relations);
  walk_cmd->add_option("--seed", walk_cfg.seed, "rng seed")->capture_default_str();
  walk_cmd->add_option("--out", walk_out, "corpus file")->required();
  add_config_option(walk_cmd);
  walk_cmd->callback([&] {
    apply_config(walk_cmd);
    apply_walk_mode(walk_cfg, walk_mode, walk_relations);
    thgrl::HetGraph graph = load(walk_graph_args);
    thgrl::WalkCorpus corpus = thgrl::generate_corpus(graph, walk_cfg);
    thgrl::save_corpus(corpus, graph, walk_out);
    std::cout << "paths\t" << corpus.paths.size() << "\ntokens\t" << corpus.token_count()
              << '\n';
  });

  // trace
  auto* trace_cmd = app.add_subcommand("trace", "fit the walker tracer model on a corpus");
  GraphArgs trace_graph_args;
  thgrl::TracerConfig trace_cfg;
  std::string trace_walks, trace_out;
  bool trace_monitor = false;
  add_graph_args(trace_cmd, trace_graph_args);
  add_tracer_options(trace_cmd, trace_cfg);
  trace_cmd->add_option("--walks", trace_walks, "corpus file")->required();
  trace_cmd->add_option("--seed", trace_cfg.seed, "rng seed")->capture_default_str();
  trace_cmd->add_option("--out", trace_out, "model file")->required();
  trace_cmd->add_flag("--monitor", trace_monitor, "print the log joint per sweep");
  add_config_option(trace_cmd);
  trace_cmd->callback([&] {
    apply_config(trace_cmd);
    thgrl::HetGraph graph = load(trace_graph_args);
    thgrl::WalkCorpus corpus = thgrl::load_corpus(graph, trace_walks);
    std::vector<double> trail;
    thgrl::TracerModel model = thgrl::fit_tracers(corpus, graph.vertex_count(), trace_cfg,
                                                  trace_monitor ? &trail : nullptr);
    thgrl::save_tracer_model(model, trace_out);
    if (trace_monitor)
      for (std::size_t i = 0; i < trail.size(); ++i)
        std::cout << "sweep\t" << i << "\tlog_joint\t" << thgrl::io::format_double(trail[i])
                  << '\n';
  });

  // embed
  auto* embed_cmd = app.add_subcommand("embed", "co-learn vertex and tracer representations");
  GraphArgs embed_graph_args;
  thgrl::EmbedConfig embed_cfg;
  std::string embed_walks, embed_tracer, embed_out;
  bool embed_parallel = false;
  add_graph_args(embed_cmd, embed_graph_args);
  add_embed_options(embed_cmd, embed_cfg);
  embed_cmd->add_option("--walks", embed_walks, "corpus file")->required();
  embed_cmd->add_option("--tracer-model", embed_tracer, "fitted tracer model")->required();
  embed_cmd->add_option("--seed", embed_cfg.seed, "rng seed")->capture_default_str();
  embed_cmd->add_option("--out", embed_out, "embedding file")->required();
  embed_cmd->add_flag("--parallel", embed_parallel,
                      "lock-free parallel training (not reproducible run to run)");
  add_config_option(embed_cmd);
  embed_cmd->callback([&] {
    apply_config(embed_cmd);
    embed_cfg.deterministic = !embed_parallel;
    thgrl::HetGraph graph = load(embed_graph_args);
    thgrl::WalkCorpus corpus = thgrl::load_corpus(graph, embed_walks);
    thgrl::TracerModel model = thgrl::load_tracer_model(embed_tracer);
    auto assignments = thgrl::assign_tokens(model, corpus);
    thgrl::EmbeddingModel embeddings = thgrl::train_embeddings(
        corpus, assignments, graph.vertex_count(), model.tracer_count, embed_cfg);
    thgrl::save_embeddings(embeddings, graph, embed_out);
  });

  // integrate
  auto* integrate_cmd =
      app.add_subcommand("integrate", "concatenate vertex rows with their best tracer rows");
  GraphArgs integrate_graph_args;
  std::string integrate_walks, integrate_tracer, integrate_embeddings, integrate_out;
  bool integrate_vertex_only = false;
  add_graph_args(integrate_cmd, integrate_graph_args);
  integrate_cmd->add_option("--walks", integrate_walks, "corpus file")->required();
  integrate_cmd->add_option("--tracer-model", integrate_tracer, "fitted tracer model")
      ->required();
  integrate_cmd->add_option("--embeddings", integrate_embeddings, "embedding file")->required();
  integrate_cmd->add_option("--out", integrate_out, "integrated table file")->required();
  integrate_cmd->add_flag("--vertex-only", integrate_vertex_only,
                          "emit width-d vertex rows without the tracer half");
  add_config_option(integrate_cmd);
  integrate_cmd->callback([&] {
    apply_config(integrate_cmd);
    thgrl::HetGraph graph = load(integrate_graph_args);
    thgrl::EmbeddingModel embeddings = thgrl::load_embeddings(graph, integrate_embeddings);
    thgrl::IntegratedTable table;
    if (integrate_vertex_only) {
      table = thgrl::vertex_only_table(embeddings);
    } else {
      thgrl::WalkCorpus corpus = thgrl::load_corpus(graph, integrate_walks);
      thgrl::TracerModel model = thgrl::load_tracer_model(integrate_tracer);
      auto assignments = thgrl::assign_tokens(model, corpus);
      auto posteriors = thgrl::vertex_tracer_posterior(model, corpus, assignments);
      table = thgrl::integrate(embeddings, posteriors);
    }
    thgrl::save_integrated(table, graph, integrate_out);
  });

  // detect
  auto* detect_cmd =
      app.add_subcommand("detect", "train one-vs-rest aspect classifiers and predict");
  GraphArgs detect_graph_args;
  SplitArgs detect_split_args;
  thgrl::DetectConfig detect_cfg;
  std::string detect_aspects, detect_integrated, detect_out_model, detect_out_predictions;
  bool detect_no_normalize = false;
  add_graph_args(detect_cmd, detect_graph_args);
  add_split_args(detect_cmd, detect_split_args);
  add_detect_options(detect_cmd, detect_cfg);
  detect_cmd->add_option("--aspects", detect_aspects, "target aspect list, one id per line")
      ->required();
  detect_cmd->add_option("--integrated", detect_integrated,
                         "integrated table file (omit for text-only features)");
  detect_cmd->add_option("--seed", detect_cfg.seed, "rng seed")->capture_default_str();
  detect_cmd->add_option("--out-model", detect_out_model, "detector file")->required();
  detect_cmd->add_option("--out-predictions", detect_out_predictions, "predictions file")
      ->required();
  detect_cmd->add_flag("--no-normalize-embedding", detect_no_normalize,
                       "keep the embedding block unnormalized");
  add_config_option(detect_cmd);
  detect_cmd->callback([&] {
    apply_config(detect_cmd);
    detect_cfg.normalize_embedding = !detect_no_normalize;
    thgrl::HetGraph graph = load(detect_graph_args);
    thgrl::DatasetSplit split =
        thgrl::load_split(graph, detect_split_args.reviews, detect_split_args.split);
    std::vector<thgrl::VertexId> aspects = thgrl::load_aspects(graph, detect_aspects);
    thgrl::IntegratedTable table;
    const thgrl::IntegratedTable* table_ptr = nullptr;
    if (!detect_integrated.empty()) {
      table = thgrl::load_integrated(graph, detect_integrated);
      table_ptr = &table;
    }
    auto [train, test] = thgrl::build_features(graph, table_ptr, split, detect_cfg);
    thgrl::DetectorModel model = thgrl::train_ovr(train, split, aspects, detect_cfg);
    thgrl::save_detector(model, graph, detect_out_model);
    auto predictions = thgrl::predict(model, test);
    thgrl::save_predictions(graph, test.reviews, predictions, detect_out_predictions);
  });

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "score predictions against gold labels");
  GraphArgs eval_graph_args;
  SplitArgs eval_split_args;
  std::string eval_aspects, eval_predictions, eval_out;
  add_graph_args(eval_cmd, eval_graph_args);
  add_split_args(eval_cmd, eval_split_args);
  eval_cmd->add_option("--aspects", eval_aspects, "target aspect list")->required();
  eval_cmd->add_option("--predictions", eval_predictions, "predictions file")->required();
  eval_cmd->add_option("--out", eval_out, "report file")->required();
  add_config_option(eval_cmd);
  eval_cmd->callback([&] {
    apply_config(eval_cmd);
    thgrl::HetGraph graph = load(eval_graph_args);
    thgrl::DatasetSplit split =
        thgrl::load_split(graph, eval_split_args.reviews, eval_split_args.split);
    std::vector<thgrl::VertexId> aspects = thgrl::load_aspects(graph, eval_aspects);
    auto [reviews, predictions] = thgrl::load_predictions(graph, eval_predictions);
    thgrl::EvalReport report = thgrl::evaluate(reviews, predictions, split, aspects);
    thgrl::save_report(report, graph, eval_out);
    std::printf("micro_f1\t%.6f\nmacro_f1\t%.6f\n", report.micro_f1, report.macro_f1);
  });

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a two-domain synthetic dataset");
  thgrl::SyntheticSpec synth_spec;
  std::string synth_out;
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--shared-aspects", synth_spec.shared_aspects)->capture_default_str();
  synth_cmd->add_option("--specific-aspects", synth_spec.specific_aspects)
      ->capture_default_str();
  synth_cmd->add_option("--products", synth_spec.products_per_domain)->capture_default_str();
  synth_cmd->add_option("--sellers", synth_spec.sellers_per_domain)->capture_default_str();
  synth_cmd->add_option("--customers", synth_spec.customers)->capture_default_str();
  synth_cmd->add_option("--signature-words", synth_spec.signature_words_per_aspect)
      ->capture_default_str();
  synth_cmd->add_option("--noise-words", synth_spec.noise_words)->capture_default_str();
  synth_cmd->add_option("--reviews", synth_spec.reviews_per_domain)->capture_default_str();
  synth_cmd->add_option("--review-words", synth_spec.words_per_review)->capture_default_str();
  synth_cmd->add_option("--customer-sharing", synth_spec.customer_sharing)
      ->capture_default_str();
  synth_cmd->add_option("--seller-sharing", synth_spec.seller_sharing)->capture_default_str();
  synth_cmd->add_option("--word-sharing", synth_spec.word_sharing)->capture_default_str();
  synth_cmd->add_option("--affinity", synth_spec.affinity)->capture_default_str();
  synth_cmd->add_option("--theme-strength", synth_spec.theme_strength)->capture_default_str();
  synth_cmd->add_option("--shared-mention", synth_spec.shared_mention)->capture_default_str();
  synth_cmd->add_option("--product-affinity", synth_spec.product_affinity)
      ->capture_default_str();
  synth_cmd->add_option("--cooccur-window", synth_spec.cooccur_window)->capture_default_str();
  synth_cmd->add_option("--min-cooccur", synth_spec.min_cooccur)->capture_default_str();
  synth_cmd->add_option("--train-per-aspect", synth_spec.train_per_aspect)
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_spec.seed)->capture_default_str();
  add_config_option(synth_cmd);
  synth_cmd->callback([&] {
    apply_config(synth_cmd);
    thgrl::synthesize(synth_spec, synth_out);
  });

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "run every stage end to end");
  thgrl::RunConfig run_cfg;
  GraphArgs pipe_graph_args;
  SplitArgs pipe_split_args;
  std::string pipe_aspects, pipe_out, pipe_variant = "def";
  std::string pipe_walk_mode = "hierarchical", pipe_walk_relations = "uniform";
  bool pipe_resume = false, pipe_no_rel = false, pipe_parallel = false;
  add_graph_args(pipe_cmd, pipe_graph_args);
  add_split_args(pipe_cmd, pipe_split_args);
  pipe_cmd->add_option("--aspects", pipe_aspects, "target aspect list")->required();
  pipe_cmd->add_option("--out", pipe_out, "artifact directory")->required();
  pipe_cmd->add_option("--variant", pipe_variant, "def, ov or ran")->capture_default_str();
  pipe_cmd->add_option("--seed", run_cfg.seed, "global seed; stage seeds derive from it")
      ->capture_default_str();
  pipe_cmd->add_flag("--resume", pipe_resume, "reuse artifacts already in the directory");
  pipe_cmd->add_flag("--no-rel-edges", pipe_no_rel, "skip word-aspect edge derivation");
  pipe_cmd->add_flag("--parallel", pipe_parallel, "parallel embedding (not reproducible)");
  add_walk_options(pipe_cmd, run_cfg.walk, pipe_walk_mode, pipe_walk_relations);
  add_tracer_options(pipe_cmd, run_cfg.tracer);
  add_embed_options(pipe_cmd, run_cfg.embed);
  add_detect_options(pipe_cmd, run_cfg.detect);
  add_config_option(pipe_cmd);
  pipe_cmd->callback([&] {
    apply_config(pipe_cmd);
    run_cfg.vertices_file = pipe_graph_args.vertices;
    run_cfg.edges_file = pipe_graph_args.edges;
    run_cfg.reviews_file = pipe_split_args.reviews;
    run_cfg.split_file = pipe_split_args.split;
    run_cfg.aspects_file = pipe_aspects;
    run_cfg.out_dir = pipe_out;
    run_cfg.variant = thgrl::parse_variant(pipe_variant);
    run_cfg.resume = pipe_resume;
    run_cfg.derive_rel_edges = !pipe_no_rel;
    run_cfg.embed.deterministic = !pipe_parallel;
    apply_walk_mode(run_cfg.walk, pipe_walk_mode, pipe_walk_relations);
    thgrl::RunResult result = thgrl::run_pipeline(run_cfg);
    std::printf("variant\t%s\nvertices\t%zu\nedges\t%zu\nmicro_f1\t%.6f\nmacro_f1\t%.6f\n",
                thgrl::variant_name(run_cfg.variant), result.vertex_count, result.edge_count,
                result.report.micro_f1, result.report.macro_f1);
  });

  // report
  auto* report_cmd = app.add_subcommand("report", "print saved reports side by side");
  std::vector<std::string> report_entries;
  report_cmd->add_option("entries", report_entries, "label=report-file pairs")->required();
  report_cmd->callback([&] {
    std::vector<std::pair<std::string, thgrl::EvalReport>> rows;
    for (const std::string& entry : report_entries) {
      auto eq = entry.find('=');
      if (eq == std::string::npos || eq == 0)
        throw std::runtime_error("report entries look like label=path, got: " + entry);
      rows.emplace_back(entry.substr(0, eq),
                        thgrl::load_report_summary(entry.substr(eq + 1)));
    }
    std::cout << thgrl::format_report_table(rows);
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
