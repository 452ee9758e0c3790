// Acceptance gate. Each criterion prints exactly one [PASS]/[FAIL]/[SKIP]
// line; the process exits nonzero when any gating criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "thgrl/detect.hpp"
#include "thgrl/embed.hpp"
#include "thgrl/graph.hpp"
#include "thgrl/pipeline.hpp"
#include "thgrl/represent.hpp"
#include "thgrl/rng.hpp"
#include "thgrl/tracer.hpp"
#include "thgrl/walk.hpp"

using namespace thgrl;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void report_skip(const char* id, const std::string& detail) {
  std::printf("[SKIP] %s: %s\n", id, detail.c_str());
  std::fflush(stdout);
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// ---- shared benchmark fixtures -------------------------------------------

// Cross-domain benchmark: two domains, 0.3 sharing, ~2k reviews, 10-shot.
// Signature pools are wide relative to what ten training reviews can cover
// and most tokens are noise, so purely lexical features under-generalize;
// theme-loyal customers and products carry the complementary signal that
// only type-balanced walks and tracer features can reach.
SyntheticSpec benchmark_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.signature_words_per_aspect = 150;
  spec.noise_words = 200;
  spec.words_per_review = 20;
  spec.affinity = 0.4;
  spec.customers = 150;
  spec.product_affinity = 0.9;
  spec.theme_strength = 0.9;
  spec.min_cooccur = 3;
  spec.reviews_per_domain = 1000;
  spec.seed = seed;
  return spec;
}

RunConfig benchmark_run(const fs::path& data, const fs::path& out, std::uint64_t seed) {
  RunConfig cfg;
  cfg.vertices_file = data / "vertices.tsv";
  cfg.edges_file = data / "edges.tsv";
  cfg.reviews_file = data / "reviews.tsv";
  cfg.split_file = data / "split.tsv";
  cfg.aspects_file = data / "aspects.txt";
  cfg.out_dir = out;
  cfg.seed = seed;
  cfg.walk.walks_per_vertex = 5;
  cfg.walk.walk_length = 40;
  cfg.tracer.tracer_count = 13;
  cfg.tracer.gibbs_iterations = 150;
  cfg.tracer.burn_in = 37;
  cfg.embed.dimension = 64;
  cfg.embed.context_window = 5;
  cfg.embed.negatives = 5;
  return cfg;
}

bool is_edge(const HetGraph& g, VertexId u, VertexId v) {
  for (const auto& list : g.adjacency(u))
    if (std::binary_search(list.nbr.begin(), list.nbr.end(), v)) return true;
  return false;
}

// ---- criteria -------------------------------------------------------------

void c1_corpus_shape(const fs::path& data) {
  HetGraph g = load_graph(data / "vertices.tsv", data / "edges.tsv", Schema::standard());
  if (g.vertex_count() < 5000) {
    report("C1 walk-corpus-shape", false,
           "fixture graph has only " + std::to_string(g.vertex_count()) + " vertexes");
    return;
  }
  WalkConfig cfg;
  cfg.walks_per_vertex = 10;
  cfg.walk_length = 80;
  cfg.seed = 11;
  Timer timer;
  WalkCorpus corpus = generate_corpus(g, cfg);
  double elapsed = timer.seconds();

  bool shape = corpus.paths.size() == 10 * g.vertex_count();
  std::size_t short_paths = 0;
  bool lengths_ok = true, edges_ok = true;
  for (const auto& path : corpus.paths) {
    if (path.size() < 81) {
      ++short_paths;
      if (g.degree(path.back()) != 0) lengths_ok = false;  // truncation needs a dead end
    } else if (path.size() != 81) {
      lengths_ok = false;
    }
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
      if (!is_edge(g, path[i], path[i + 1])) edges_ok = false;
  }
  bool fast = elapsed < 10.0;
  report("C1 walk-corpus-shape", shape && lengths_ok && edges_ok && fast,
         std::to_string(corpus.paths.size()) + " paths on " +
             std::to_string(g.vertex_count()) + " vertexes, " + std::to_string(short_paths) +
             " dead-end truncations, all transitions are edges, " + fmt(elapsed, 2) +
             "s (< 10s)");
}

void c2_hierarchical_law() {
  GraphBuilder b(Schema::standard());
  b.add_vertex("h", "Review");
  b.add_vertex("w0", "Word");
  b.add_vertex("w1", "Word");
  b.add_vertex("w2", "Word");
  b.add_vertex("a0", "Aspect");
  b.add_vertex("a1", "Aspect");
  b.add_vertex("c0", "Customer");
  b.add_edge("h", "w0", "con", 1.0);
  b.add_edge("h", "w1", "con", 2.0);
  b.add_edge("h", "w2", "con", 3.0);
  b.add_edge("h", "a0", "men", 1.0);
  b.add_edge("h", "a1", "men", 1.0);
  b.add_edge("c0", "h", "wri", 1.0);
  HetGraph g = b.build();
  VertexId hub = g.require("h");

  std::map<VertexId, double> expected = {
      {g.require("w0"), 1.0 / 3 * 1.0 / 6}, {g.require("w1"), 1.0 / 3 * 2.0 / 6},
      {g.require("w2"), 1.0 / 3 * 3.0 / 6}, {g.require("a0"), 1.0 / 3 * 0.5},
      {g.require("a1"), 1.0 / 3 * 0.5},     {g.require("c0"), 1.0 / 3}};

  const int n = 1000000;
  std::map<VertexId, int> hits;
  Rng rng(404);
  for (int i = 0; i < n; ++i) {
    auto next = step_hierarchical(g, hub, rng);
    if (next) ++hits[*next];
  }
  double worst = 0.0;
  bool ok = true;
  for (const auto& [v, p] : expected) {
    double freq = static_cast<double>(hits[v]) / n;
    double sigma = std::sqrt(p * (1.0 - p) / n);
    worst = std::max(worst, std::abs(freq - p) / sigma);
    if (std::abs(freq - p) > 3.0 * sigma) ok = false;
  }
  report("C2 hierarchical-sampling-law", ok,
         "star fixture, 1e6 steps, worst deviation " + fmt(worst, 2) + " sigma (<= 3)");
}

// collapsed joint of a complete assignment state, up to a constant
double collapsed_log_joint(const std::vector<std::vector<VertexId>>& paths,
                           const std::vector<std::vector<int>>& z, int K,
                           std::size_t vertex_count, double alpha, double eta) {
  std::vector<std::vector<int>> npk(paths.size(), std::vector<int>(K, 0));
  std::vector<std::vector<int>> nkv(K, std::vector<int>(vertex_count, 0));
  std::vector<int> nk(K, 0);
  for (std::size_t p = 0; p < paths.size(); ++p)
    for (std::size_t t = 0; t < paths[p].size(); ++t) {
      npk[p][z[p][t]]++;
      nkv[z[p][t]][paths[p][t]]++;
      nk[z[p][t]]++;
    }
  double lj = 0.0;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    for (int k = 0; k < K; ++k) lj += std::lgamma(npk[p][k] + alpha);
    lj -= std::lgamma(static_cast<double>(paths[p].size()) + K * alpha);
  }
  for (int k = 0; k < K; ++k) {
    for (std::size_t v = 0; v < vertex_count; ++v) lj += std::lgamma(nkv[k][v] + eta);
    lj -= std::lgamma(nk[k] + static_cast<double>(vertex_count) * eta);
  }
  return lj;
}

void c3_gibbs_correctness() {
  // (a) the sampler's full conditional vs exhaustive enumeration
  struct Fixture {
    std::vector<std::vector<VertexId>> paths;
    int K;
    std::size_t vertexes;
  };
  std::vector<Fixture> fixtures = {
      {{{0, 1, 0}, {1, 2}}, 2, 3},
      {{{0, 0, 1, 2, 3}, {3, 2, 1}}, 3, 4},
      {{{4, 1, 3, 2, 0, 1, 2, 3}}, 3, 5},
      {{{0}, {1}, {0, 1}}, 2, 2},
  };
  double worst_diff = 0.0;
  for (const Fixture& fx : fixtures) {
    std::size_t tokens = 0;
    for (const auto& p : fx.paths) tokens += p.size();
    std::vector<int> flat(tokens, 0);
    const double alpha = 0.7, eta = 0.04;
    bool more = true;
    while (more) {
      std::vector<std::vector<int>> z(fx.paths.size());
      std::size_t at = 0;
      for (std::size_t p = 0; p < fx.paths.size(); ++p)
        for (std::size_t t = 0; t < fx.paths[p].size(); ++t) z[p].push_back(flat[at++]);

      WalkCorpus corpus;
      corpus.paths = fx.paths;
      GibbsCounts counts = GibbsCounts::tally(corpus, z, fx.K, fx.vertexes);
      for (std::size_t p = 0; p < fx.paths.size(); ++p)
        for (std::size_t t = 0; t < fx.paths[p].size(); ++t) {
          VertexId v = fx.paths[p][t];
          int old = z[p][t];
          counts.path_tracer[p][old]--;
          counts.tracer_vertex[old][v]--;
          counts.tracer_total[old]--;
          std::vector<double> cond = full_conditional(counts, p, v, alpha, eta, fx.vertexes);

          std::vector<double> lj(fx.K);
          for (int k = 0; k < fx.K; ++k) {
            z[p][t] = k;
            lj[k] = collapsed_log_joint(fx.paths, z, fx.K, fx.vertexes, alpha, eta);
          }
          z[p][t] = old;
          double mx = *std::max_element(lj.begin(), lj.end());
          double norm = 0.0;
          for (double& x : lj) norm += (x = std::exp(x - mx));
          for (int k = 0; k < fx.K; ++k)
            worst_diff = std::max(worst_diff, std::abs(cond[k] - lj[k] / norm));

          counts.path_tracer[p][old]++;
          counts.tracer_vertex[old][v]++;
          counts.tracer_total[old]++;
        }
      // next assignment state
      std::size_t i = 0;
      for (; i < tokens; ++i) {
        if (++flat[i] < fx.K) break;
        flat[i] = 0;
      }
      more = i < tokens;
    }
  }
  bool exact = worst_diff < 1e-12;

  // (b) planted recovery: 3 tracers over 30 vertexes, 500 paths x 80 tokens
  Timer timer;
  const int K = 3, V = 30, P = 500, L = 80;
  std::vector<std::vector<double>> true_beta(K, std::vector<double>(V, 0.05 / 20));
  for (int k = 0; k < K; ++k)
    for (int v = 10 * k; v < 10 * (k + 1); ++v) true_beta[k][v] = 0.95 / 10;

  std::mt19937_64 gen(99);
  std::gamma_distribution<double> gamma(0.5, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  WalkCorpus corpus;
  for (int p = 0; p < P; ++p) {
    std::vector<double> theta(K);
    double sum = 0.0;
    for (double& x : theta) sum += (x = gamma(gen));
    for (double& x : theta) x /= sum;
    std::vector<VertexId> path;
    for (int t = 0; t < L; ++t) {
      double u = unit(gen);
      int k = 0;
      while (k + 1 < K && u > theta[k]) u -= theta[k], ++k;
      double w = unit(gen);
      int v = 0;
      while (v + 1 < V && w > true_beta[k][v]) w -= true_beta[k][v], ++v;
      path.push_back(v);
    }
    corpus.paths.push_back(path);
  }

  TracerConfig cfg;
  cfg.tracer_count = K;
  cfg.dirichlet_alpha = 0.5;
  cfg.seed = 7;
  TracerModel model = fit_tracers(corpus, V, cfg);

  std::vector<int> perm = {0, 1, 2};
  double best = 1e18;
  std::vector<double> best_tv;
  std::sort(perm.begin(), perm.end());
  do {
    std::vector<double> tv(K, 0.0);
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
      for (int v = 0; v < V; ++v) tv[k] += 0.5 * std::abs(model.beta[perm[k]][v] - true_beta[k][v]);
      total += tv[k];
    }
    if (total < best) {
      best = total;
      best_tv = tv;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  double max_tv = *std::max_element(best_tv.begin(), best_tv.end());
  double elapsed = timer.seconds();
  bool recovered = max_tv < 0.1 && elapsed < 60.0;

  report("C3 gibbs-correctness", exact && recovered,
         "enumeration max |diff| " + fmt(worst_diff, 16) + " (< 1e-12), planted max TV " +
             fmt(max_tv, 4) + " (< 0.1) in " + fmt(elapsed, 1) + "s (< 60s)");
}

void c4_gradient_check() {
  Rng rng(2024);
  const int d = 8, trials = 120;
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    EmbeddingModel m;
    m.vertex_count = 7;
    m.tracer_count = 3;
    m.dimension = d;
    m.input.resize(m.input_rows() * d);
    m.output.resize(m.vertex_count * d);
    for (double& x : m.input) x = rng.next_double() * 2 - 1;
    for (double& x : m.output) x = rng.next_double() * 2 - 1;

    TrainingPair pair;
    pair.target = static_cast<VertexId>(rng.next_index(m.vertex_count));
    pair.tracer = static_cast<int>(rng.next_index(m.tracer_count));
    pair.context = static_cast<VertexId>(rng.next_index(m.vertex_count));
    // pairwise-distinct negatives, none equal to the context: duplicate ids
    // would alias parameter rows and make per-slot finite differences add up
    std::vector<VertexId> negatives;
    while (negatives.size() < 3) {
      VertexId n = static_cast<VertexId>(rng.next_index(m.vertex_count));
      if (n != pair.context &&
          std::find(negatives.begin(), negatives.end(), n) == negatives.end())
        negatives.push_back(n);
    }
    double tracer_weight = 0.25 + rng.next_double();

    SgnsGrad grad;
    sgns_loss_and_grad(m, pair, negatives, tracer_weight, &grad);

    const double h = 1e-5;
    auto fd_check = [&](double* param, double analytic) {
      double keep = *param;
      *param = keep + h;
      double up = sgns_loss_and_grad(m, pair, negatives, tracer_weight);
      *param = keep - h;
      double down = sgns_loss_and_grad(m, pair, negatives, tracer_weight);
      *param = keep;
      double fd = (up - down) / (2 * h);
      double rel = std::abs(fd - analytic) / std::max({1.0, std::abs(fd), std::abs(analytic)});
      worst = std::max(worst, rel);
    };
    for (int i = 0; i < d; ++i) {
      fd_check(&m.input[pair.target * d + i], grad.f_target[i]);
      fd_check(&m.input[m.tracer_row(pair.tracer) * d + i], grad.f_tracer[i]);
      fd_check(&m.output[pair.context * d + i], grad.g_context[i]);
      for (std::size_t s = 0; s < negatives.size(); ++s)
        fd_check(&m.output[negatives[s] * d + i], grad.g_negative[s][i]);
    }
  }
  report("C4 gradient-check", worst < 1e-4,
         std::to_string(trials) + " trials at d=8, max relative error " + fmt(worst, 8) +
             " (< 1e-4)");
}

void c5_normalization() {
  double worst = 0.0;
  auto track = [&](double sum) { worst = std::max(worst, std::abs(sum - 1.0)); };

  Rng rng(515);
  for (int round = 0; round < 5; ++round) {
    EmbeddingModel m;
    m.vertex_count = 6 + round;
    m.tracer_count = 2 + round % 3;
    m.dimension = 5;
    m.input.resize(m.input_rows() * m.dimension);
    m.output.resize(m.vertex_count * m.dimension);
    for (double& x : m.input) x = rng.next_double() * 4 - 2;
    for (double& x : m.output) x = rng.next_double() * 4 - 2;
    for (std::size_t v = 0; v < m.vertex_count; ++v) {
      double sum = 0.0;
      for (std::size_t c = 0; c < m.vertex_count; ++c)
        sum += softmax_vertex(m, static_cast<VertexId>(v), static_cast<VertexId>(c));
      track(sum);
    }
    for (int t = 0; t < m.tracer_count; ++t) {
      double sum = 0.0;
      for (std::size_t c = 0; c < m.vertex_count; ++c)
        sum += softmax_tracer(m, t, static_cast<VertexId>(c));
      track(sum);
    }
  }

  WalkCorpus corpus;
  const std::size_t V = 12;
  for (int p = 0; p < 20; ++p) {
    std::vector<VertexId> path;
    for (int t = 0; t < 10; ++t) path.push_back(static_cast<VertexId>(rng.next_index(V)));
    corpus.paths.push_back(path);
  }
  TracerConfig cfg;
  cfg.tracer_count = 4;
  cfg.gibbs_iterations = 30;
  cfg.burn_in = 5;
  cfg.seed = 3;
  TracerModel model = fit_tracers(corpus, V, cfg);
  for (const auto& row : model.theta) {
    double sum = 0.0;
    for (double x : row) sum += x;
    track(sum);
  }
  for (const auto& row : model.beta) {
    double sum = 0.0;
    for (double x : row) sum += x;
    track(sum);
  }
  for (std::size_t p = 0; p < corpus.paths.size(); ++p)
    for (VertexId v : corpus.paths[p]) {
      std::vector<double> post = capture_posterior(model, v, p);
      double sum = 0.0;
      for (double x : post) sum += x;
      track(sum);
    }
  auto assignments = assign_tokens(model, corpus);
  for (const auto& row : vertex_tracer_posterior(model, corpus, assignments)) {
    double sum = 0.0;
    for (double x : row) sum += x;
    track(sum);
  }
  report("C5 normalization", worst < 1e-9,
         "softmax, theta, beta, capture and vertex posteriors; worst |sum - 1| = " +
             fmt(worst, 12) + " (< 1e-9)");
}

double oracle_f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  double p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  double r = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

void c6_metric_oracle() {
  GraphBuilder b(Schema::standard());
  const int R = 30, A = 6;
  for (int i = 0; i < R; ++i) b.add_vertex("r" + std::to_string(i), "Review");
  for (int a = 0; a < A; ++a) b.add_vertex("a" + std::to_string(a), "Aspect");
  b.add_vertex("w", "Word");
  for (int i = 0; i < R; ++i) b.add_edge("r" + std::to_string(i), "w", "con");
  HetGraph g = b.build();
  std::vector<VertexId> aspects, reviews;
  for (int a = 0; a < A; ++a) aspects.push_back(g.require("a" + std::to_string(a)));
  for (int i = 0; i < R; ++i) reviews.push_back(g.require("r" + std::to_string(i)));

  Rng rng(616);
  int mismatches = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    DatasetSplit split;
    split.test = reviews;
    std::vector<std::vector<VertexId>> preds(R);
    for (int i = 0; i < R; ++i) {
      std::vector<VertexId> gold;
      for (VertexId a : aspects) {
        if (rng.next_double() < 0.35) gold.push_back(a);
        if (rng.next_double() < 0.35) preds[i].push_back(a);
      }
      split.gold[reviews[i]] = gold;
    }
    split.rebuild_index();
    EvalReport rep = evaluate(reviews, preds, split, aspects);

    std::size_t tp = 0, fp = 0, fn = 0;
    double macro_sum = 0.0;
    for (VertexId a : aspects) {
      std::size_t atp = 0, afp = 0, afn = 0;
      for (int i = 0; i < R; ++i) {
        auto gold = split.gold_of(reviews[i]);
        bool in_gold = std::binary_search(gold.begin(), gold.end(), a);
        bool in_pred = std::binary_search(preds[i].begin(), preds[i].end(), a);
        if (in_gold && in_pred) ++atp;
        if (!in_gold && in_pred) ++afp;
        if (in_gold && !in_pred) ++afn;
      }
      macro_sum += oracle_f1(atp, afp, afn);
      tp += atp, fp += afp, fn += afn;
    }
    if (rep.tp != tp || rep.fp != fp || rep.fn != fn) ++mismatches;
    if (rep.micro_f1 != oracle_f1(tp, fp, fn)) ++mismatches;
    if (rep.macro_f1 != macro_sum / A) ++mismatches;
  }

  // worked example: gold {A},{B},{A,B}; predicted {A},{A},{A,B}
  DatasetSplit split;
  split.test = {reviews[0], reviews[1], reviews[2]};
  split.gold[reviews[0]] = {aspects[0]};
  split.gold[reviews[1]] = {aspects[1]};
  split.gold[reviews[2]] = {aspects[0], aspects[1]};
  split.rebuild_index();
  std::vector<std::vector<VertexId>> preds = {
      {aspects[0]}, {aspects[0]}, {aspects[0], aspects[1]}};
  EvalReport worked = evaluate(split.test, preds, split, {aspects[0], aspects[1]});
  bool worked_ok = std::abs(worked.micro_f1 - 0.75) < 1e-12 &&
                   std::abs(worked.macro_f1 - 11.0 / 15.0) < 1e-12;

  report("C6 metric-oracle", mismatches == 0 && worked_ok,
         std::to_string(trials) + " fuzzed sets exact, worked example micro " +
             fmt(worked.micro_f1) + " macro " + fmt(worked.macro_f1));
}

struct BenchmarkOutcome {
  double def_micro_mean = 0.0;
  double ov_micro_mean = 0.0;
  double ran_micro_mean = 0.0;
  double tfidf_micro_mean = 0.0;
  double worst_seed_seconds = 0.0;
  fs::path def1_dir;
  fs::path data1_dir;
};

BenchmarkOutcome run_benchmark(const fs::path& work) {
  BenchmarkOutcome out;
  const int seeds = 5;
  for (int s = 1; s <= seeds; ++s) {
    fs::path data = work / ("data_" + std::to_string(s));
    if (!fs::exists(data / "manifest.tsv")) synthesize(benchmark_spec(s), data);

    Timer timer;
    RunConfig def_cfg = benchmark_run(data, work / ("def_" + std::to_string(s)), s);
    RunResult def = run_pipeline(def_cfg);
    out.worst_seed_seconds = std::max(out.worst_seed_seconds, timer.seconds());

    // OV differs from DEF only downstream of the embeddings, so it can
    // legitimately resume the DEF walk, tracer, and embedding artifacts.
    fs::path ov_dir = work / ("ov_" + std::to_string(s));
    fs::create_directories(ov_dir);
    for (const char* f : {"walks.txt", "tracer_model.tsv", "embeddings.txt"})
      fs::copy_file(def_cfg.out_dir / f, ov_dir / f, fs::copy_options::overwrite_existing);
    RunConfig ov_cfg = benchmark_run(data, ov_dir, s);
    ov_cfg.variant = Variant::kOv;
    ov_cfg.resume = true;
    RunResult ov = run_pipeline(ov_cfg);

    RunConfig ran_cfg = benchmark_run(data, work / ("ran_" + std::to_string(s)), s);
    ran_cfg.variant = Variant::kRan;
    RunResult ran = run_pipeline(ran_cfg);

    // text-only baseline: same filtered graph and split, no embedding block
    HetGraph graph = load_graph(def_cfg.out_dir / "graph.vertices.tsv",
                                def_cfg.out_dir / "graph.edges.tsv", Schema::standard());
    DatasetSplit split = load_split(graph, def_cfg.reviews_file, def_cfg.split_file);
    std::vector<VertexId> aspects = load_aspects(graph, def_cfg.aspects_file);
    DetectConfig detect_cfg = def_cfg.detect;
    detect_cfg.seed = stage_seed(s, "detect");
    auto [train_f, test_f] = build_features(graph, nullptr, split, detect_cfg);
    DetectorModel tfidf = train_ovr(train_f, split, aspects, detect_cfg);
    EvalReport tfidf_report =
        evaluate(test_f.reviews, predict(tfidf, test_f), split, aspects);

    out.def_micro_mean += def.report.micro_f1 / seeds;
    out.ov_micro_mean += ov.report.micro_f1 / seeds;
    out.ran_micro_mean += ran.report.micro_f1 / seeds;
    out.tfidf_micro_mean += tfidf_report.micro_f1 / seeds;
    if (s == 1) {
      out.def1_dir = def_cfg.out_dir;
      out.data1_dir = data;
    }
    std::fprintf(stderr,
                 "  seed %d: def %.4f  ov %.4f  ran %.4f  tfidf %.4f  (%.1fs)\n", s,
                 def.report.micro_f1, ov.report.micro_f1, ran.report.micro_f1,
                 tfidf_report.micro_f1, timer.seconds());
  }
  return out;
}

void c7_ordering(const BenchmarkOutcome& bench) {
  bool order = bench.def_micro_mean >= bench.ov_micro_mean &&
               bench.def_micro_mean >= bench.tfidf_micro_mean + 0.05;
  bool fast = bench.worst_seed_seconds < 300.0;
  report("C7 ordering-reproduction", order && fast,
         "mean micro over 5 seeds: def " + fmt(bench.def_micro_mean) + " >= ov " +
             fmt(bench.ov_micro_mean) + ", def >= tfidf " + fmt(bench.tfidf_micro_mean) +
             " + 0.05; slowest seed " + fmt(bench.worst_seed_seconds, 1) + "s (< 300s)");
}

void c8_ablation(const BenchmarkOutcome& bench) {
  report("C8 ablation-sanity", bench.ran_micro_mean <= bench.def_micro_mean,
         "mean micro: ran " + fmt(bench.ran_micro_mean) + " <= def " +
             fmt(bench.def_micro_mean));
}

void c9_determinism(const BenchmarkOutcome& bench, const fs::path& work) {
  RunConfig cfg = benchmark_run(bench.data1_dir, work / "det_replay", 1);
  run_pipeline(cfg);
  bool ok = true;
  std::string differing;
  for (const char* f : {"walks.txt", "tracer_model.tsv", "embeddings.txt", "report.txt"})
    if (testutil::read_file(bench.def1_dir / f) != testutil::read_file(cfg.out_dir / f)) {
      ok = false;
      differing += std::string(" ") + f;
    }
  report("C9 determinism", ok,
         ok ? "replayed run is byte-identical in walks, tracer model, embeddings, report"
            : "artifacts differ:" + differing);
}

void c10_real_dataset() {
  report_skip("C10 real-dataset",
              "no released clothing->shoes review dataset is available in this environment; "
              "reference micro-F1 0.5376 not compared (non-gating)");
}

}  // namespace

int main() {
  fs::path work = fs::temp_directory_path() / "thgrl_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  std::printf("acceptance suite, work dir %s\n", work.string().c_str());
  fs::path bench_data = work / "data_1";
  synthesize(benchmark_spec(1), bench_data);

  c1_corpus_shape(bench_data);
  c2_hierarchical_law();
  c3_gibbs_correctness();
  c4_gradient_check();
  c5_normalization();
  c6_metric_oracle();
  BenchmarkOutcome bench = run_benchmark(work);
  c7_ordering(bench);
  c8_ablation(bench);
  c9_determinism(bench, work);
  c10_real_dataset();

  fs::remove_all(work);
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all gating criteria passed\n");
  return 0;
}
