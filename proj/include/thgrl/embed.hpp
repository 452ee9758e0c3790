#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "thgrl/graph.hpp"
#include "thgrl/rng.hpp"
#include "thgrl/walk.hpp"

namespace thgrl {

struct EmbedConfig {
  int dimension = 128;      // d
  int context_window = 10;  // cw
  int negatives = 5;        // k
  double initial_lr = 0.025;
  double final_lr = 1e-4;
  int epochs = 1;
  double noise_exponent = 0.75;
  double tracer_weight = 1.0;  // 0 trains vertexes only and leaves tracer rows at init
  bool shrink_window = false;  // sample the effective window in [1, cw] per target
  bool deterministic = true;   // single sequential worker; required for reproducible runs
  int threads = 4;             // used only when deterministic is false
  std::uint64_t seed = 1;

  void validate() const;
};

// Input table holds one learned row per vertex followed by one per tracer;
// the input rows are the exported representation. The output table holds the
// context-side rows used only during training.
struct EmbeddingModel {
  std::size_t vertex_count = 0;
  int tracer_count = 0;
  int dimension = 0;
  std::vector<double> input;   // (vertex_count + tracer_count) x dimension
  std::vector<double> output;  // vertex_count x dimension
  std::vector<double> noise;   // P(v), sums to 1; empty on reloaded models

  std::size_t input_rows() const { return vertex_count + static_cast<std::size_t>(tracer_count); }
  std::span<double> f(std::size_t row) {
    return {input.data() + row * dimension, static_cast<std::size_t>(dimension)};
  }
  std::span<const double> f(std::size_t row) const {
    return {input.data() + row * dimension, static_cast<std::size_t>(dimension)};
  }
  std::size_t tracer_row(int t) const { return vertex_count + static_cast<std::size_t>(t); }
  std::span<double> g(std::size_t row) {
    return {output.data() + row * dimension, static_cast<std::size_t>(dimension)};
  }
  std::span<const double> g(std::size_t row) const {
    return {output.data() + row * dimension, static_cast<std::size_t>(dimension)};
  }
};

struct TrainingPair {
  VertexId target = kNoVertex;
  int tracer = 0;
  VertexId context = kNoVertex;
};

// Numerically safe sigmoid and log-sigmoid.
double sigmoid(double x);
double log_sigmoid(double x);

// Exact context softmax over all vertexes, log-sum-exp stabilized. Diagnostic
// only; training always uses negative sampling.
double softmax_vertex(const EmbeddingModel& model, VertexId v, VertexId c);
double softmax_tracer(const EmbeddingModel& model, int tracer, VertexId c);

// Every (target, assigned tracer, context) triple of one path: for token t,
// one pair per other position within `window` of t.
std::vector<TrainingPair> emit_pairs(const std::vector<VertexId>& path,
                                     const std::vector<int>& assignments, int window);

struct SgnsGrad {
  std::vector<double> f_target;                 // d
  std::vector<double> f_tracer;                 // d
  std::vector<double> g_context;                // d
  std::vector<std::vector<double>> g_negative;  // one d-vector per negative slot
};

// Loss of one pair against k sampled negatives, plus (optionally) the exact
// gradients of every touched parameter block at the current point. Slots for
// a vertex that occurs twice among the negatives are reported separately.
double sgns_loss_and_grad(const EmbeddingModel& model, const TrainingPair& pair,
                          const std::vector<VertexId>& negatives, double tracer_weight,
                          SgnsGrad* grad = nullptr);

// P(v) proportional to corpus count(v) ^ exponent.
std::vector<double> build_noise(const WalkCorpus& corpus, std::size_t vertex_count,
                                double exponent);

// O(1) draws from a fixed discrete distribution.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(const std::vector<double>& probs);
  std::size_t draw(Rng& rng) const;
  std::size_t size() const { return threshold_.size(); }

 private:
  std::vector<double> threshold_;
  std::vector<std::uint32_t> alias_;
};

struct TrainStats {
  std::size_t pair_updates = 0;
  double first_decile_loss = 0.0;  // mean loss over the first tenth of updates
  double last_decile_loss = 0.0;   // and over the last tenth
};

// SGD over the pair stream: epochs x paths x tokens x window positions, with
// the learning rate annealed linearly from initial_lr to final_lr across all
// processed tokens. Negative draws come from per-(epoch, path) streams, so
// the deterministic and parallel modes sample identically and deterministic
// runs are bit-reproducible.
EmbeddingModel train_embeddings(const WalkCorpus& corpus,
                                const std::vector<std::vector<int>>& assignments,
                                std::size_t vertex_count, int tracer_count,
                                const EmbedConfig& config, TrainStats* stats = nullptr);

// embeddings.txt: "rows dim" header line, one row per line: id then dim
// values. Vertex rows use graph keys; tracer rows use ids T0, T1, ...
void save_embeddings(const EmbeddingModel& model, const HetGraph& graph,
                     const std::filesystem::path& file);
EmbeddingModel load_embeddings(const HetGraph& graph, const std::filesystem::path& file);

}  // namespace thgrl
