#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "thgrl/walk.hpp"

namespace thgrl {

struct TracerConfig {
  int tracer_count = 100;        // |T|
  double dirichlet_alpha = 0.0;  // <= 0 means the 50 / |T| default
  double vertex_smoothing = 0.01;
  int gibbs_iterations = 200;
  int burn_in = 50;  // sweeps ignored by monitoring statistics
  std::uint64_t seed = 1;

  double alpha() const { return dirichlet_alpha > 0.0 ? dirichlet_alpha : 50.0 / tracer_count; }
  void validate() const;
};

// Admixture model over walk paths: each path mixes tracers (theta row), each
// tracer is a distribution over vertexes (beta row), and every path token
// carries the tracer that the final Gibbs sweep assigned to it.
struct TracerModel {
  int tracer_count = 0;
  std::size_t vertex_count = 0;
  double alpha = 0.0;
  double eta = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> theta;    // paths x tracers
  std::vector<std::vector<double>> beta;     // tracers x vertexes
  std::vector<std::vector<int>> assignments; // aligned with corpus paths
  std::vector<double> tracer_frequency;      // empirical Pr(T) over all tokens
};

// Count tables that the collapsed sampler maintains. Exposed so small-corpus
// tests can compare the sampler's conditional against exhaustive enumeration.
struct GibbsCounts {
  std::vector<std::vector<int>> path_tracer;    // paths x tracers
  std::vector<std::vector<int>> tracer_vertex;  // tracers x vertexes
  std::vector<int> tracer_total;                // per tracer

  static GibbsCounts tally(const WalkCorpus& corpus,
                           const std::vector<std::vector<int>>& assignments, int tracer_count,
                           std::size_t vertex_count);
};

// P(z = k | every other assignment) for a token of vertex v on path p, with
// that token's current assignment already removed from the counts.
std::vector<double> full_conditional(const GibbsCounts& counts, std::size_t path, VertexId v,
                                     double alpha, double eta, std::size_t vertex_count);

// Collapsed Gibbs fit. Paths are visited in a content-derived canonical order
// with one RNG stream per path, so the result is invariant to the storage
// order of distinct paths. When sweep_log_joint is given it receives the
// log joint at initialization and after every sweep (gibbs_iterations + 1
// values).
TracerModel fit_tracers(const WalkCorpus& corpus, std::size_t vertex_count,
                        const TracerConfig& config,
                        std::vector<double>* sweep_log_joint = nullptr);

// Pr(T_j | v, path p) ∝ beta[j][v] * theta[p][j], normalized.
std::vector<double> capture_posterior(const TracerModel& model, VertexId v, std::size_t path);

// Per-token argmax of capture_posterior, ties to the lowest tracer index.
// This pairing, not the raw Gibbs state, is what co-learning consumes.
std::vector<std::vector<int>> assign_tokens(const TracerModel& model, const WalkCorpus& corpus);

// Pr(T_j | v) from token counts under `assignments`, smoothed with eps; a
// vertex with no tokens gets the uniform distribution.
std::vector<std::vector<double>> vertex_tracer_posterior(
    const TracerModel& model, const WalkCorpus& corpus,
    const std::vector<std::vector<int>>& assignments, double eps = 1e-12);

// Log of the generative joint at the model's point estimates and assignments,
// including the Dirichlet density of every theta row. Monitoring statistic.
double log_joint(const TracerModel& model, const WalkCorpus& corpus);

void save_tracer_model(const TracerModel& model, const std::filesystem::path& file);
TracerModel load_tracer_model(const std::filesystem::path& file);

}  // namespace thgrl
