#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "thgrl/graph.hpp"
#include "thgrl/represent.hpp"

namespace thgrl {

struct DetectConfig {
  double lambda = 1e-4;  // L2 regularization strength
  int epochs = 100;
  bool normalize_embedding = true;  // L2-normalize the embedding block
  std::uint64_t seed = 1;

  void validate() const;
};

// Review feature layout: the TFIDF block over the training vocabulary, then
// the (optional) pooled embedding block. Both blocks are L2-normalized
// independently (the embedding block only when the flag is set).
struct FeatureSpec {
  std::vector<VertexId> vocabulary;  // word vertex ids in ascending order
  std::vector<double> idf;           // aligned with vocabulary
  std::size_t embedding_width = 0;   // 0, d, or 2d
  bool normalize_embedding = true;

  std::size_t width() const { return vocabulary.size() + embedding_width; }
};

struct FeatureMatrix {
  FeatureSpec spec;
  std::vector<VertexId> reviews;           // row order
  std::vector<std::vector<double>> rows;   // one row per review, spec.width() wide
};

// Fits the vocabulary and idf on TRAIN reviews only (tf = con edge weight,
// idf = ln((N+1)/(df+1)) + 1), then featurizes both splits. `table` may be
// null for the text-only configuration.
std::pair<FeatureMatrix, FeatureMatrix> build_features(const HetGraph& graph,
                                                       const IntegratedTable* table,
                                                       const DatasetSplit& split,
                                                       const DetectConfig& config);

// Featurizes arbitrary reviews under an already-fitted spec.
std::vector<double> featurize_review(const HetGraph& graph, const IntegratedTable* table,
                                     const FeatureSpec& spec, VertexId review);

struct AspectClassifier {
  VertexId aspect = kNoVertex;
  std::vector<double> weights;
  double bias = 0.0;
  bool trainable = true;  // false when the aspect had no positive examples
};

struct DetectorModel {
  FeatureSpec spec;
  std::vector<AspectClassifier> classifiers;  // one per target aspect, input order
  double lambda = 1e-4;
  int epochs = 100;
  std::uint64_t seed = 1;
};

// One hinge-loss linear classifier per aspect, trained with Pegasos-style
// stochastic subgradient descent under a seeded shuffle.
DetectorModel train_ovr(const FeatureMatrix& train, const DatasetSplit& split,
                        const std::vector<VertexId>& aspects, const DetectConfig& config);

double decision_margin(const AspectClassifier& clf, const std::vector<double>& features);

// Multi-label prediction: aspect is in the set iff its margin is strictly
// positive. Returned aspect lists are sorted; empty sets are allowed.
std::vector<std::vector<VertexId>> predict(const DetectorModel& model,
                                           const FeatureMatrix& features);

struct AspectMetrics {
  VertexId aspect = kNoVertex;
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  std::size_t support = 0;  // gold occurrences
};

struct EvalReport {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
  std::vector<AspectMetrics> per_aspect;
};

// Pools TP/FP/FN over every (review, aspect) pair for micro-F1; macro-F1 is
// the unweighted mean of per-aspect F1, counting an aspect with an empty
// contingency as 0. Only the listed aspects are scored.
EvalReport evaluate(const std::vector<VertexId>& reviews,
                    const std::vector<std::vector<VertexId>>& predictions,
                    const DatasetSplit& split, const std::vector<VertexId>& aspects);

void save_detector(const DetectorModel& model, const HetGraph& graph,
                   const std::filesystem::path& file);
DetectorModel load_detector(const HetGraph& graph, const std::filesystem::path& file);

// predictions.tsv: review id, comma-separated predicted aspect ids (empty
// second column for an empty set).
void save_predictions(const HetGraph& graph, const std::vector<VertexId>& reviews,
                      const std::vector<std::vector<VertexId>>& predictions,
                      const std::filesystem::path& file);
std::pair<std::vector<VertexId>, std::vector<std::vector<VertexId>>> load_predictions(
    const HetGraph& graph, const std::filesystem::path& file);

// Flat key/value report file: micro_f1, macro_f1, counts, per-aspect rows.
void save_report(const EvalReport& report, const HetGraph& graph,
                 const std::filesystem::path& file);
EvalReport load_report(const HetGraph& graph, const std::filesystem::path& file);

}  // namespace thgrl
