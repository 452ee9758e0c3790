#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "thgrl/embed.hpp"
#include "thgrl/graph.hpp"

namespace thgrl {

// Per-vertex downstream representation. Integrated rows are the vertex
// embedding concatenated with its selected tracer's embedding (width 2d);
// vertex-only rows drop the tracer half (width d, the OV ablation).
struct IntegratedTable {
  std::size_t vertex_count = 0;
  int width = 0;
  bool integrated = true;
  std::vector<double> rows;       // vertex_count x width
  std::vector<int> tracer_of;     // selected tracer per vertex; empty when !integrated

  std::span<const double> row(VertexId v) const {
    return {rows.data() + static_cast<std::size_t>(v) * width, static_cast<std::size_t>(width)};
  }
};

// row(v) = f(v) concatenated with f(T*), T* = argmax_j Pr(T_j | v) with ties
// to the lowest index. `posteriors` is vertex-major, one row per vertex.
IntegratedTable integrate(const EmbeddingModel& model,
                          const std::vector<std::vector<double>>& posteriors);

// The ablation table: vertex rows of f as they are, no tracer half.
IntegratedTable vertex_only_table(const EmbeddingModel& model);

struct ReviewVector {
  VertexId review = kNoVertex;
  std::vector<double> values;  // table width; all zero when word_hits == 0
  std::size_t word_hits = 0;
};

// Mean of the table rows of every distinct word the review is con-linked to.
ReviewVector pool_review(const HetGraph& graph, const IntegratedTable& table, VertexId review);

// Same row format as the embedding file; integrated tables append the
// selected tracer index as a trailing column.
void save_integrated(const IntegratedTable& table, const HetGraph& graph,
                     const std::filesystem::path& file);
IntegratedTable load_integrated(const HetGraph& graph, const std::filesystem::path& file);

}  // namespace thgrl
