#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "thgrl/graph.hpp"
#include "thgrl/rng.hpp"

namespace thgrl {

enum class WalkMode { kHierarchical, kOrdinary };

// How the hierarchical step picks among the relation types incident to the
// current vertex. kUniform treats every present relation type equally;
// kWeighted draws them in proportion to their total edge weight.
enum class RelationChoice { kUniform, kWeighted };

WalkMode parse_walk_mode(const std::string& name);  // "hierarchical" | "ordinary"
const char* walk_mode_name(WalkMode mode);

struct WalkConfig {
  WalkMode mode = WalkMode::kHierarchical;
  RelationChoice relation_choice = RelationChoice::kUniform;
  int walks_per_vertex = 10;  // r
  int walk_length = 80;       // steps per walk; a full path has walk_length + 1 vertexes
  std::uint64_t seed = 1;
};

// One path per line, vertex ids separated by single spaces. Paths are stored
// in generation order: iteration-major, start-vertex-minor.
struct WalkCorpus {
  struct Provenance {
    int iter = 0;
    VertexId start = kNoVertex;
  };

  WalkConfig config;
  std::vector<std::vector<VertexId>> paths;
  std::vector<Provenance> origin;  // aligned with paths when known, else empty

  std::size_t token_count() const;
};

// Single transition from v. Hierarchical mode draws one incident relation
// type (uniformly by default), then a neighbor within it proportional to edge
// weight. Ordinary mode draws from the union of all neighbors proportional to
// edge weight. Returns nothing when v has no neighbors.
std::optional<VertexId> step_hierarchical(const HetGraph& graph, VertexId v, Rng& rng,
                                          RelationChoice choice = RelationChoice::kUniform);
std::optional<VertexId> step_ordinary(const HetGraph& graph, VertexId v, Rng& rng);

// Walk of at most `steps` transitions starting at `start`; shorter only when
// a dead end cuts it off. An isolated start yields the single-vertex path.
std::vector<VertexId> generate_walk(const HetGraph& graph, VertexId start, int steps,
                                    const WalkConfig& config, Rng& rng);

// r passes over every vertex. Each (iteration, start) pair walks with its own
// seed stream derived from config.seed, so the corpus does not depend on
// scheduling and any path can be regenerated in isolation.
WalkCorpus generate_corpus(const HetGraph& graph, const WalkConfig& config);

void save_corpus(const WalkCorpus& corpus, const HetGraph& graph,
                 const std::filesystem::path& file);
WalkCorpus load_corpus(const HetGraph& graph, const std::filesystem::path& file);

}  // namespace thgrl
