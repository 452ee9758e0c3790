#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace thgrl {

using VertexId = std::int32_t;
using RelationId = std::int32_t;

inline constexpr VertexId kNoVertex = -1;
inline constexpr RelationId kNoRelation = -1;

struct RelationDecl {
  std::string name;
  std::string src_type;
  std::string dst_type;
};

struct RelationType {
  std::string name;
  int src_type = -1;
  int dst_type = -1;
  bool is_inverse = false;
  RelationId inverse = kNoRelation;
};

// Vertex and relation type tables. Forward relations occupy ids
// [0, forward_count); the inverse of forward relation r is forward_count + r,
// named "<name>_inv" with source/target types swapped.
class Schema {
 public:
  static Schema standard();  // the six-type e-commerce review schema
  static Schema from_declarations(const std::vector<RelationDecl>& decls);
  static Schema load(const std::filesystem::path& file);

  int vertex_type_count() const { return static_cast<int>(type_names_.size()); }
  int vertex_type(const std::string& name) const;  // -1 if absent
  const std::string& vertex_type_name(int code) const { return type_names_.at(code); }

  RelationId forward_count() const { return static_cast<RelationId>(relations_.size() / 2); }
  RelationId relation_count() const { return static_cast<RelationId>(relations_.size()); }
  RelationId relation(const std::string& name) const;  // -1 if absent
  const RelationType& relation_info(RelationId r) const { return relations_.at(r); }
  RelationId inverse(RelationId r) const { return relations_.at(r).inverse; }

 private:
  std::vector<std::string> type_names_;
  std::unordered_map<std::string, int> type_index_;
  std::vector<RelationType> relations_;
  std::unordered_map<std::string, RelationId> relation_index_;

  int add_vertex_type(const std::string& name);
};

struct GraphStats {
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;                         // forward edges after merging
  std::vector<std::size_t> vertexes_per_type;         // by vertex type code
  std::vector<std::size_t> edges_per_relation;        // by forward relation id
};

// Immutable typed multigraph with per-vertex, per-relation adjacency.
// Construction (via GraphBuilder) merges duplicate edges by summing weights
// and synthesizes the inverse of every forward edge.
class HetGraph {
 public:
  struct Adjacency {
    RelationId rel = kNoRelation;
    std::vector<VertexId> nbr;     // sorted ascending
    std::vector<double> weight;
    std::vector<double> cum;       // prefix sums of weight
    double total = 0.0;
  };

  std::size_t vertex_count() const { return vtype_.size(); }
  std::size_t edge_count() const { return forward_edges_; }
  const Schema& schema() const { return schema_; }

  int type_of(VertexId v) const { return vtype_.at(v); }
  const std::string& key_of(VertexId v) const { return vkey_.at(v); }
  const std::string& label_of(VertexId v) const { return vlabel_.at(v); }
  VertexId find(const std::string& key) const;           // kNoVertex if absent
  VertexId require(const std::string& key) const;        // throws if absent

  // Nonempty adjacency lists of v, sorted by relation id.
  const std::vector<Adjacency>& adjacency(VertexId v) const { return adj_.at(v); }
  const Adjacency* adjacency(VertexId v, RelationId r) const;
  double edge_weight(VertexId src, RelationId r, VertexId dst) const;  // 0 if absent
  std::size_t degree(VertexId v) const;
  double total_weight(VertexId v) const { return total_weight_.at(v); }

  GraphStats stats() const;

 private:
  friend class GraphBuilder;
  Schema schema_;
  std::vector<int> vtype_;
  std::vector<std::string> vkey_;
  std::vector<std::string> vlabel_;
  std::unordered_map<std::string, VertexId> index_;
  std::vector<std::vector<Adjacency>> adj_;
  std::vector<double> total_weight_;
  std::size_t forward_edges_ = 0;
};

class GraphBuilder {
 public:
  explicit GraphBuilder(Schema schema) : schema_(std::move(schema)) {}

  VertexId add_vertex(std::string key, int type_code, std::string label = {});
  VertexId add_vertex(std::string key, const std::string& type_name, std::string label = {});
  // Forward relations only; the inverse edge is synthesized at build time.
  void add_edge(VertexId src, VertexId dst, RelationId rel, double weight = 1.0);
  void add_edge(const std::string& src_key, const std::string& dst_key,
                const std::string& rel_name, double weight = 1.0);

  VertexId find(const std::string& key) const;
  const Schema& schema() const { return schema_; }

  HetGraph build();

 private:
  Schema schema_;
  std::vector<int> vtype_;
  std::vector<std::string> vkey_;
  std::vector<std::string> vlabel_;
  std::unordered_map<std::string, VertexId> index_;
  struct PendingEdge {
    VertexId src;
    VertexId dst;
    RelationId rel;
    double weight;
  };
  std::vector<PendingEdge> edges_;
};

// TRAIN/TEST review split plus gold aspect labels. Reviews absent from the
// split file are background context: they stay in the graph untouched but are
// never used for feature fitting, classifier training, or evaluation.
struct DatasetSplit {
  std::vector<VertexId> train;  // sorted review ids
  std::vector<VertexId> test;   // sorted review ids
  std::unordered_map<VertexId, std::vector<VertexId>> gold;  // review -> sorted aspect ids

  bool is_train(VertexId v) const { return train_set_.count(v) > 0; }
  bool is_test(VertexId v) const { return test_set_.count(v) > 0; }
  std::span<const VertexId> gold_of(VertexId review) const;
  void rebuild_index();

 private:
  std::unordered_set<VertexId> train_set_;
  std::unordered_set<VertexId> test_set_;
};

// File formats (UTF-8, LF, tab-separated, '#' comment lines skipped):
//   vertices.tsv  id <TAB> type-name [<TAB> label]
//   edges.tsv     src-id <TAB> dst-id <TAB> relation-name [<TAB> weight]
//   reviews.tsv   review-id <TAB> comma-separated aspect ids
//   split.tsv     review-id <TAB> TRAIN|TEST
HetGraph load_graph(const std::filesystem::path& vertex_file,
                    const std::filesystem::path& edge_file, const Schema& schema);
void save_graph(const HetGraph& graph, const std::filesystem::path& vertex_file,
                const std::filesystem::path& edge_file);

DatasetSplit load_split(const HetGraph& graph, const std::filesystem::path& reviews_file,
                        const std::filesystem::path& split_file);

// Removes every men edge incident to a TEST review, and every rel edge whose
// supporting reviews (reviews containing the word and mentioning the aspect)
// are all TEST. Everything else is untouched; idempotent.
HetGraph apply_leakage_filter(const HetGraph& graph, const DatasetSplit& split);

// Adds rel (word -> aspect) edges weighted by the number of TRAIN reviews
// that both contain the word and mention the aspect. Existing rel edges are
// kept as they are; TEST and background reviews contribute nothing.
HetGraph build_word_aspect_edges(const HetGraph& graph, const DatasetSplit& split);

std::string format_stats(const HetGraph& graph);

}  // namespace thgrl
