#include "thgrl/walk.hpp"

#include <algorithm>
#include <stdexcept>

#include "thgrl/io_util.hpp"

namespace thgrl {

WalkMode parse_walk_mode(const std::string& name) {
  if (name == "hierarchical") return WalkMode::kHierarchical;
  if (name == "ordinary") return WalkMode::kOrdinary;
  throw std::runtime_error("unknown walk mode: " + name + " (use hierarchical or ordinary)");
}

const char* walk_mode_name(WalkMode mode) {
  return mode == WalkMode::kHierarchical ? "hierarchical" : "ordinary";
}

std::size_t WalkCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& p : paths) n += p.size();
  return n;
}

namespace {

// Weight-proportional draw from one adjacency list via its prefix sums.
VertexId draw_neighbor(const HetGraph::Adjacency& a, double u) {
  auto it = std::upper_bound(a.cum.begin(), a.cum.end(), u);
  std::size_t i = static_cast<std::size_t>(it - a.cum.begin());
  if (i >= a.nbr.size()) i = a.nbr.size() - 1;  // u landed on the top edge
  return a.nbr[i];
}

}  // namespace

std::optional<VertexId> step_hierarchical(const HetGraph& graph, VertexId v, Rng& rng,
                                          RelationChoice choice) {
  const auto& lists = graph.adjacency(v);
  if (lists.empty()) return std::nullopt;
  std::size_t pick = 0;
  if (choice == RelationChoice::kUniform) {
    pick = static_cast<std::size_t>(rng.next_index(lists.size()));
  } else {
    double u = rng.next_double() * graph.total_weight(v);
    double acc = 0.0;
    pick = lists.size() - 1;
    for (std::size_t i = 0; i < lists.size(); ++i) {
      acc += lists[i].total;
      if (u < acc) {
        pick = i;
        break;
      }
    }
  }
  const HetGraph::Adjacency& chosen = lists[pick];
  return draw_neighbor(chosen, rng.next_double() * chosen.total);
}

std::optional<VertexId> step_ordinary(const HetGraph& graph, VertexId v, Rng& rng) {
  const auto& lists = graph.adjacency(v);
  if (lists.empty()) return std::nullopt;
  double u = rng.next_double() * graph.total_weight(v);
  double acc = 0.0;
  for (const auto& a : lists) {
    if (u < acc + a.total) return draw_neighbor(a, u - acc);
    acc += a.total;
  }
  return lists.back().nbr.back();
}

std::vector<VertexId> generate_walk(const HetGraph& graph, VertexId start, int steps,
                                    const WalkConfig& config, Rng& rng) {
  std::vector<VertexId> path;
  path.reserve(static_cast<std::size_t>(steps) + 1);
  path.push_back(start);
  VertexId cur = start;
  for (int s = 0; s < steps; ++s) {
    std::optional<VertexId> next =
        config.mode == WalkMode::kHierarchical
            ? step_hierarchical(graph, cur, rng, config.relation_choice)
            : step_ordinary(graph, cur, rng);
    if (!next) break;
    path.push_back(*next);
    cur = *next;
  }
  return path;
}

WalkCorpus generate_corpus(const HetGraph& graph, const WalkConfig& config) {
  if (config.walks_per_vertex < 1) throw std::runtime_error("walks per vertex must be >= 1");
  if (config.walk_length < 1) throw std::runtime_error("walk length must be >= 1");
  if (graph.vertex_count() == 0) throw std::runtime_error("cannot walk an empty graph");
  WalkCorpus corpus;
  corpus.config = config;
  std::size_t n = graph.vertex_count();
  corpus.paths.resize(static_cast<std::size_t>(config.walks_per_vertex) * n);
  corpus.origin.resize(corpus.paths.size());
  for (int iter = 0; iter < config.walks_per_vertex; ++iter) {
    for (std::size_t v = 0; v < n; ++v) {
      std::size_t slot = static_cast<std::size_t>(iter) * n + v;
      Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(iter), v));
      corpus.paths[slot] =
          generate_walk(graph, static_cast<VertexId>(v), config.walk_length, config, rng);
      corpus.origin[slot] = {iter, static_cast<VertexId>(v)};
    }
  }
  return corpus;
}

void save_corpus(const WalkCorpus& corpus, const HetGraph& graph,
                 const std::filesystem::path& file) {
  auto out = io::open_output(file);
  out << "# mode=" << walk_mode_name(corpus.config.mode)
      << " relations=" << (corpus.config.relation_choice == RelationChoice::kUniform ? "uniform" : "weighted")
      << " walks=" << corpus.config.walks_per_vertex << " length=" << corpus.config.walk_length
      << " seed=" << corpus.config.seed << '\n';
  for (const auto& path : corpus.paths) {
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i) out << ' ';
      out << graph.key_of(path[i]);
    }
    out << '\n';
  }
}

WalkCorpus load_corpus(const HetGraph& graph, const std::filesystem::path& file) {
  WalkCorpus corpus;
  bool configured = false;
  io::for_each_comment_line(file, [&](std::string_view line, std::size_t lineno) {
    if (configured) return;
    configured = true;
    for (auto field : io::split(line, ' ')) {
      auto eq = field.find('=');
      if (eq == std::string_view::npos) continue;
      auto key = field.substr(0, eq);
      auto value = std::string(field.substr(eq + 1));
      if (key == "mode")
        corpus.config.mode = parse_walk_mode(value);
      else if (key == "relations")
        corpus.config.relation_choice =
            value == "weighted" ? RelationChoice::kWeighted : RelationChoice::kUniform;
      else if (key == "walks")
        corpus.config.walks_per_vertex = static_cast<int>(io::parse_long(value, file, lineno));
      else if (key == "length")
        corpus.config.walk_length = static_cast<int>(io::parse_long(value, file, lineno));
      else if (key == "seed")
        corpus.config.seed = static_cast<std::uint64_t>(io::parse_long(value, file, lineno));
    }
  });
  io::for_each_data_line(file, [&](std::string_view line, std::size_t lineno) {
    std::vector<VertexId> path;
    for (auto token : io::split(line, ' ')) {
      if (token.empty()) io::fail_at(file, lineno, "empty vertex id in path");
      VertexId v = graph.find(std::string(token));
      if (v == kNoVertex) io::fail_at(file, lineno, "unknown vertex id: " + std::string(token));
      path.push_back(v);
    }
    if (path.empty()) io::fail_at(file, lineno, "empty path");
    corpus.paths.push_back(std::move(path));
  });
  // Generation order is iteration-major, so provenance is recoverable when
  // the corpus covers the whole graph.
  std::size_t n = graph.vertex_count();
  if (n > 0 &&
      corpus.paths.size() == static_cast<std::size_t>(corpus.config.walks_per_vertex) * n) {
    corpus.origin.resize(corpus.paths.size());
    for (std::size_t i = 0; i < corpus.paths.size(); ++i)
      corpus.origin[i] = {static_cast<int>(i / n), static_cast<VertexId>(i % n)};
  }
  return corpus;
}

}  // namespace thgrl
