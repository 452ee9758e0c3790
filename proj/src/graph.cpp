#include "thgrl/graph.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "thgrl/io_util.hpp"

namespace thgrl {

namespace {

bool ends_with_inv(const std::string& name) {
  return name.size() >= 4 && name.compare(name.size() - 4, 4, "_inv") == 0;
}

}  // namespace

int Schema::add_vertex_type(const std::string& name) {
  auto it = type_index_.find(name);
  if (it != type_index_.end()) return it->second;
  int code = static_cast<int>(type_names_.size());
  type_names_.push_back(name);
  type_index_.emplace(name, code);
  return code;
}

Schema Schema::from_declarations(const std::vector<RelationDecl>& decls) {
  Schema s;
  for (const auto& d : decls) {
    if (d.name.empty()) throw std::runtime_error("schema: empty relation name");
    if (ends_with_inv(d.name))
      throw std::runtime_error("schema: forward relation name may not end with _inv: " + d.name);
    if (s.relation_index_.count(d.name))
      throw std::runtime_error("schema: duplicate relation name: " + d.name);
    RelationType rt;
    rt.name = d.name;
    rt.src_type = s.add_vertex_type(d.src_type);
    rt.dst_type = s.add_vertex_type(d.dst_type);
    rt.is_inverse = false;
    s.relation_index_.emplace(d.name, static_cast<RelationId>(s.relations_.size()));
    s.relations_.push_back(std::move(rt));
  }
  RelationId fwd = static_cast<RelationId>(s.relations_.size());
  for (RelationId r = 0; r < fwd; ++r) {
    RelationType inv;
    inv.name = s.relations_[r].name + "_inv";
    inv.src_type = s.relations_[r].dst_type;
    inv.dst_type = s.relations_[r].src_type;
    inv.is_inverse = true;
    inv.inverse = r;
    s.relations_[r].inverse = fwd + r;
    s.relation_index_.emplace(inv.name, fwd + r);
    s.relations_.push_back(std::move(inv));
  }
  return s;
}

Schema Schema::standard() {
  return from_declarations({
      {"rec", "Product", "Review"},
      {"get", "Seller", "Review"},
      {"wri", "Customer", "Review"},
      {"pur", "Customer", "Product"},
      {"men", "Review", "Aspect"},
      {"rel", "Word", "Aspect"},
      {"con", "Review", "Word"},
      {"coo", "Word", "Word"},
  });
}

Schema Schema::load(const std::filesystem::path& file) {
  std::vector<RelationDecl> decls;
  io::for_each_data_line(file, [&](std::string_view line, std::size_t lineno) {
    auto cols = io::split(line, '\t');
    if (cols.size() != 3)
      io::fail_at(file, lineno, "expected 3 columns: relation, src-type, dst-type");
    decls.push_back({std::string(cols[0]), std::string(cols[1]), std::string(cols[2])});
  });
  if (decls.empty()) throw std::runtime_error(file.string() + ": no relations declared");
  return from_declarations(decls);
}

int Schema::vertex_type(const std::string& name) const {
  auto it = type_index_.find(name);
  return it == type_index_.end() ? -1 : it->second;
}

RelationId Schema::relation(const std::string& name) const {
  auto it = relation_index_.find(name);
  return it == relation_index_.end() ? kNoRelation : it->second;
}

VertexId HetGraph::find(const std::string& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? kNoVertex : it->second;
}

VertexId HetGraph::require(const std::string& key) const {
  VertexId v = find(key);
  if (v == kNoVertex) throw std::runtime_error("unknown vertex id: " + key);
  return v;
}

const HetGraph::Adjacency* HetGraph::adjacency(VertexId v, RelationId r) const {
  const auto& lists = adj_.at(v);
  auto it = std::lower_bound(lists.begin(), lists.end(), r,
                             [](const Adjacency& a, RelationId rel) { return a.rel < rel; });
  if (it == lists.end() || it->rel != r) return nullptr;
  return &*it;
}

double HetGraph::edge_weight(VertexId src, RelationId r, VertexId dst) const {
  const Adjacency* a = adjacency(src, r);
  if (!a) return 0.0;
  auto it = std::lower_bound(a->nbr.begin(), a->nbr.end(), dst);
  if (it == a->nbr.end() || *it != dst) return 0.0;
  return a->weight[static_cast<std::size_t>(it - a->nbr.begin())];
}

std::size_t HetGraph::degree(VertexId v) const {
  std::size_t n = 0;
  for (const auto& a : adj_.at(v)) n += a.nbr.size();
  return n;
}

GraphStats HetGraph::stats() const {
  GraphStats st;
  st.vertex_count = vertex_count();
  st.edge_count = forward_edges_;
  st.vertexes_per_type.assign(schema_.vertex_type_count(), 0);
  for (int t : vtype_) st.vertexes_per_type[t]++;
  st.edges_per_relation.assign(schema_.forward_count(), 0);
  for (VertexId v = 0; v < static_cast<VertexId>(vertex_count()); ++v)
    for (const auto& a : adj_[v])
      if (!schema_.relation_info(a.rel).is_inverse)
        st.edges_per_relation[a.rel] += a.nbr.size();
  return st;
}

VertexId GraphBuilder::find(const std::string& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? kNoVertex : it->second;
}

VertexId GraphBuilder::add_vertex(std::string key, int type_code, std::string label) {
  if (type_code < 0 || type_code >= schema_.vertex_type_count())
    throw std::runtime_error("add_vertex: bad type code for vertex " + key);
  auto it = index_.find(key);
  if (it != index_.end()) {
    VertexId v = it->second;
    if (vtype_[v] != type_code)
      throw std::runtime_error("add_vertex: vertex " + key + " redeclared with different type");
    if (!label.empty() && vlabel_[v].empty()) vlabel_[v] = std::move(label);
    return v;
  }
  VertexId v = static_cast<VertexId>(vtype_.size());
  vtype_.push_back(type_code);
  vlabel_.push_back(std::move(label));
  index_.emplace(key, v);
  vkey_.push_back(std::move(key));
  return v;
}

VertexId GraphBuilder::add_vertex(std::string key, const std::string& type_name,
                                  std::string label) {
  int code = schema_.vertex_type(type_name);
  if (code < 0) throw std::runtime_error("add_vertex: unknown vertex type: " + type_name);
  return add_vertex(std::move(key), code, std::move(label));
}

void GraphBuilder::add_edge(VertexId src, VertexId dst, RelationId rel, double weight) {
  if (rel < 0 || rel >= schema_.forward_count())
    throw std::runtime_error("add_edge: relation id out of range (forward relations only)");
  if (src < 0 || src >= static_cast<VertexId>(vtype_.size()) || dst < 0 ||
      dst >= static_cast<VertexId>(vtype_.size()))
    throw std::runtime_error("add_edge: vertex id out of range");
  const RelationType& rt = schema_.relation_info(rel);
  if (vtype_[src] != rt.src_type)
    throw std::runtime_error("add_edge: source of " + rt.name + " must be " +
                             schema_.vertex_type_name(rt.src_type) + ", got " +
                             schema_.vertex_type_name(vtype_[src]) + " (" + vkey_[src] + ")");
  if (vtype_[dst] != rt.dst_type)
    throw std::runtime_error("add_edge: target of " + rt.name + " must be " +
                             schema_.vertex_type_name(rt.dst_type) + ", got " +
                             schema_.vertex_type_name(vtype_[dst]) + " (" + vkey_[dst] + ")");
  if (!(weight > 0.0))
    throw std::runtime_error("add_edge: weight must be positive on " + rt.name + " edge " +
                             vkey_[src] + " -> " + vkey_[dst]);
  edges_.push_back({src, dst, rel, weight});
}

void GraphBuilder::add_edge(const std::string& src_key, const std::string& dst_key,
                            const std::string& rel_name, double weight) {
  RelationId rel = schema_.relation(rel_name);
  if (rel == kNoRelation) throw std::runtime_error("add_edge: unknown relation: " + rel_name);
  VertexId src = find(src_key);
  if (src == kNoVertex) throw std::runtime_error("add_edge: unknown vertex id: " + src_key);
  VertexId dst = find(dst_key);
  if (dst == kNoVertex) throw std::runtime_error("add_edge: unknown vertex id: " + dst_key);
  add_edge(src, dst, rel, weight);
}

HetGraph GraphBuilder::build() {
  std::size_t n = vtype_.size();
  // Merge duplicates: (src, rel, dst) -> summed weight, both directions at once.
  std::vector<std::map<std::pair<RelationId, VertexId>, double>> merged(n);
  for (const auto& e : edges_) {
    merged[e.src][{e.rel, e.dst}] += e.weight;
    merged[e.dst][{schema_.inverse(e.rel), e.src}] += e.weight;
  }

  HetGraph g;
  g.schema_ = schema_;
  g.vtype_ = vtype_;
  g.vkey_ = vkey_;
  g.vlabel_ = vlabel_;
  g.index_ = index_;
  g.adj_.resize(n);
  g.total_weight_.assign(n, 0.0);

  std::size_t forward = 0;
  for (std::size_t v = 0; v < n; ++v) {
    auto& lists = g.adj_[v];
    const auto& m = merged[v];
    auto it = m.begin();
    while (it != m.end()) {
      RelationId rel = it->first.first;
      HetGraph::Adjacency a;
      a.rel = rel;
      while (it != m.end() && it->first.first == rel) {
        a.nbr.push_back(it->first.second);
        a.weight.push_back(it->second);
        ++it;
      }
      a.cum.resize(a.weight.size());
      std::partial_sum(a.weight.begin(), a.weight.end(), a.cum.begin());
      a.total = a.cum.back();
      g.total_weight_[v] += a.total;
      if (!schema_.relation_info(rel).is_inverse) forward += a.nbr.size();
      lists.push_back(std::move(a));
    }
  }
  g.forward_edges_ = forward;
  return g;
}

std::span<const VertexId> DatasetSplit::gold_of(VertexId review) const {
  auto it = gold.find(review);
  if (it == gold.end()) return {};
  return {it->second.data(), it->second.size()};
}

void DatasetSplit::rebuild_index() {
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  train_set_.clear();
  train_set_.insert(train.begin(), train.end());
  test_set_.clear();
  test_set_.insert(test.begin(), test.end());
  for (auto& [review, aspects] : gold) std::sort(aspects.begin(), aspects.end());
}

HetGraph load_graph(const std::filesystem::path& vertex_file,
                    const std::filesystem::path& edge_file, const Schema& schema) {
  GraphBuilder b(schema);
  io::for_each_data_line(vertex_file, [&](std::string_view line, std::size_t lineno) {
    auto cols = io::split(line, '\t');
    if (cols.size() != 2 && cols.size() != 3)
      io::fail_at(vertex_file, lineno, "expected 2 or 3 columns: id, type [, label]");
    int code = b.schema().vertex_type(std::string(cols[1]));
    if (code < 0) io::fail_at(vertex_file, lineno, "unknown vertex type: " + std::string(cols[1]));
    if (b.find(std::string(cols[0])) != kNoVertex)
      io::fail_at(vertex_file, lineno, "duplicate vertex id: " + std::string(cols[0]));
    b.add_vertex(std::string(cols[0]), code, cols.size() == 3 ? std::string(cols[2]) : "");
  });
  io::for_each_data_line(edge_file, [&](std::string_view line, std::size_t lineno) {
    auto cols = io::split(line, '\t');
    if (cols.size() != 3 && cols.size() != 4)
      io::fail_at(edge_file, lineno, "expected 3 or 4 columns: src, dst, relation [, weight]");
    double w = cols.size() == 4 ? io::parse_double(cols[3], edge_file, lineno) : 1.0;
    try {
      b.add_edge(std::string(cols[0]), std::string(cols[1]), std::string(cols[2]), w);
    } catch (const std::exception& e) {
      io::fail_at(edge_file, lineno, e.what());
    }
  });
  return b.build();
}

void save_graph(const HetGraph& graph, const std::filesystem::path& vertex_file,
                const std::filesystem::path& edge_file) {
  auto vf = io::open_output(vertex_file);
  for (VertexId v = 0; v < static_cast<VertexId>(graph.vertex_count()); ++v) {
    vf << graph.key_of(v) << '\t' << graph.schema().vertex_type_name(graph.type_of(v));
    if (!graph.label_of(v).empty()) vf << '\t' << graph.label_of(v);
    vf << '\n';
  }
  auto ef = io::open_output(edge_file);
  for (VertexId v = 0; v < static_cast<VertexId>(graph.vertex_count()); ++v)
    for (const auto& a : graph.adjacency(v)) {
      if (graph.schema().relation_info(a.rel).is_inverse) continue;
      for (std::size_t i = 0; i < a.nbr.size(); ++i)
        ef << graph.key_of(v) << '\t' << graph.key_of(a.nbr[i]) << '\t'
           << graph.schema().relation_info(a.rel).name << '\t' << io::format_double(a.weight[i])
           << '\n';
    }
}

DatasetSplit load_split(const HetGraph& graph, const std::filesystem::path& reviews_file,
                        const std::filesystem::path& split_file) {
  DatasetSplit s;
  int review_type = graph.schema().vertex_type("Review");
  int aspect_type = graph.schema().vertex_type("Aspect");
  io::for_each_data_line(reviews_file, [&](std::string_view line, std::size_t lineno) {
    auto cols = io::split(line, '\t');
    if (cols.size() != 2) io::fail_at(reviews_file, lineno, "expected 2 columns: review, aspects");
    VertexId r = graph.find(std::string(cols[0]));
    if (r == kNoVertex)
      io::fail_at(reviews_file, lineno, "unknown review id: " + std::string(cols[0]));
    if (graph.type_of(r) != review_type)
      io::fail_at(reviews_file, lineno, std::string(cols[0]) + " is not a Review vertex");
    auto& gold = s.gold[r];
    for (auto aspect : io::split(cols[1], ',')) {
      if (aspect.empty()) continue;
      VertexId a = graph.find(std::string(aspect));
      if (a == kNoVertex)
        io::fail_at(reviews_file, lineno, "unknown aspect id: " + std::string(aspect));
      if (graph.type_of(a) != aspect_type)
        io::fail_at(reviews_file, lineno, std::string(aspect) + " is not an Aspect vertex");
      gold.push_back(a);
    }
    std::sort(gold.begin(), gold.end());
    gold.erase(std::unique(gold.begin(), gold.end()), gold.end());
  });
  std::unordered_set<VertexId> seen;
  io::for_each_data_line(split_file, [&](std::string_view line, std::size_t lineno) {
    auto cols = io::split(line, '\t');
    if (cols.size() != 2) io::fail_at(split_file, lineno, "expected 2 columns: review, TRAIN|TEST");
    VertexId r = graph.find(std::string(cols[0]));
    if (r == kNoVertex) io::fail_at(split_file, lineno, "unknown review id: " + std::string(cols[0]));
    if (graph.type_of(r) != review_type)
      io::fail_at(split_file, lineno, std::string(cols[0]) + " is not a Review vertex");
    if (!seen.insert(r).second)
      io::fail_at(split_file, lineno, "review listed twice: " + std::string(cols[0]));
    if (cols[1] == "TRAIN")
      s.train.push_back(r);
    else if (cols[1] == "TEST")
      s.test.push_back(r);
    else
      io::fail_at(split_file, lineno, "split must be TRAIN or TEST, got " + std::string(cols[1]));
  });
  s.rebuild_index();
  return s;
}

namespace {

// Copies a graph, dropping forward edges the predicate rejects.
template <typename Keep>
HetGraph filter_graph(const HetGraph& graph, Keep keep) {
  GraphBuilder b(graph.schema());
  for (VertexId v = 0; v < static_cast<VertexId>(graph.vertex_count()); ++v)
    b.add_vertex(graph.key_of(v), graph.type_of(v), graph.label_of(v));
  for (VertexId v = 0; v < static_cast<VertexId>(graph.vertex_count()); ++v)
    for (const auto& a : graph.adjacency(v)) {
      if (graph.schema().relation_info(a.rel).is_inverse) continue;
      for (std::size_t i = 0; i < a.nbr.size(); ++i)
        if (keep(v, a.rel, a.nbr[i])) b.add_edge(v, a.nbr[i], a.rel, a.weight[i]);
    }
  return b.build();
}

}  // namespace

HetGraph apply_leakage_filter(const HetGraph& graph, const DatasetSplit& split) {
  const Schema& schema = graph.schema();
  RelationId men = schema.relation("men");
  RelationId rel = schema.relation("rel");
  RelationId con_inv = schema.relation("con_inv");
  if (men == kNoRelation || rel == kNoRelation || con_inv == kNoRelation)
    throw std::runtime_error("leakage filter needs men, rel and con relations in the schema");

  // Support of rel(w, a): reviews with a con edge to w and a men edge to a,
  // measured on the unfiltered graph.
  auto support_all_test = [&](VertexId w, VertexId a) {
    const HetGraph::Adjacency* reviews = graph.adjacency(w, con_inv);
    if (!reviews) return false;  // empty support: keep the edge
    bool any = false;
    for (VertexId r : reviews->nbr) {
      if (graph.edge_weight(r, men, a) <= 0.0) continue;
      any = true;
      if (!split.is_test(r)) return false;
    }
    return any;
  };

  return filter_graph(graph, [&](VertexId src, RelationId r, VertexId dst) {
    if (r == men && split.is_test(src)) return false;
    if (r == rel && support_all_test(src, dst)) return false;
    return true;
  });
}

HetGraph build_word_aspect_edges(const HetGraph& graph, const DatasetSplit& split) {
  const Schema& schema = graph.schema();
  RelationId men = schema.relation("men");
  RelationId con = schema.relation("con");
  RelationId rel = schema.relation("rel");
  if (men == kNoRelation || con == kNoRelation || rel == kNoRelation)
    throw std::runtime_error("word-aspect derivation needs men, rel and con relations");

  std::map<std::pair<VertexId, VertexId>, double> counts;  // (word, aspect) -> reviews
  for (VertexId r : split.train) {
    const HetGraph::Adjacency* words = graph.adjacency(r, con);
    const HetGraph::Adjacency* aspects = graph.adjacency(r, men);
    if (!words || !aspects) continue;
    for (VertexId w : words->nbr)
      for (VertexId a : aspects->nbr) counts[{w, a}] += 1.0;
  }

  GraphBuilder b(schema);
  for (VertexId v = 0; v < static_cast<VertexId>(graph.vertex_count()); ++v)
    b.add_vertex(graph.key_of(v), graph.type_of(v), graph.label_of(v));
  for (VertexId v = 0; v < static_cast<VertexId>(graph.vertex_count()); ++v)
    for (const auto& a : graph.adjacency(v)) {
      if (graph.schema().relation_info(a.rel).is_inverse) continue;
      for (std::size_t i = 0; i < a.nbr.size(); ++i) b.add_edge(v, a.nbr[i], a.rel, a.weight[i]);
    }
  for (const auto& [pair, count] : counts) {
    if (graph.edge_weight(pair.first, rel, pair.second) > 0.0) continue;
    b.add_edge(pair.first, pair.second, rel, count);
  }
  return b.build();
}

std::string format_stats(const HetGraph& graph) {
  GraphStats st = graph.stats();
  std::ostringstream out;
  out << "vertices\t" << st.vertex_count << '\n';
  out << "edges\t" << st.edge_count << '\n';
  for (int t = 0; t < graph.schema().vertex_type_count(); ++t)
    out << "vertices." << graph.schema().vertex_type_name(t) << '\t' << st.vertexes_per_type[t]
        << '\n';
  for (RelationId r = 0; r < graph.schema().forward_count(); ++r)
    out << "edges." << graph.schema().relation_info(r).name << '\t' << st.edges_per_relation[r]
        << '\n';
  return out.str();
}

}  // namespace thgrl
