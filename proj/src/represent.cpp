#include "thgrl/represent.hpp"

#include <algorithm>
#include <stdexcept>

#include "thgrl/io_util.hpp"

namespace thgrl {

IntegratedTable integrate(const EmbeddingModel& model,
                          const std::vector<std::vector<double>>& posteriors) {
  if (posteriors.size() != model.vertex_count)
    throw std::runtime_error("integrate: one posterior row per vertex required");
  if (model.tracer_count < 1) throw std::runtime_error("integrate: model has no tracer rows");
  IntegratedTable table;
  table.vertex_count = model.vertex_count;
  table.width = 2 * model.dimension;
  table.integrated = true;
  table.rows.resize(table.vertex_count * static_cast<std::size_t>(table.width));
  table.tracer_of.resize(table.vertex_count);
  std::size_t d = static_cast<std::size_t>(model.dimension);
  for (std::size_t v = 0; v < model.vertex_count; ++v) {
    const auto& post = posteriors[v];
    if (post.size() != static_cast<std::size_t>(model.tracer_count))
      throw std::runtime_error("integrate: posterior row width mismatch");
    int best = 0;
    for (int k = 1; k < model.tracer_count; ++k)
      if (post[k] > post[best]) best = k;
    table.tracer_of[v] = best;
    double* dst = table.rows.data() + v * static_cast<std::size_t>(table.width);
    std::span<const double> fv = model.f(v);
    std::span<const double> ft = model.f(model.tracer_row(best));
    std::copy(fv.begin(), fv.end(), dst);
    std::copy(ft.begin(), ft.end(), dst + d);
  }
  return table;
}

IntegratedTable vertex_only_table(const EmbeddingModel& model) {
  IntegratedTable table;
  table.vertex_count = model.vertex_count;
  table.width = model.dimension;
  table.integrated = false;
  table.rows.resize(table.vertex_count * static_cast<std::size_t>(table.width));
  for (std::size_t v = 0; v < model.vertex_count; ++v) {
    std::span<const double> fv = model.f(v);
    std::copy(fv.begin(), fv.end(),
              table.rows.data() + v * static_cast<std::size_t>(table.width));
  }
  return table;
}

ReviewVector pool_review(const HetGraph& graph, const IntegratedTable& table, VertexId review) {
  if (review < 0 || static_cast<std::size_t>(review) >= graph.vertex_count())
    throw std::runtime_error("pool_review: vertex id out of range");
  if (graph.type_of(review) != graph.schema().vertex_type("Review"))
    throw std::runtime_error("pool_review: " + graph.key_of(review) + " is not a Review vertex");
  ReviewVector out;
  out.review = review;
  out.values.assign(static_cast<std::size_t>(table.width), 0.0);
  RelationId con = graph.schema().relation("con");
  const HetGraph::Adjacency* words = con == kNoRelation ? nullptr : graph.adjacency(review, con);
  if (!words) return out;
  for (VertexId w : words->nbr) {
    std::span<const double> row = table.row(w);
    for (std::size_t i = 0; i < row.size(); ++i) out.values[i] += row[i];
    out.word_hits++;
  }
  if (out.word_hits > 0)
    for (double& x : out.values) x /= static_cast<double>(out.word_hits);
  return out;
}

void save_integrated(const IntegratedTable& table, const HetGraph& graph,
                     const std::filesystem::path& file) {
  if (graph.vertex_count() != table.vertex_count)
    throw std::runtime_error("save_integrated: graph does not match the table");
  auto out = io::open_output(file);
  out << table.vertex_count << ' ' << table.width << '\n';
  for (std::size_t v = 0; v < table.vertex_count; ++v) {
    out << graph.key_of(static_cast<VertexId>(v));
    for (double x : table.row(static_cast<VertexId>(v))) out << ' ' << io::format_double(x);
    if (table.integrated) out << ' ' << table.tracer_of[v];
    out << '\n';
  }
}

IntegratedTable load_integrated(const HetGraph& graph, const std::filesystem::path& file) {
  IntegratedTable table;
  bool have_header = false;
  std::size_t seen = 0;
  std::vector<bool> filled;
  io::for_each_data_line(file, [&](std::string_view line, std::size_t lineno) {
    auto cols = io::split(line, ' ');
    if (!have_header) {
      have_header = true;
      if (cols.size() != 2) io::fail_at(file, lineno, "header must be: rows width");
      table.vertex_count = static_cast<std::size_t>(io::parse_long(cols[0], file, lineno));
      table.width = static_cast<int>(io::parse_long(cols[1], file, lineno));
      if (table.vertex_count != graph.vertex_count())
        io::fail_at(file, lineno, "row count does not match the graph");
      if (table.width < 1) io::fail_at(file, lineno, "width must be >= 1");
      table.rows.assign(table.vertex_count * static_cast<std::size_t>(table.width), 0.0);
      filled.assign(table.vertex_count, false);
      return;
    }
    std::size_t w = static_cast<std::size_t>(table.width);
    if (cols.size() == w + 2) {
      if (seen == 0) {
        table.integrated = true;
        table.tracer_of.assign(table.vertex_count, 0);
      } else if (!table.integrated) {
        io::fail_at(file, lineno, "mixed integrated and vertex-only rows");
      }
    } else if (cols.size() == w + 1) {
      if (seen == 0)
        table.integrated = false;
      else if (table.integrated)
        io::fail_at(file, lineno, "mixed integrated and vertex-only rows");
    } else {
      io::fail_at(file, lineno, "bad row width");
    }
    VertexId v = graph.find(std::string(cols[0]));
    if (v == kNoVertex) io::fail_at(file, lineno, "unknown vertex id: " + std::string(cols[0]));
    if (filled[static_cast<std::size_t>(v)])
      io::fail_at(file, lineno, "duplicate row: " + std::string(cols[0]));
    filled[static_cast<std::size_t>(v)] = true;
    double* dst = table.rows.data() + static_cast<std::size_t>(v) * w;
    for (std::size_t i = 0; i < w; ++i) dst[i] = io::parse_double(cols[i + 1], file, lineno);
    if (table.integrated) {
      long t = io::parse_long(cols[w + 1], file, lineno);
      if (t < 0) io::fail_at(file, lineno, "negative tracer index");
      table.tracer_of[static_cast<std::size_t>(v)] = static_cast<int>(t);
    }
    ++seen;
  });
  if (!have_header) throw std::runtime_error(file.string() + ": empty table file");
  if (seen != table.vertex_count)
    throw std::runtime_error(file.string() + ": missing table rows");
  return table;
}

}  // namespace thgrl
