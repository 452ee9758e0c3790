#include "thgrl/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "thgrl/io_util.hpp"
#include "thgrl/rng.hpp"

namespace thgrl {

void TracerConfig::validate() const {
  if (tracer_count < 1) throw std::runtime_error("tracer count must be >= 1");
  if (alpha() <= 0.0) throw std::runtime_error("dirichlet alpha must be positive");
  if (vertex_smoothing <= 0.0) throw std::runtime_error("vertex smoothing must be positive");
  if (gibbs_iterations < 1) throw std::runtime_error("gibbs iterations must be >= 1");
  if (burn_in < 0 || burn_in >= gibbs_iterations)
    throw std::runtime_error("burn-in must be in [0, gibbs iterations)");
}

GibbsCounts GibbsCounts::tally(const WalkCorpus& corpus,
                               const std::vector<std::vector<int>>& assignments, int tracer_count,
                               std::size_t vertex_count) {
  GibbsCounts c;
  c.path_tracer.assign(corpus.paths.size(), std::vector<int>(tracer_count, 0));
  c.tracer_vertex.assign(tracer_count, std::vector<int>(vertex_count, 0));
  c.tracer_total.assign(tracer_count, 0);
  for (std::size_t p = 0; p < corpus.paths.size(); ++p)
    for (std::size_t t = 0; t < corpus.paths[p].size(); ++t) {
      int k = assignments[p][t];
      VertexId v = corpus.paths[p][t];
      c.path_tracer[p][k]++;
      c.tracer_vertex[k][v]++;
      c.tracer_total[k]++;
    }
  return c;
}

std::vector<double> full_conditional(const GibbsCounts& counts, std::size_t path, VertexId v,
                                     double alpha, double eta, std::size_t vertex_count) {
  std::size_t k_count = counts.tracer_total.size();
  std::vector<double> p(k_count);
  double sum = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    p[k] = (counts.path_tracer[path][k] + alpha) * (counts.tracer_vertex[k][v] + eta) /
           (counts.tracer_total[k] + static_cast<double>(vertex_count) * eta);
    sum += p[k];
  }
  for (double& x : p) x /= sum;
  return p;
}

namespace {

std::uint64_t path_content_hash(const std::vector<VertexId>& path) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (VertexId v : path) h = mix64(h ^ (static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL));
  return h;
}

// Storage-independent processing order: by content hash, then content, with
// the storage index breaking ties between byte-identical paths.
std::vector<std::size_t> canonical_order(const WalkCorpus& corpus,
                                         const std::vector<std::uint64_t>& hashes) {
  std::vector<std::size_t> order(corpus.paths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (hashes[a] != hashes[b]) return hashes[a] < hashes[b];
    if (corpus.paths[a] != corpus.paths[b]) return corpus.paths[a] < corpus.paths[b];
    return a < b;
  });
  return order;
}

double log_dirichlet_density(const std::vector<double>& x, double alpha) {
  double k = static_cast<double>(x.size());
  double v = std::lgamma(k * alpha) - k * std::lgamma(alpha);
  for (double xi : x) v += (alpha - 1.0) * std::log(xi);
  return v;
}

void finalize_estimates(TracerModel& model, const WalkCorpus& corpus, const GibbsCounts& counts,
                        double alpha, double eta) {
  std::size_t p_count = corpus.paths.size();
  int k_count = model.tracer_count;
  std::size_t v_count = model.vertex_count;
  model.theta.assign(p_count, std::vector<double>(k_count));
  for (std::size_t p = 0; p < p_count; ++p) {
    double len = static_cast<double>(corpus.paths[p].size());
    for (int k = 0; k < k_count; ++k)
      model.theta[p][k] = (counts.path_tracer[p][k] + alpha) / (len + k_count * alpha);
  }
  model.beta.assign(k_count, std::vector<double>(v_count));
  for (int k = 0; k < k_count; ++k) {
    double denom = counts.tracer_total[k] + static_cast<double>(v_count) * eta;
    for (std::size_t v = 0; v < v_count; ++v)
      model.beta[k][v] = (counts.tracer_vertex[k][v] + eta) / denom;
  }
  std::size_t total = 0;
  for (int k = 0; k < k_count; ++k) total += counts.tracer_total[k];
  model.tracer_frequency.assign(k_count, 0.0);
  if (total > 0)
    for (int k = 0; k < k_count; ++k)
      model.tracer_frequency[k] = counts.tracer_total[k] / static_cast<double>(total);
}

}  // namespace

TracerModel fit_tracers(const WalkCorpus& corpus, std::size_t vertex_count,
                        const TracerConfig& config, std::vector<double>* sweep_log_joint) {
  config.validate();
  if (corpus.paths.empty()) throw std::runtime_error("cannot fit tracers on an empty corpus");
  for (const auto& path : corpus.paths)
    for (VertexId v : path)
      if (v < 0 || static_cast<std::size_t>(v) >= vertex_count)
        throw std::runtime_error("corpus vertex id out of range");

  int k_count = config.tracer_count;
  double alpha = config.alpha();
  double eta = config.vertex_smoothing;
  std::size_t total_tokens = corpus.token_count();
  if (static_cast<std::size_t>(k_count) > total_tokens)
    std::fprintf(stderr,
                 "warning: degenerate model, %d tracers for %zu tokens; fitting anyway\n",
                 k_count, total_tokens);

  std::vector<std::uint64_t> hashes(corpus.paths.size());
  for (std::size_t p = 0; p < corpus.paths.size(); ++p)
    hashes[p] = path_content_hash(corpus.paths[p]);
  std::vector<std::size_t> order = canonical_order(corpus, hashes);

  // One stream per path, keyed by content rather than storage position.
  // Byte-identical paths are distinguished by their rank within the run.
  std::vector<Rng> streams;
  streams.reserve(corpus.paths.size());
  for (std::size_t p = 0; p < corpus.paths.size(); ++p) streams.emplace_back(0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::size_t occurrence = 0;
    while (i >= occurrence + 1 && corpus.paths[order[i - occurrence - 1]] == corpus.paths[order[i]])
      ++occurrence;
    streams[order[i]] = Rng(derive_seed(config.seed, hashes[order[i]], occurrence));
  }

  std::vector<std::vector<int>> assignments(corpus.paths.size());
  GibbsCounts counts;
  counts.path_tracer.assign(corpus.paths.size(), std::vector<int>(k_count, 0));
  counts.tracer_vertex.assign(k_count, std::vector<int>(vertex_count, 0));
  counts.tracer_total.assign(k_count, 0);

  for (std::size_t idx : order) {
    const auto& path = corpus.paths[idx];
    auto& z_row = assignments[idx];
    z_row.resize(path.size());
    Rng& rng = streams[idx];
    for (std::size_t t = 0; t < path.size(); ++t) {
      int k = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(k_count)));
      z_row[t] = k;
      counts.path_tracer[idx][k]++;
      counts.tracer_vertex[k][path[t]]++;
      counts.tracer_total[k]++;
    }
  }

  TracerModel model;
  model.tracer_count = k_count;
  model.vertex_count = vertex_count;
  model.alpha = alpha;
  model.eta = eta;
  model.seed = config.seed;

  auto monitor = [&]() {
    if (!sweep_log_joint) return;
    TracerModel snapshot = model;
    finalize_estimates(snapshot, corpus, counts, alpha, eta);
    snapshot.assignments = assignments;
    sweep_log_joint->push_back(log_joint(snapshot, corpus));
  };
  monitor();

  std::vector<double> cdf(k_count);
  double v_eta = static_cast<double>(vertex_count) * eta;
  for (int sweep = 0; sweep < config.gibbs_iterations; ++sweep) {
    for (std::size_t idx : order) {
      const auto& path = corpus.paths[idx];
      auto& z_row = assignments[idx];
      auto& n_pk = counts.path_tracer[idx];
      Rng& rng = streams[idx];
      for (std::size_t t = 0; t < path.size(); ++t) {
        VertexId v = path[t];
        int old_k = z_row[t];
        n_pk[old_k]--;
        counts.tracer_vertex[old_k][v]--;
        counts.tracer_total[old_k]--;
        double acc = 0.0;
        for (int k = 0; k < k_count; ++k) {
          acc += (n_pk[k] + alpha) * (counts.tracer_vertex[k][v] + eta) /
                 (counts.tracer_total[k] + v_eta);
          cdf[k] = acc;
        }
        double u = rng.next_double() * acc;
        int new_k = static_cast<int>(
            std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        if (new_k >= k_count) new_k = k_count - 1;
        z_row[t] = new_k;
        n_pk[new_k]++;
        counts.tracer_vertex[new_k][v]++;
        counts.tracer_total[new_k]++;
      }
    }
    monitor();
  }

  finalize_estimates(model, corpus, counts, alpha, eta);
  model.assignments = std::move(assignments);
  return model;
}

std::vector<double> capture_posterior(const TracerModel& model, VertexId v, std::size_t path) {
  if (v < 0 || static_cast<std::size_t>(v) >= model.vertex_count)
    throw std::runtime_error("capture_posterior: vertex id out of range");
  if (path >= model.theta.size()) throw std::runtime_error("capture_posterior: path out of range");
  std::vector<double> p(model.tracer_count);
  double sum = 0.0;
  for (int k = 0; k < model.tracer_count; ++k) {
    p[k] = model.beta[k][v] * model.theta[path][k];
    sum += p[k];
  }
  for (double& x : p) x /= sum;
  return p;
}

std::vector<std::vector<int>> assign_tokens(const TracerModel& model, const WalkCorpus& corpus) {
  if (corpus.paths.size() != model.theta.size())
    throw std::runtime_error("assign_tokens: corpus does not match the fitted model");
  std::vector<std::vector<int>> out(corpus.paths.size());
  for (std::size_t p = 0; p < corpus.paths.size(); ++p) {
    const auto& theta = model.theta[p];
    out[p].resize(corpus.paths[p].size());
    for (std::size_t t = 0; t < corpus.paths[p].size(); ++t) {
      VertexId v = corpus.paths[p][t];
      int best = 0;
      double best_score = model.beta[0][v] * theta[0];
      for (int k = 1; k < model.tracer_count; ++k) {
        double score = model.beta[k][v] * theta[k];
        if (score > best_score) {
          best_score = score;
          best = k;
        }
      }
      out[p][t] = best;
    }
  }
  return out;
}

std::vector<std::vector<double>> vertex_tracer_posterior(
    const TracerModel& model, const WalkCorpus& corpus,
    const std::vector<std::vector<int>>& assignments, double eps) {
  int k_count = model.tracer_count;
  std::vector<std::vector<std::size_t>> counts(model.vertex_count,
                                               std::vector<std::size_t>(k_count, 0));
  std::vector<std::size_t> totals(model.vertex_count, 0);
  for (std::size_t p = 0; p < corpus.paths.size(); ++p)
    for (std::size_t t = 0; t < corpus.paths[p].size(); ++t) {
      counts[corpus.paths[p][t]][assignments[p][t]]++;
      totals[corpus.paths[p][t]]++;
    }
  std::vector<std::vector<double>> post(model.vertex_count, std::vector<double>(k_count));
  for (std::size_t v = 0; v < model.vertex_count; ++v) {
    if (totals[v] == 0) {
      for (int k = 0; k < k_count; ++k) post[v][k] = 1.0 / k_count;
      continue;
    }
    double denom = static_cast<double>(totals[v]) + k_count * eps;
    for (int k = 0; k < k_count; ++k) post[v][k] = (counts[v][k] + eps) / denom;
  }
  return post;
}

double log_joint(const TracerModel& model, const WalkCorpus& corpus) {
  if (corpus.paths.size() != model.theta.size() ||
      corpus.paths.size() != model.assignments.size())
    throw std::runtime_error("log_joint: corpus does not match the fitted model");
  double total = 0.0;
  for (std::size_t p = 0; p < corpus.paths.size(); ++p) {
    total += log_dirichlet_density(model.theta[p], model.alpha);
    for (std::size_t t = 0; t < corpus.paths[p].size(); ++t) {
      int k = model.assignments[p][t];
      total += std::log(model.theta[p][k]) + std::log(model.beta[k][corpus.paths[p][t]]);
    }
  }
  return total;
}

void save_tracer_model(const TracerModel& model, const std::filesystem::path& file) {
  auto out = io::open_output(file);
  out << "# tracer model: tracers, vertexes, paths, alpha, eta, seed; then beta"
         " rows, theta rows, per-path assignments\n";
  out << model.tracer_count << '\t' << model.vertex_count << '\t' << model.theta.size() << '\t'
      << io::format_double(model.alpha) << '\t' << io::format_double(model.eta) << '\t'
      << model.seed << '\n';
  for (const auto& row : model.beta) {
    for (std::size_t v = 0; v < row.size(); ++v) {
      if (v) out << '\t';
      out << io::format_double(row[v]);
    }
    out << '\n';
  }
  for (const auto& row : model.theta) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << '\t';
      out << io::format_double(row[k]);
    }
    out << '\n';
  }
  for (const auto& row : model.assignments) {
    for (std::size_t t = 0; t < row.size(); ++t) {
      if (t) out << ' ';
      out << row[t];
    }
    out << '\n';
  }
}

TracerModel load_tracer_model(const std::filesystem::path& file) {
  TracerModel model;
  std::size_t path_count = 0;
  std::size_t row = 0;  // data-line counter, not file line number
  io::for_each_data_line(file, [&](std::string_view line, std::size_t lineno) {
    if (row == 0) {
      auto cols = io::split(line, '\t');
      if (cols.size() != 6)
        io::fail_at(file, lineno, "header needs tracers, vertexes, paths, alpha, eta, seed");
      model.tracer_count = static_cast<int>(io::parse_long(cols[0], file, lineno));
      model.vertex_count = static_cast<std::size_t>(io::parse_long(cols[1], file, lineno));
      path_count = static_cast<std::size_t>(io::parse_long(cols[2], file, lineno));
      model.alpha = io::parse_double(cols[3], file, lineno);
      model.eta = io::parse_double(cols[4], file, lineno);
      model.seed = static_cast<std::uint64_t>(io::parse_long(cols[5], file, lineno));
      if (model.tracer_count < 1) io::fail_at(file, lineno, "tracer count must be >= 1");
      model.beta.reserve(model.tracer_count);
      model.theta.reserve(path_count);
      model.assignments.reserve(path_count);
    } else if (row <= static_cast<std::size_t>(model.tracer_count)) {
      auto cols = io::split(line, '\t');
      if (cols.size() != model.vertex_count) io::fail_at(file, lineno, "bad beta row width");
      std::vector<double> beta_row(cols.size());
      for (std::size_t i = 0; i < cols.size(); ++i)
        beta_row[i] = io::parse_double(cols[i], file, lineno);
      model.beta.push_back(std::move(beta_row));
    } else if (row <= static_cast<std::size_t>(model.tracer_count) + path_count) {
      auto cols = io::split(line, '\t');
      if (cols.size() != static_cast<std::size_t>(model.tracer_count))
        io::fail_at(file, lineno, "bad theta row width");
      std::vector<double> theta_row(cols.size());
      for (std::size_t i = 0; i < cols.size(); ++i)
        theta_row[i] = io::parse_double(cols[i], file, lineno);
      model.theta.push_back(std::move(theta_row));
    } else {
      auto cols = io::split(line, ' ');
      std::vector<int> z(cols.size());
      for (std::size_t i = 0; i < cols.size(); ++i) {
        z[i] = static_cast<int>(io::parse_long(cols[i], file, lineno));
        if (z[i] < 0 || z[i] >= model.tracer_count)
          io::fail_at(file, lineno, "assignment out of range");
      }
      model.assignments.push_back(std::move(z));
    }
    ++row;
  });
  if (model.theta.size() != path_count || model.assignments.size() != path_count)
    throw std::runtime_error(file.string() + ": truncated tracer model");
  std::vector<std::size_t> totals(model.tracer_count, 0);
  std::size_t all = 0;
  for (const auto& z_row : model.assignments)
    for (int k : z_row) {
      totals[k]++;
      all++;
    }
  model.tracer_frequency.assign(model.tracer_count, 0.0);
  if (all > 0)
    for (int k = 0; k < model.tracer_count; ++k)
      model.tracer_frequency[k] = totals[k] / static_cast<double>(all);
  return model;
}

}  // namespace thgrl
