#include "thgrl/embed.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "thgrl/io_util.hpp"

namespace thgrl {

void EmbedConfig::validate() const {
  if (dimension < 1) throw std::runtime_error("embedding dimension must be >= 1");
  if (context_window < 1) throw std::runtime_error("context window must be >= 1");
  if (negatives < 1) throw std::runtime_error("negative sample count must be >= 1");
  if (initial_lr <= 0.0) throw std::runtime_error("initial learning rate must be positive");
  if (final_lr <= 0.0 || final_lr > initial_lr)
    throw std::runtime_error("final learning rate must be in (0, initial]");
  if (epochs < 0) throw std::runtime_error("epochs must be >= 0");
  if (tracer_weight < 0.0) throw std::runtime_error("tracer weight must be >= 0");
  if (threads < 1) throw std::runtime_error("thread count must be >= 1");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double softmax_row(const EmbeddingModel& model, std::size_t input_row, VertexId c) {
  if (c < 0 || static_cast<std::size_t>(c) >= model.vertex_count)
    throw std::runtime_error("softmax: context vertex out of range");
  std::span<const double> fr = model.f(input_row);
  std::vector<double> logits(model.vertex_count);
  double top = -HUGE_VAL;
  for (std::size_t u = 0; u < model.vertex_count; ++u) {
    logits[u] = dot(model.g(u), fr);
    top = std::max(top, logits[u]);
  }
  double denom = 0.0;
  for (double l : logits) denom += std::exp(l - top);
  return std::exp(logits[static_cast<std::size_t>(c)] - top) / denom;
}

}  // namespace

double softmax_vertex(const EmbeddingModel& model, VertexId v, VertexId c) {
  if (v < 0 || static_cast<std::size_t>(v) >= model.vertex_count)
    throw std::runtime_error("softmax: target vertex out of range");
  return softmax_row(model, static_cast<std::size_t>(v), c);
}

double softmax_tracer(const EmbeddingModel& model, int tracer, VertexId c) {
  if (tracer < 0 || tracer >= model.tracer_count)
    throw std::runtime_error("softmax: tracer out of range");
  return softmax_row(model, model.tracer_row(tracer), c);
}

std::vector<TrainingPair> emit_pairs(const std::vector<VertexId>& path,
                                     const std::vector<int>& assignments, int window) {
  if (assignments.size() != path.size())
    throw std::runtime_error("emit_pairs: assignments do not match the path");
  std::vector<TrainingPair> pairs;
  int n = static_cast<int>(path.size());
  for (int t = 0; t < n; ++t) {
    int lo = std::max(0, t - window);
    int hi = std::min(n - 1, t + window);
    for (int c = lo; c <= hi; ++c) {
      if (c == t) continue;
      pairs.push_back({path[t], assignments[t], path[c]});
    }
  }
  return pairs;
}

double sgns_loss_and_grad(const EmbeddingModel& model, const TrainingPair& pair,
                          const std::vector<VertexId>& negatives, double tracer_weight,
                          SgnsGrad* grad) {
  auto check_vertex = [&](VertexId v) {
    if (v < 0 || static_cast<std::size_t>(v) >= model.vertex_count)
      throw std::runtime_error("sgns: vertex id out of range");
  };
  check_vertex(pair.target);
  check_vertex(pair.context);
  for (VertexId n : negatives) check_vertex(n);
  if (pair.tracer < 0 || pair.tracer >= model.tracer_count)
    throw std::runtime_error("sgns: tracer id out of range");
  std::size_t d = static_cast<std::size_t>(model.dimension);
  std::span<const double> fv = model.f(static_cast<std::size_t>(pair.target));
  std::span<const double> ft = model.f(model.tracer_row(pair.tracer));
  std::span<const double> gc = model.g(static_cast<std::size_t>(pair.context));

  if (grad) {
    grad->f_target.assign(d, 0.0);
    grad->f_tracer.assign(d, 0.0);
    grad->g_context.assign(d, 0.0);
    grad->g_negative.assign(negatives.size(), std::vector<double>(d, 0.0));
  }

  double loss = 0.0;
  // One half of the objective: the row `fr` predicts the context against the
  // sampled negatives; `weight` scales both the loss and every gradient.
  auto half = [&](std::span<const double> fr, double weight, std::vector<double>* f_grad) {
    double xc = dot(gc, fr);
    loss += -weight * log_sigmoid(xc);
    double coef_c = weight * (sigmoid(xc) - 1.0);
    if (grad)
      for (std::size_t i = 0; i < d; ++i) {
        (*f_grad)[i] += coef_c * gc[i];
        grad->g_context[i] += coef_c * fr[i];
      }
    for (std::size_t s = 0; s < negatives.size(); ++s) {
      std::span<const double> gn = model.g(static_cast<std::size_t>(negatives[s]));
      double xn = dot(gn, fr);
      loss += -weight * log_sigmoid(-xn);
      if (grad) {
        double coef_n = weight * sigmoid(xn);
        for (std::size_t i = 0; i < d; ++i) {
          (*f_grad)[i] += coef_n * gn[i];
          grad->g_negative[s][i] += coef_n * fr[i];
        }
      }
    }
  };
  half(fv, 1.0, grad ? &grad->f_target : nullptr);
  if (tracer_weight != 0.0) half(ft, tracer_weight, grad ? &grad->f_tracer : nullptr);
  return loss;
}

std::vector<double> build_noise(const WalkCorpus& corpus, std::size_t vertex_count,
                                double exponent) {
  std::vector<double> counts(vertex_count, 0.0);
  for (const auto& path : corpus.paths)
    for (VertexId v : path) {
      if (v < 0 || static_cast<std::size_t>(v) >= vertex_count)
        throw std::runtime_error("build_noise: corpus vertex id out of range");
      counts[static_cast<std::size_t>(v)] += 1.0;
    }
  double total = 0.0;
  for (double& c : counts) {
    c = c > 0.0 ? std::pow(c, exponent) : 0.0;
    total += c;
  }
  if (total <= 0.0) throw std::runtime_error("build_noise: empty corpus");
  for (double& c : counts) c /= total;
  return counts;
}

AliasTable::AliasTable(const std::vector<double>& probs) {
  std::size_t n = probs.size();
  if (n == 0) throw std::runtime_error("alias table needs a nonempty distribution");
  threshold_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) scaled[i] = probs[i] * static_cast<double>(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = n; i-- > 0;)
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  while (!small.empty() && !large.empty()) {
    std::uint32_t s = small.back();
    std::uint32_t l = large.back();
    small.pop_back();
    threshold_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (std::uint32_t i : large) threshold_[i] = 1.0;
  for (std::uint32_t i : small) threshold_[i] = 1.0;  // numerical leftovers
}

std::size_t AliasTable::draw(Rng& rng) const {
  std::size_t i = static_cast<std::size_t>(rng.next_index(threshold_.size()));
  return rng.next_double() < threshold_[i] ? i : alias_[i];
}

namespace {

struct TrainContext {
  const WalkCorpus* corpus;
  const std::vector<std::vector<int>>* assignments;
  const EmbedConfig* config;
  EmbeddingModel* model;
  const AliasTable* alias;
  std::vector<std::size_t> token_offset;  // running token index at each path start
  std::size_t total_tokens = 0;
};

// Processes one contiguous path range for one epoch. Loss is accumulated per
// pair so callers can report decile means.
void train_range(const TrainContext& ctx, int epoch, std::size_t path_lo, std::size_t path_hi,
                 std::vector<double>* pair_loss) {
  const EmbedConfig& cfg = *ctx.config;
  EmbeddingModel& model = *ctx.model;
  std::size_t d = static_cast<std::size_t>(model.dimension);
  double span = cfg.initial_lr - cfg.final_lr;
  double denom = static_cast<double>(cfg.epochs) * static_cast<double>(ctx.total_tokens);
  std::vector<VertexId> negatives(static_cast<std::size_t>(cfg.negatives));
  std::vector<double> grad_fv(d), grad_ft(d);

  for (std::size_t p = path_lo; p < path_hi; ++p) {
    const auto& path = ctx.corpus->paths[p];
    const auto& assign = (*ctx.assignments)[p];
    Rng rng(derive_seed(cfg.seed, hash_label("pairs") + static_cast<std::uint64_t>(epoch), p));
    int n = static_cast<int>(path.size());
    for (int t = 0; t < n; ++t) {
      double progress =
          (static_cast<double>(epoch) * static_cast<double>(ctx.total_tokens) +
           static_cast<double>(ctx.token_offset[p] + static_cast<std::size_t>(t))) /
          denom;
      double lr = cfg.initial_lr - span * progress;
      int window = cfg.context_window;
      if (cfg.shrink_window)
        window = 1 + static_cast<int>(rng.next_index(static_cast<std::uint64_t>(window)));
      VertexId target = path[t];
      int tracer = assign[t];
      std::span<double> fv = model.f(static_cast<std::size_t>(target));
      std::span<double> ft = model.f(model.tracer_row(tracer));
      int lo = std::max(0, t - window);
      int hi = std::min(n - 1, t + window);
      for (int c = lo; c <= hi; ++c) {
        if (c == t) continue;
        VertexId context = path[c];
        for (auto& neg : negatives) {
          neg = static_cast<VertexId>(ctx.alias->draw(rng));
          for (int tries = 0; neg == context && tries < 16; ++tries)
            neg = static_cast<VertexId>(ctx.alias->draw(rng));
        }
        std::span<double> gc = model.g(static_cast<std::size_t>(context));
        std::fill(grad_fv.begin(), grad_fv.end(), 0.0);
        std::fill(grad_ft.begin(), grad_ft.end(), 0.0);
        double loss = 0.0;
        auto half = [&](std::span<const double> fr, double weight, std::vector<double>& f_grad,
                        bool with_loss) {
          double xc = dot(gc, fr);
          if (with_loss) loss += -weight * log_sigmoid(xc);
          double coef_c = weight * (sigmoid(xc) - 1.0);
          for (std::size_t i = 0; i < d; ++i) f_grad[i] += coef_c * gc[i];
          for (std::size_t i = 0; i < d; ++i) gc[i] -= lr * coef_c * fr[i];
          for (VertexId neg : negatives) {
            std::span<double> gn = model.g(static_cast<std::size_t>(neg));
            double xn = dot(gn, fr);
            if (with_loss) loss += -weight * log_sigmoid(-xn);
            double coef_n = weight * sigmoid(xn);
            for (std::size_t i = 0; i < d; ++i) f_grad[i] += coef_n * gn[i];
            for (std::size_t i = 0; i < d; ++i) gn[i] -= lr * coef_n * fr[i];
          }
        };
        bool want_loss = pair_loss != nullptr;
        half(fv, 1.0, grad_fv, want_loss);
        if (cfg.tracer_weight != 0.0) half(ft, cfg.tracer_weight, grad_ft, want_loss);
        for (std::size_t i = 0; i < d; ++i) fv[i] -= lr * grad_fv[i];
        if (cfg.tracer_weight != 0.0)
          for (std::size_t i = 0; i < d; ++i) ft[i] -= lr * grad_ft[i];
        if (pair_loss) pair_loss->push_back(loss);
      }
    }
  }
}

}  // namespace

EmbeddingModel train_embeddings(const WalkCorpus& corpus,
                                const std::vector<std::vector<int>>& assignments,
                                std::size_t vertex_count, int tracer_count,
                                const EmbedConfig& config, TrainStats* stats) {
  config.validate();
  if (corpus.paths.size() != assignments.size())
    throw std::runtime_error("train_embeddings: assignments do not match the corpus");
  for (std::size_t p = 0; p < corpus.paths.size(); ++p) {
    if (assignments[p].size() != corpus.paths[p].size())
      throw std::runtime_error("train_embeddings: assignments do not match the corpus");
    for (int k : assignments[p])
      if (k < 0 || k >= tracer_count)
        throw std::runtime_error("train_embeddings: tracer assignment out of range");
  }

  EmbeddingModel model;
  model.vertex_count = vertex_count;
  model.tracer_count = tracer_count;
  model.dimension = config.dimension;
  std::size_t d = static_cast<std::size_t>(config.dimension);
  model.input.resize(model.input_rows() * d);
  model.output.assign(vertex_count * d, 0.0);
  Rng init(derive_seed(config.seed, hash_label("init")));
  for (double& x : model.input) x = (init.next_double() - 0.5) / static_cast<double>(d);
  model.noise = build_noise(corpus, vertex_count, config.noise_exponent);

  if (config.epochs == 0) {
    if (stats) *stats = {};
    return model;
  }

  AliasTable alias(model.noise);
  TrainContext ctx;
  ctx.corpus = &corpus;
  ctx.assignments = &assignments;
  ctx.config = &config;
  ctx.model = &model;
  ctx.alias = &alias;
  ctx.token_offset.resize(corpus.paths.size());
  std::size_t running = 0;
  for (std::size_t p = 0; p < corpus.paths.size(); ++p) {
    ctx.token_offset[p] = running;
    running += corpus.paths[p].size();
  }
  ctx.total_tokens = running;

  std::vector<double> pair_loss;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.deterministic || config.threads == 1) {
      train_range(ctx, epoch, 0, corpus.paths.size(), stats ? &pair_loss : nullptr);
      continue;
    }
    std::size_t shard = (corpus.paths.size() + config.threads - 1) / config.threads;
    std::vector<std::thread> workers;
    for (int w = 0; w < config.threads; ++w) {
      std::size_t lo = std::min(corpus.paths.size(), shard * static_cast<std::size_t>(w));
      std::size_t hi = std::min(corpus.paths.size(), lo + shard);
      if (lo >= hi) break;
      workers.emplace_back([&ctx, epoch, lo, hi] { train_range(ctx, epoch, lo, hi, nullptr); });
    }
    for (auto& w : workers) w.join();
  }

  if (stats) {
    *stats = {};
    stats->pair_updates = pair_loss.size();
    std::size_t decile = pair_loss.size() / 10;
    if (decile > 0) {
      double first = 0.0, last = 0.0;
      for (std::size_t i = 0; i < decile; ++i) first += pair_loss[i];
      for (std::size_t i = pair_loss.size() - decile; i < pair_loss.size(); ++i)
        last += pair_loss[i];
      stats->first_decile_loss = first / static_cast<double>(decile);
      stats->last_decile_loss = last / static_cast<double>(decile);
    }
  }
  return model;
}

void save_embeddings(const EmbeddingModel& model, const HetGraph& graph,
                     const std::filesystem::path& file) {
  if (graph.vertex_count() != model.vertex_count)
    throw std::runtime_error("save_embeddings: graph does not match the model");
  auto out = io::open_output(file);
  out << model.input_rows() << ' ' << model.dimension << '\n';
  for (std::size_t row = 0; row < model.input_rows(); ++row) {
    if (row < model.vertex_count) {
      const std::string& key = graph.key_of(static_cast<VertexId>(row));
      // "T<digits>" is reserved for tracer rows; a vertex with such a key
      // would make the file ambiguous.
      if (key.size() > 1 && key[0] == 'T' &&
          key.find_first_not_of("0123456789", 1) == std::string::npos)
        throw std::runtime_error("save_embeddings: vertex key collides with tracer ids: " + key);
      out << key;
    } else
      out << 'T' << (row - model.vertex_count);
    for (double x : model.f(row)) out << ' ' << io::format_double(x);
    out << '\n';
  }
}

EmbeddingModel load_embeddings(const HetGraph& graph, const std::filesystem::path& file) {
  EmbeddingModel model;
  model.vertex_count = graph.vertex_count();
  std::size_t rows = 0;
  std::size_t seen = 0;
  std::vector<bool> filled;
  io::for_each_data_line(file, [&](std::string_view line, std::size_t lineno) {
    if (rows == 0) {
      auto cols = io::split(line, ' ');
      if (cols.size() != 2) io::fail_at(file, lineno, "header must be: rows dimension");
      rows = static_cast<std::size_t>(io::parse_long(cols[0], file, lineno));
      model.dimension = static_cast<int>(io::parse_long(cols[1], file, lineno));
      if (rows < model.vertex_count)
        io::fail_at(file, lineno, "fewer rows than graph vertexes");
      if (model.dimension < 1) io::fail_at(file, lineno, "dimension must be >= 1");
      model.tracer_count = static_cast<int>(rows - model.vertex_count);
      model.input.assign(rows * static_cast<std::size_t>(model.dimension), 0.0);
      model.output.assign(model.vertex_count * static_cast<std::size_t>(model.dimension), 0.0);
      filled.assign(rows, false);
      return;
    }
    auto cols = io::split(line, ' ');
    if (cols.size() != static_cast<std::size_t>(model.dimension) + 1)
      io::fail_at(file, lineno, "bad embedding row width");
    std::string id(cols[0]);
    std::size_t row;
    if (id.size() > 1 && id[0] == 'T' &&
        id.find_first_not_of("0123456789", 1) == std::string::npos) {
      std::size_t t = static_cast<std::size_t>(io::parse_long(id.substr(1), file, lineno));
      if (t >= static_cast<std::size_t>(model.tracer_count))
        io::fail_at(file, lineno, "tracer row out of range: " + id);
      row = model.vertex_count + t;
    } else {
      VertexId v = graph.find(id);
      if (v == kNoVertex) io::fail_at(file, lineno, "unknown vertex id: " + id);
      row = static_cast<std::size_t>(v);
    }
    if (filled[row]) io::fail_at(file, lineno, "duplicate embedding row: " + id);
    filled[row] = true;
    auto dst = model.f(row);
    for (std::size_t i = 0; i < dst.size(); ++i)
      dst[i] = io::parse_double(cols[i + 1], file, lineno);
    ++seen;
  });
  if (rows == 0) throw std::runtime_error(file.string() + ": empty embedding file");
  if (seen != rows) throw std::runtime_error(file.string() + ": missing embedding rows");
  return model;
}

}  // namespace thgrl
