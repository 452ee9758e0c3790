#include "thgrl/detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "thgrl/io_util.hpp"
#include "thgrl/rng.hpp"

namespace thgrl {

void DetectConfig::validate() const {
  if (lambda <= 0.0) throw std::runtime_error("regularization strength must be positive");
  if (epochs < 1) throw std::runtime_error("detector epochs must be >= 1");
}

namespace {

void l2_normalize(double* x, std::size_t n) {
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) norm += x[i] * x[i];
  if (norm <= 0.0) return;
  norm = std::sqrt(norm);
  for (std::size_t i = 0; i < n; ++i) x[i] /= norm;
}

std::vector<double> featurize(const HetGraph& graph, const IntegratedTable* table,
                              const FeatureSpec& spec,
                              const std::unordered_map<VertexId, std::size_t>& vocab_index,
                              RelationId con, VertexId review) {
  std::vector<double> row(spec.width(), 0.0);
  const HetGraph::Adjacency* words = graph.adjacency(review, con);
  if (words)
    for (std::size_t i = 0; i < words->nbr.size(); ++i) {
      auto it = vocab_index.find(words->nbr[i]);
      if (it == vocab_index.end()) continue;  // word unseen in training
      row[it->second] = words->weight[i] * spec.idf[it->second];
    }
  l2_normalize(row.data(), spec.vocabulary.size());
  if (table) {
    ReviewVector pooled = pool_review(graph, *table, review);
    std::copy(pooled.values.begin(), pooled.values.end(), row.begin() + spec.vocabulary.size());
    if (spec.normalize_embedding)
      l2_normalize(row.data() + spec.vocabulary.size(), spec.embedding_width);
  }
  return row;
}

std::unordered_map<VertexId, std::size_t> index_vocabulary(const FeatureSpec& spec) {
  std::unordered_map<VertexId, std::size_t> index;
  index.reserve(spec.vocabulary.size());
  for (std::size_t i = 0; i < spec.vocabulary.size(); ++i) index.emplace(spec.vocabulary[i], i);
  return index;
}

}  // namespace

std::pair<FeatureMatrix, FeatureMatrix> build_features(const HetGraph& graph,
                                                       const IntegratedTable* table,
                                                       const DatasetSplit& split,
                                                       const DetectConfig& config) {
  if (split.train.empty()) throw std::runtime_error("build_features: empty training set");
  RelationId con = graph.schema().relation("con");
  if (con == kNoRelation) throw std::runtime_error("build_features: schema has no con relation");

  // Document frequency over TRAIN reviews only.
  std::map<VertexId, std::size_t> df;
  for (VertexId r : split.train) {
    const HetGraph::Adjacency* words = graph.adjacency(r, con);
    if (!words) continue;
    for (VertexId w : words->nbr) df[w]++;
  }

  FeatureSpec spec;
  spec.normalize_embedding = config.normalize_embedding;
  spec.embedding_width = table ? static_cast<std::size_t>(table->width) : 0;
  spec.vocabulary.reserve(df.size());
  spec.idf.reserve(df.size());
  double n_train = static_cast<double>(split.train.size());
  for (const auto& [w, count] : df) {
    spec.vocabulary.push_back(w);
    spec.idf.push_back(std::log((n_train + 1.0) / (static_cast<double>(count) + 1.0)) + 1.0);
  }

  auto vocab_index = index_vocabulary(spec);
  FeatureMatrix train, test;
  train.spec = spec;
  test.spec = spec;
  train.reviews = split.train;
  test.reviews = split.test;
  train.rows.reserve(split.train.size());
  for (VertexId r : split.train)
    train.rows.push_back(featurize(graph, table, spec, vocab_index, con, r));
  test.rows.reserve(split.test.size());
  for (VertexId r : split.test)
    test.rows.push_back(featurize(graph, table, spec, vocab_index, con, r));
  return {std::move(train), std::move(test)};
}

std::vector<double> featurize_review(const HetGraph& graph, const IntegratedTable* table,
                                     const FeatureSpec& spec, VertexId review) {
  RelationId con = graph.schema().relation("con");
  if (con == kNoRelation) throw std::runtime_error("featurize_review: schema has no con relation");
  auto vocab_index = index_vocabulary(spec);
  return featurize(graph, table, spec, vocab_index, con, review);
}

DetectorModel train_ovr(const FeatureMatrix& train, const DatasetSplit& split,
                        const std::vector<VertexId>& aspects, const DetectConfig& config) {
  config.validate();
  if (train.rows.empty()) throw std::runtime_error("train_ovr: no training rows");
  if (aspects.empty()) throw std::runtime_error("train_ovr: no aspects to classify");
  std::size_t width = train.spec.width();

  DetectorModel model;
  model.spec = train.spec;
  model.lambda = config.lambda;
  model.epochs = config.epochs;
  model.seed = config.seed;
  model.classifiers.resize(aspects.size());

  for (std::size_t a = 0; a < aspects.size(); ++a) {
    AspectClassifier& clf = model.classifiers[a];
    clf.aspect = aspects[a];
    clf.weights.assign(width, 0.0);
    clf.bias = 0.0;

    std::vector<double> y(train.rows.size(), -1.0);
    std::size_t positives = 0;
    for (std::size_t i = 0; i < train.reviews.size(); ++i) {
      auto gold = split.gold_of(train.reviews[i]);
      if (std::binary_search(gold.begin(), gold.end(), aspects[a])) {
        y[i] = 1.0;
        positives++;
      }
    }
    if (positives == 0) {
      std::fprintf(stderr, "warning: aspect with no positive training examples, index %zu;"
                   " it will never be predicted\n", a);
      clf.trainable = false;
      continue;
    }

    // Pegasos-style subgradient steps with the rate 1 / (lambda * t + 1), so
    // the first steps stay bounded; the bias is not regularized.
    std::vector<std::size_t> order(train.rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    double step = 0.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      Rng rng(derive_seed(config.seed, a, static_cast<std::uint64_t>(epoch)));
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.next_index(i))]);
      for (std::size_t i : order) {
        step += 1.0;
        double lr = 1.0 / (config.lambda * step + 1.0);
        const std::vector<double>& x = train.rows[i];
        double margin = clf.bias;
        for (std::size_t j = 0; j < width; ++j) margin += clf.weights[j] * x[j];
        double shrink = 1.0 - lr * config.lambda;
        if (y[i] * margin < 1.0) {
          double coef = lr * y[i];
          for (std::size_t j = 0; j < width; ++j)
            clf.weights[j] = shrink * clf.weights[j] + coef * x[j];
          clf.bias += coef;
        } else {
          for (std::size_t j = 0; j < width; ++j) clf.weights[j] *= shrink;
        }
      }
    }
  }
  return model;
}

double decision_margin(const AspectClassifier& clf, const std::vector<double>& features) {
  if (features.size() != clf.weights.size())
    throw std::runtime_error("decision_margin: feature width mismatch");
  double margin = clf.bias;
  for (std::size_t j = 0; j < features.size(); ++j) margin += clf.weights[j] * features[j];
  return margin;
}

std::vector<std::vector<VertexId>> predict(const DetectorModel& model,
                                           const FeatureMatrix& features) {
  if (features.spec.width() != model.spec.width())
    throw std::runtime_error("predict: feature width mismatch");
  std::vector<std::vector<VertexId>> out(features.rows.size());
  for (std::size_t i = 0; i < features.rows.size(); ++i) {
    for (const AspectClassifier& clf : model.classifiers) {
      if (!clf.trainable) continue;
      if (decision_margin(clf, features.rows[i]) > 0.0) out[i].push_back(clf.aspect);
    }
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

EvalReport evaluate(const std::vector<VertexId>& reviews,
                    const std::vector<std::vector<VertexId>>& predictions,
                    const DatasetSplit& split, const std::vector<VertexId>& aspects) {
  if (reviews.size() != predictions.size())
    throw std::runtime_error("evaluate: one prediction set per review required");
  EvalReport report;
  report.per_aspect.resize(aspects.size());
  std::unordered_map<VertexId, std::size_t> aspect_index;
  for (std::size_t a = 0; a < aspects.size(); ++a) {
    report.per_aspect[a].aspect = aspects[a];
    aspect_index.emplace(aspects[a], a);
  }

  for (std::size_t i = 0; i < reviews.size(); ++i) {
    auto gold_all = split.gold_of(reviews[i]);
    std::vector<VertexId> gold;  // restricted to the scored aspects
    for (VertexId g : gold_all)
      if (aspect_index.count(g)) gold.push_back(g);
    for (VertexId p : predictions[i]) {
      auto it = aspect_index.find(p);
      if (it == aspect_index.end())
        throw std::runtime_error("evaluate: prediction outside the aspect list");
      if (std::binary_search(gold.begin(), gold.end(), p))
        report.per_aspect[it->second].tp++;
      else
        report.per_aspect[it->second].fp++;
    }
    for (VertexId g : gold) {
      if (!std::binary_search(predictions[i].begin(), predictions[i].end(), g))
        report.per_aspect[aspect_index[g]].fn++;
      report.per_aspect[aspect_index[g]].support++;
    }
  }

  double macro_sum = 0.0;
  for (AspectMetrics& m : report.per_aspect) {
    report.tp += m.tp;
    report.fp += m.fp;
    report.fn += m.fn;
    m.precision = m.tp + m.fp > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
    m.recall = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    macro_sum += m.f1;
  }
  report.macro_f1 = aspects.empty() ? 0.0 : macro_sum / static_cast<double>(aspects.size());
  double micro_p =
      report.tp + report.fp > 0 ? static_cast<double>(report.tp) / (report.tp + report.fp) : 0.0;
  double micro_r =
      report.tp + report.fn > 0 ? static_cast<double>(report.tp) / (report.tp + report.fn) : 0.0;
  report.micro_f1 =
      micro_p + micro_r > 0.0 ? 2.0 * micro_p * micro_r / (micro_p + micro_r) : 0.0;
  return report;
}

void save_detector(const DetectorModel& model, const HetGraph& graph,
                   const std::filesystem::path& file) {
  auto out = io::open_output(file);
  out << "# detector: vocab size, embed width, normalize, lambda, epochs, seed;"
         " idf rows; aspect rows\n";
  out << model.spec.vocabulary.size() << '\t' << model.spec.embedding_width << '\t'
      << (model.spec.normalize_embedding ? 1 : 0) << '\t' << io::format_double(model.lambda)
      << '\t' << model.epochs << '\t' << model.seed << '\n';
  for (std::size_t i = 0; i < model.spec.vocabulary.size(); ++i)
    out << graph.key_of(model.spec.vocabulary[i]) << '\t' << io::format_double(model.spec.idf[i])
        << '\n';
  for (const AspectClassifier& clf : model.classifiers) {
    out << graph.key_of(clf.aspect) << '\t' << (clf.trainable ? 1 : 0) << '\t'
        << io::format_double(clf.bias);
    for (double w : clf.weights) out << '\t' << io::format_double(w);
    out << '\n';
  }
}

DetectorModel load_detector(const HetGraph& graph, const std::filesystem::path& file) {
  DetectorModel model;
  std::size_t vocab_size = 0;
  std::size_t row = 0;
  io::for_each_data_line(file, [&](std::string_view line, std::size_t lineno) {
    auto cols = io::split(line, '\t');
    if (row == 0) {
      if (cols.size() != 6) io::fail_at(file, lineno, "bad detector header");
      vocab_size = static_cast<std::size_t>(io::parse_long(cols[0], file, lineno));
      model.spec.embedding_width = static_cast<std::size_t>(io::parse_long(cols[1], file, lineno));
      model.spec.normalize_embedding = io::parse_long(cols[2], file, lineno) != 0;
      model.lambda = io::parse_double(cols[3], file, lineno);
      model.epochs = static_cast<int>(io::parse_long(cols[4], file, lineno));
      model.seed = static_cast<std::uint64_t>(io::parse_long(cols[5], file, lineno));
      model.spec.vocabulary.reserve(vocab_size);
      model.spec.idf.reserve(vocab_size);
    } else if (row <= vocab_size) {
      if (cols.size() != 2) io::fail_at(file, lineno, "bad idf row");
      VertexId w = graph.find(std::string(cols[0]));
      if (w == kNoVertex) io::fail_at(file, lineno, "unknown word: " + std::string(cols[0]));
      model.spec.vocabulary.push_back(w);
      model.spec.idf.push_back(io::parse_double(cols[1], file, lineno));
    } else {
      if (cols.size() != model.spec.width() + 3) io::fail_at(file, lineno, "bad aspect row");
      AspectClassifier clf;
      clf.aspect = graph.find(std::string(cols[0]));
      if (clf.aspect == kNoVertex)
        io::fail_at(file, lineno, "unknown aspect: " + std::string(cols[0]));
      clf.trainable = io::parse_long(cols[1], file, lineno) != 0;
      clf.bias = io::parse_double(cols[2], file, lineno);
      clf.weights.resize(model.spec.width());
      for (std::size_t j = 0; j < clf.weights.size(); ++j)
        clf.weights[j] = io::parse_double(cols[j + 3], file, lineno);
      model.classifiers.push_back(std::move(clf));
    }
    ++row;
  });
  if (row == 0) throw std::runtime_error(file.string() + ": empty detector file");
  if (model.spec.vocabulary.size() != vocab_size)
    throw std::runtime_error(file.string() + ": truncated detector file");
  return model;
}

void save_predictions(const HetGraph& graph, const std::vector<VertexId>& reviews,
                      const std::vector<std::vector<VertexId>>& predictions,
                      const std::filesystem::path& file) {
  if (reviews.size() != predictions.size())
    throw std::runtime_error("save_predictions: misaligned predictions");
  auto out = io::open_output(file);
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    out << graph.key_of(reviews[i]) << '\t';
    for (std::size_t j = 0; j < predictions[i].size(); ++j) {
      if (j) out << ',';
      out << graph.key_of(predictions[i][j]);
    }
    out << '\n';
  }
}

std::pair<std::vector<VertexId>, std::vector<std::vector<VertexId>>> load_predictions(
    const HetGraph& graph, const std::filesystem::path& file) {
  std::vector<VertexId> reviews;
  std::vector<std::vector<VertexId>> predictions;
  io::for_each_data_line(file, [&](std::string_view line, std::size_t lineno) {
    auto cols = io::split(line, '\t');
    if (cols.size() != 2) io::fail_at(file, lineno, "expected 2 columns: review, aspects");
    VertexId r = graph.find(std::string(cols[0]));
    if (r == kNoVertex) io::fail_at(file, lineno, "unknown review id: " + std::string(cols[0]));
    std::vector<VertexId> aspects;
    for (auto tok : io::split(cols[1], ',')) {
      if (tok.empty()) continue;
      VertexId a = graph.find(std::string(tok));
      if (a == kNoVertex) io::fail_at(file, lineno, "unknown aspect id: " + std::string(tok));
      aspects.push_back(a);
    }
    std::sort(aspects.begin(), aspects.end());
    reviews.push_back(r);
    predictions.push_back(std::move(aspects));
  });
  return {std::move(reviews), std::move(predictions)};
}

void save_report(const EvalReport& report, const HetGraph& graph,
                 const std::filesystem::path& file) {
  auto out = io::open_output(file);
  out << "micro_f1\t" << io::format_double(report.micro_f1) << '\n';
  out << "macro_f1\t" << io::format_double(report.macro_f1) << '\n';
  out << "tp\t" << report.tp << '\n';
  out << "fp\t" << report.fp << '\n';
  out << "fn\t" << report.fn << '\n';
  for (const AspectMetrics& m : report.per_aspect) {
    const std::string& key = graph.key_of(m.aspect);
    out << "aspect." << key << ".tp\t" << m.tp << '\n';
    out << "aspect." << key << ".fp\t" << m.fp << '\n';
    out << "aspect." << key << ".fn\t" << m.fn << '\n';
    out << "aspect." << key << ".precision\t" << io::format_double(m.precision) << '\n';
    out << "aspect." << key << ".recall\t" << io::format_double(m.recall) << '\n';
    out << "aspect." << key << ".f1\t" << io::format_double(m.f1) << '\n';
    out << "aspect." << key << ".support\t" << m.support << '\n';
  }
}

EvalReport load_report(const HetGraph& graph, const std::filesystem::path& file) {
  EvalReport report;
  std::unordered_map<VertexId, std::size_t> index;
  io::for_each_data_line(file, [&](std::string_view line, std::size_t lineno) {
    auto cols = io::split(line, '\t');
    if (cols.size() != 2) io::fail_at(file, lineno, "expected key and value");
    std::string key(cols[0]);
    if (key == "micro_f1") {
      report.micro_f1 = io::parse_double(cols[1], file, lineno);
      return;
    }
    if (key == "macro_f1") {
      report.macro_f1 = io::parse_double(cols[1], file, lineno);
      return;
    }
    if (key == "tp" || key == "fp" || key == "fn") {
      std::size_t v = static_cast<std::size_t>(io::parse_long(cols[1], file, lineno));
      (key == "tp" ? report.tp : key == "fp" ? report.fp : report.fn) = v;
      return;
    }
    if (key.rfind("aspect.", 0) != 0) io::fail_at(file, lineno, "unknown report key: " + key);
    std::size_t dot = key.rfind('.');
    std::string aspect_key = key.substr(7, dot - 7);
    std::string field = key.substr(dot + 1);
    VertexId a = graph.find(aspect_key);
    if (a == kNoVertex) io::fail_at(file, lineno, "unknown aspect: " + aspect_key);
    auto it = index.find(a);
    if (it == index.end()) {
      it = index.emplace(a, report.per_aspect.size()).first;
      report.per_aspect.push_back({});
      report.per_aspect.back().aspect = a;
    }
    AspectMetrics& m = report.per_aspect[it->second];
    if (field == "tp")
      m.tp = static_cast<std::size_t>(io::parse_long(cols[1], file, lineno));
    else if (field == "fp")
      m.fp = static_cast<std::size_t>(io::parse_long(cols[1], file, lineno));
    else if (field == "fn")
      m.fn = static_cast<std::size_t>(io::parse_long(cols[1], file, lineno));
    else if (field == "precision")
      m.precision = io::parse_double(cols[1], file, lineno);
    else if (field == "recall")
      m.recall = io::parse_double(cols[1], file, lineno);
    else if (field == "f1")
      m.f1 = io::parse_double(cols[1], file, lineno);
    else if (field == "support")
      m.support = static_cast<std::size_t>(io::parse_long(cols[1], file, lineno));
    else
      io::fail_at(file, lineno, "unknown report field: " + field);
  });
  return report;
}

}  // namespace thgrl
