#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "thgrl/detect.hpp"
#include "thgrl/graph.hpp"
#include "thgrl/represent.hpp"
#include "thgrl/rng.hpp"

using namespace thgrl;
using testutil::TempDir;

namespace {

struct Toy {
  HetGraph graph;
  DatasetSplit split;
  std::vector<VertexId> aspects;
};

// reviews[i] = {words, gold aspects, is_test}; words/aspects by index.
struct ReviewSpec {
  std::vector<std::pair<int, double>> words;  // (word index, con weight)
  std::vector<int> gold;
  bool test = false;
};

Toy make_toy(int n_words, int n_aspects, const std::vector<ReviewSpec>& reviews) {
  GraphBuilder b(Schema::standard());
  for (std::size_t i = 0; i < reviews.size(); ++i)
    b.add_vertex("r" + std::to_string(i), "Review");
  for (int w = 0; w < n_words; ++w) b.add_vertex("w" + std::to_string(w), "Word");
  for (int a = 0; a < n_aspects; ++a) b.add_vertex("a" + std::to_string(a), "Aspect");
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    const std::string rk = "r" + std::to_string(i);
    for (auto [w, wt] : reviews[i].words)
      b.add_edge(rk, "w" + std::to_string(w), "con", wt);
    for (int a : reviews[i].gold) b.add_edge(rk, "a" + std::to_string(a), "men");
  }
  Toy toy{b.build(), {}, {}};
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    VertexId r = toy.graph.require("r" + std::to_string(i));
    (reviews[i].test ? toy.split.test : toy.split.train).push_back(r);
    std::vector<VertexId> gold;
    for (int a : reviews[i].gold) gold.push_back(toy.graph.require("a" + std::to_string(a)));
    std::sort(gold.begin(), gold.end());
    toy.split.gold[r] = gold;
  }
  std::sort(toy.split.train.begin(), toy.split.train.end());
  std::sort(toy.split.test.begin(), toy.split.test.end());
  toy.split.rebuild_index();
  for (int a = 0; a < n_aspects; ++a)
    toy.aspects.push_back(toy.graph.require("a" + std::to_string(a)));
  return toy;
}

double oracle_f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  double p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  double r = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

}  // namespace

TEST_SUITE("detect") {

TEST_CASE("one train review with one word featurizes to a unit column") {
  Toy toy = make_toy(1, 1, {{{{0, 1.0}}, {0}, false}});
  DetectConfig cfg;
  auto [train, test] = build_features(toy.graph, nullptr, toy.split, cfg);
  CHECK(train.spec.vocabulary == std::vector<VertexId>{toy.graph.require("w0")});
  // idf = ln((1+1)/(1+1)) + 1
  CHECK(train.spec.idf[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(train.spec.width() == 1);
  REQUIRE(train.rows.size() == 1);
  CHECK(train.rows[0][0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(test.rows.empty());
}

TEST_CASE("vocabulary and idf come from TRAIN reviews only") {
  Toy toy = make_toy(3, 1,
                     {{{{0, 1.0}, {1, 2.0}}, {0}, false},
                      {{{1, 1.0}}, {0}, false},
                      {{{2, 5.0}}, {0}, true}});  // w2 appears only in TEST
  DetectConfig cfg;
  auto [train, test] = build_features(toy.graph, nullptr, toy.split, cfg);
  std::vector<VertexId> expect = {toy.graph.require("w0"), toy.graph.require("w1")};
  CHECK(train.spec.vocabulary == expect);

  // df(w0)=1, df(w1)=2 over N=2 train reviews
  double idf0 = std::log(3.0 / 2.0) + 1.0;
  double idf1 = std::log(3.0 / 3.0) + 1.0;
  CHECK(train.spec.idf[0] == doctest::Approx(idf0).epsilon(1e-12));
  CHECK(train.spec.idf[1] == doctest::Approx(idf1).epsilon(1e-12));

  // r0: tf-idf = (1*idf0, 2*idf1), then L2
  double x0 = 1.0 * idf0, x1 = 2.0 * idf1;
  double norm = std::sqrt(x0 * x0 + x1 * x1);
  CHECK(train.rows[0][0] == doctest::Approx(x0 / norm).epsilon(1e-12));
  CHECK(train.rows[0][1] == doctest::Approx(x1 / norm).epsilon(1e-12));

  // the TEST review has no in-vocabulary words: all-zero text block
  REQUIRE(test.rows.size() == 1);
  CHECK(test.rows[0][0] == 0.0);
  CHECK(test.rows[0][1] == 0.0);
}

TEST_CASE("the embedding block is appended and normalized independently") {
  Toy toy = make_toy(2, 1,
                     {{{{0, 1.0}}, {0}, false},
                      {{{0, 1.0}, {1, 1.0}}, {0}, true}});
  // hand table, width 2: word rows (3,4) and (0,0)
  IntegratedTable table;
  table.vertex_count = toy.graph.vertex_count();
  table.width = 2;
  table.integrated = false;
  table.rows.assign(table.vertex_count * 2, 0.0);
  VertexId w0 = toy.graph.require("w0");
  table.rows[w0 * 2] = 3.0;
  table.rows[w0 * 2 + 1] = 4.0;

  DetectConfig cfg;
  auto [train, test] = build_features(toy.graph, &table, toy.split, cfg);
  CHECK(train.spec.width() == 1 + 2);
  CHECK(train.spec.embedding_width == 2);
  // r0 pools only w0 -> (3,4), normalized to (0.6, 0.8)
  CHECK(train.rows[0][1] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(train.rows[0][2] == doctest::Approx(0.8).epsilon(1e-12));
  // r1 pools w0 and the zero row -> (1.5,2), same direction
  CHECK(test.rows[0][1] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(test.rows[0][2] == doctest::Approx(0.8).epsilon(1e-12));

  SUBCASE("normalization can be turned off") {
    cfg.normalize_embedding = false;
    auto [raw_train, raw_test] = build_features(toy.graph, &table, toy.split, cfg);
    CHECK(raw_train.rows[0][1] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(raw_train.rows[0][2] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(raw_test.rows[0][1] == doctest::Approx(1.5).epsilon(1e-12));
  }
}

TEST_CASE("a separable toy trains to zero violations and perfect scores") {
  // aspect 0 <-> word 0, aspect 1 <-> word 1; 6 train + 4 test per aspect
  std::vector<ReviewSpec> specs;
  for (int i = 0; i < 10; ++i) specs.push_back({{{0, 1.0}, {2, 1.0}}, {0}, i >= 6});
  for (int i = 0; i < 10; ++i) specs.push_back({{{1, 1.0}, {2, 1.0}}, {1}, i >= 6});
  Toy toy = make_toy(3, 2, specs);
  DetectConfig cfg;
  auto [train, test] = build_features(toy.graph, nullptr, toy.split, cfg);
  DetectorModel model = train_ovr(train, toy.split, toy.aspects, cfg);
  REQUIRE(model.classifiers.size() == 2);

  for (std::size_t i = 0; i < train.reviews.size(); ++i) {
    auto gold = toy.split.gold_of(train.reviews[i]);
    for (const AspectClassifier& clf : model.classifiers) {
      bool positive = std::binary_search(gold.begin(), gold.end(), clf.aspect);
      double margin = decision_margin(clf, train.rows[i]);
      CHECK(margin * (positive ? 1.0 : -1.0) > 0.0);
    }
  }

  auto preds = predict(model, test);
  EvalReport report = evaluate(test.reviews, preds, toy.split, toy.aspects);
  CHECK(report.micro_f1 == 1.0);
  CHECK(report.macro_f1 == 1.0);
  CHECK(report.fp == 0);
  CHECK(report.fn == 0);

  SUBCASE("training is deterministic in the seed") {
    DetectorModel again = train_ovr(train, toy.split, toy.aspects, cfg);
    for (std::size_t c = 0; c < model.classifiers.size(); ++c) {
      CHECK(again.classifiers[c].weights == model.classifiers[c].weights);
      CHECK(again.classifiers[c].bias == model.classifiers[c].bias);
    }
  }
}

TEST_CASE("an aspect with no positive examples is untrainable and never predicted") {
  Toy toy = make_toy(2, 2,
                     {{{{0, 1.0}}, {0}, false},
                      {{{1, 1.0}}, {0}, false},
                      {{{0, 1.0}}, {0, 1}, true}});  // aspect 1 only in TEST gold
  DetectConfig cfg;
  auto [train, test] = build_features(toy.graph, nullptr, toy.split, cfg);
  DetectorModel model = train_ovr(train, toy.split, toy.aspects, cfg);
  const AspectClassifier& clf = model.classifiers[1];
  CHECK(clf.aspect == toy.graph.require("a1"));
  CHECK(!clf.trainable);
  auto preds = predict(model, test);
  REQUIRE(preds.size() == 1);
  CHECK(!std::binary_search(preds[0].begin(), preds[0].end(), toy.graph.require("a1")));
}

TEST_CASE("a zero margin is not a detection") {
  DetectorModel model;
  model.spec.embedding_width = 2;
  AspectClassifier clf;
  clf.aspect = 7;
  clf.weights = {0.0, 0.0};
  clf.bias = 0.0;
  model.classifiers.push_back(clf);
  FeatureMatrix fm;
  fm.spec = model.spec;
  fm.reviews = {0};
  fm.rows = {{1.0, 1.0}};
  CHECK(decision_margin(clf, fm.rows[0]) == 0.0);
  auto preds = predict(model, fm);
  CHECK(preds[0].empty());
}

TEST_CASE("the three-review worked example scores micro 0.75 and macro 11/15") {
  Toy toy = make_toy(1, 2,
                     {{{{0, 1.0}}, {0}, true},
                      {{{0, 1.0}}, {1}, true},
                      {{{0, 1.0}}, {0, 1}, true}});
  VertexId a = toy.graph.require("a0"), b = toy.graph.require("a1");
  std::vector<VertexId> reviews = {toy.graph.require("r0"), toy.graph.require("r1"),
                                   toy.graph.require("r2")};
  std::vector<std::vector<VertexId>> preds = {{a}, {a}, {a, b}};
  for (auto& p : preds) std::sort(p.begin(), p.end());
  EvalReport report = evaluate(reviews, preds, toy.split, toy.aspects);
  CHECK(report.tp == 3);
  CHECK(report.fp == 1);
  CHECK(report.fn == 1);
  CHECK(report.micro_f1 == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(report.macro_f1 == doctest::Approx(11.0 / 15.0).epsilon(1e-12));
  REQUIRE(report.per_aspect.size() == 2);
  CHECK(report.per_aspect[0].f1 == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(report.per_aspect[1].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(report.per_aspect[0].support == 2);

  SUBCASE("empty predictions score zero micro-F1") {
    std::vector<std::vector<VertexId>> none(3);
    EvalReport zero = evaluate(reviews, none, toy.split, toy.aspects);
    CHECK(zero.micro_f1 == 0.0);
    CHECK(zero.macro_f1 == 0.0);
    CHECK(zero.tp == 0);
    CHECK(zero.fn == 4);
  }
}

TEST_CASE("metrics match a brute force contingency over random prediction sets") {
  const int kAspects = 5, kReviews = 40, kTrials = 50;
  std::vector<ReviewSpec> specs;
  Rng gold_rng(77);
  for (int i = 0; i < kReviews; ++i) {
    ReviewSpec s;
    s.words = {{0, 1.0}};
    for (int a = 0; a < kAspects; ++a)
      if (gold_rng.next_double() < 0.4) s.gold.push_back(a);
    s.test = true;
    specs.push_back(s);
  }
  Toy toy = make_toy(1, kAspects, specs);

  Rng rng(123);
  for (int trial = 0; trial < kTrials; ++trial) {
    std::vector<std::vector<VertexId>> preds(kReviews);
    for (auto& p : preds) {
      for (VertexId a : toy.aspects)
        if (rng.next_double() < 0.4) p.push_back(a);
    }
    EvalReport report = evaluate(toy.split.test, preds, toy.split, toy.aspects);

    std::size_t tp = 0, fp = 0, fn = 0;
    double macro_sum = 0.0;
    for (VertexId a : toy.aspects) {
      std::size_t atp = 0, afp = 0, afn = 0;
      for (int i = 0; i < kReviews; ++i) {
        auto gold = toy.split.gold_of(toy.split.test[i]);
        bool in_gold = std::binary_search(gold.begin(), gold.end(), a);
        bool in_pred = std::binary_search(preds[i].begin(), preds[i].end(), a);
        if (in_gold && in_pred) ++atp;
        if (!in_gold && in_pred) ++afp;
        if (in_gold && !in_pred) ++afn;
      }
      macro_sum += oracle_f1(atp, afp, afn);
      tp += atp, fp += afp, fn += afn;
    }
    CHECK(report.tp == tp);
    CHECK(report.fp == fp);
    CHECK(report.fn == fn);
    CHECK(report.micro_f1 == oracle_f1(tp, fp, fn));
    CHECK(report.macro_f1 == macro_sum / kAspects);
  }
}

TEST_CASE("detector, prediction, and report files round trip") {
  TempDir tmp;
  std::vector<ReviewSpec> specs;
  for (int i = 0; i < 8; ++i) specs.push_back({{{i % 3, 1.0 + i}, {3, 1.0}}, {i % 2}, i >= 5});
  Toy toy = make_toy(4, 2, specs);
  DetectConfig cfg;
  cfg.epochs = 12;
  auto [train, test] = build_features(toy.graph, nullptr, toy.split, cfg);
  DetectorModel model = train_ovr(train, toy.split, toy.aspects, cfg);

  save_detector(model, toy.graph, tmp.file("det.tsv"));
  DetectorModel back = load_detector(toy.graph, tmp.file("det.tsv"));
  CHECK(back.spec.vocabulary == model.spec.vocabulary);
  CHECK(back.spec.idf == model.spec.idf);
  CHECK(back.spec.embedding_width == model.spec.embedding_width);
  REQUIRE(back.classifiers.size() == model.classifiers.size());
  for (std::size_t c = 0; c < model.classifiers.size(); ++c) {
    CHECK(back.classifiers[c].aspect == model.classifiers[c].aspect);
    CHECK(back.classifiers[c].weights == model.classifiers[c].weights);
    CHECK(back.classifiers[c].bias == model.classifiers[c].bias);
    CHECK(back.classifiers[c].trainable == model.classifiers[c].trainable);
  }

  auto preds = predict(model, test);
  preds[0].clear();  // force an empty set through the format
  save_predictions(toy.graph, test.reviews, preds, tmp.file("pred.tsv"));
  auto [rv, pv] = load_predictions(toy.graph, tmp.file("pred.tsv"));
  CHECK(rv == test.reviews);
  CHECK(pv == preds);

  EvalReport report = evaluate(test.reviews, preds, toy.split, toy.aspects);
  save_report(report, toy.graph, tmp.file("report.tsv"));
  EvalReport back_report = load_report(toy.graph, tmp.file("report.tsv"));
  CHECK(back_report.micro_f1 == report.micro_f1);
  CHECK(back_report.macro_f1 == report.macro_f1);
  CHECK(back_report.tp == report.tp);
  REQUIRE(back_report.per_aspect.size() == report.per_aspect.size());
  for (std::size_t i = 0; i < report.per_aspect.size(); ++i) {
    CHECK(back_report.per_aspect[i].aspect == report.per_aspect[i].aspect);
    CHECK(back_report.per_aspect[i].f1 == report.per_aspect[i].f1);
  }
}

TEST_CASE("config validation rejects bad values") {
  DetectConfig cfg;
  cfg.lambda = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.epochs = 0;
  CHECK_THROWS(cfg.validate());
  CHECK_NOTHROW(DetectConfig{}.validate());
}

}  // TEST_SUITE
