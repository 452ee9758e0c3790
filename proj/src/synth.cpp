#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "thgrl/io_util.hpp"
#include "thgrl/pipeline.hpp"
#include "thgrl/rng.hpp"

namespace thgrl {

void SyntheticSpec::validate() const {
  auto positive = [](int v, const char* what) {
    if (v < 1) throw std::runtime_error(std::string(what) + " must be >= 1");
  };
  positive(specific_aspects, "specific aspect count");
  if (shared_aspects < 0) throw std::runtime_error("shared aspect count must be >= 0");
  positive(products_per_domain, "product count");
  positive(sellers_per_domain, "seller count");
  if (customers < 2) throw std::runtime_error("customer count must be >= 2");
  positive(signature_words_per_aspect, "signature pool size");
  positive(noise_words, "noise pool size");
  positive(reviews_per_domain, "review count");
  positive(words_per_review, "words per review");
  positive(cooccur_window, "co-occurrence window");
  positive(min_cooccur, "co-occurrence cutoff");
  positive(train_per_aspect, "train reviews per aspect");
  auto rate = [](double v, const char* what) {
    if (v < 0.0 || v > 1.0) throw std::runtime_error(std::string(what) + " must be in [0, 1]");
  };
  rate(customer_sharing, "customer sharing");
  rate(seller_sharing, "seller sharing");
  rate(word_sharing, "word sharing");
  rate(affinity, "affinity");
  rate(theme_strength, "theme strength");
  rate(shared_mention, "shared mention rate");
  rate(product_affinity, "product affinity");
}

namespace {

constexpr int kSource = 0;
constexpr int kTarget = 1;

int shared_part(double rate, int total) {
  int s = static_cast<int>(rate * total + 0.5);
  return std::min(s, total);
}

}  // namespace

void synthesize(const SyntheticSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, hash_label("synth")));
  GraphBuilder b(Schema::standard());
  int word_serial = 0;
  auto new_word = [&]() {
    return b.add_vertex("w" + std::to_string(word_serial++), "Word");
  };

  // Aspects: the shared ones exist once; each domain gets its own specific
  // set, and specific aspect i of both domains belongs to behavior theme i.
  std::vector<VertexId> shared_aspects_v;
  for (int i = 0; i < spec.shared_aspects; ++i)
    shared_aspects_v.push_back(b.add_vertex("a" + std::to_string(i), "Aspect"));
  std::vector<std::vector<VertexId>> specific(2);
  for (int i = 0; i < spec.specific_aspects; ++i)
    specific[kSource].push_back(b.add_vertex("as" + std::to_string(i), "Aspect"));
  for (int i = 0; i < spec.specific_aspects; ++i)
    specific[kTarget].push_back(b.add_vertex("at" + std::to_string(i), "Aspect"));

  // Word pools. Noise and per-theme signature pools overlap across domains
  // by word_sharing; shared aspects keep one pool used from both sides.
  std::vector<std::vector<VertexId>> noise_pool(2);
  int shared_noise = shared_part(spec.word_sharing, spec.noise_words);
  for (int i = 0; i < shared_noise; ++i) {
    VertexId w = new_word();
    noise_pool[kSource].push_back(w);
    noise_pool[kTarget].push_back(w);
  }
  for (int d = 0; d < 2; ++d)
    for (int i = shared_noise; i < spec.noise_words; ++i) noise_pool[d].push_back(new_word());

  std::vector<std::vector<VertexId>> shared_aspect_pool(spec.shared_aspects);
  for (int a = 0; a < spec.shared_aspects; ++a)
    for (int i = 0; i < spec.signature_words_per_aspect; ++i)
      shared_aspect_pool[a].push_back(new_word());

  std::vector<std::vector<std::vector<VertexId>>> theme_pool(
      2, std::vector<std::vector<VertexId>>(spec.specific_aspects));
  int shared_sig = shared_part(spec.word_sharing, spec.signature_words_per_aspect);
  for (int t = 0; t < spec.specific_aspects; ++t) {
    for (int i = 0; i < shared_sig; ++i) {
      VertexId w = new_word();
      theme_pool[kSource][t].push_back(w);
      theme_pool[kTarget][t].push_back(w);
    }
    for (int d = 0; d < 2; ++d)
      for (int i = shared_sig; i < spec.signature_words_per_aspect; ++i)
        theme_pool[d][t].push_back(new_word());
  }

  // Products carry a theme so purchase behavior correlates with aspects.
  std::vector<std::vector<VertexId>> products(2);
  std::vector<std::vector<std::vector<VertexId>>> products_by_theme(
      2, std::vector<std::vector<VertexId>>(spec.specific_aspects));
  for (int d = 0; d < 2; ++d)
    for (int i = 0; i < spec.products_per_domain; ++i) {
      VertexId p = b.add_vertex((d == kSource ? "ps" : "pt") + std::to_string(i), "Product");
      int theme = static_cast<int>(rng.next_index(spec.specific_aspects));
      products[d].push_back(p);
      products_by_theme[d][theme].push_back(p);
    }

  std::vector<std::vector<VertexId>> sellers(2);
  int shared_sellers = shared_part(spec.seller_sharing, spec.sellers_per_domain);
  for (int i = 0; i < shared_sellers; ++i) {
    VertexId s = b.add_vertex("sb" + std::to_string(i), "Seller");
    sellers[kSource].push_back(s);
    sellers[kTarget].push_back(s);
  }
  for (int d = 0; d < 2; ++d)
    for (int i = shared_sellers; i < spec.sellers_per_domain; ++i)
      sellers[d].push_back(b.add_vertex((d == kSource ? "ss" : "st") + std::to_string(i), "Seller"));

  // Customers carry a theme too; the shared ones are the behavioral bridge
  // between the domains.
  std::vector<std::vector<VertexId>> customers(2);
  std::unordered_map<VertexId, int> customer_theme;
  int shared_customers = shared_part(spec.customer_sharing, spec.customers);
  for (int i = 0; i < spec.customers; ++i) {
    VertexId c = b.add_vertex("c" + std::to_string(i), "Customer");
    customer_theme[c] = static_cast<int>(rng.next_index(spec.specific_aspects));
    if (i < shared_customers) {
      customers[kSource].push_back(c);
      customers[kTarget].push_back(c);
    } else {
      customers[(i - shared_customers) % 2 == 0 ? kSource : kTarget].push_back(c);
    }
  }

  struct Review {
    VertexId vertex;
    std::vector<VertexId> gold;
  };
  std::vector<Review> reviews;
  std::vector<std::vector<VertexId>> target_reviews_by_aspect(spec.specific_aspects);
  std::map<std::pair<VertexId, VertexId>, int> cooccur;

  for (int d = 0; d < 2; ++d) {
    for (int i = 0; i < spec.reviews_per_domain; ++i) {
      VertexId review =
          b.add_vertex((d == kSource ? "rs" : "rt") + std::to_string(i), "Review");
      VertexId customer = customers[d][rng.next_index(customers[d].size())];
      int theme = customer_theme.at(customer);
      VertexId seller = sellers[d][rng.next_index(sellers[d].size())];

      VertexId product;
      if (rng.next_double() < spec.product_affinity && !products_by_theme[d][theme].empty())
        product = products_by_theme[d][theme][rng.next_index(products_by_theme[d][theme].size())];
      else
        product = products[d][rng.next_index(products[d].size())];

      std::vector<VertexId> gold;
      if (rng.next_double() < spec.theme_strength) gold.push_back(specific[d][theme]);
      if (spec.shared_aspects > 0 && rng.next_double() < spec.shared_mention)
        gold.push_back(shared_aspects_v[rng.next_index(shared_aspects_v.size())]);
      if (gold.empty()) gold.push_back(specific[d][theme]);
      std::sort(gold.begin(), gold.end());
      gold.erase(std::unique(gold.begin(), gold.end()), gold.end());

      std::vector<VertexId> tokens;
      tokens.reserve(spec.words_per_review);
      for (int w = 0; w < spec.words_per_review; ++w) {
        if (rng.next_double() < spec.affinity) {
          VertexId aspect = gold[rng.next_index(gold.size())];
          const std::vector<VertexId>* pool = nullptr;
          for (int s = 0; s < spec.shared_aspects; ++s)
            if (shared_aspects_v[s] == aspect) pool = &shared_aspect_pool[s];
          if (!pool)
            for (int t = 0; t < spec.specific_aspects; ++t)
              if (specific[d][t] == aspect) pool = &theme_pool[d][t];
          tokens.push_back((*pool)[rng.next_index(pool->size())]);
        } else {
          tokens.push_back(noise_pool[d][rng.next_index(noise_pool[d].size())]);
        }
      }

      b.add_edge(customer, review, b.schema().relation("wri"));
      b.add_edge(product, review, b.schema().relation("rec"));
      b.add_edge(seller, review, b.schema().relation("get"));
      b.add_edge(customer, product, b.schema().relation("pur"));
      for (VertexId aspect : gold) b.add_edge(review, aspect, b.schema().relation("men"));
      for (VertexId w : tokens) b.add_edge(review, w, b.schema().relation("con"));
      for (std::size_t t = 0; t < tokens.size(); ++t)
        for (std::size_t u = t + 1; u < tokens.size() && u <= t + spec.cooccur_window; ++u) {
          if (tokens[t] == tokens[u]) continue;
          auto key = std::minmax(tokens[t], tokens[u]);
          cooccur[{key.first, key.second}]++;
        }

      reviews.push_back({review, gold});
      if (d == kTarget)
        for (VertexId aspect : gold)
          for (int t = 0; t < spec.specific_aspects; ++t)
            if (specific[kTarget][t] == aspect)
              target_reviews_by_aspect[t].push_back(review);
    }
  }

  RelationId coo = b.schema().relation("coo");
  for (const auto& [pair, count] : cooccur)
    if (count >= spec.min_cooccur)
      b.add_edge(pair.first, pair.second, coo, static_cast<double>(count));

  HetGraph graph = b.build();

  // Split: the first train_per_aspect target reviews of every target-specific
  // aspect are TRAIN, every other target review is TEST, source reviews stay
  // out of the split entirely.
  std::unordered_set<VertexId> train_set;
  for (int t = 0; t < spec.specific_aspects; ++t) {
    const auto& candidates = target_reviews_by_aspect[t];
    if (static_cast<int>(candidates.size()) < spec.train_per_aspect + 1)
      throw std::runtime_error(
          "infeasible synthetic spec: aspect at" + std::to_string(t) + " occurs in " +
          std::to_string(candidates.size()) + " reviews, need train_per_aspect + 1");
    for (int i = 0; i < spec.train_per_aspect; ++i) train_set.insert(candidates[i]);
  }

  std::filesystem::create_directories(out_dir);
  save_graph(graph, out_dir / "vertices.tsv", out_dir / "edges.tsv");

  auto reviews_out = io::open_output(out_dir / "reviews.tsv");
  for (const Review& r : reviews) {
    reviews_out << graph.key_of(r.vertex) << '\t';
    for (std::size_t i = 0; i < r.gold.size(); ++i) {
      if (i) reviews_out << ',';
      reviews_out << graph.key_of(r.gold[i]);
    }
    reviews_out << '\n';
  }

  auto split_out = io::open_output(out_dir / "split.tsv");
  for (const Review& r : reviews) {
    if (graph.key_of(r.vertex)[1] != 't') continue;  // target reviews only
    split_out << graph.key_of(r.vertex) << '\t'
              << (train_set.count(r.vertex) ? "TRAIN" : "TEST") << '\n';
  }

  auto aspects_out = io::open_output(out_dir / "aspects.txt");
  for (int t = 0; t < spec.specific_aspects; ++t)
    aspects_out << graph.key_of(specific[kTarget][t]) << '\n';

  auto manifest = io::open_output(out_dir / "manifest.tsv");
  manifest << "shared_aspects\t" << spec.shared_aspects << '\n'
           << "specific_aspects\t" << spec.specific_aspects << '\n'
           << "products_per_domain\t" << spec.products_per_domain << '\n'
           << "sellers_per_domain\t" << spec.sellers_per_domain << '\n'
           << "customers\t" << spec.customers << '\n'
           << "signature_words_per_aspect\t" << spec.signature_words_per_aspect << '\n'
           << "noise_words\t" << spec.noise_words << '\n'
           << "reviews_per_domain\t" << spec.reviews_per_domain << '\n'
           << "words_per_review\t" << spec.words_per_review << '\n'
           << "customer_sharing\t" << io::format_double(spec.customer_sharing) << '\n'
           << "seller_sharing\t" << io::format_double(spec.seller_sharing) << '\n'
           << "word_sharing\t" << io::format_double(spec.word_sharing) << '\n'
           << "affinity\t" << io::format_double(spec.affinity) << '\n'
           << "theme_strength\t" << io::format_double(spec.theme_strength) << '\n'
           << "shared_mention\t" << io::format_double(spec.shared_mention) << '\n'
           << "product_affinity\t" << io::format_double(spec.product_affinity) << '\n'
           << "cooccur_window\t" << spec.cooccur_window << '\n'
           << "min_cooccur\t" << spec.min_cooccur << '\n'
           << "train_per_aspect\t" << spec.train_per_aspect << '\n'
           << "seed\t" << spec.seed << '\n'
           << "vertices\t" << graph.vertex_count() << '\n'
           << "edges\t" << graph.edge_count() << '\n'
           << "train_reviews\t" << train_set.size() << '\n';
}

}  // namespace thgrl
