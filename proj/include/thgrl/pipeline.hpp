#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "thgrl/detect.hpp"
#include "thgrl/embed.hpp"
#include "thgrl/graph.hpp"
#include "thgrl/tracer.hpp"
#include "thgrl/walk.hpp"

namespace thgrl {

// DEF: hierarchical walks + integrated vertex-tracer rows. OV: same walks,
// vertex-only rows. RAN: ordinary walks, integrated rows.
enum class Variant { kDef, kOv, kRan };

Variant parse_variant(const std::string& name);
const char* variant_name(Variant v);

struct RunConfig {
  std::filesystem::path vertices_file;
  std::filesystem::path edges_file;
  std::filesystem::path reviews_file;
  std::filesystem::path split_file;
  std::filesystem::path aspects_file;
  std::filesystem::path out_dir;

  Variant variant = Variant::kDef;
  std::uint64_t seed = 1;
  bool resume = false;           // reuse artifacts already present in out_dir
  bool derive_rel_edges = true;  // add train-supported word-aspect edges after filtering

  WalkConfig walk;
  TracerConfig tracer;
  EmbedConfig embed;
  DetectConfig detect;
};

// Per-stage seeds derived from one global seed, so changing one stage's
// algorithm never shifts another stage's randomness.
std::uint64_t stage_seed(std::uint64_t global_seed, const char* stage);

// Applies the variant switch and the derived stage seeds.
RunConfig resolve(RunConfig config);

struct RunResult {
  EvalReport report;
  std::filesystem::path report_file;
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;
};

// load -> leakage filter -> walk -> tracer fit -> token assignment -> embed
// -> integrate -> features -> train -> predict -> evaluate. Every stage
// persists its artifact in out_dir; with resume set, existing artifacts are
// loaded instead of recomputed.
RunResult run_pipeline(const RunConfig& config);

// The stage-effective settings as sorted key=value lines. Two variants of the
// same run differ in exactly their documented switch.
std::string config_echo(const RunConfig& config);

std::vector<VertexId> load_aspects(const HetGraph& graph, const std::filesystem::path& file);

struct SyntheticSpec {
  int shared_aspects = 4;
  int specific_aspects = 10;  // per domain; also the number of behavior themes
  int products_per_domain = 60;
  int sellers_per_domain = 20;
  int customers = 300;
  int signature_words_per_aspect = 30;
  int noise_words = 200;
  int reviews_per_domain = 1000;
  int words_per_review = 30;
  double customer_sharing = 0.3;  // fraction of customers active in both domains
  double seller_sharing = 0.3;
  double word_sharing = 0.3;      // signature/noise overlap between paired domains
  double affinity = 0.8;          // P(token drawn from a gold aspect's signature pool)
  double theme_strength = 0.8;    // P(review mentions its customer's theme aspect)
  double shared_mention = 0.5;    // P(review mentions one shared aspect)
  double product_affinity = 0.7;  // P(review's product matches the customer's theme)
  int cooccur_window = 5;
  int min_cooccur = 2;            // drop word pairs seen fewer times
  int train_per_aspect = 10;
  std::uint64_t seed = 1;

  void validate() const;
};

// Writes vertices.tsv, edges.tsv, reviews.tsv, split.tsv, aspects.txt and
// manifest.tsv into out_dir. Two domains; the target domain is the one whose
// reviews appear in split.tsv, source reviews stay as background context.
void synthesize(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

// Headline numbers of a saved report, no graph needed.
EvalReport load_report_summary(const std::filesystem::path& file);

// Side-by-side table of saved evaluation reports.
std::string format_report_table(const std::vector<std::pair<std::string, EvalReport>>& rows);

}  // namespace thgrl
