#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embinv/alignment.hpp"
#include "embinv/corpus.hpp"
#include "embinv/defense.hpp"
#include "embinv/matrix.hpp"

namespace embinv {

struct DecoderChoice {
  enum class Kind { NearestNeighbor, Toy };
  Kind kind = Kind::NearestNeighbor;
  std::filesystem::path toy_path;  // serialized ToyDecoder when kind == Toy
};

// Configuration for one attack run. Loaded from JSON; path existence and
// basic invariants (b >= 1, non-empty seeds) are checked at load time.
struct ExperimentConfig {
  std::filesystem::path victim_embeddings;
  std::filesystem::path attack_embeddings;
  std::filesystem::path corpus;
  std::size_t alignment_size = 1;  // b: pairs taken from the front
  std::size_t eval_size = 0;       // rows right after the pool; 0 = all held out
  std::optional<DefenseSpec> defense;
  DecoderChoice decoder;
  std::vector<std::string> metrics;  // subset of the five; empty = all
  std::vector<std::uint64_t> seeds;
  double rcond = 1e-10;
  double ridge = 0.0;
  std::size_t max_decode_tokens = 64;
  std::filesystem::path output_dir;  // empty: nothing is written

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_json_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  void validate() const;  // ConfigError on invariant violations, DataError on missing files
};

struct SampleResult {
  std::string id;
  std::string reference;
  std::string reconstruction;
  double rouge_l = 0.0;
  double rouge_1 = 0.0;
  double bleu_1 = 0.0;
  double bleu_2 = 0.0;
  double cosine = 0.0;
};

// Per-sample and aggregate results for one attack run. Aggregates are the
// arithmetic means of the per-sample values.
struct AttackReport {
  std::vector<SampleResult> per_sample;
  double rouge_l = 0.0;
  double rouge_1 = 0.0;
  double bleu_1 = 0.0;
  double bleu_2 = 0.0;
  double cosine = 0.0;
  nlohmann::json config_echo;
  double wall_time_seconds = 0.0;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

// The three-step attack: fit the alignment on the first b pairs (after the
// optional defense of all victim rows), align the held-out rows, decode and
// score them. Writes report.json, report.txt and manifest.json under
// output_dir when it is set.
AttackReport run_attack(const ExperimentConfig& config);

struct SweepPoint {
  std::size_t b = 0;
  std::uint64_t seed = 0;
  AttackReport report;
};

// One run per (b, seed), duplicate b values dropped with a warning.
std::vector<SweepPoint> sweep(const ExperimentConfig& config,
                              std::vector<std::size_t> b_values,
                              std::ostream* warnings = nullptr);

// CSV with header "b,rouge_l,cosine", one row per sweep point.
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points);

// Histogram of matrix entries for external plotting; CSV header
// "bin_lo,bin_hi,count". A constant matrix occupies a single bin.
void emit_density(const Matrix& m, std::size_t bins, std::ostream& out);

// Train / alignment-pool / evaluation sizes following the 150k:1k:200
// proportions, scaled to n and floored at one row each. Requires n >= 3.
struct SplitSizes {
  std::size_t train = 0;
  std::size_t align = 0;
  std::size_t eval = 0;
};
SplitSizes proportional_split(std::size_t n);

}  // namespace embinv
