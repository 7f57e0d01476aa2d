#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "embinv/matrix.hpp"

namespace embinv {

using TokenSequence = std::vector<std::string>;

struct TokenizeOptions {
  bool lowercase = true;
  bool strip_punctuation = true;  // leading/trailing punctuation per token
};

// Unicode-whitespace split with optional ASCII lowercasing and punctuation
// stripping. Never produces empty tokens.
TokenSequence tokenize(std::string_view text, const TokenizeOptions& options = {});

// LCS-based F-measure x100 with beta^2-weighted harmonic mean (beta = 1.2).
double rouge_l(const TokenSequence& reference, const TokenSequence& candidate,
               double beta = 1.2);

// Clipped unigram-overlap F1 x100.
double rouge_1(const TokenSequence& reference, const TokenSequence& candidate);

// Sentence-level BLEU-n x100: modified n-gram precision, geometric mean over
// orders 1..n, brevity penalty exp(1 - r/c) when c < r, no smoothing.
// n must be 1 or 2; returns 0 when the candidate is shorter than n.
double bleu_n(const TokenSequence& reference, const TokenSequence& candidate, int n);

// a.b / (||a|| ||b||). Throws std::invalid_argument on a zero vector.
double cosine(const Vector& a, const Vector& b);

struct EntityAnnotation {
  std::string surface;
  std::string label;
};

// Micro-F1 x100 over exact (surface, label) matches with multiset counting,
// optionally restricted to one label. Two empty sets score 100.
double entity_f1(const std::vector<EntityAnnotation>& reference_entities,
                 const std::vector<EntityAnnotation>& candidate_entities,
                 const std::optional<std::string>& label_filter = std::nullopt);

// JSONL ingestion, one record per line:
//   {"id": str, "entities": [{"surface": str, "label": str}]}
std::map<std::string, std::vector<EntityAnnotation>> load_entity_annotations(
    const std::filesystem::path& path);

}  // namespace embinv
