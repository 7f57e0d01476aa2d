#include "embinv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "embinv/errors.hpp"

namespace embinv {

namespace {

// Decodes one UTF-8 code point; malformed bytes pass through as single
// characters so tokenization never fails on arbitrary input.
std::uint32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t& len) {
  const unsigned char c0 = static_cast<unsigned char>(s[pos]);
  len = 1;
  if (c0 < 0x80) return c0;
  std::size_t need = 0;
  std::uint32_t cp = 0;
  if ((c0 & 0xE0) == 0xC0) {
    need = 1;
    cp = c0 & 0x1F;
  } else if ((c0 & 0xF0) == 0xE0) {
    need = 2;
    cp = c0 & 0x0F;
  } else if ((c0 & 0xF8) == 0xF0) {
    need = 3;
    cp = c0 & 0x07;
  } else {
    return c0;
  }
  if (pos + need >= s.size()) return c0;
  for (std::size_t i = 1; i <= need; ++i) {
    const unsigned char c = static_cast<unsigned char>(s[pos + i]);
    if ((c & 0xC0) != 0x80) return c0;
    cp = (cp << 6) | (c & 0x3F);
  }
  len = need + 1;
  return cp;
}

bool is_unicode_space(std::uint32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_strippable_punct(std::uint32_t cp) {
  if (cp < 0x80) {
    const char c = static_cast<char>(cp);
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
  }
  switch (cp) {
    case 0x2018: case 0x2019: case 0x201C: case 0x201D:  // curly quotes
    case 0x2013: case 0x2014: case 0x2026:               // dashes, ellipsis
    case 0xAB: case 0xBB: case 0xBF: case 0xA1:          // guillemets, inverted ?!
    case 0x3001: case 0x3002: case 0xFF01: case 0xFF0C:  // CJK punctuation
    case 0xFF0E: case 0xFF1F:
      return true;
    default:
      return false;
  }
}

std::string finish_token(std::string_view raw, const TokenizeOptions& options) {
  // Code-point boundaries so multi-byte punctuation strips cleanly.
  std::vector<std::pair<std::size_t, std::size_t>> cps;  // (offset, len)
  std::vector<std::uint32_t> values;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    std::size_t len = 1;
    const std::uint32_t cp = decode_utf8(raw, pos, len);
    cps.emplace_back(pos, len);
    values.push_back(cp);
    pos += len;
  }
  std::size_t lo = 0, hi = cps.size();
  if (options.strip_punctuation) {
    while (lo < hi && is_strippable_punct(values[lo])) ++lo;
    while (hi > lo && is_strippable_punct(values[hi - 1])) --hi;
  }
  if (lo >= hi) return {};
  const std::size_t begin = cps[lo].first;
  const std::size_t end = cps[hi - 1].first + cps[hi - 1].second;
  std::string token(raw.substr(begin, end - begin));
  if (options.lowercase) {
    for (char& c : token) {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return token;
}

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::unordered_map<std::string, std::size_t> ngram_counts(const TokenSequence& tokens, int n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (tokens.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int k = 1; k < n; ++k) {
      key.push_back('\x1F');
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

TokenSequence tokenize(std::string_view text, const TokenizeOptions& options) {
  TokenSequence tokens;
  std::size_t pos = 0, start = 0;
  bool in_token = false;
  while (pos < text.size()) {
    std::size_t len = 1;
    const std::uint32_t cp = decode_utf8(text, pos, len);
    if (is_unicode_space(cp)) {
      if (in_token) {
        std::string token = finish_token(text.substr(start, pos - start), options);
        if (!token.empty()) tokens.push_back(std::move(token));
        in_token = false;
      }
    } else if (!in_token) {
      in_token = true;
      start = pos;
    }
    pos += len;
  }
  if (in_token) {
    std::string token = finish_token(text.substr(start), options);
    if (!token.empty()) tokens.push_back(std::move(token));
  }
  return tokens;
}

double rouge_l(const TokenSequence& reference, const TokenSequence& candidate, double beta) {
  if (reference.empty() || candidate.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(reference, candidate));
  if (lcs == 0.0) return 0.0;
  const double recall = lcs / static_cast<double>(reference.size());
  const double precision = lcs / static_cast<double>(candidate.size());
  const double b2 = beta * beta;
  return 100.0 * (1.0 + b2) * recall * precision / (recall + b2 * precision);
}

double rouge_1(const TokenSequence& reference, const TokenSequence& candidate) {
  if (reference.empty() || candidate.empty()) return 0.0;
  const auto ref_counts = ngram_counts(reference, 1);
  const auto cand_counts = ngram_counts(candidate, 1);
  std::size_t overlap = 0;
  for (const auto& [token, count] : cand_counts) {
    const auto it = ref_counts.find(token);
    if (it != ref_counts.end()) overlap += std::min(count, it->second);
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(candidate.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(reference.size());
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

double bleu_n(const TokenSequence& reference, const TokenSequence& candidate, int n) {
  if (n != 1 && n != 2) throw std::invalid_argument("bleu_n: n must be 1 or 2");
  if (candidate.size() < static_cast<std::size_t>(n)) return 0.0;
  if (reference.empty()) return 0.0;

  double log_precision_sum = 0.0;
  for (int order = 1; order <= n; ++order) {
    const auto ref_counts = ngram_counts(reference, order);
    const auto cand_counts = ngram_counts(candidate, order);
    std::size_t total = 0, matched = 0;
    for (const auto& [gram, count] : cand_counts) {
      total += count;
      const auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    if (total == 0 || matched == 0) return 0.0;  // raw (+0 smoothing)
    log_precision_sum += std::log(static_cast<double>(matched) / static_cast<double>(total));
  }

  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double brevity = c < r ? std::exp(1.0 - r / c) : 1.0;
  return 100.0 * brevity * std::exp(log_precision_sum / static_cast<double>(n));
}

double cosine(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("cosine: dimension mismatch");
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine: zero vector");
  return dot(a, b) / (na * nb);
}

double entity_f1(const std::vector<EntityAnnotation>& reference_entities,
                 const std::vector<EntityAnnotation>& candidate_entities,
                 const std::optional<std::string>& label_filter) {
  const auto keyed_counts = [&](const std::vector<EntityAnnotation>& entities) {
    std::unordered_map<std::string, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& entity : entities) {
      if (label_filter && entity.label != *label_filter) continue;
      ++counts[entity.surface + '\x1F' + entity.label];
      ++total;
    }
    return std::pair{counts, total};
  };
  const auto [ref_counts, ref_total] = keyed_counts(reference_entities);
  const auto [cand_counts, cand_total] = keyed_counts(candidate_entities);

  if (ref_total == 0 && cand_total == 0) return 100.0;
  if (ref_total == 0 || cand_total == 0) return 0.0;

  std::size_t tp = 0;
  for (const auto& [key, count] : cand_counts) {
    const auto it = ref_counts.find(key);
    if (it != ref_counts.end()) tp += std::min(count, it->second);
  }
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(cand_total);
  const double recall = static_cast<double>(tp) / static_cast<double>(ref_total);
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

std::map<std::string, std::vector<EntityAnnotation>> load_entity_annotations(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open entity annotations: " + path.string());
  std::map<std::string, std::vector<EntityAnnotation>> result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.contains("id") || !j.contains("entities")) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected {\"id\", \"entities\"}");
    }
    std::vector<EntityAnnotation> entities;
    for (const auto& e : j.at("entities")) {
      EntityAnnotation a{e.at("surface").get<std::string>(), e.at("label").get<std::string>()};
      if (a.surface.empty()) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": empty entity surface");
      }
      entities.push_back(std::move(a));
    }
    result[j.at("id").get<std::string>()] = std::move(entities);
  }
  return result;
}

}  // namespace embinv
