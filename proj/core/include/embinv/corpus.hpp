#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace embinv {

struct CorpusRecord {
  std::string id;
  std::string text;
  std::string lang;
};

// Ordered collection of (id, text, lang) records. Ids are unique and texts
// non-empty; violations raise DataError at construction/load time.
struct Corpus {
  std::vector<CorpusRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  void validate() const;
};

// JSONL, one {"id","text","lang"} object per line.
Corpus load_corpus_jsonl(const std::filesystem::path& path);
void save_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace embinv
