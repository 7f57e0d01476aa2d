#include "embinv/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "embinv/errors.hpp"

namespace embinv {

void Corpus::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& record : records) {
    if (record.text.empty()) throw DataError("corpus record '" + record.id + "' has empty text");
    if (!seen.insert(record.id).second) {
      throw DataError("duplicate corpus id '" + record.id + "'");
    }
  }
}

Corpus load_corpus_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus: " + path.string());
  Corpus corpus;
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
    if (!j.contains("id") || !j.contains("text")) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected {\"id\", \"text\", \"lang\"}");
    }
    corpus.records.push_back(CorpusRecord{
        j.at("id").get<std::string>(),
        j.at("text").get<std::string>(),
        j.value("lang", std::string{}),
    });
  }
  corpus.validate();
  return corpus;
}

void save_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus: " + path.string());
  for (const auto& record : corpus.records) {
    out << nlohmann::json{{"id", record.id}, {"text", record.text}, {"lang", record.lang}}.dump()
        << '\n';
  }
}

}  // namespace embinv
