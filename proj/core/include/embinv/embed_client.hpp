#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <string>

#include "embinv/corpus.hpp"
#include "embinv/matrix.hpp"

namespace embinv {

struct EmbeddingServiceConfig {
  std::string base_url;                      // e.g. http://127.0.0.1:8089
  std::string path = "/v1/embeddings";
  std::string model;
  std::string api_key_env = "EMBINV_API_KEY";  // key is read from this env var, never logged
  std::size_t batch_size = 16;               // texts per request, <= service limit
  std::size_t max_in_flight = 8;             // concurrent requests cap
  std::size_t max_retries = 3;
  std::size_t timeout_seconds = 30;
  std::filesystem::path cache_dir;           // empty disables the cache
};

// Client for an OpenAI-compatible embedding endpoint:
//   POST {"model": str, "input": [str]} -> {"data":[{"index":int,"embedding":[float]}]}
// Responses are cached one EMB1 file per (model, text) pair, so warm re-runs
// make zero network calls. Partial progress is preserved on failure.
class EmbeddingServiceClient {
public:
  explicit EmbeddingServiceClient(EmbeddingServiceConfig config);

  // One embedding row per record, order-preserving. Throws NetworkError
  // listing the failed ids after retries are exhausted.
  Matrix fetch(const Corpus& corpus);

  // HTTP requests issued over this client's lifetime (cache hits excluded).
  std::size_t requests_made() const { return requests_made_.load(); }

  static std::string cache_key(const std::string& model, const std::string& text);

private:
  EmbeddingServiceConfig config_;
  std::atomic<std::size_t> requests_made_{0};
};

}  // namespace embinv
