#include "embinv/embed_client.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "embinv/emb_io.hpp"
#include "embinv/errors.hpp"

namespace embinv {

namespace {

// 128-bit FNV-1a over (model, text); collisions are negligible at the corpus
// sizes this cache serves.
std::string fnv1a128_hex(const std::string& model, const std::string& text) {
  using u128 = unsigned __int128;
  const u128 prime = (u128(0x0000000001000000ull) << 64) | 0x000000000000013Bull;
  u128 hash = (u128(0x6c62272e07bb0142ull) << 64) | 0x62b821756295c58dull;
  const auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      hash ^= c;
      hash *= prime;
    }
  };
  mix(model);
  hash ^= 0x1F;
  hash *= prime;
  mix(text);

  static const char* digits = "0123456789abcdef";
  std::string out(32, '0');
  for (int i = 31; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[static_cast<unsigned>(hash & 0xF)];
    hash >>= 4;
  }
  return out;
}

}  // namespace

EmbeddingServiceClient::EmbeddingServiceClient(EmbeddingServiceConfig config)
    : config_(std::move(config)) {
  if (config_.batch_size < 1) config_.batch_size = 1;
  if (config_.max_in_flight < 1) config_.max_in_flight = 1;
}

std::string EmbeddingServiceClient::cache_key(const std::string& model, const std::string& text) {
  return fnv1a128_hex(model, text);
}

Matrix EmbeddingServiceClient::fetch(const Corpus& corpus) {
  const std::size_t n = corpus.size();
  std::vector<std::vector<double>> rows(n);
  std::vector<std::size_t> missing;

  const bool use_cache = !config_.cache_dir.empty();
  if (use_cache) std::filesystem::create_directories(config_.cache_dir);

  for (std::size_t i = 0; i < n; ++i) {
    if (use_cache) {
      const auto path =
          config_.cache_dir / (cache_key(config_.model, corpus.records[i].text) + ".emb1");
      if (std::filesystem::exists(path)) {
        const Matrix cached = read_emb1(path);
        rows[i].assign(cached.data.begin(), cached.data.end());
        continue;
      }
    }
    missing.push_back(i);
  }

  if (!missing.empty()) {
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < missing.size(); start += config_.batch_size) {
      const std::size_t end = std::min(start + config_.batch_size, missing.size());
      batches.emplace_back(missing.begin() + static_cast<std::ptrdiff_t>(start),
                           missing.begin() + static_cast<std::ptrdiff_t>(end));
    }

    const char* key = std::getenv(config_.api_key_env.c_str());
    std::atomic<std::size_t> next_batch{0};
    std::mutex failure_mutex;
    std::vector<std::string> failed_ids;

    const auto worker = [&]() {
      httplib::Client client(config_.base_url);
      client.set_connection_timeout(static_cast<time_t>(config_.timeout_seconds));
      client.set_read_timeout(static_cast<time_t>(config_.timeout_seconds));
      httplib::Headers headers;
      if (key != nullptr && key[0] != '\0') {
        headers.emplace("Authorization", std::string("Bearer ") + key);
      }

      for (;;) {
        const std::size_t bi = next_batch.fetch_add(1);
        if (bi >= batches.size()) return;
        const auto& batch = batches[bi];

        nlohmann::json request{{"model", config_.model}, {"input", nlohmann::json::array()}};
        for (std::size_t row : batch) request["input"].push_back(corpus.records[row].text);

        bool ok = false;
        for (std::size_t attempt = 0; attempt < std::max<std::size_t>(1, config_.max_retries);
             ++attempt) {
          if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(50 << (attempt - 1)));
          }
          requests_made_.fetch_add(1);
          auto res = client.Post(config_.path, headers, request.dump(), "application/json");
          if (!res || res->status != 200) continue;

          try {
            const nlohmann::json body = nlohmann::json::parse(res->body);
            std::vector<bool> seen(batch.size(), false);
            for (const auto& item : body.at("data")) {
              const std::size_t idx = item.at("index").get<std::size_t>();
              if (idx >= batch.size()) throw std::runtime_error("index out of range");
              rows[batch[idx]] = item.at("embedding").get<std::vector<double>>();
              seen[idx] = true;
            }
            if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
              throw std::runtime_error("response missing inputs");
            }
          } catch (const std::exception&) {
            continue;  // malformed payload counts as a failed attempt
          }

          if (use_cache) {
            for (std::size_t row : batch) {
              Matrix one(1, rows[row].size(), std::vector<double>(rows[row]));
              write_emb1(config_.cache_dir /
                             (cache_key(config_.model, corpus.records[row].text) + ".emb1"),
                         one, EmbDtype::F32);
            }
          }
          ok = true;
          break;
        }
        if (!ok) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          for (std::size_t row : batch) failed_ids.push_back(corpus.records[row].id);
        }
      }
    };

    std::vector<std::thread> threads;
    const std::size_t worker_count = std::min(config_.max_in_flight, batches.size());
    threads.reserve(worker_count);
    for (std::size_t i = 0; i < worker_count; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    if (!failed_ids.empty()) {
      std::sort(failed_ids.begin(), failed_ids.end());
      std::ostringstream msg;
      msg << "embedding fetch failed for " << failed_ids.size() << " record(s):";
      for (const auto& id : failed_ids) msg << ' ' << id;
      throw NetworkError(msg.str());
    }
  }

  if (n == 0) return Matrix(0, 0);
  const std::size_t dim = rows[0].size();
  Matrix out(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != dim) {
      throw NetworkError("embedding service returned inconsistent dimensions for id '" +
                         corpus.records[i].id + "'");
    }
    for (std::size_t j = 0; j < dim; ++j) out(i, j) = rows[i][j];
  }
  return out;
}

}  // namespace embinv
