#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "embinv/corpus.hpp"
#include "embinv/matrix.hpp"

namespace embinv {

enum class DecodeStrategy { Greedy, NearestNeighbor };

struct DecodeRequest {
  Vector embedding;
  std::size_t max_tokens = 64;
  DecodeStrategy strategy = DecodeStrategy::Greedy;
};

// Embedding-to-text decoder interface. Backends must be pure: the same
// request always yields the same text.
class TextDecoder {
public:
  virtual ~TextDecoder() = default;
  virtual std::string decode(const Vector& embedding, std::size_t max_tokens) const = 0;
};

// Decode-by-retrieval: returns the corpus text whose attack-space embedding
// has the highest cosine with the query, ties broken by lowest id. This IS
// the brute-force scan; any accelerated index must match its ranking.
class NearestNeighborDecoder : public TextDecoder {
public:
  NearestNeighborDecoder(Corpus corpus, Matrix attack_embeddings);

  std::string decode(const Vector& embedding, std::size_t max_tokens) const override;
  std::size_t index_size() const { return corpus_.size(); }

private:
  Corpus corpus_;
  Matrix embeddings_;
  std::vector<double> row_norms_;
};

// Token <-> index map with reserved BOS/EOS/UNK entries.
struct Vocabulary {
  static constexpr int kBos = 0;
  static constexpr int kEos = 1;
  static constexpr int kUnk = 2;

  std::vector<std::string> tokens;  // index -> token, including specials
  std::unordered_map<std::string, int> index;

  static Vocabulary build(const std::vector<std::vector<std::string>>& sentences);

  int lookup(const std::string& token) const;
  std::size_t size() const { return tokens.size(); }
};

struct ToyDecoderConfig {
  std::size_t hidden_dim = 32;
  double lr = 1e-4;
  double weight_decay = 1e-4;
  std::size_t batch = 16;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
};

// One-hidden-layer conditional autoregressive model:
//   P(x_i | x_{i-1}, e) = softmax(W_out tanh(W_h [emb(x_{i-1}); e] + b_h) + b_out)
// trained with summed cross-entropy over each sequence.
class ToyDecoder : public TextDecoder {
public:
  Vocabulary vocab;
  std::size_t embed_dim = 0;   // n, conditioning embedding size
  std::size_t hidden_dim = 0;  // h
  std::size_t max_len = 0;     // longest training sequence, decode default cap

  Matrix token_embedding;  // V x h
  Matrix w_hidden;         // h x (h + n)
  Vector b_hidden;         // h
  Matrix w_out;            // V x h
  Vector b_out;            // V

  // Distribution over the next token given the previous one. Sums to 1.
  Vector step_distribution(int prev_token, const Vector& embedding) const;

  // Greedy argmax decode from BOS until EOS or max_tokens; deterministic.
  std::string decode(const Vector& embedding, std::size_t max_tokens) const override;
  std::vector<int> decode_ids(const Vector& embedding, std::size_t max_tokens) const;

  void save(const std::filesystem::path& path) const;
  static ToyDecoder load(const std::filesystem::path& path);
};

// Gradient buffers matching the ToyDecoder parameter tensors.
struct ToyDecoderGradients {
  Matrix token_embedding;
  Matrix w_hidden;
  Vector b_hidden;
  Matrix w_out;
  Vector b_out;
};

// Summed cross-entropy of one target sequence (EOS included, BOS implicit)
// under the model; accumulates analytic gradients when `grads` is non-null.
double sequence_loss(const ToyDecoder& dec, const std::vector<int>& target_ids,
                     const Vector& embedding, ToyDecoderGradients* grads = nullptr);

struct ToyDecoderTraining {
  ToyDecoder decoder;
  std::vector<double> loss_history;  // full-corpus mean loss after each epoch
};

// Fits the decoder on (text_i, embedding row_i) pairs. Embeddings are
// expected L2-normalized. Throws std::invalid_argument on an empty corpus
// and std::runtime_error (with the epoch index) if the loss goes NaN.
ToyDecoderTraining train_toy_decoder(const Corpus& corpus, const Matrix& embeddings,
                                     const ToyDecoderConfig& config);

std::vector<int> encode_tokens(const Vocabulary& vocab, const std::vector<std::string>& tokens);

}  // namespace embinv
