#include "embinv/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "embinv/emb_io.hpp"
#include "embinv/errors.hpp"
#include "embinv/metrics.hpp"
#include "embinv/optim.hpp"
#include "embinv/rng.hpp"

namespace embinv {

// ---------------------------------------------------------------------------
// Nearest-neighbor decoder

NearestNeighborDecoder::NearestNeighborDecoder(Corpus corpus, Matrix attack_embeddings)
    : corpus_(std::move(corpus)), embeddings_(std::move(attack_embeddings)) {
  if (corpus_.empty()) throw std::invalid_argument("nn decoder: empty corpus");
  if (embeddings_.rows != corpus_.size()) {
    throw std::invalid_argument("nn decoder: embedding rows do not match corpus size");
  }
  corpus_.validate();
  row_norms_.resize(embeddings_.rows);
  for (std::size_t i = 0; i < embeddings_.rows; ++i) {
    double s = 0.0;
    for (double x : embeddings_.row(i)) s += x * x;
    row_norms_[i] = std::sqrt(s);
  }
}

std::string NearestNeighborDecoder::decode(const Vector& embedding,
                                           std::size_t /*max_tokens*/) const {
  if (embedding.dim() != embeddings_.cols) {
    throw std::invalid_argument("nn decoder: query dimension mismatch");
  }
  const double qn = embedding.norm();
  if (qn == 0.0) throw std::invalid_argument("nn decoder: zero-norm query");

  double best_score = -2.0;
  const CorpusRecord* best = nullptr;
  for (std::size_t i = 0; i < embeddings_.rows; ++i) {
    if (row_norms_[i] == 0.0) continue;
    const double score =
        dot(embeddings_.row(i), std::span<const double>(embedding.data)) / (row_norms_[i] * qn);
    if (best == nullptr || score > best_score ||
        (score == best_score && corpus_.records[i].id < best->id)) {
      best_score = score;
      best = &corpus_.records[i];
    }
  }
  if (best == nullptr) throw std::invalid_argument("nn decoder: no indexable rows");
  return best->text;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& sentences) {
  Vocabulary v;
  v.tokens = {"<bos>", "<eos>", "<unk>"};
  std::set<std::string> unique;
  for (const auto& sentence : sentences) {
    for (const auto& token : sentence) unique.insert(token);
  }
  for (const auto& token : unique) v.tokens.push_back(token);
  for (std::size_t i = 0; i < v.tokens.size(); ++i) v.index[v.tokens[i]] = static_cast<int>(i);
  return v;
}

int Vocabulary::lookup(const std::string& token) const {
  const auto it = index.find(token);
  return it == index.end() ? kUnk : it->second;
}

std::vector<int> encode_tokens(const Vocabulary& vocab, const std::vector<std::string>& tokens) {
  std::vector<int> ids;
  ids.reserve(tokens.size() + 1);
  for (const auto& token : tokens) ids.push_back(vocab.lookup(token));
  ids.push_back(Vocabulary::kEos);
  return ids;
}

// ---------------------------------------------------------------------------
// Toy decoder forward/backward

namespace {

struct StepForward {
  std::vector<double> input;   // [emb(prev); e], h + n
  std::vector<double> hidden;  // tanh activations, h
  Vector probs;                // V
};

StepForward step_forward(const ToyDecoder& dec, int prev_token, const Vector& e) {
  const std::size_t h = dec.hidden_dim, n = dec.embed_dim, v = dec.vocab.size();
  StepForward f;
  f.input.resize(h + n);
  const auto emb = dec.token_embedding.row(static_cast<std::size_t>(prev_token));
  for (std::size_t i = 0; i < h; ++i) f.input[i] = emb[i];
  for (std::size_t i = 0; i < n; ++i) f.input[h + i] = e[i];

  f.hidden.resize(h);
  for (std::size_t i = 0; i < h; ++i) {
    f.hidden[i] = std::tanh(dot(dec.w_hidden.row(i), std::span<const double>(f.input)) +
                            dec.b_hidden[i]);
  }

  Vector logits(v);
  for (std::size_t i = 0; i < v; ++i) {
    logits[i] = dot(dec.w_out.row(i), std::span<const double>(f.hidden)) + dec.b_out[i];
  }
  const double max_logit = *std::max_element(logits.data.begin(), logits.data.end());
  double z = 0.0;
  f.probs = Vector(v);
  for (std::size_t i = 0; i < v; ++i) {
    f.probs[i] = std::exp(logits[i] - max_logit);
    z += f.probs[i];
  }
  for (double& p : f.probs.data) p /= z;
  return f;
}

ToyDecoderGradients zero_gradients(const ToyDecoder& dec) {
  ToyDecoderGradients g;
  g.token_embedding = Matrix(dec.token_embedding.rows, dec.token_embedding.cols);
  g.w_hidden = Matrix(dec.w_hidden.rows, dec.w_hidden.cols);
  g.b_hidden = Vector(dec.b_hidden.dim());
  g.w_out = Matrix(dec.w_out.rows, dec.w_out.cols);
  g.b_out = Vector(dec.b_out.dim());
  return g;
}

void scale_gradients(ToyDecoderGradients& g, double factor) {
  for (double& x : g.token_embedding.data) x *= factor;
  for (double& x : g.w_hidden.data) x *= factor;
  for (double& x : g.b_hidden.data) x *= factor;
  for (double& x : g.w_out.data) x *= factor;
  for (double& x : g.b_out.data) x *= factor;
}

}  // namespace

Vector ToyDecoder::step_distribution(int prev_token, const Vector& embedding) const {
  if (embedding.dim() != embed_dim) {
    throw std::invalid_argument("toy decoder: embedding dimension mismatch");
  }
  if (prev_token < 0 || static_cast<std::size_t>(prev_token) >= vocab.size()) {
    throw std::invalid_argument("toy decoder: token id out of range");
  }
  return step_forward(*this, prev_token, embedding).probs;
}

std::vector<int> ToyDecoder::decode_ids(const Vector& embedding, std::size_t max_tokens) const {
  std::vector<int> out;
  int prev = Vocabulary::kBos;
  for (std::size_t step = 0; step < max_tokens; ++step) {
    const Vector probs = step_distribution(prev, embedding);
    int best = Vocabulary::kEos;
    double best_p = -1.0;
    for (std::size_t i = 0; i < probs.dim(); ++i) {
      if (i == Vocabulary::kBos) continue;  // BOS is never a valid continuation
      if (probs[i] > best_p) {
        best_p = probs[i];
        best = static_cast<int>(i);
      }
    }
    if (best == Vocabulary::kEos) break;
    out.push_back(best);
    prev = best;
  }
  return out;
}

std::string ToyDecoder::decode(const Vector& embedding, std::size_t max_tokens) const {
  const std::vector<int> ids = decode_ids(embedding, max_tokens);
  std::string text;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) text.push_back(' ');
    text += vocab.tokens[static_cast<std::size_t>(ids[i])];
  }
  return text;
}

double sequence_loss(const ToyDecoder& dec, const std::vector<int>& target_ids,
                     const Vector& embedding, ToyDecoderGradients* grads) {
  const std::size_t h = dec.hidden_dim;
  double loss = 0.0;
  int prev = Vocabulary::kBos;
  for (const int target : target_ids) {
    const StepForward f = step_forward(dec, prev, embedding);
    const double p = f.probs[static_cast<std::size_t>(target)];
    loss += -std::log(std::max(p, 1e-300));

    if (grads != nullptr) {
      // d logits = probs - onehot(target)
      std::vector<double> dlogits(f.probs.data);
      dlogits[static_cast<std::size_t>(target)] -= 1.0;

      std::vector<double> dhidden(h, 0.0);
      for (std::size_t i = 0; i < dec.vocab.size(); ++i) {
        const double d = dlogits[i];
        if (d == 0.0) continue;
        grads->b_out[i] += d;
        auto gw = grads->w_out.row(i);
        const auto wrow = dec.w_out.row(i);
        for (std::size_t j = 0; j < h; ++j) {
          gw[j] += d * f.hidden[j];
          dhidden[j] += d * wrow[j];
        }
      }

      auto gemb = grads->token_embedding.row(static_cast<std::size_t>(prev));
      for (std::size_t i = 0; i < h; ++i) {
        const double dz = dhidden[i] * (1.0 - f.hidden[i] * f.hidden[i]);
        grads->b_hidden[i] += dz;
        auto gw = grads->w_hidden.row(i);
        const auto wrow = dec.w_hidden.row(i);
        for (std::size_t j = 0; j < f.input.size(); ++j) gw[j] += dz * f.input[j];
        for (std::size_t j = 0; j < h; ++j) gemb[j] += dz * wrow[j];
      }
    }
    prev = target;
  }
  return loss;
}

ToyDecoderTraining train_toy_decoder(const Corpus& corpus, const Matrix& embeddings,
                                     const ToyDecoderConfig& config) {
  if (corpus.empty()) throw std::invalid_argument("train_toy_decoder: empty corpus");
  if (embeddings.rows != corpus.size()) {
    throw std::invalid_argument("train_toy_decoder: embedding rows do not match corpus size");
  }
  if (config.hidden_dim < 1 || config.epochs < 1) {
    throw std::invalid_argument("train_toy_decoder: hidden_dim and epochs must be >= 1");
  }

  std::vector<std::vector<std::string>> tokenized;
  tokenized.reserve(corpus.size());
  for (const auto& record : corpus.records) tokenized.push_back(tokenize(record.text));

  ToyDecoderTraining result;
  ToyDecoder& dec = result.decoder;
  dec.vocab = Vocabulary::build(tokenized);
  dec.embed_dim = embeddings.cols;
  dec.hidden_dim = config.hidden_dim;

  std::vector<std::vector<int>> sequences;
  sequences.reserve(corpus.size());
  std::size_t max_len = 1;
  for (const auto& tokens : tokenized) {
    sequences.push_back(encode_tokens(dec.vocab, tokens));
    max_len = std::max(max_len, sequences.back().size());
  }
  dec.max_len = max_len;

  const std::size_t v = dec.vocab.size(), h = dec.hidden_dim, n = dec.embed_dim;
  PhiloxRng rng(config.seed);
  dec.token_embedding = Matrix(v, h);
  for (double& x : dec.token_embedding.data) x = 0.1 * rng.next_gaussian();
  dec.w_hidden = Matrix(h, h + n);
  const double wh_scale = 1.0 / std::sqrt(static_cast<double>(h + n));
  for (double& x : dec.w_hidden.data) x = wh_scale * rng.next_gaussian();
  dec.b_hidden = Vector(h);
  dec.w_out = Matrix(v, h);
  const double wo_scale = 1.0 / std::sqrt(static_cast<double>(h));
  for (double& x : dec.w_out.data) x = wo_scale * rng.next_gaussian();
  dec.b_out = Vector(v);

  const AdamW::Config opt_config{config.lr, config.weight_decay, 0.9, 0.999, 1e-8};
  AdamW opt_emb(dec.token_embedding.data.size(), opt_config);
  AdamW opt_wh(dec.w_hidden.data.size(), opt_config);
  AdamW opt_bh(dec.b_hidden.data.size(), opt_config);
  AdamW opt_wo(dec.w_out.data.size(), opt_config);
  AdamW opt_bo(dec.b_out.data.size(), opt_config);

  const std::size_t batch = std::max<std::size_t>(1, config.batch);
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    PhiloxRng shuffle_rng(config.seed, epoch + 1);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);
    }

    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(start + batch, order.size());
      ToyDecoderGradients grads = zero_gradients(dec);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        sequence_loss(dec, sequences[idx], embeddings.row_vector(idx), &grads);
      }
      scale_gradients(grads, 1.0 / static_cast<double>(end - start));
      opt_emb.step(dec.token_embedding.data, grads.token_embedding.data);
      opt_wh.step(dec.w_hidden.data, grads.w_hidden.data);
      opt_bh.step(dec.b_hidden.data, grads.b_hidden.data);
      opt_wo.step(dec.w_out.data, grads.w_out.data);
      opt_bo.step(dec.b_out.data, grads.b_out.data);
    }

    double epoch_loss = 0.0;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
      epoch_loss += sequence_loss(dec, sequences[i], embeddings.row_vector(i));
    }
    epoch_loss /= static_cast<double>(sequences.size());
    if (!std::isfinite(epoch_loss)) {
      throw std::runtime_error("train_toy_decoder: loss became non-finite at epoch " +
                               std::to_string(epoch));
    }
    result.loss_history.push_back(epoch_loss);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Serialization: u64 header length, JSON header, then EMB1 float64 blocks in
// a fixed order (token_embedding, w_hidden, b_hidden, w_out, b_out).

void ToyDecoder::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write decoder: " + path.string());
  const nlohmann::json header{
      {"format", "toy-decoder-v1"},
      {"vocab", vocab.tokens},
      {"embed_dim", embed_dim},
      {"hidden_dim", hidden_dim},
      {"max_len", max_len},
  };
  const std::string header_str = header.dump();
  const std::uint64_t len = header_str.size();
  char lenbuf[8];
  for (int i = 0; i < 8; ++i) lenbuf[i] = static_cast<char>((len >> (8 * i)) & 0xFF);
  out.write(lenbuf, 8);
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));

  write_emb1(out, token_embedding, EmbDtype::F64);
  write_emb1(out, w_hidden, EmbDtype::F64);
  write_emb1(out, Matrix(1, b_hidden.dim(), b_hidden.data), EmbDtype::F64);
  write_emb1(out, w_out, EmbDtype::F64);
  write_emb1(out, Matrix(1, b_out.dim(), b_out.data), EmbDtype::F64);
  if (!out) throw DataError("failed writing decoder: " + path.string());
}

ToyDecoder ToyDecoder::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open decoder: " + path.string());
  char lenbuf[8];
  in.read(lenbuf, 8);
  if (!in) throw DataError("truncated decoder header: " + path.string());
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) {
    len |= static_cast<std::uint64_t>(static_cast<unsigned char>(lenbuf[i])) << (8 * i);
  }
  std::string header_str(len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("truncated decoder header: " + path.string());

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad decoder header in " + path.string() + ": " + e.what());
  }
  if (header.value("format", "") != "toy-decoder-v1") {
    throw DataError("unrecognized decoder format in " + path.string());
  }

  ToyDecoder dec;
  dec.vocab.tokens = header.at("vocab").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < dec.vocab.tokens.size(); ++i) {
    dec.vocab.index[dec.vocab.tokens[i]] = static_cast<int>(i);
  }
  dec.embed_dim = header.at("embed_dim").get<std::size_t>();
  dec.hidden_dim = header.at("hidden_dim").get<std::size_t>();
  dec.max_len = header.at("max_len").get<std::size_t>();

  dec.token_embedding = read_emb1(in);
  dec.w_hidden = read_emb1(in);
  dec.b_hidden = Vector(read_emb1(in).data);
  dec.w_out = read_emb1(in);
  dec.b_out = Vector(read_emb1(in).data);

  if (dec.token_embedding.rows != dec.vocab.size() ||
      dec.token_embedding.cols != dec.hidden_dim ||
      dec.w_hidden.rows != dec.hidden_dim ||
      dec.w_hidden.cols != dec.hidden_dim + dec.embed_dim ||
      dec.w_out.rows != dec.vocab.size() || dec.w_out.cols != dec.hidden_dim ||
      dec.b_hidden.dim() != dec.hidden_dim || dec.b_out.dim() != dec.vocab.size()) {
    throw DataError("decoder parameter shapes do not match header: " + path.string());
  }
  return dec;
}

}  // namespace embinv
