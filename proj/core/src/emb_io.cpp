#include "embinv/emb_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "embinv/errors.hpp"

namespace embinv {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, 4);
}

std::uint32_t get_u32(std::istream& in) {
  char buf[4];
  in.read(buf, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  }
  return v;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, 8);
}

std::uint64_t get_u64(std::istream& in) {
  char buf[8];
  in.read(buf, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  }
  return v;
}

}  // namespace

void write_emb1(std::ostream& out, const Matrix& m, EmbDtype dtype) {
  if (m.rows > 0xFFFFFFFFull || m.cols > 0xFFFFFFFFull) {
    throw DataError("EMB1: matrix too large for u32 header");
  }
  out.write("EMB1", 4);
  put_u32(out, static_cast<std::uint32_t>(m.rows));
  put_u32(out, static_cast<std::uint32_t>(m.cols));
  const char tag = static_cast<char>(dtype);
  out.write(&tag, 1);
  const char reserved[7] = {0, 0, 0, 0, 0, 0, 0};
  out.write(reserved, 7);

  if (dtype == EmbDtype::F32) {
    for (double x : m.data) {
      const std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(x));
      put_u32(out, bits);
    }
  } else {
    for (double x : m.data) put_u64(out, std::bit_cast<std::uint64_t>(x));
  }
  if (!out) throw DataError("EMB1: write failed");
}

void write_emb1(const std::filesystem::path& path, const Matrix& m, EmbDtype dtype) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write EMB1 file: " + path.string());
  write_emb1(out, m, dtype);
}

Matrix read_emb1(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "EMB1", 4) != 0) throw DataError("EMB1: bad magic");
  const std::uint32_t rows = get_u32(in);
  const std::uint32_t cols = get_u32(in);
  char tag;
  in.read(&tag, 1);
  char reserved[7];
  in.read(reserved, 7);
  if (!in) throw DataError("EMB1: truncated header");
  for (char c : reserved) {
    if (c != 0) throw DataError("EMB1: nonzero reserved bytes");
  }
  if (tag != static_cast<char>(EmbDtype::F32) && tag != static_cast<char>(EmbDtype::F64)) {
    throw DataError("EMB1: unknown dtype tag " + std::to_string(static_cast<int>(tag)));
  }

  Matrix m(rows, cols);
  if (tag == static_cast<char>(EmbDtype::F32)) {
    for (double& x : m.data) {
      const std::uint32_t bits = get_u32(in);
      x = static_cast<double>(std::bit_cast<float>(bits));  // widen on load
    }
  } else {
    for (double& x : m.data) x = std::bit_cast<double>(get_u64(in));
  }
  if (!in) throw DataError("EMB1: truncated payload");
  return m;
}

Matrix read_emb1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open EMB1 file: " + path.string());
  return read_emb1(in);
}

void save_alignment(const AlignmentMap& map, const std::filesystem::path& base) {
  std::filesystem::path emb_path = base;
  emb_path += ".emb1";
  write_emb1(emb_path, map.w, EmbDtype::F64);

  const nlohmann::json diag{
      {"samples_used", map.samples_used},
      {"residual_fro", map.residual_fro},
      {"effective_rank", map.effective_rank},
      {"gradient_norm", map.gradient_norm},
      {"victim_dim", map.w.rows},
      {"attack_dim", map.w.cols},
  };
  std::filesystem::path json_path = base;
  json_path += ".json";
  std::ofstream out(json_path);
  if (!out) throw DataError("cannot write alignment sidecar: " + json_path.string());
  out << diag.dump(2) << '\n';
}

AlignmentMap load_alignment(const std::filesystem::path& base) {
  std::filesystem::path emb_path = base;
  emb_path += ".emb1";
  std::filesystem::path json_path = base;
  json_path += ".json";

  AlignmentMap map;
  map.w = read_emb1(emb_path);
  std::ifstream in(json_path);
  if (!in) throw DataError("cannot open alignment sidecar: " + json_path.string());
  nlohmann::json diag;
  try {
    in >> diag;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad alignment sidecar " + json_path.string() + ": " + e.what());
  }
  map.samples_used = diag.at("samples_used").get<std::size_t>();
  map.residual_fro = diag.at("residual_fro").get<double>();
  map.effective_rank = diag.at("effective_rank").get<std::size_t>();
  map.gradient_norm = diag.at("gradient_norm").get<double>();
  return map;
}

std::vector<int> load_labels_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels: " + path.string());
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      labels.push_back(j.at("label").get<int>());
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return labels;
}

}  // namespace embinv
