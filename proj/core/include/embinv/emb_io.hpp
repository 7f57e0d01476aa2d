#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "embinv/alignment.hpp"
#include "embinv/matrix.hpp"

namespace embinv {

// EMB1 binary matrix format, little-endian:
//   magic "EMB1" | u32 rows | u32 cols | u8 dtype | 7 reserved zero bytes |
//   row-major payload.
// dtype 1 = float32 (the embedding-file default, widened to f64 on load),
// dtype 2 = float64 (used where exact round-trip matters, e.g. fitted maps).
enum class EmbDtype : std::uint8_t { F32 = 1, F64 = 2 };

void write_emb1(std::ostream& out, const Matrix& m, EmbDtype dtype = EmbDtype::F32);
void write_emb1(const std::filesystem::path& path, const Matrix& m,
                EmbDtype dtype = EmbDtype::F32);

// Throws DataError on missing files, bad magic, or truncated payloads.
Matrix read_emb1(std::istream& in);
Matrix read_emb1(const std::filesystem::path& path);

// AlignmentMap persistence: `<base>.emb1` holds w as float64 and
// `<base>.json` the fit diagnostics.
void save_alignment(const AlignmentMap& map, const std::filesystem::path& base);
AlignmentMap load_alignment(const std::filesystem::path& base);

// Labels sidecar for classification data: JSONL {"id": str, "label": int},
// line i labeling embedding row i.
std::vector<int> load_labels_jsonl(const std::filesystem::path& path);

}  // namespace embinv
