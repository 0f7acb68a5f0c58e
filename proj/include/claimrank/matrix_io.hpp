#pragma once

#include <string>

#include "claimrank/embedding.hpp"

namespace claimrank {

// Binary embedding store, little-endian:
//   magic "CREM" | version u32 = 1 | flags u32 (bit 0 = normalized)
//   | model_id (u32 length + UTF-8 bytes) | n u64 | E u32
//   | n id records (u32 length + UTF-8 bytes) | n x E float32 row-major.
//
// load(save(m)) reproduces m bit-exactly. Throws FormatError on bad
// magic/version or truncated payload.
void save_matrix(const EmbeddingMatrix& m, const std::string& path);
EmbeddingMatrix load_matrix(const std::string& path);

}  // namespace claimrank
