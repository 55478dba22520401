#pragma once

// Matrix encoding of mapping templates. Each template becomes six query
// polynomials whose exponent rows, applied to the log of a tiling column,
// give every metric of the template at that tiling.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "attnflow/core.hpp"
#include "attnflow/expr.hpp"

namespace attnflow {

enum class Query : uint8_t { BS_P = 0, BS_C = 1, DA = 2, C_P = 3, C_C = 4, BR = 5 };
inline constexpr int kNumQueries = 6;
const char* query_name(Query q);

struct EncodedTemplate {
  uint32_t template_id = 0;
  MappingTemplate tmpl;
  std::array<Polynomial, kNumQueries> q;

  const Polynomial& operator[](Query which) const { return q[static_cast<int>(which)]; }
};

EncodedTemplate encode_template(const MappingTemplate& t, uint32_t template_id);

/// All subset products of one tiling column: table[m] = prod of b[s] for s in m.
struct ColumnTable {
  std::array<uint64_t, 256> v;
  explicit ColumnTable(const BoundaryVector& b);
  uint64_t operator[](uint8_t mask) const { return v[mask]; }
};

/// A query polynomial with 0/1 exponents, stored as (coefficient, slot mask).
struct CompiledQuery {
  struct Entry {
    uint64_t coeff;
    uint8_t mask;
  };
  std::vector<Entry> entries;

  CompiledQuery() = default;
  /// Throws std::invalid_argument if some exponent exceeds 1.
  explicit CompiledQuery(const Polynomial& p);

  uint64_t evaluate(const ColumnTable& col) const {
    uint64_t v = 0;
    for (const Entry& e : entries) v += e.coeff * col[e.mask];
    return v;
  }
};

/// Floating evaluation of `p` at many tilings through exp(Q * ln B).
/// Q is the term-by-slot exponent matrix and ln B the slot-by-column log matrix.
std::vector<double> batch_evaluate(const Polynomial& p, const std::vector<BoundaryVector>& columns);

/// On-disk form of one (recompute, stationary) group.
struct GroupCache {
  uint32_t group_id = 0;
  std::vector<EncodedTemplate> rows;
  std::vector<bool> retained;
};

inline constexpr uint32_t kCacheMagic = 0x46464E41;  // "ANFF"
inline constexpr uint32_t kCacheSchemaVersion = 1;

void write_group_cache(const std::filesystem::path& file, const GroupCache& g);
/// Throws std::runtime_error on a missing, truncated or mismatched file.
GroupCache read_group_cache(const std::filesystem::path& file);
std::filesystem::path group_cache_path(const std::filesystem::path& dir, uint32_t group_id);

}  // namespace attnflow
