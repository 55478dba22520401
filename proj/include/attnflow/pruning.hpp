#pragma once

// Symbolic dominance pruning on buffer size and DRAM access expressions.

#include <cstdint>
#include <vector>

#include "attnflow/encoding.hpp"
#include "attnflow/expr.hpp"

namespace attnflow {

enum class LeqResult : uint8_t { Unknown, AlwaysLeq, AlwaysLt };
const char* leq_name(LeqResult r);

/// Decides u <= v for every tiling with all boundaries >= 1 through an
/// injective term matching (each term of u to a distinct term of v with
/// component-wise smaller-or-equal exponents and coefficient). AlwaysLeq
/// means u and v are identical; AlwaysLt means certified and not identical.
LeqResult symbolic_leq(const Polynomial& u, const Polynomial& v);

/// The expressions pruning compares.
struct DominanceKey {
  Polynomial bs_op1, bs_op2, dram;
  bool operator==(const DominanceKey&) const = default;
};

DominanceKey dominance_key(const EncodedTemplate& e);

/// True when u certifies v as inferior: u <= v on all three expressions and
/// not identical on all three.
bool dominates(const DominanceKey& u, const DominanceKey& v);

struct PruneStats {
  size_t rows = 0;
  size_t unique_keys = 0;
  size_t retained_rows = 0;
  size_t retained_unique = 0;
};

/// Returns a retained flag per row. Rows with identical keys share one
/// verdict; a row is dropped iff some row of the input dominates it.
std::vector<bool> prune_rows(const std::vector<DominanceKey>& keys, PruneStats* stats = nullptr);

}  // namespace attnflow
