#pragma once

// Template and tiling spaces.

#include <cstdint>
#include <utility>
#include <vector>

#include "attnflow/core.hpp"

namespace attnflow {

/// (g, d) with g * d == n, ascending in d. Throws for n == 0.
std::vector<std::pair<uint64_t, uint64_t>> divisor_pairs(uint64_t n);

/// Every exact tiling of the workload, i outermost and j innermost, each
/// dimension in divisor_pairs order.
std::vector<BoundaryVector> enumerate_tilings(const Workload& w);

/// The 24 loop orders in lexicographic order of (i, k, l, j).
std::vector<std::array<Dim, 4>> enumerate_loop_orders();

inline constexpr int kNumStationaryPairs = 9;
inline constexpr int kNumGroups = 18;

/// Valid templates with the stationary pair left at its default, in
/// enumeration order. Index in this list is the structural index.
std::vector<MappingTemplate> enumerate_structural_templates();

/// Valid structural templates of one recompute class, paired with their
/// structural index.
std::vector<std::pair<uint32_t, MappingTemplate>> structural_templates_of_class(bool recompute);

constexpr uint32_t make_template_id(uint32_t structural_index, StationaryPair st) {
  return structural_index * kNumStationaryPairs + uint32_t(st.index());
}
constexpr uint32_t structural_index_of(uint32_t template_id) { return template_id / kNumStationaryPairs; }

/// All valid templates including stationary pairs, ordered by template id.
std::vector<MappingTemplate> enumerate_templates();

/// Looks up a template by id. Throws std::out_of_range for an unknown id.
MappingTemplate template_by_id(uint32_t template_id);

constexpr uint32_t group_id(bool recompute, StationaryPair st) {
  return uint32_t(recompute) * kNumStationaryPairs + uint32_t(st.index());
}

}  // namespace attnflow
