#pragma once

// Templates and tilings shared by several tests.

#include "attnflow/core.hpp"

namespace attnflow::testing {

// Order i2,l2,k2,j2; A held at the k2 layer, E at the j2 layer, rest intra.
inline MappingTemplate running_example() {
  return make_template({Dim::I, Dim::L, Dim::K, Dim::J}, {2, kIntraTile, kIntraTile, kIntraTile, 3});
}

// One row of tiles, two tiles along k, l and j.
inline BoundaryVector running_example_tiling() { return BoundaryVector{{1, 2, 2, 2, 1, 1, 1, 1}}; }

inline MappingTemplate recompute_example() {
  return make_template({Dim::I, Dim::J, Dim::L, Dim::K}, {kIntraTile, kIntraTile, kIntraTile, kIntraTile, 1});
}

}  // namespace attnflow::testing
