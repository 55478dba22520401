#pragma once

// Hand-rolled random generators for property tests. Seeds are fixed so a
// failure reproduces; the seed is part of every failure message.

#include <cstdint>
#include <random>
#include <vector>

#include "attnflow/core.hpp"
#include "attnflow/enumeration.hpp"
#include "attnflow/expr.hpp"

namespace attnflow::testing {

class Gen {
 public:
  explicit Gen(uint64_t seed) : rng_(seed) {}

  uint64_t uniform(uint64_t lo, uint64_t hi) { return std::uniform_int_distribution<uint64_t>(lo, hi)(rng_); }
  bool coin() { return uniform(0, 1) == 1; }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[uniform(0, v.size() - 1)]; }

  /// Extents drawn from `choices`, heads in [1, 8].
  Workload workload(const std::vector<uint64_t>& choices) {
    Workload w{pick(choices), pick(choices), pick(choices), pick(choices)};
    w.heads = uniform(1, 8);
    return w;
  }

  BoundaryVector tiling(const Workload& w) {
    BoundaryVector b;
    for (Dim d : kAllDims) {
      const auto pairs = divisor_pairs(w.extent(d));
      const auto [g, n] = pick(pairs);
      b.b[intra_slot(d)] = g;
      b.b[inter_slot(d)] = n;
    }
    return b;
  }

  /// Every boundary in [lo, hi], ignoring any workload.
  BoundaryVector free_tiling(uint64_t lo, uint64_t hi) {
    BoundaryVector b;
    for (auto& v : b.b) v = uniform(lo, hi);
    return b;
  }

  MappingTemplate valid_template() {
    static const std::vector<MappingTemplate> all = enumerate_structural_templates();
    MappingTemplate t = pick(all);
    t.stationary = StationaryPair::from_index(int(uniform(0, kNumStationaryPairs - 1)));
    return t;
  }

  /// Polynomial with up to `terms` terms, 0/1 exponents, coefficients in [1, 3].
  Polynomial polynomial(int terms) {
    std::vector<Term> v;
    const int n = int(uniform(1, terms));
    for (int k = 0; k < n; ++k) {
      Term t;
      t.coeff = uniform(1, 3);
      for (auto& e : t.exp) e = uint8_t(uniform(0, 3) == 0);
      v.push_back(t);
    }
    return Polynomial(std::move(v));
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace attnflow::testing
