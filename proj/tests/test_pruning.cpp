#include <doctest.h>

#include <vector>

#include "attnflow/pruning.hpp"
#include "attnflow/search.hpp"
#include "generators.hpp"

using namespace attnflow;
using testing::Gen;

namespace {

const int kIG = intra_slot(Dim::I), kKG = intra_slot(Dim::K), kID = inter_slot(Dim::I);

bool numerically_leq(const Polynomial& u, const Polynomial& v, Gen& g, int samples) {
  for (int n = 0; n < samples; ++n) {
    const auto b = g.free_tiling(1, 64);
    if (u.evaluate(b) > v.evaluate(b)) return false;
  }
  return true;
}

std::vector<DominanceKey> keys_of(const std::vector<const EncodedTemplate*>& rows) {
  std::vector<DominanceKey> keys;
  for (const auto* r : rows) keys.push_back(dominance_key(*r));
  return keys;
}

}  // namespace

TEST_CASE("symbolic comparison examples") {
  const auto small = Polynomial::monomial(1, slots({kIG, kKG}));
  const auto big = Polynomial::monomial(1, slots({kIG, kKG, kID}));
  CHECK(symbolic_leq(small, big) == LeqResult::AlwaysLt);
  CHECK(symbolic_leq(big, small) == LeqResult::Unknown);
  CHECK(symbolic_leq(small, small) == LeqResult::AlwaysLeq);
  // Coefficients must also be covered.
  CHECK(symbolic_leq(small.scaled(2), big) == LeqResult::Unknown);
  // Each term of u needs its own partner in v.
  const auto two = small + Polynomial::monomial(1, slots({kKG}));
  CHECK(symbolic_leq(two, big) == LeqResult::Unknown);
  CHECK(symbolic_leq(two, big + Polynomial::monomial(1, slots({kKG, 0}))) == LeqResult::AlwaysLt);
  CHECK(symbolic_leq(Polynomial::zero(), big) == LeqResult::AlwaysLt);
  CHECK(std::string(leq_name(LeqResult::AlwaysLeq)) == "ALWAYS_LEQ");
}

TEST_CASE("symbolic comparison is sound on random polynomials") {
  Gen g(31);
  int certified = 0;
  for (int n = 0; n < 4000; ++n) {
    const auto u = g.polynomial(3), v = g.polynomial(4);
    const auto r = symbolic_leq(u, v);
    if (r == LeqResult::Unknown) continue;
    ++certified;
    CHECK(numerically_leq(u, v, g, 16));
    if (r == LeqResult::AlwaysLt) CHECK(u.evaluate(BoundaryVector{{2, 2, 2, 2, 2, 2, 2, 2}}) <
                                        v.evaluate(BoundaryVector{{2, 2, 2, 2, 2, 2, 2, 2}}));
  }
  CHECK(certified > 50);
}

TEST_CASE("dominance needs one strict expression") {
  const auto a = Polynomial::monomial(1, slots({kIG}));
  const auto b = Polynomial::monomial(1, slots({kIG, kID}));
  const DominanceKey u{a, a, a}, v{a, a, b};
  CHECK(dominates(u, v));
  CHECK_FALSE(dominates(v, u));
  CHECK_FALSE(dominates(u, u));
}

TEST_CASE("pruned library rows have a numerically dominating survivor") {
  const auto& lib = default_library();
  Gen g(41);
  for (int rc = 0; rc < 2; ++rc) {
    const auto& rows = lib.classes[rc];
    const auto& keep = lib.retained[rc];
    std::vector<size_t> survivors;
    for (size_t r = 0; r < rows.size(); ++r)
      if (keep[r]) survivors.push_back(r);
    CHECK(!survivors.empty());
    CHECK(lib.stats[rc].retained_rows == survivors.size());
    int checked = 0;
    for (size_t r = 0; r < rows.size() && checked < 150; ++r) {
      if (keep[r]) continue;
      const auto v = dominance_key(rows[r]);
      const EncodedTemplate* witness = nullptr;
      for (size_t s : survivors)
        if (dominates(dominance_key(rows[s]), v)) {
          witness = &rows[s];
          break;
        }
      REQUIRE(witness != nullptr);
      const auto u = dominance_key(*witness);
      CHECK(numerically_leq(u.bs_op1, v.bs_op1, g, 8));
      CHECK(numerically_leq(u.bs_op2, v.bs_op2, g, 8));
      CHECK(numerically_leq(u.dram, v.dram, g, 8));
      ++checked;
    }
  }
}

TEST_CASE("pruning is idempotent") {
  const auto& lib = default_library();
  for (int rc = 0; rc < 2; ++rc) {
    const auto rows = lib.search_rows(rc, true);
    const auto again = prune_rows(keys_of(rows));
    for (bool k : again) CHECK(k);
  }
}

TEST_CASE("pruning on random key sets") {
  Gen g(52);
  for (int n = 0; n < 60; ++n) {
    std::vector<DominanceKey> keys;
    const int count = int(g.uniform(1, 25));
    for (int k = 0; k < count; ++k) {
      if (!keys.empty() && g.uniform(0, 4) == 0)
        keys.push_back(g.pick(keys));
      else
        keys.push_back({g.polynomial(2), g.polynomial(2), g.polynomial(3)});
    }
    PruneStats st;
    const auto keep = prune_rows(keys, &st);
    CHECK(st.rows == keys.size());
    for (size_t v = 0; v < keys.size(); ++v) {
      bool dominated = false;
      for (size_t u = 0; u < keys.size(); ++u) dominated = dominated || dominates(keys[u], keys[v]);
      CHECK(keep[v] == !dominated);
      for (size_t u = 0; u < keys.size(); ++u)
        if (keys[u] == keys[v]) CHECK(keep[u] == keep[v]);
    }
    std::vector<DominanceKey> kept;
    for (size_t v = 0; v < keys.size(); ++v)
      if (keep[v]) kept.push_back(keys[v]);
    for (bool k : prune_rows(kept)) CHECK(k);
  }
}

TEST_CASE("library counts") {
  const auto& lib = default_library();
  CHECK(lib.classes[0].size() + lib.classes[1].size() == enumerate_structural_templates().size());
  for (int rc = 0; rc < 2; ++rc) {
    CHECK(lib.stats[rc].retained_unique <= lib.stats[rc].unique_keys);
    CHECK(lib.search_rows(rc, true).size() == lib.stats[rc].retained_unique);
    CHECK(lib.search_rows(rc, false).size() == lib.classes[rc].size());
  }
}
