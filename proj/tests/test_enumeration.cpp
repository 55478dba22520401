#include <doctest.h>

#include <algorithm>
#include <set>
#include <stdexcept>

#include "attnflow/enumeration.hpp"
#include "generators.hpp"

using namespace attnflow;
using testing::Gen;

TEST_CASE("divisor pairs") {
  using P = std::pair<uint64_t, uint64_t>;
  CHECK(divisor_pairs(6) == std::vector<P>{{6, 1}, {3, 2}, {2, 3}, {1, 6}});
  CHECK(divisor_pairs(1) == std::vector<P>{{1, 1}});
  CHECK(divisor_pairs(7) == std::vector<P>{{7, 1}, {1, 7}});
  CHECK_THROWS_AS(divisor_pairs(0), std::invalid_argument);
}

TEST_CASE("divisor pairs against trial division") {
  Gen g(21);
  for (int n = 0; n < 200; ++n) {
    const uint64_t v = g.uniform(1, 5000);
    std::vector<std::pair<uint64_t, uint64_t>> expected;
    for (uint64_t d = 1; d <= v; ++d)
      if (v % d == 0) expected.emplace_back(v / d, d);
    CHECK(divisor_pairs(v) == expected);
  }
}

TEST_CASE("tilings are exact and complete") {
  const Workload w{4, 6, 2, 9};
  const auto tilings = enumerate_tilings(w);
  CHECK(tilings.size() == 3 * 4 * 2 * 3);
  std::set<std::array<uint64_t, 8>> seen;
  for (const auto& b : tilings) {
    CHECK(b.consistent_with(w));
    seen.insert(b.b);
  }
  CHECK(seen.size() == tilings.size());
  CHECK(tilings.front().b == std::array<uint64_t, 8>{1, 1, 1, 1, 4, 6, 2, 9});
}

TEST_CASE("loop orders") {
  const auto orders = enumerate_loop_orders();
  CHECK(orders.size() == 24);
  CHECK(std::is_sorted(orders.begin(), orders.end()));
  CHECK(std::set(orders.begin(), orders.end()).size() == 24);
}

TEST_CASE("structural templates are exactly the valid in-domain assignments") {
  // Independent brute force over every order and level assignment.
  std::vector<MappingTemplate> expected;
  for (const auto& order : enumerate_loop_orders()) {
    MappingTemplate t = make_template(order, {});
    for (uint8_t a = 0; a <= kIntraTile; ++a)
      for (uint8_t b = 0; b <= kIntraTile; ++b)
        for (uint8_t c = 0; c <= kIntraTile; ++c)
          for (uint8_t d = 0; d <= kIntraTile; ++d)
            for (uint8_t e = 0; e <= kIntraTile; ++e) {
              t.level = {a, b, c, d, e};
              if (validate_template(t)) expected.push_back(t);
            }
  }
  auto got = enumerate_structural_templates();
  CHECK(got.size() == expected.size());
  const auto key = [](const MappingTemplate& t) { return std::pair(t.loop_order, t.level); };
  std::set<std::pair<std::array<Dim, 4>, std::array<uint8_t, 5>>> a, b;
  for (const auto& t : got) a.insert(key(t));
  for (const auto& t : expected) b.insert(key(t));
  CHECK(a.size() == got.size());
  CHECK(a == b);
}

TEST_CASE("enumeration is deterministic") {
  CHECK(enumerate_structural_templates() == enumerate_structural_templates());
  const Workload w{8, 4, 8, 2};
  CHECK(enumerate_tilings(w) == enumerate_tilings(w));
}

TEST_CASE("recompute classes partition the structural templates") {
  const auto all = enumerate_structural_templates();
  const auto off = structural_templates_of_class(false);
  const auto on = structural_templates_of_class(true);
  CHECK(off.size() + on.size() == all.size());
  for (const auto& [idx, t] : off) {
    CHECK_FALSE(t.recompute);
    CHECK(all[idx] == t);
  }
  for (const auto& [idx, t] : on) {
    CHECK(t.recompute);
    CHECK(all[idx] == t);
  }
}

TEST_CASE("template ids") {
  const auto all = enumerate_templates();
  CHECK(all.size() == enumerate_structural_templates().size() * kNumStationaryPairs);
  Gen g(2);
  for (int n = 0; n < 100; ++n) {
    const uint32_t id = uint32_t(g.uniform(0, all.size() - 1));
    const auto t = template_by_id(id);
    CHECK(t == all[id]);
    CHECK(make_template_id(structural_index_of(id), t.stationary) == id);
  }
  CHECK_THROWS_AS(template_by_id(uint32_t(all.size())), std::out_of_range);
  std::set<uint32_t> groups;
  for (int rc = 0; rc < 2; ++rc)
    for (int st = 0; st < kNumStationaryPairs; ++st) groups.insert(group_id(rc, StationaryPair::from_index(st)));
  CHECK(groups.size() == kNumGroups);
}
