#include "attnflow/enumeration.hpp"

#include <algorithm>
#include <stdexcept>

namespace attnflow {

std::vector<std::pair<uint64_t, uint64_t>> divisor_pairs(uint64_t n) {
  if (n == 0) throw std::invalid_argument("divisor_pairs: n must be positive");
  std::vector<uint64_t> small, large;
  for (uint64_t d = 1; d * d <= n; ++d) {
    if (n % d) continue;
    small.push_back(d);
    if (d != n / d) large.push_back(n / d);
  }
  std::vector<std::pair<uint64_t, uint64_t>> out;
  out.reserve(small.size() + large.size());
  for (uint64_t d : small) out.emplace_back(n / d, d);
  for (auto it = large.rbegin(); it != large.rend(); ++it) out.emplace_back(n / *it, *it);
  return out;
}

std::vector<BoundaryVector> enumerate_tilings(const Workload& w) {
  std::array<std::vector<std::pair<uint64_t, uint64_t>>, 4> per;
  for (Dim d : kAllDims) per[int(d)] = divisor_pairs(w.extent(d));
  std::vector<BoundaryVector> out;
  out.reserve(per[0].size() * per[1].size() * per[2].size() * per[3].size());
  for (auto [gi, di] : per[0])
    for (auto [gk, dk] : per[1])
      for (auto [gl, dl] : per[2])
        for (auto [gj, dj] : per[3]) out.push_back({{di, dk, dl, dj, gi, gk, gl, gj}});
  return out;
}

std::vector<std::array<Dim, 4>> enumerate_loop_orders() {
  std::array<Dim, 4> order = {Dim::I, Dim::K, Dim::L, Dim::J};
  std::sort(order.begin(), order.end());
  std::vector<std::array<Dim, 4>> out;
  do out.push_back(order);
  while (std::next_permutation(order.begin(), order.end()));
  return out;
}

std::vector<MappingTemplate> enumerate_structural_templates() {
  std::vector<MappingTemplate> out;
  for (const auto& order : enumerate_loop_orders()) {
    MappingTemplate t = make_template(order, {});
    std::array<std::vector<uint8_t>, 5> domain;
    for (Operand op : kAllOperands) {
      for (uint8_t lv = 0; lv <= kIntraTile; ++lv)
        if (level_in_domain(t, op, lv)) domain[int(op)].push_back(lv);
    }
    for (uint8_t a : domain[0])
      for (uint8_t b : domain[1])
        for (uint8_t c : domain[2])
          for (uint8_t d : domain[3])
            for (uint8_t e : domain[4]) {
              t.level = {a, b, c, d, e};
              if (validate_template(t)) out.push_back(t);
            }
  }
  return out;
}

std::vector<std::pair<uint32_t, MappingTemplate>> structural_templates_of_class(bool recompute) {
  std::vector<std::pair<uint32_t, MappingTemplate>> out;
  const auto all = enumerate_structural_templates();
  for (uint32_t s = 0; s < all.size(); ++s)
    if (all[s].recompute == recompute) out.emplace_back(s, all[s]);
  return out;
}

std::vector<MappingTemplate> enumerate_templates() {
  std::vector<MappingTemplate> out;
  for (const MappingTemplate& s : enumerate_structural_templates())
    for (int st = 0; st < kNumStationaryPairs; ++st) {
      MappingTemplate t = s;
      t.stationary = StationaryPair::from_index(st);
      out.push_back(t);
    }
  return out;
}

MappingTemplate template_by_id(uint32_t template_id) {
  static const std::vector<MappingTemplate> structural = enumerate_structural_templates();
  const uint32_t s = structural_index_of(template_id);
  if (s >= structural.size()) throw std::out_of_range("unknown template id " + std::to_string(template_id));
  MappingTemplate t = structural[s];
  t.stationary = StationaryPair::from_index(int(template_id % kNumStationaryPairs));
  return t;
}

}  // namespace attnflow
