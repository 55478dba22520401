// Per-operator mapper for the unfused baseline. Each GEMM Z[m,n] = X[m,r] Y[r,n]
// gets its own three-layer inter-tile nest with the same buffering-level and
// blocker rules as the fused model, and no output partial sums leave the buffer.

#include <algorithm>
#include <array>
#include <limits>
#include <sstream>

#include "attnflow/enumeration.hpp"
#include "attnflow/search.hpp"

namespace attnflow {

namespace {

constexpr int kM = 0, kR = 1, kN = 2;
constexpr int kIntra3 = 3;
constexpr std::array<std::array<int, 2>, 3> kOwn = {{{kM, kR}, {kR, kN}, {kM, kN}}};  // X, Y, Z

struct GemmTiling {
  std::array<uint64_t, 3> d, g;
};

struct GemmMapping {
  std::array<int, 3> order;
  std::array<int, 3> level;
  Stationary st;
};

bool owns(int op, int dim) { return kOwn[op][0] == dim || kOwn[op][1] == dim; }

int blocker(const GemmMapping& m, int op) {
  for (int p = m.level[op] - 1; p >= 0; --p)
    if (owns(op, m.order[p])) return p;
  return -1;
}

bool valid(const GemmMapping& m) {
  const int bz = blocker(m, 2);
  if (bz >= 0) {
    for (int p = 0; p <= bz; ++p)
      if (m.order[p] == kR) return false;
  }
  for (int op = 0; op < 3; ++op) {
    if (m.level[op] != kIntra3) continue;
    const int b = blocker(m, op);
    for (int p = b + 1; p < 3; ++p)
      if (!owns(op, m.order[p])) return false;
  }
  return true;
}

uint64_t tensor(int op, const GemmTiling& t) {
  return t.d[kOwn[op][0]] * t.g[kOwn[op][0]] * t.d[kOwn[op][1]] * t.g[kOwn[op][1]];
}

uint64_t buffer(const GemmMapping& m, int op, const GemmTiling& t) {
  uint64_t v = t.g[kOwn[op][0]] * t.g[kOwn[op][1]];
  for (int p = m.level[op]; p < 3; ++p)
    if (owns(op, m.order[p])) v *= t.d[m.order[p]];
  return v;
}

uint64_t dram(const GemmMapping& m, int op, const GemmTiling& t) {
  uint64_t v = buffer(m, op, t);
  const int b = blocker(m, op);
  for (int p = 0; p <= b; ++p) v *= t.d[m.order[p]];
  return v;
}

struct OpEval {
  bool ok = false;
  uint64_t bs = 0;
  std::array<uint64_t, 3> dram{};  // X, Y, Z
  Metrics metrics;
  GemmMapping mapping;
  GemmTiling tiling;
};

// `intermediate` is the operand index of C in this GEMM (Z for the producer,
// X for the consumer). Its traffic is pinned to one full pass.
template <typename Visit>
void enumerate_gemm(const std::array<uint64_t, 3>& ext, int intermediate, const Workload& w,
                    const AcceleratorConfig& hw, uint64_t softmax_elems, Visit&& visit) {
  std::array<std::vector<std::pair<uint64_t, uint64_t>>, 3> dp;
  for (int d = 0; d < 3; ++d) dp[d] = divisor_pairs(ext[d]);
  std::array<int, 3> order = {0, 1, 2};
  std::vector<GemmMapping> maps;
  do {
    for (int a = 0; a <= kIntra3; ++a)
      for (int b = 0; b <= kIntra3; ++b)
        for (int c = 0; c <= kIntra3; ++c)
          for (int st = 0; st < 3; ++st) {
            GemmMapping m{order, {a, b, c}, Stationary(st)};
            bool in_domain = true;
            for (int op = 0; op < 3; ++op) {
              if (m.level[op] == kIntra3) continue;
              int outer = 3;
              for (int p = 2; p >= 0; --p)
                if (owns(op, order[p])) outer = p;
              if (m.level[op] < outer) in_domain = false;
            }
            if (in_domain && valid(m)) maps.push_back(m);
          }
  } while (std::next_permutation(order.begin(), order.end()));

  for (auto [gm, dm] : dp[kM])
    for (auto [gr, dr] : dp[kR])
      for (auto [gn, dn] : dp[kN]) {
        const GemmTiling t{{dm, dr, dn}, {gm, gr, gn}};
        const uint64_t inv = dm * dr * dn;
        const uint64_t x = gm * gr, y = gr * gn, z = gm * gn;
        const uint64_t passes = inv * gr * ceil_div(gm, hw.pe_rows) * ceil_div(gn, hw.pe_cols);
        for (const GemmMapping& m : maps) {
          if (dram(m, intermediate, t) != tensor(intermediate, t)) continue;
          const uint64_t bs = (buffer(m, 0, t) + buffer(m, 1, t) + buffer(m, 2, t)) * hw.bytes_per_element;
          const std::array<uint64_t, 3> per_op = {dram(m, 0, t), dram(m, 1, t), dram(m, 2, t)};
          const uint64_t da = per_op[0] + per_op[1] + per_op[2];
          uint64_t br = 0;
          switch (m.st) {
            case Stationary::WS: br = tensor(1, t) + inv * x + 2 * inv * z; break;
            case Stationary::IS: br = tensor(0, t) + inv * y + 2 * inv * z; break;
            case Stationary::OS: br = inv * (x + y) + 2 * tensor(2, t); break;
          }
          OpEval e;
          e.ok = true;
          e.bs = bs;
          e.dram = per_op;
          e.mapping = m;
          e.tiling = t;
          e.metrics.buffer_elems = bs / hw.bytes_per_element;
          e.metrics.buffer_bytes = bs;
          e.metrics.feasible = bs <= hw.buffer_bytes;
          CostInputs in{da, br, ext[0] * ext[1] * ext[2], softmax_elems, passes};
          finish_metrics(e.metrics, in, w, hw);
          visit(e);
        }
      }
}

std::string describe_gemm(const OpEval& e, const char* dims) {
  std::ostringstream os;
  os << "order=";
  for (int p = 0; p < 3; ++p) os << (p ? "," : "") << dims[e.mapping.order[p]] << '2';
  os << " levels=";
  for (int op = 0; op < 3; ++op)
    os << (op ? "," : "")
       << (e.mapping.level[op] == kIntra3 ? std::string("intra")
                                           : std::string(1, dims[e.mapping.order[e.mapping.level[op]]]) + "2");
  os << " st=" << stationary_name(e.mapping.st) << " tiles=";
  for (int d = 0; d < 3; ++d) os << (d ? "x" : "") << e.tiling.g[d];
  return os.str();
}

bool better(const OpEval& a, const OpEval& b, UnfusedObjective obj) {
  if (!b.ok) return true;
  const Metrics &x = a.metrics, &y = b.metrics;
  switch (obj) {
    case UnfusedObjective::Energy:
      return std::tie(x.energy, x.latency_cycles, x.dram_elems) < std::tie(y.energy, y.latency_cycles, y.dram_elems);
    case UnfusedObjective::Latency:
      return std::tie(x.latency_cycles, x.energy, x.dram_elems) < std::tie(y.latency_cycles, y.energy, y.dram_elems);
    case UnfusedObjective::Dram:
      return std::tie(x.dram_elems, x.energy, x.latency_cycles) < std::tie(y.dram_elems, y.energy, y.latency_cycles);
  }
  return false;
}

std::array<uint64_t, 3> op1_shape(const Workload& w) { return {w.I, w.K, w.L}; }
std::array<uint64_t, 3> op2_shape(const Workload& w) { return {w.I, w.L, w.J}; }

}  // namespace

UnfusedResult unfused_baseline(const Workload& w, const AcceleratorConfig& hw, UnfusedObjective objective) {
  w.validate();
  OpEval best1, best2;
  uint64_t min1 = std::numeric_limits<uint64_t>::max(), min2 = min1;
  enumerate_gemm(op1_shape(w), 2, w, hw, w.I * w.L, [&](const OpEval& e) {
    min1 = std::min(min1, e.bs);
    if (e.metrics.feasible && better(e, best1, objective)) best1 = e;
  });
  enumerate_gemm(op2_shape(w), 0, w, hw, 0, [&](const OpEval& e) {
    min2 = std::min(min2, e.bs);
    if (e.metrics.feasible && better(e, best2, objective)) best2 = e;
  });
  if (!best1.ok || !best2.ok) throw InfeasibleError(std::max(min1, min2), hw.buffer_bytes);

  UnfusedResult r;
  r.op1 = best1.metrics;
  r.op2 = best2.metrics;
  r.intermediate_traffic = 2 * w.I * w.L;
  r.operand_dram = {best1.dram[0], best1.dram[1], best1.dram[2] + best2.dram[0], best2.dram[1], best2.dram[2]};
  r.op1_mapping = describe_gemm(best1, "ikl");
  r.op2_mapping = describe_gemm(best2, "ilj");
  Metrics& t = r.total;
  t.buffer_elems = std::max(r.op1.buffer_elems, r.op2.buffer_elems);
  t.buffer_bytes = std::max(r.op1.buffer_bytes, r.op2.buffer_bytes);
  t.dram_elems = r.op1.dram_elems + r.op2.dram_elems;
  t.buffer_rf = r.op1.buffer_rf + r.op2.buffer_rf;
  t.macs = r.op1.macs + r.op2.macs;
  t.softmax_elems = r.op1.softmax_elems + r.op2.softmax_elems;
  t.compute_cycles = r.op1.compute_cycles + r.op2.compute_cycles;
  t.dram_cycles = r.op1.dram_cycles + r.op2.dram_cycles;
  t.latency_cycles = r.op1.latency_cycles + r.op2.latency_cycles;
  t.energy_dram = r.op1.energy_dram + r.op2.energy_dram;
  t.energy_buffer = r.op1.energy_buffer + r.op2.energy_buffer;
  t.energy_mac = r.op1.energy_mac + r.op2.energy_mac;
  t.energy_softmax = r.op1.energy_softmax + r.op2.energy_softmax;
  t.energy = r.op1.energy + r.op2.energy;
  t.feasible = true;
  const double peak = double(hw.pe_rows * hw.pe_cols * std::min(w.heads, hw.num_arrays));
  t.utilization = t.compute_cycles ? double(w.heads) * double(t.macs) / (peak * double(t.compute_cycles)) : 0.0;
  return r;
}

std::vector<std::pair<uint64_t, std::optional<uint64_t>>> unfused_dram_vs_buffer_curve(
    const Workload& w, const AcceleratorConfig& hw, const std::vector<uint64_t>& budgets) {
  w.validate();
  std::vector<std::optional<uint64_t>> best1(budgets.size()), best2(budgets.size());
  auto fold = [&](std::vector<std::optional<uint64_t>>& best) {
    return [&](const OpEval& e) {
      for (size_t k = 0; k < budgets.size(); ++k)
        if (e.bs <= budgets[k] && (!best[k] || e.metrics.dram_elems < *best[k])) best[k] = e.metrics.dram_elems;
    };
  };
  enumerate_gemm(op1_shape(w), 2, w, hw, w.I * w.L, fold(best1));
  enumerate_gemm(op2_shape(w), 0, w, hw, 0, fold(best2));
  std::vector<std::pair<uint64_t, std::optional<uint64_t>>> out;
  for (size_t k = 0; k < budgets.size(); ++k) {
    std::optional<uint64_t> v;
    if (best1[k] && best2[k]) v = *best1[k] + *best2[k];
    out.emplace_back(budgets[k], v);
  }
  return out;
}

}  // namespace attnflow
