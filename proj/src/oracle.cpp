#include "attnflow/oracle.hpp"

#include <algorithm>
#include <ostream>

#include "attnflow/analytics.hpp"

namespace attnflow {

const char* stage_op_name(StageOp op) {
  switch (op) {
    case StageOp::Op1: return "Op1";
    case StageOp::Softmax: return "Softmax";
    case StageOp::Op2: return "Op2";
  }
  return "?";
}

std::string TileId::to_string() const {
  return std::string(1, char(operand_name(operand) + ('a' - 'A'))) + "[" + std::to_string(r) + "," +
         std::to_string(c) + "]";
}

namespace {

// The two dims of each operand in (row, col) order.
constexpr std::array<std::array<Dim, 2>, 5> kTileDims = {{
    {Dim::I, Dim::K},
    {Dim::K, Dim::L},
    {Dim::I, Dim::L},
    {Dim::L, Dim::J},
    {Dim::I, Dim::J},
}};

TileId tile_of(Operand op, const std::array<uint32_t, 4>& p) {
  const auto& d = kTileDims[int(op)];
  return {op, p[int(d[0])], p[int(d[1])]};
}

struct LightStage {
  StageOp op;
  std::array<uint32_t, 4> p;
  bool recompute;
};

// Lexicographic walk of the inter-tile space in loop order. The producer
// fires at every point under recompute and only on the first j2 otherwise;
// softmax and the consumer fire once the k2 reduction of a C tile is done.
template <typename Emit>
void walk(const MappingTemplate& t, const BoundaryVector& b, Emit&& emit) {
  std::array<uint32_t, 4> ext{};
  for (int pos = 0; pos < 4; ++pos) ext[pos] = uint32_t(b.inter(t.loop_order[pos]));
  std::array<uint32_t, 4> ctr{};
  const uint32_t kd = uint32_t(b.inter(Dim::K));
  while (true) {
    std::array<uint32_t, 4> p{};
    for (int pos = 0; pos < 4; ++pos) p[int(t.loop_order[pos])] = ctr[pos];
    const uint32_t k = p[int(Dim::K)], j = p[int(Dim::J)];
    const bool fire1 = t.recompute || j == 0;
    if (fire1) emit(LightStage{StageOp::Op1, p, t.recompute && j > 0});
    if (k + 1 == kd) {
      if (fire1) emit(LightStage{StageOp::Softmax, p, t.recompute && j > 0});
      emit(LightStage{StageOp::Op2, p, false});
    }
    int pos = 3;
    while (pos >= 0 && ++ctr[pos] == ext[pos]) ctr[pos--] = 0;
    if (pos < 0) break;
  }
}

Stage to_stage(const LightStage& s, uint32_t index) {
  Stage st;
  st.index = index;
  st.op = s.op;
  st.coords = s.p;
  st.is_recompute = s.recompute;
  switch (s.op) {
    case StageOp::Op1:
      st.reads = {tile_of(Operand::A, s.p), tile_of(Operand::B, s.p)};
      st.writes = {tile_of(Operand::C, s.p)};
      break;
    case StageOp::Softmax:
      st.reads = {tile_of(Operand::C, s.p)};
      st.writes = {tile_of(Operand::C, s.p)};
      break;
    case StageOp::Op2:
      st.reads = {tile_of(Operand::C, s.p), tile_of(Operand::D, s.p)};
      st.writes = {tile_of(Operand::E, s.p)};
      break;
  }
  return st;
}

// Replays residency. Each operand keeps its tiles for one retention window:
// the stretch of stages over which every loop variable at or above its
// eviction layer stays fixed.
class Simulator {
 public:
  Simulator(const MappingTemplate& t, const BoundaryVector& b) : t_(t) {
    kd_ = uint32_t(b.inter(Dim::K));
    ld_ = uint32_t(b.inter(Dim::L));
    for (Operand op : kAllOperands) {
      const int o = int(op);
      const auto& d = kTileDims[o];
      cols_[o] = uint32_t(b.inter(d[1]));
      tiles_[o].assign(size_t(b.inter(d[0])) * cols_[o], TileState{});
      elems_[o] = b.intra(d[0]) * b.intra(d[1]);
      // Eviction layer: innermost layer above the buffering level whose
      // loop variable indexes the operand.
      evict_pos_[o] = -1;
      for (int pos = 0; pos < int(t.level_of(op)) && pos < 4; ++pos)
        if (t.loop_order[pos] == d[0] || t.loop_order[pos] == d[1]) evict_pos_[o] = pos;
      intra_[o] = t.level_of(op) == kIntraTile;
    }
  }

  void step(const LightStage& s) {
    if (trace_.fault) return;
    for (Operand op : kAllOperands) {
      const int o = int(op);
      uint64_t key = 0;
      for (int pos = 0; pos <= evict_pos_[o]; ++pos) key = (key << 16) + s.p[int(t_.loop_order[pos])];
      if (!started_[o] || key != window_key_[o]) {
        if (started_[o]) flush(op);
        started_[o] = true;
        window_key_[o] = key;
        ++window_[o];
        touched_in_window_[o] = 0;
      }
    }
    if (trace_.fault) return;

    const uint32_t k = s.p[int(Dim::K)];
    switch (s.op) {
      case StageOp::Op1:
        read_input(Operand::A, s.p);
        read_input(Operand::B, s.p);
        write_intermediate(s.p, k);
        break;
      case StageOp::Softmax:
        read_intermediate(s.p, "softmax");
        break;
      case StageOp::Op2:
        read_intermediate(s.p, "consumer");
        read_input(Operand::D, s.p);
        write_output(s.p);
        break;
    }
    if (trace_.fault) return;

    ops_.push_back(s.op);
    trace_.resident_occupancy.push_back(resident_elems_);
    trace_.dram_loads.push_back(pending_dram_);
    pending_dram_ = 0;

    if (s.op == StageOp::Op1) {
      drop_if_intra(Operand::A, s.p);
      drop_if_intra(Operand::B, s.p);
    } else if (s.op == StageOp::Op2) {
      drop_if_intra(Operand::D, s.p);
      drop_if_intra(Operand::E, s.p);
    }
  }

  OracleTrace finish() {
    if (!trace_.fault)
      for (Operand op : kAllOperands) flush(op);
    if (!trace_.dram_loads.empty()) trace_.dram_loads.back() += pending_dram_;
    pending_dram_ = 0;
    for (Operand op : kAllOperands) trace_.operand_footprint[int(op)] = max_window_tiles_[int(op)] * elems_[int(op)];
    trace_.buffer_occupancy.reserve(ops_.size());
    for (StageOp op : ops_) {
      uint64_t occ = 0;
      for (Operand y : kAllOperands) {
        bool counted = !intra_[int(y)] || y == Operand::C;
        if (!counted) counted = is_producer_operand(y) ? op == StageOp::Op1 : op == StageOp::Op2;
        if (counted) occ += trace_.operand_footprint[int(y)];
      }
      trace_.buffer_occupancy.push_back(occ);
    }
    for (uint64_t v : trace_.buffer_occupancy) trace_.peak_buffer = std::max(trace_.peak_buffer, v);
    for (uint64_t v : trace_.resident_occupancy) trace_.peak_resident = std::max(trace_.peak_resident, v);
    trace_.total_dram = 0;
    for (uint64_t v : trace_.dram_loads) trace_.total_dram += v;
    return std::move(trace_);
  }

 private:
  struct TileState {
    bool resident = false;
    uint64_t window = 0;  // last window in which the tile was touched
    uint32_t count = 0;   // accumulated contributions (C, E)
  };

  TileState& tile(Operand op, const std::array<uint32_t, 4>& p) {
    const TileId id = tile_of(op, p);
    return tiles_[int(op)][size_t(id.r) * cols_[int(op)] + id.c];
  }

  void fail(const std::string& why, Operand op, const std::array<uint32_t, 4>& p) {
    if (!trace_.fault) trace_.fault = why + " (" + tile_of(op, p).to_string() + ")";
  }

  void touch(Operand op, TileState& ts) {
    const int o = int(op);
    if (ts.window != window_[o]) {
      ts.window = window_[o];
      max_window_tiles_[o] = std::max(max_window_tiles_[o], ++touched_in_window_[o]);
    }
  }

  void make_resident(Operand op, TileState& ts) {
    ts.resident = true;
    resident_elems_ += elems_[int(op)];
    resident_list_[int(op)].push_back(&ts);
  }

  void read_input(Operand op, const std::array<uint32_t, 4>& p) {
    TileState& ts = tile(op, p);
    if (!ts.resident) {
      if (intra_[int(op)] && ts.window == window_[int(op)])
        return fail("intra-tile operand reloaded within one retention window", op, p);
      make_resident(op, ts);
      pending_dram_ += elems_[int(op)];
      trace_.operand_dram[int(op)] += elems_[int(op)];
    }
    touch(op, ts);
  }

  void write_intermediate(const std::array<uint32_t, 4>& p, uint32_t k) {
    TileState& ts = tile(Operand::C, p);
    if (k == 0) {
      if (ts.resident && ts.count != kd_)
        return fail("intermediate overwritten before its reduction completed", Operand::C, p);
      if (!ts.resident) make_resident(Operand::C, ts);
      ts.count = 1;
    } else {
      if (!ts.resident) return fail("partial sum of the intermediate left the buffer", Operand::C, p);
      ++ts.count;
    }
    touch(Operand::C, ts);
  }

  void read_intermediate(const std::array<uint32_t, 4>& p, const char* who) {
    TileState& ts = tile(Operand::C, p);
    if (!ts.resident) return fail(std::string(who) + " read a non-resident intermediate tile", Operand::C, p);
    if (ts.count != kd_) return fail(std::string(who) + " read an incomplete intermediate tile", Operand::C, p);
    touch(Operand::C, ts);
  }

  void write_output(const std::array<uint32_t, 4>& p) {
    TileState& ts = tile(Operand::E, p);
    if (!ts.resident) {
      if (ts.count != 0) return fail("output partial sum re-entered the buffer", Operand::E, p);
      make_resident(Operand::E, ts);
    }
    if (++ts.count > ld_) return fail("output accumulated past its reduction extent", Operand::E, p);
    touch(Operand::E, ts);
  }

  // Removes one tile; C must be complete and E is stored if complete.
  void evict(Operand op, TileState& ts) {
    if (op == Operand::C && ts.count != kd_) {
      if (!trace_.fault) trace_.fault = "intermediate evicted before its reduction completed";
      return;
    }
    if (op == Operand::E) {
      if (ts.count != ld_) {
        if (!trace_.fault) trace_.fault = "output partial sum spilled to DRAM";
        return;
      }
      pending_dram_ += elems_[int(op)];
      trace_.operand_dram[int(op)] += elems_[int(op)];
    }
    ts.resident = false;
    resident_elems_ -= elems_[int(op)];
  }

  void flush(Operand op) {
    auto& list = resident_list_[int(op)];
    for (TileState* ts : list)
      if (ts->resident) evict(op, *ts);
    list.clear();
  }

  void drop_if_intra(Operand op, const std::array<uint32_t, 4>& p) {
    if (!intra_[int(op)]) return;
    TileState& ts = tile(op, p);
    if (ts.resident) evict(op, ts);
    auto& list = resident_list_[int(op)];
    list.erase(std::remove(list.begin(), list.end(), &ts), list.end());
  }

  const MappingTemplate& t_;
  uint32_t kd_ = 1, ld_ = 1;
  std::array<std::vector<TileState>, 5> tiles_;
  std::array<std::vector<TileState*>, 5> resident_list_;
  std::array<uint32_t, 5> cols_{};
  std::array<uint64_t, 5> elems_{};
  std::array<int, 5> evict_pos_{};
  std::array<bool, 5> intra_{};
  std::array<bool, 5> started_{};
  std::array<uint64_t, 5> window_key_{};
  std::array<uint64_t, 5> window_{};
  std::array<uint64_t, 5> touched_in_window_{};
  std::array<uint64_t, 5> max_window_tiles_{};
  uint64_t resident_elems_ = 0;
  uint64_t pending_dram_ = 0;
  std::vector<StageOp> ops_;
  OracleTrace trace_;
};

}  // namespace

std::vector<Stage> unroll(const MappingTemplate& t, const BoundaryVector& b) {
  if (t.recompute != derive_recompute(t.loop_order))
    throw std::invalid_argument("template recompute flag does not match its loop order");
  std::vector<Stage> out;
  walk(t, b, [&](const LightStage& s) { out.push_back(to_stage(s, uint32_t(out.size()))); });
  return out;
}

OracleTrace simulate(const std::vector<Stage>& stages, const MappingTemplate& t, const BoundaryVector& b) {
  Simulator sim(t, b);
  for (const Stage& s : stages) sim.step(LightStage{s.op, s.coords, s.is_recompute});
  OracleTrace trace = sim.finish();
  trace.stages = stages;
  return trace;
}

OracleTrace simulate(const MappingTemplate& t, const BoundaryVector& b) {
  if (t.recompute != derive_recompute(t.loop_order))
    throw std::invalid_argument("template recompute flag does not match its loop order");
  Simulator sim(t, b);
  walk(t, b, [&](const LightStage& s) { sim.step(s); });
  return sim.finish();
}

void write_trace_csv(std::ostream& os, const OracleTrace& trace) {
  os << "stage,op,tile,occupancy_elems,dram_elems,resident_elems\n";
  const size_t n = std::min(trace.stages.size(), trace.buffer_occupancy.size());
  for (size_t s = 0; s < n; ++s) {
    const Stage& st = trace.stages[s];
    os << st.index + 1 << ',' << stage_op_name(st.op) << ',' << st.writes.front().to_string() << ','
       << trace.buffer_occupancy[s] << ',' << trace.dram_loads[s] << ',' << trace.resident_occupancy[s] << '\n';
  }
}

ComparisonReport compare_with_analytical(const MappingTemplate& t, const BoundaryVector& b) {
  ComparisonReport r;
  const OracleTrace trace = simulate(t, b);
  const uint64_t bs = std::max(op1_buffer_expr(t).evaluate(b), op2_buffer_expr(t).evaluate(b));
  const uint64_t da = total_dram_expr(t).evaluate(b);
  r.fault = !trace.ok();
  r.bs_delta = int64_t(trace.peak_buffer) - int64_t(bs);
  r.da_delta = int64_t(trace.total_dram) - int64_t(da);
  r.bs_match = r.bs_delta == 0;
  r.da_match = r.da_delta == 0;
  if (r.fault) r.detail = *trace.fault;
  return r;
}

}  // namespace attnflow
