#include "attnflow/analytics.hpp"

#include <algorithm>

namespace attnflow {

namespace {

constexpr DimSet kOp1Dims{Dim::I, Dim::K, Dim::L};
constexpr DimSet kOp2Dims{Dim::I, Dim::L, Dim::J};

Exponents full_tensor(Operand op) {
  const DimSet d = operand_dims(op);
  return add(inter_of(d), intra_of(d));
}

// Producer generations: j_D when the producer re-runs per consumer column.
Exponents generations(const MappingTemplate& t) {
  return t.recompute ? inter_of({Dim::J}) : Exponents{};
}

Exponents op1_invocations(const MappingTemplate& t) {
  return add(inter_of(kOp1Dims), generations(t));
}

Exponents op2_invocations() { return inter_of(kOp2Dims); }

Polynomial mono(const Exponents& e, uint64_t c = 1) { return Polynomial::monomial(c, e); }

}  // namespace

Polynomial buffer_size_expr(const MappingTemplate& t, Operand op) {
  const DimSet own = operand_dims(op);
  Exponents e = intra_of(own);
  for (int p = t.level_of(op); p < 4; ++p)
    if (own.contains(t.loop_order[p])) e[inter_slot(t.loop_order[p])] += 1;
  return mono(e);
}

Polynomial dram_access_expr(const MappingTemplate& t, Operand op) {
  if (op == Operand::C) return Polynomial::zero();
  Polynomial bs = buffer_size_expr(t, op);
  const auto blocker = find_blocker(t, op);
  if (!blocker) return bs;
  const DimSet eff = effective_dims(op, t.recompute);
  Exponents e{};
  for (int p = 0; p <= *blocker; ++p)
    if (eff.contains(t.loop_order[p])) e[inter_slot(t.loop_order[p])] += 1;
  return bs.times(1, e);
}

Polynomial op1_buffer_expr(const MappingTemplate& t) {
  Polynomial p = buffer_size_expr(t, Operand::A) + buffer_size_expr(t, Operand::B) +
                 buffer_size_expr(t, Operand::C);
  if (t.retained(Operand::D)) p += buffer_size_expr(t, Operand::D);
  if (t.retained(Operand::E)) p += buffer_size_expr(t, Operand::E);
  return p;
}

Polynomial op2_buffer_expr(const MappingTemplate& t) {
  Polynomial p = buffer_size_expr(t, Operand::C) + buffer_size_expr(t, Operand::D) +
                 buffer_size_expr(t, Operand::E);
  if (t.retained(Operand::A)) p += buffer_size_expr(t, Operand::A);
  if (t.retained(Operand::B)) p += buffer_size_expr(t, Operand::B);
  return p;
}

Polynomial total_dram_expr(const MappingTemplate& t) {
  Polynomial p;
  for (Operand op : kAllOperands) p += dram_access_expr(t, op);
  return p;
}

Polynomial op1_buffer_rf_expr(const MappingTemplate& t) {
  const Exponents n = op1_invocations(t);
  const Exponents g = generations(t);
  const Exponents a = intra_of(operand_dims(Operand::A));
  const Exponents bb = intra_of(operand_dims(Operand::B));
  const Exponents c = intra_of(operand_dims(Operand::C));
  switch (t.stationary.op1) {
    case Stationary::WS:
      return mono(add(full_tensor(Operand::B), g)) + mono(add(n, a)) + mono(add(n, c), 2);
    case Stationary::IS:
      return mono(add(full_tensor(Operand::A), g)) + mono(add(n, bb)) + mono(add(n, c), 2);
    case Stationary::OS:
      return mono(add(n, a)) + mono(add(n, bb)) + mono(add(full_tensor(Operand::C), g), 2);
  }
  return {};
}

Polynomial op2_buffer_rf_expr(const MappingTemplate& t) {
  const Exponents n = op2_invocations();
  const Exponents c = intra_of(operand_dims(Operand::C));
  const Exponents d = intra_of(operand_dims(Operand::D));
  const Exponents e = intra_of(operand_dims(Operand::E));
  switch (t.stationary.op2) {
    case Stationary::WS:
      return mono(full_tensor(Operand::D)) + mono(add(n, c)) + mono(add(n, e), 2);
    case Stationary::IS:
      return mono(full_tensor(Operand::C)) + mono(add(n, d)) + mono(add(n, e), 2);
    case Stationary::OS:
      return mono(add(n, c)) + mono(add(n, d)) + mono(full_tensor(Operand::E), 2);
  }
  return {};
}

Polynomial buffer_rf_expr(const MappingTemplate& t) {
  return op1_buffer_rf_expr(t) + op2_buffer_rf_expr(t);
}

Polynomial op1_compute_expr(const MappingTemplate& t) {
  return mono(add(op1_invocations(t), intra_of({Dim::K})));
}

Polynomial op2_compute_expr(const MappingTemplate&) {
  return mono(add(op2_invocations(), intra_of({Dim::L})));
}

Polynomial macs_expr(const MappingTemplate& t) {
  const Exponents n1 = add(inter_of(kOp1Dims), intra_of(kOp1Dims));
  const Exponents n2 = add(inter_of(kOp2Dims), intra_of(kOp2Dims));
  return mono(add(n1, generations(t))) + mono(n2);
}

Polynomial softmax_elems_expr(const MappingTemplate& t) {
  return mono(add(full_tensor(Operand::C), generations(t)));
}

uint64_t ceil_div(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

uint64_t op1_array_factor(const BoundaryVector& b, const AcceleratorConfig& hw) {
  return ceil_div(b.intra(Dim::I), hw.pe_rows) * ceil_div(b.intra(Dim::L), hw.pe_cols);
}

uint64_t op2_array_factor(const BoundaryVector& b, const AcceleratorConfig& hw) {
  return ceil_div(b.intra(Dim::I), hw.pe_rows) * ceil_div(b.intra(Dim::J), hw.pe_cols);
}

uint64_t dram_cycles(uint64_t total_elems, const AcceleratorConfig& hw) {
  using u128 = unsigned __int128;
  const u128 num = u128(total_elems) * hw.bytes_per_element * hw.freq_hz;
  const u128 bw = hw.dram_bw_bytes_per_s;
  return uint64_t((num + bw - 1) / bw);
}

void finish_metrics(Metrics& m, const CostInputs& in, const Workload& w, const AcceleratorConfig& hw) {
  const double heads = double(w.heads);
  const auto& e = hw.energy;
  m.dram_elems = in.dram_elems;
  m.buffer_rf = in.buffer_rf;
  m.macs = in.macs;
  m.softmax_elems = in.softmax_elems;
  m.compute_cycles = ceil_div(w.heads, hw.num_arrays) * in.compute_passes;
  m.dram_cycles = dram_cycles(w.heads * in.dram_elems, hw);
  m.latency_cycles = std::max(m.compute_cycles, m.dram_cycles);
  m.energy_dram = heads * e.e_dram * double(in.dram_elems);
  m.energy_buffer = heads * e.e_buf * double(in.buffer_rf);
  m.energy_mac = heads * e.e_mac * double(in.macs);
  m.energy_softmax = heads * e.e_sfu * w.c_softmax * double(in.softmax_elems);
  m.energy = m.energy_dram + m.energy_buffer + m.energy_mac + m.energy_softmax;
  const double peak = double(hw.pe_rows * hw.pe_cols * std::min(w.heads, hw.num_arrays));
  m.utilization = m.compute_cycles ? heads * double(in.macs) / (peak * double(m.compute_cycles)) : 0.0;
}

Metrics evaluate(const MappingTemplate& t, const BoundaryVector& b, const Workload& w,
                 const AcceleratorConfig& hw) {
  Metrics m;
  m.bs_op1 = op1_buffer_expr(t).evaluate(b);
  m.bs_op2 = op2_buffer_expr(t).evaluate(b);
  m.buffer_elems = std::max(m.bs_op1, m.bs_op2);
  m.buffer_bytes = m.buffer_elems * hw.bytes_per_element;
  m.feasible = m.buffer_bytes <= hw.buffer_bytes;
  CostInputs in;
  in.dram_elems = total_dram_expr(t).evaluate(b);
  in.buffer_rf = buffer_rf_expr(t).evaluate(b);
  in.macs = macs_expr(t).evaluate(b);
  in.softmax_elems = softmax_elems_expr(t).evaluate(b);
  in.compute_passes = op1_compute_expr(t).evaluate(b) * op1_array_factor(b, hw) +
                      op2_compute_expr(t).evaluate(b) * op2_array_factor(b, hw);
  finish_metrics(m, in, w, hw);
  return m;
}

}  // namespace attnflow
