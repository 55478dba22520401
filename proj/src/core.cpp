#include "attnflow/core.hpp"

#include <cctype>
#include <sstream>

namespace attnflow {

char dim_name(Dim d) {
  static constexpr char kNames[] = {'i', 'k', 'l', 'j'};
  return kNames[static_cast<int>(d)];
}

std::string DimSet::to_string() const {
  std::string s = "{";
  for (Dim d : kAllDims) {
    if (!contains(d)) continue;
    if (s.size() > 1) s += ',';
    s += dim_name(d);
  }
  return s + "}";
}

char operand_name(Operand op) { return "ABCDE"[static_cast<int>(op)]; }

OperandRole operand_role(Operand op) {
  switch (op) {
    case Operand::A:
    case Operand::B: return OperandRole::ProducerInput;
    case Operand::C: return OperandRole::Intermediate;
    case Operand::D: return OperandRole::ConsumerInput;
    case Operand::E: return OperandRole::Output;
  }
  return OperandRole::Output;
}

const char* stationary_name(Stationary s) {
  switch (s) {
    case Stationary::WS: return "WS";
    case Stationary::IS: return "IS";
    case Stationary::OS: return "OS";
  }
  return "?";
}

Stationary parse_stationary(const std::string& s) {
  if (s == "WS") return Stationary::WS;
  if (s == "IS") return Stationary::IS;
  if (s == "OS") return Stationary::OS;
  throw std::invalid_argument("unknown stationary mode '" + s + "'");
}

uint64_t Workload::extent(Dim d) const {
  switch (d) {
    case Dim::I: return I;
    case Dim::K: return K;
    case Dim::L: return L;
    case Dim::J: return J;
  }
  return 0;
}

void Workload::validate() const {
  for (Dim d : kAllDims)
    if (extent(d) == 0)
      throw std::invalid_argument(std::string("workload dimension ") + char(std::toupper(dim_name(d))) +
                                  " must be positive");
  if (heads == 0) throw std::invalid_argument("workload heads must be positive");
  if (!(c_softmax >= 0.0)) throw std::invalid_argument("workload c_softmax must be non-negative");
}

void AcceleratorConfig::validate() const {
  if (pe_rows == 0 || pe_cols == 0) throw std::invalid_argument("PE array dimensions must be positive");
  if (num_arrays == 0) throw std::invalid_argument("num_arrays must be positive");
  if (buffer_bytes == 0) throw std::invalid_argument("buffer_bytes must be positive");
  if (dram_bw_bytes_per_s == 0) throw std::invalid_argument("dram_bw_bytes_per_s must be positive");
  if (freq_hz == 0) throw std::invalid_argument("freq_hz must be positive");
  if (bytes_per_element == 0) throw std::invalid_argument("bytes_per_element must be positive");
  const auto& e = energy;
  if (e.e_dram < 0 || e.e_buf < 0 || e.e_mac < 0 || e.e_sfu < 0)
    throw std::invalid_argument("energy coefficients must be non-negative");
}

AcceleratorConfig AcceleratorConfig::accel1() { return AcceleratorConfig{}; }

AcceleratorConfig AcceleratorConfig::accel2() {
  AcceleratorConfig a;
  a.pe_rows = 128;
  a.pe_cols = 128;
  a.num_arrays = 4;
  a.buffer_bytes = 4ull << 20;
  a.dram_bw_bytes_per_s = 128'000'000'000ull;
  return a;
}

int MappingTemplate::position_of(Dim d) const {
  for (int p = 0; p < 4; ++p)
    if (loop_order[p] == d) return p;
  throw std::logic_error("loop order is not a permutation");
}

std::string MappingTemplate::loop_order_string() const {
  std::string s;
  for (int p = 0; p < 4; ++p) {
    if (p) s += ',';
    s += dim_name(loop_order[p]);
    s += '2';
  }
  return s;
}

std::string MappingTemplate::level_string(Operand op) const {
  uint8_t lv = level_of(op);
  if (lv == kIntraTile) return "intra";
  return std::string(1, dim_name(loop_order[lv])) + "2";
}

bool derive_recompute(const std::array<Dim, 4>& loop_order) {
  int pj = -1, pk = -1;
  for (int p = 0; p < 4; ++p) {
    if (loop_order[p] == Dim::J) pj = p;
    if (loop_order[p] == Dim::K) pk = p;
  }
  return pj < pk;
}

MappingTemplate make_template(std::array<Dim, 4> loop_order, std::array<uint8_t, 5> level,
                              StationaryPair stationary) {
  MappingTemplate t;
  t.loop_order = loop_order;
  t.level = level;
  t.stationary = stationary;
  t.recompute = derive_recompute(loop_order);
  return t;
}

bool BoundaryVector::consistent_with(const Workload& w) const {
  for (Dim d : kAllDims)
    if (inter(d) == 0 || intra(d) == 0 || inter(d) * intra(d) != w.extent(d)) return false;
  return true;
}

std::string BoundaryVector::to_string() const {
  std::ostringstream os;
  os << '[';
  for (int s = 0; s < kNumSlots; ++s) os << (s ? "," : "") << b[s];
  os << ']';
  return os.str();
}

DimSet operand_dims(Operand op) {
  switch (op) {
    case Operand::A: return {Dim::I, Dim::K};
    case Operand::B: return {Dim::K, Dim::L};
    case Operand::C: return {Dim::I, Dim::L};
    case Operand::D: return {Dim::L, Dim::J};
    case Operand::E: return {Dim::I, Dim::J};
  }
  return {};
}

DimSet operator_dims(Operator which) {
  return which == Operator::Op1 ? DimSet{Dim::I, Dim::K, Dim::L} : DimSet{Dim::I, Dim::L, Dim::J};
}

DimSet effective_dims(Operand op, bool recompute) {
  switch (op) {
    case Operand::A:
    case Operand::B:
      return recompute ? DimSet{Dim::I, Dim::K, Dim::L, Dim::J} : operator_dims(Operator::Op1);
    case Operand::C: return {Dim::I, Dim::K, Dim::L, Dim::J};
    case Operand::D:
    case Operand::E: return operator_dims(Operator::Op2);
  }
  return {};
}

std::optional<int> find_blocker(const MappingTemplate& t, Operand op) {
  const DimSet own = operand_dims(op);
  for (int p = int(t.level_of(op)) - 1; p >= 0; --p)
    if (own.contains(t.loop_order[p])) return p;
  return std::nullopt;
}

int outermost_own_layer(const MappingTemplate& t, Operand op) {
  const DimSet own = operand_dims(op);
  for (int p = 0; p < 4; ++p)
    if (own.contains(t.loop_order[p])) return p;
  return 4;
}

bool level_in_domain(const MappingTemplate& t, Operand op, uint8_t level) {
  if (level == kIntraTile) return true;
  return level < 4 && level >= outermost_own_layer(t, op);
}

namespace {

// Is some layer strictly below position `blocker` (or any layer if none) a
// variable in `dims`?
bool layer_below(const MappingTemplate& t, std::optional<int> blocker, DimSet dims) {
  for (int p = blocker ? *blocker + 1 : 0; p < 4; ++p)
    if (dims.contains(t.loop_order[p])) return true;
  return false;
}

}  // namespace

ValidityReport check_template(const MappingTemplate& t) {
  ValidityReport r;
  r.recompute_consistent = t.recompute == derive_recompute(t.loop_order);
  for (Operand op : kAllOperands)
    if (!level_in_domain(t, op, t.level_of(op))) r.levels_in_domain = false;

  const auto bc = find_blocker(t, Operand::C);
  if (bc) {
    const int pk = t.position_of(Dim::K);
    const int pj = t.position_of(Dim::J);
    if (pk <= *bc) r.intermediate_complete = false;
    if (!t.recompute && pj <= *bc) r.intermediate_complete = false;
  }

  const auto be = find_blocker(t, Operand::E);
  if (be && t.position_of(Dim::L) <= *be) r.output_complete = false;

  for (Operand op : kAllOperands) {
    if (t.retained(op) || op == Operand::C) continue;
    const DimSet eff = effective_dims(op, t.recompute);
    const DimSet own = operand_dims(op);
    DimSet foreign;
    for (Dim d : kAllDims)
      if (eff.contains(d) && !own.contains(d)) foreign = foreign.with(d);
    if (layer_below(t, find_blocker(t, op), foreign)) r.intra_levels_sound = false;
  }
  return r;
}

bool validate_template(const MappingTemplate& t) { return check_template(t).ok(); }

std::string describe(const MappingTemplate& t) {
  std::ostringstream os;
  os << "order=" << t.loop_order_string() << " levels=";
  for (Operand op : kAllOperands) os << operand_name(op) << ':' << t.level_string(op) << ' ';
  os << "st=" << stationary_name(t.stationary.op1) << '/' << stationary_name(t.stationary.op2)
     << (t.recompute ? " recompute" : "");
  return os.str();
}

}  // namespace attnflow
