#pragma once

// Domain types shared by every module of the fused two-GEMM dataflow optimizer.
//
// The fused problem is
//   C[i,l] = sum_k A[i,k] * B[k,l]        (Op1, the producer)
//   E[i,j] = sum_l softmax(C)[i,l] * D[l,j] (Op2, the consumer)
// with full extents I, K, L, J. Every extent is split into an inter-tile
// count (suffix D) and an intra-tile size (suffix G).

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace attnflow {

enum class Dim : uint8_t { I = 0, K = 1, L = 2, J = 3 };
inline constexpr int kNumDims = 4;
inline constexpr std::array<Dim, 4> kAllDims = {Dim::I, Dim::K, Dim::L, Dim::J};

char dim_name(Dim d);

/// Small bit set over {i, k, l, j}.
class DimSet {
 public:
  constexpr DimSet() = default;
  constexpr DimSet(std::initializer_list<Dim> dims) {
    for (Dim d : dims) bits_ |= bit(d);
  }
  constexpr bool contains(Dim d) const { return (bits_ & bit(d)) != 0; }
  constexpr DimSet with(Dim d) const {
    DimSet s = *this;
    s.bits_ |= bit(d);
    return s;
  }
  constexpr bool subset_of(DimSet o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr uint8_t bits() const { return bits_; }
  constexpr bool operator==(const DimSet&) const = default;
  std::string to_string() const;

 private:
  static constexpr uint8_t bit(Dim d) { return uint8_t(1u << static_cast<unsigned>(d)); }
  uint8_t bits_ = 0;
};

enum class Operand : uint8_t { A = 0, B = 1, C = 2, D = 3, E = 4 };
inline constexpr int kNumOperands = 5;
inline constexpr std::array<Operand, 5> kAllOperands = {Operand::A, Operand::B, Operand::C,
                                                         Operand::D, Operand::E};

enum class OperandRole : uint8_t { ProducerInput, Intermediate, ConsumerInput, Output };
enum class Operator : uint8_t { Op1, Op2 };

char operand_name(Operand op);
OperandRole operand_role(Operand op);

/// True for operands that take part in Op1 (A, B, C).
constexpr bool is_producer_operand(Operand op) {
  return op == Operand::A || op == Operand::B || op == Operand::C;
}

enum class Stationary : uint8_t { WS = 0, IS = 1, OS = 2 };
const char* stationary_name(Stationary s);
Stationary parse_stationary(const std::string& s);

struct StationaryPair {
  Stationary op1 = Stationary::WS;
  Stationary op2 = Stationary::WS;
  constexpr int index() const { return int(op1) * 3 + int(op2); }
  static constexpr StationaryPair from_index(int idx) {
    return {Stationary(idx / 3), Stationary(idx % 3)};
  }
  constexpr bool operator==(const StationaryPair&) const = default;
};

struct Workload {
  uint64_t I = 1, K = 1, L = 1, J = 1;
  uint64_t heads = 1;
  double c_softmax = 10.0;

  uint64_t extent(Dim d) const;
  void validate() const;
};

struct EnergyCoefficients {
  double e_dram = 200.0;
  double e_buf = 6.0;
  double e_mac = 1.0;
  double e_sfu = 1.0;
};

struct AcceleratorConfig {
  uint64_t pe_rows = 32;
  uint64_t pe_cols = 32;
  uint64_t num_arrays = 4;
  uint64_t buffer_bytes = 1ull << 20;
  uint64_t dram_bw_bytes_per_s = 60'000'000'000ull;
  uint64_t freq_hz = 1'000'000'000ull;
  uint64_t bytes_per_element = 1;
  EnergyCoefficients energy;

  void validate() const;

  /// NVDLA-like edge design: 4 x (32x32) arrays, 1 MB buffer, 60 GB/s, 1 GHz.
  static AcceleratorConfig accel1();
  /// TPU-like cloud design: 4 x (128x128) arrays, 4 MB buffer, 128 GB/s, 1 GHz.
  static AcceleratorConfig accel2();
};

/// Layer position 0..3 is an inter-tile layer (0 = outermost); kIntraTile is
/// the single-tile sentinel below all inter-tile layers.
inline constexpr uint8_t kIntraTile = 4;

struct MappingTemplate {
  std::array<Dim, 4> loop_order = {Dim::I, Dim::K, Dim::L, Dim::J};
  std::array<uint8_t, 5> level = {kIntraTile, kIntraTile, kIntraTile, kIntraTile, kIntraTile};
  StationaryPair stationary;
  bool recompute = false;

  uint8_t level_of(Operand op) const { return level[static_cast<int>(op)]; }
  int position_of(Dim d) const;
  Dim var_at(int position) const { return loop_order[position]; }
  /// tau indicator: the operand is retained at an inter-tile layer.
  bool retained(Operand op) const { return level_of(op) != kIntraTile; }

  /// e.g. "i2,l2,k2,j2"
  std::string loop_order_string() const;
  std::string level_string(Operand op) const;

  bool operator==(const MappingTemplate&) const = default;
};

/// j2 ordered outside k2 means the producer re-executes per j2 iteration.
bool derive_recompute(const std::array<Dim, 4>& loop_order);

/// Builds a template with `recompute` derived from the loop order.
MappingTemplate make_template(std::array<Dim, 4> loop_order, std::array<uint8_t, 5> level,
                              StationaryPair stationary = {});

/// Slot order [i_D, k_D, l_D, j_D, i_G, k_G, l_G, j_G].
inline constexpr int kNumSlots = 8;
constexpr int inter_slot(Dim d) { return static_cast<int>(d); }
constexpr int intra_slot(Dim d) { return 4 + static_cast<int>(d); }

struct BoundaryVector {
  std::array<uint64_t, 8> b = {1, 1, 1, 1, 1, 1, 1, 1};

  uint64_t inter(Dim d) const { return b[inter_slot(d)]; }
  uint64_t intra(Dim d) const { return b[intra_slot(d)]; }
  bool consistent_with(const Workload& w) const;
  std::string to_string() const;
  bool operator==(const BoundaryVector&) const = default;
};

DimSet operand_dims(Operand op);
DimSet operator_dims(Operator which);
/// Dimensions whose iteration re-touches the operand. For producer inputs under
/// recompute this is the union of both operators' dimensions.
DimSet effective_dims(Operand op, bool recompute);

/// Innermost inter-tile layer outside `op`'s buffering level whose variable
/// indexes `op`. Advancing it (or anything above it) replaces the buffered data.
std::optional<int> find_blocker(const MappingTemplate& t, Operand op);

/// Outermost inter-tile layer position whose variable is one of `op`'s dims.
int outermost_own_layer(const MappingTemplate& t, Operand op);

/// Valid buffering levels for `op` under loop order `t.loop_order`.
bool level_in_domain(const MappingTemplate& t, Operand op, uint8_t level);

struct ValidityReport {
  bool recompute_consistent = true;
  bool levels_in_domain = true;
  bool intermediate_complete = true;  // C never evicted before k2 completes / all j2 consumed
  bool output_complete = true;        // E never evicted before l2 completes
  bool intra_levels_sound = true;     // sentinel operands are never reused across the other operator
  bool ok() const {
    return recompute_consistent && levels_in_domain && intermediate_complete && output_complete &&
           intra_levels_sound;
  }
};

ValidityReport check_template(const MappingTemplate& t);
bool validate_template(const MappingTemplate& t);

std::string describe(const MappingTemplate& t);

}  // namespace attnflow
