#pragma once

// Tile-level execution oracle. Unrolls a concrete mapping into compute
// stages and replays buffer residency and DRAM traffic tile by tile.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "attnflow/core.hpp"

namespace attnflow {

enum class StageOp : uint8_t { Op1, Softmax, Op2 };
const char* stage_op_name(StageOp op);

struct TileId {
  Operand operand = Operand::A;
  uint32_t r = 0, c = 0;  // inter-tile coordinates along the operand's two dims
  bool operator==(const TileId&) const = default;
  std::string to_string() const;
};

struct Stage {
  uint32_t index = 0;
  StageOp op = StageOp::Op1;
  std::array<uint32_t, 4> coords{};  // i2, k2, l2, j2 at the firing point
  std::vector<TileId> reads;
  std::vector<TileId> writes;
  bool is_recompute = false;
};

/// Stage sequence of the loop nest. Requires a recompute flag that matches
/// the loop order.
std::vector<Stage> unroll(const MappingTemplate& t, const BoundaryVector& b);

struct OracleTrace {
  std::vector<Stage> stages;
  /// Buffer space reserved during each stage, in elements.
  std::vector<uint64_t> buffer_occupancy;
  /// Elements of the tiles actually present during each stage.
  std::vector<uint64_t> resident_occupancy;
  std::vector<uint64_t> dram_loads;
  uint64_t peak_buffer = 0;
  uint64_t peak_resident = 0;
  uint64_t total_dram = 0;
  std::array<uint64_t, 5> operand_dram{};
  std::array<uint64_t, 5> operand_footprint{};
  std::optional<std::string> fault;

  bool ok() const { return !fault.has_value(); }
};

OracleTrace simulate(const std::vector<Stage>& stages, const MappingTemplate& t, const BoundaryVector& b);
OracleTrace simulate(const MappingTemplate& t, const BoundaryVector& b);

void write_trace_csv(std::ostream& os, const OracleTrace& trace);

struct ComparisonReport {
  bool bs_match = false;
  bool da_match = false;
  bool fault = false;
  int64_t bs_delta = 0;  // oracle minus analytical, elements
  int64_t da_delta = 0;
  std::string detail;
  bool ok() const { return bs_match && da_match && !fault; }
};

ComparisonReport compare_with_analytical(const MappingTemplate& t, const BoundaryVector& b);

}  // namespace attnflow
