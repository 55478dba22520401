#pragma once

// Closed-form buffer, traffic, compute and energy model of a fused mapping.
// Everything here is per head unless the name says otherwise.

#include <cstdint>

#include "attnflow/core.hpp"
#include "attnflow/expr.hpp"

namespace attnflow {

/// Elements of `op` held in the buffer under template `t`.
Polynomial buffer_size_expr(const MappingTemplate& t, Operand op);
/// Elements of `op` moved between DRAM and buffer. Zero for the intermediate.
Polynomial dram_access_expr(const MappingTemplate& t, Operand op);

/// Buffer needed while the producer runs.
Polynomial op1_buffer_expr(const MappingTemplate& t);
/// Buffer needed while the consumer runs.
Polynomial op2_buffer_expr(const MappingTemplate& t);
Polynomial total_dram_expr(const MappingTemplate& t);

/// Buffer-to-register traffic of each operator, as fixed by its stationary mode.
Polynomial op1_buffer_rf_expr(const MappingTemplate& t);
Polynomial op2_buffer_rf_expr(const MappingTemplate& t);
Polynomial buffer_rf_expr(const MappingTemplate& t);

/// Array-pass counts before the PE-array ceil factors; see compute_cycles().
Polynomial op1_compute_expr(const MappingTemplate& t);
Polynomial op2_compute_expr(const MappingTemplate& t);

Polynomial macs_expr(const MappingTemplate& t);
/// Number of softmax evaluations of the score tile (I*L, times j_D under recompute).
Polynomial softmax_elems_expr(const MappingTemplate& t);

uint64_t ceil_div(uint64_t a, uint64_t b);

/// ceil(i_G/R) * ceil(l_G/C): array passes per intra-tile step of the producer.
uint64_t op1_array_factor(const BoundaryVector& b, const AcceleratorConfig& hw);
/// ceil(i_G/R) * ceil(j_G/C) for the consumer.
uint64_t op2_array_factor(const BoundaryVector& b, const AcceleratorConfig& hw);

struct Metrics {
  uint64_t bs_op1 = 0;       // elements
  uint64_t bs_op2 = 0;       // elements
  uint64_t buffer_elems = 0; // max of the two
  uint64_t buffer_bytes = 0;
  uint64_t dram_elems = 0;   // per head
  uint64_t buffer_rf = 0;    // per head
  uint64_t macs = 0;         // per head
  uint64_t softmax_elems = 0;
  uint64_t compute_cycles = 0;
  uint64_t dram_cycles = 0;
  uint64_t latency_cycles = 0;
  double energy_dram = 0, energy_buffer = 0, energy_mac = 0, energy_softmax = 0;
  double energy = 0;
  double utilization = 0;
  bool feasible = false;
};

/// Values that drive energy and latency once buffer size and traffic are known.
struct CostInputs {
  uint64_t dram_elems = 0;
  uint64_t buffer_rf = 0;
  uint64_t macs = 0;
  uint64_t softmax_elems = 0;
  uint64_t compute_passes = 0;  // per head, after array factors
};

/// Fills the latency and energy fields of `m` from per-head counts.
void finish_metrics(Metrics& m, const CostInputs& in, const Workload& w, const AcceleratorConfig& hw);

uint64_t dram_cycles(uint64_t total_elems, const AcceleratorConfig& hw);

/// Direct evaluation of every expression at one tiling. This is the reference
/// path the encoded kernels are checked against.
Metrics evaluate(const MappingTemplate& t, const BoundaryVector& b, const Workload& w,
                 const AcceleratorConfig& hw);

}  // namespace attnflow
