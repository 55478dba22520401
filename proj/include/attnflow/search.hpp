#pragma once

// Exhaustive template x tiling search with capacity filtering, single
// objective winners, the energy/latency Pareto front and DRAM-vs-buffer curves.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "attnflow/analytics.hpp"
#include "attnflow/core.hpp"
#include "attnflow/encoding.hpp"
#include "attnflow/pruning.hpp"

namespace attnflow {

enum class Objective : uint8_t { Energy, Latency, Edp, Pareto };
const char* objective_name(Objective o);
Objective parse_objective(const std::string& s);

/// Structural templates of both recompute classes with their encodings and
/// pruning verdicts.
struct TemplateLibrary {
  std::array<std::vector<EncodedTemplate>, 2> classes;  // stationary pair left at WS/WS
  std::array<std::vector<bool>, 2> retained;
  std::array<PruneStats, 2> stats;
  bool from_cache = false;

  static TemplateLibrary build();
  /// Reads the 18 group files from `dir`, or builds the library and writes them.
  static TemplateLibrary load_or_build(const std::filesystem::path& dir);

  /// Rows the search walks. With pruning: retained rows, one per distinct
  /// (BS_P, BS_C, DA) triple, lowest id first. Without: every row.
  std::vector<const EncodedTemplate*> search_rows(bool recompute, bool prune) const;

  std::vector<GroupCache> to_groups() const;
  static TemplateLibrary from_groups(const std::vector<GroupCache>& groups);
};

/// Lazily built, process-wide library (no cache directory).
const TemplateLibrary& default_library();

enum class Kernel : uint8_t { Parallel, Serial, Reference };
const char* kernel_name(Kernel k);

struct SearchOptions {
  bool prune = true;
  Kernel kernel = Kernel::Parallel;
  int threads = 0;  // 0 = OpenMP default
  const TemplateLibrary* library = nullptr;  // null = default_library()
};

struct Solution {
  uint32_t template_id = 0;
  MappingTemplate tmpl;
  uint32_t tiling_index = 0;
  BoundaryVector tiling;
  Metrics metrics;
};

struct SearchResult {
  std::optional<Solution> best_energy, best_latency, best_edp;
  /// Non-dominated (energy, latency) points, latency ascending.
  std::vector<Solution> pareto;
  /// Non-dominated (buffer bytes, DRAM elements) pairs over every evaluated
  /// mapping regardless of capacity, buffer ascending.
  std::vector<std::pair<uint64_t, uint64_t>> buffer_dram_staircase;
  uint64_t min_buffer_bytes = 0;
  uint64_t cells = 0;
  uint64_t feasible_cells = 0;
  size_t template_rows = 0;
  size_t tilings = 0;
  double runtime_ms = 0;
};

/// Thrown when no mapping fits the buffer.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(uint64_t min_required_bytes, uint64_t capacity);
  uint64_t min_required_bytes() const { return min_required_; }

 private:
  uint64_t min_required_;
};

/// Evaluates every (template, tiling) cell. Does not throw on infeasibility;
/// winners stay empty instead.
SearchResult run_search(const Workload& w, const AcceleratorConfig& hw, const SearchOptions& opts = {});

/// Winner for `objective` (Pareto returns the energy winner). Throws InfeasibleError.
Solution optimize(const Workload& w, const AcceleratorConfig& hw, Objective objective,
                  const SearchOptions& opts = {});
std::vector<Solution> pareto_front(const Workload& w, const AcceleratorConfig& hw, const SearchOptions& opts = {});

/// Minimum DRAM traffic per buffer budget in bytes; absent when nothing fits.
std::vector<std::pair<uint64_t, std::optional<uint64_t>>> dram_vs_buffer_curve(
    const Workload& w, const AcceleratorConfig& hw, const std::vector<uint64_t>& budgets,
    const SearchOptions& opts = {});

/// Reads the curve off a staircase from run_search.
std::optional<uint64_t> min_dram_within(const std::vector<std::pair<uint64_t, uint64_t>>& staircase,
                                        uint64_t budget_bytes);

/// One operator mapped on its own; the intermediate crosses DRAM once each way.
struct UnfusedResult {
  Metrics op1, op2;
  Metrics total;
  uint64_t intermediate_traffic = 0;  // 2 * I * L
  std::array<uint64_t, 5> operand_dram{};  // per head, indexed by Operand
  std::string op1_mapping, op2_mapping;
};

enum class UnfusedObjective : uint8_t { Energy, Latency, Dram };

/// Throws InfeasibleError if either operator alone cannot fit.
UnfusedResult unfused_baseline(const Workload& w, const AcceleratorConfig& hw,
                               UnfusedObjective objective = UnfusedObjective::Energy);
/// Minimum unfused DRAM traffic per buffer budget (sum of per-operator minima).
std::vector<std::pair<uint64_t, std::optional<uint64_t>>> unfused_dram_vs_buffer_curve(
    const Workload& w, const AcceleratorConfig& hw, const std::vector<uint64_t>& budgets);

}  // namespace attnflow
