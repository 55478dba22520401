#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <limits>

#include "attnflow/enumeration.hpp"
#include "attnflow/search.hpp"
#include "generators.hpp"

using namespace attnflow;
using testing::Gen;

namespace {

// 2x2 arrays and a slow DRAM so small workloads see real tradeoffs.
AcceleratorConfig tiny_accelerator(uint64_t buffer_bytes) {
  auto hw = AcceleratorConfig::accel1();
  hw.pe_rows = hw.pe_cols = 2;
  hw.num_arrays = 2;
  hw.buffer_bytes = buffer_bytes;
  hw.dram_bw_bytes_per_s = 2'000'000'000ull;
  return hw;
}

struct Case {
  Workload w;
  AcceleratorConfig hw;
};

std::vector<Case> small_cases() {
  std::vector<Case> cases;
  for (Workload w : {Workload{4, 4, 4, 4}, Workload{6, 6, 6, 6}, Workload{8, 2, 8, 4}}) {
    for (uint64_t buf : {24, 32, 48, 64}) cases.push_back({w, tiny_accelerator(buf)});
    cases.push_back({w, AcceleratorConfig::accel1()});
    cases.push_back({w, AcceleratorConfig::accel2()});
  }
  cases[1].w.heads = 4;
  return cases;
}

std::vector<std::pair<uint64_t, double>> points(const std::vector<Solution>& front) {
  std::vector<std::pair<uint64_t, double>> p;
  for (const auto& s : front) p.emplace_back(s.metrics.latency_cycles, s.metrics.energy);
  return p;
}

bool same_solution(const std::optional<Solution>& a, const std::optional<Solution>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || (a->template_id == b->template_id && a->tiling_index == b->tiling_index);
}

// Brute force over every template and tiling with the closed forms evaluated
// term by term, bypassing the encoded kernels.
struct Brute {
  double min_energy = std::numeric_limits<double>::infinity();
  uint64_t min_latency = std::numeric_limits<uint64_t>::max();
  uint64_t min_buffer = std::numeric_limits<uint64_t>::max();
};

Brute brute_force(const Workload& w, const AcceleratorConfig& hw) {
  Brute r;
  const auto tilings = enumerate_tilings(w);
  for (const auto& t : enumerate_templates()) {
    const Polynomial bs1 = op1_buffer_expr(t), bs2 = op2_buffer_expr(t), da = total_dram_expr(t),
                     br = buffer_rf_expr(t), macs = macs_expr(t), sm = softmax_elems_expr(t),
                     c1 = op1_compute_expr(t), c2 = op2_compute_expr(t);
    for (const auto& b : tilings) {
      Metrics m;
      m.buffer_bytes = std::max(bs1.evaluate(b), bs2.evaluate(b)) * hw.bytes_per_element;
      r.min_buffer = std::min(r.min_buffer, m.buffer_bytes);
      if (m.buffer_bytes > hw.buffer_bytes) continue;
      const CostInputs in{da.evaluate(b), br.evaluate(b), macs.evaluate(b), sm.evaluate(b),
                          c1.evaluate(b) * op1_array_factor(b, hw) + c2.evaluate(b) * op2_array_factor(b, hw)};
      finish_metrics(m, in, w, hw);
      r.min_energy = std::min(r.min_energy, m.energy);
      r.min_latency = std::min(r.min_latency, m.latency_cycles);
    }
  }
  return r;
}

}  // namespace

TEST_CASE("some small case has a non-trivial front") {
  size_t largest = 0;
  for (const auto& c : small_cases()) largest = std::max(largest, run_search(c.w, c.hw).pareto.size());
  CHECK(largest >= 3);
}

TEST_CASE("kernels agree") {
  for (const auto& c : small_cases()) {
    SearchOptions o;
    o.kernel = Kernel::Serial;
    const auto serial = run_search(c.w, c.hw, o);
    o.kernel = Kernel::Parallel;
    const auto parallel = run_search(c.w, c.hw, o);
    o.kernel = Kernel::Reference;
    const auto reference = run_search(c.w, c.hw, o);
    for (const auto* r : {&parallel, &reference}) {
      CHECK(same_solution(serial.best_energy, r->best_energy));
      CHECK(same_solution(serial.best_latency, r->best_latency));
      CHECK(same_solution(serial.best_edp, r->best_edp));
      CHECK(points(serial.pareto) == points(r->pareto));
      CHECK(serial.buffer_dram_staircase == r->buffer_dram_staircase);
      CHECK(serial.cells == r->cells);
      CHECK(serial.feasible_cells == r->feasible_cells);
      CHECK(serial.min_buffer_bytes == r->min_buffer_bytes);
    }
    if (serial.best_energy) {
      const auto& s = *serial.best_energy;
      const Metrics direct = evaluate(s.tmpl, s.tiling, c.w, c.hw);
      CHECK(direct.energy == s.metrics.energy);
      CHECK(direct.latency_cycles == s.metrics.latency_cycles);
    }
  }
}

TEST_CASE("pruning keeps the front and the single-objective optima") {
  for (const auto& c : small_cases()) {
    SearchOptions o;
    const auto pruned = run_search(c.w, c.hw, o);
    o.prune = false;
    const auto full = run_search(c.w, c.hw, o);
    CHECK(points(pruned.pareto) == points(full.pareto));
    REQUIRE(pruned.best_energy.has_value() == full.best_energy.has_value());
    if (!full.best_energy) continue;
    CHECK(pruned.best_energy->metrics.energy == full.best_energy->metrics.energy);
    CHECK(pruned.best_latency->metrics.latency_cycles == full.best_latency->metrics.latency_cycles);
    CHECK(pruned.best_edp->metrics.energy * double(pruned.best_edp->metrics.latency_cycles) ==
          full.best_edp->metrics.energy * double(full.best_edp->metrics.latency_cycles));
    CHECK(pruned.cells < full.cells);
  }
}

TEST_CASE("pruned search matches brute force on random workloads") {
  Gen g(81);
  for (int n = 0; n < 6; ++n) {
    Workload w = g.workload({1, 2, 3, 4, 6});
    const auto hw = g.coin() ? tiny_accelerator(g.uniform(8, 64)) : AcceleratorConfig::accel2();
    const Brute b = brute_force(w, hw);
    const auto r = run_search(w, hw);
    INFO(w.I, "x", w.K, "x", w.L, "x", w.J, " buf ", hw.buffer_bytes);
    CHECK(r.min_buffer_bytes == b.min_buffer);
    REQUIRE(r.best_energy.has_value() == std::isfinite(b.min_energy));
    if (!r.best_energy) continue;
    CHECK(r.best_energy->metrics.energy == b.min_energy);
    CHECK(r.best_latency->metrics.latency_cycles == b.min_latency);
  }
}

TEST_CASE("front is non-dominated and consistent with the objectives") {
  for (const auto& c : small_cases()) {
    const auto r = run_search(c.w, c.hw);
    REQUIRE(!r.pareto.empty());
    for (size_t k = 1; k < r.pareto.size(); ++k) {
      CHECK(r.pareto[k - 1].metrics.latency_cycles < r.pareto[k].metrics.latency_cycles);
      CHECK(r.pareto[k - 1].metrics.energy > r.pareto[k].metrics.energy);
    }
    for (const auto& s : r.pareto) CHECK(s.metrics.feasible);
    CHECK(r.pareto.front().metrics.latency_cycles == r.best_latency->metrics.latency_cycles);
    CHECK(r.pareto.back().metrics.energy == r.best_energy->metrics.energy);
    // The EDP winner is never dominated, so some front point matches it.
    const auto& e = r.best_edp->metrics;
    bool found = false;
    for (const auto& s : r.pareto)
      found = found || (s.metrics.energy == e.energy && s.metrics.latency_cycles == e.latency_cycles);
    CHECK(found);
  }
}

TEST_CASE("single mapping workload") {
  const Workload w{1, 1, 1, 1};
  const auto r = run_search(w, AcceleratorConfig::accel1());
  CHECK(r.tilings == 1);
  REQUIRE(r.best_energy.has_value());
  CHECK(r.best_energy->metrics.dram_elems == 4);
  CHECK(r.pareto.size() == 1);
}

TEST_CASE("infeasible capacity") {
  const Workload w{8, 8, 8, 8};
  const auto hw = tiny_accelerator(2);
  const auto r = run_search(w, hw);
  CHECK_FALSE(r.best_energy.has_value());
  CHECK(r.pareto.empty());
  CHECK(r.feasible_cells == 0);
  CHECK(r.min_buffer_bytes > 2);
  try {
    optimize(w, hw, Objective::Energy);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(e.min_required_bytes() == r.min_buffer_bytes);
  }
  CHECK_THROWS_AS(pareto_front(w, hw), InfeasibleError);
  // Exactly the reported minimum is enough.
  CHECK_NOTHROW(optimize(w, tiny_accelerator(r.min_buffer_bytes), Objective::Energy));
}

TEST_CASE("objective names") {
  for (auto o : {Objective::Energy, Objective::Latency, Objective::Edp, Objective::Pareto})
    CHECK(parse_objective(objective_name(o)) == o);
  CHECK_THROWS(parse_objective("speed"));
}

TEST_CASE("DRAM versus buffer curve is non-increasing") {
  Gen g(91);
  for (int n = 0; n < 6; ++n) {
    const Workload w = g.workload({2, 4, 8});
    std::vector<uint64_t> budgets;
    for (uint64_t b = 4; b <= 4096; b *= 2) budgets.push_back(b);
    const auto curve = dram_vs_buffer_curve(w, AcceleratorConfig::accel1(), budgets);
    REQUIRE(curve.size() == budgets.size());
    std::optional<uint64_t> prev;
    for (const auto& [budget, v] : curve) {
      if (prev) {
        REQUIRE(v.has_value());
        CHECK(*v <= *prev);
      }
      if (v) prev = v;
    }
    REQUIRE(prev.has_value());
    CHECK(*prev == w.I * w.K + w.K * w.L + w.L * w.J + w.I * w.J);
  }
}

TEST_CASE("staircase lookup") {
  const std::vector<std::pair<uint64_t, uint64_t>> s = {{10, 100}, {20, 50}, {40, 30}};
  CHECK_FALSE(min_dram_within(s, 9).has_value());
  CHECK(min_dram_within(s, 10) == 100u);
  CHECK(min_dram_within(s, 39) == 50u);
  CHECK(min_dram_within(s, 1000) == 30u);
}

TEST_CASE("unfused baseline pays for the intermediate") {
  const Workload w{4, 2, 4, 2};
  const auto hw = AcceleratorConfig::accel1();
  const auto u = unfused_baseline(w, hw, UnfusedObjective::Dram);
  CHECK(u.intermediate_traffic == 2 * w.I * w.L);
  // With everything fitting, fused reads each input once and writes E once.
  const uint64_t fused = optimize(w, hw, Objective::Energy).metrics.dram_elems;
  CHECK(fused == w.I * w.K + w.K * w.L + w.L * w.J + w.I * w.J);
  CHECK(u.total.dram_elems == fused + u.intermediate_traffic);
  CHECK(u.operand_dram[int(Operand::C)] == u.intermediate_traffic);
  uint64_t sum = 0;
  for (uint64_t v : u.operand_dram) sum += v;
  CHECK(sum == u.total.dram_elems);
  CHECK(u.total.macs == w.I * w.L * (w.K + w.J));
}

TEST_CASE("unfused curve never beats fused") {
  const Workload w{8, 4, 8, 4};
  const auto hw = AcceleratorConfig::accel1();
  const std::vector<uint64_t> budgets = {16, 32, 64, 128, 256, 1024};
  const auto fused = dram_vs_buffer_curve(w, hw, budgets);
  const auto unfused = unfused_dram_vs_buffer_curve(w, hw, budgets);
  bool gap = false;
  for (size_t k = 0; k < budgets.size(); ++k) {
    if (!unfused[k].second) continue;
    REQUIRE(fused[k].second.has_value());
    CHECK(*fused[k].second < *unfused[k].second);
    gap = true;
  }
  CHECK(gap);
}

TEST_CASE("cached library equals a fresh build") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "attnflow_test_library";
  fs::remove_all(dir);
  const auto built = TemplateLibrary::load_or_build(dir);
  CHECK_FALSE(built.from_cache);
  const auto loaded = TemplateLibrary::load_or_build(dir);
  CHECK(loaded.from_cache);
  for (int rc = 0; rc < 2; ++rc) {
    CHECK(loaded.retained[rc] == built.retained[rc]);
    REQUIRE(loaded.classes[rc].size() == built.classes[rc].size());
    for (size_t k = 0; k < built.classes[rc].size(); ++k)
      CHECK(loaded.classes[rc][k].q == built.classes[rc][k].q);
  }
  // A damaged group file forces a rebuild.
  fs::resize_file(group_cache_path(dir, 3), 5);
  const auto rebuilt = TemplateLibrary::load_or_build(dir);
  CHECK_FALSE(rebuilt.from_cache);
  CHECK(TemplateLibrary::load_or_build(dir).from_cache);
  fs::remove_all(dir);
}
