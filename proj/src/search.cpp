#include "attnflow/search.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <limits>
#include <tuple>

#include "attnflow/enumeration.hpp"

namespace attnflow {

const char* objective_name(Objective o) {
  switch (o) {
    case Objective::Energy: return "energy";
    case Objective::Latency: return "latency";
    case Objective::Edp: return "edp";
    case Objective::Pareto: return "pareto";
  }
  return "?";
}

Objective parse_objective(const std::string& s) {
  if (s == "energy") return Objective::Energy;
  if (s == "latency") return Objective::Latency;
  if (s == "edp") return Objective::Edp;
  if (s == "pareto") return Objective::Pareto;
  throw std::invalid_argument("unknown objective '" + s + "'");
}

const char* kernel_name(Kernel k) {
  switch (k) {
    case Kernel::Parallel: return "parallel";
    case Kernel::Serial: return "serial";
    case Kernel::Reference: return "reference";
  }
  return "?";
}

InfeasibleError::InfeasibleError(uint64_t min_required_bytes, uint64_t capacity)
    : std::runtime_error("no mapping fits the " + std::to_string(capacity) +
                         "-byte buffer; the smallest mapping needs " + std::to_string(min_required_bytes) +
                         " bytes"),
      min_required_(min_required_bytes) {}

namespace {

struct Candidate {
  double energy = 0;
  uint64_t latency = 0;
  uint64_t dram = 0;
  uint32_t tid = 0;
  uint32_t bid = 0;
  bool valid = false;
};

auto tie_key(const Candidate& c) { return std::tie(c.dram, c.tid, c.bid); }

bool better_energy(const Candidate& a, const Candidate& b) {
  if (!b.valid) return a.valid;
  if (!a.valid) return false;
  return std::tie(a.energy, a.latency, a.dram, a.tid, a.bid) < std::tie(b.energy, b.latency, b.dram, b.tid, b.bid);
}

bool better_latency(const Candidate& a, const Candidate& b) {
  if (!b.valid) return a.valid;
  if (!a.valid) return false;
  return std::tie(a.latency, a.energy, a.dram, a.tid, a.bid) < std::tie(b.latency, b.energy, b.dram, b.tid, b.bid);
}

bool better_edp(const Candidate& a, const Candidate& b) {
  if (!b.valid) return a.valid;
  if (!a.valid) return false;
  const double ea = a.energy * double(a.latency), eb = b.energy * double(b.latency);
  return std::tie(ea, a.energy, a.latency, a.dram, a.tid, a.bid) <
         std::tie(eb, b.energy, b.latency, b.dram, b.tid, b.bid);
}

// Associative reduction state of one worker.
struct Reducer {
  Candidate best_e, best_l, best_x;
  std::vector<Candidate> front;                   // latency ascending, energy strictly descending
  std::vector<std::pair<uint64_t, uint64_t>> stair;  // buffer ascending, DRAM strictly descending
  uint64_t min_bs = std::numeric_limits<uint64_t>::max();
  uint64_t cells = 0, feasible = 0;

  void offer(const Candidate& p) {
    if (better_energy(p, best_e)) best_e = p;
    if (better_latency(p, best_l)) best_l = p;
    if (better_edp(p, best_x)) best_x = p;
    offer_front(p);
  }

  void offer_front(const Candidate& p) {
    auto it = std::upper_bound(front.begin(), front.end(), p.latency,
                               [](uint64_t lat, const Candidate& c) { return lat < c.latency; });
    if (it != front.begin()) {
      auto q = std::prev(it);
      if (q->energy <= p.energy) {
        if (q->energy == p.energy && q->latency == p.latency && tie_key(p) < tie_key(*q)) *q = p;
        return;
      }
      if (q->latency == p.latency) it = front.erase(q);
    }
    auto last = it;
    while (last != front.end() && last->energy >= p.energy) ++last;
    it = front.erase(it, last);
    front.insert(it, p);
  }

  void offer_stair(uint64_t bs, uint64_t da) {
    min_bs = std::min(min_bs, bs);
    auto it = std::upper_bound(stair.begin(), stair.end(), bs,
                               [](uint64_t b, const std::pair<uint64_t, uint64_t>& s) { return b < s.first; });
    if (it != stair.begin()) {
      auto q = std::prev(it);
      if (q->second <= da) return;
      if (q->first == bs) it = stair.erase(q);
    }
    auto last = it;
    while (last != stair.end() && last->second >= da) ++last;
    it = stair.erase(it, last);
    stair.insert(it, {bs, da});
  }

  void merge(const Reducer& o) {
    if (better_energy(o.best_e, best_e)) best_e = o.best_e;
    if (better_latency(o.best_l, best_l)) best_l = o.best_l;
    if (better_edp(o.best_x, best_x)) best_x = o.best_x;
    for (const Candidate& c : o.front) offer_front(c);
    for (const auto& [bs, da] : o.stair) offer_stair(bs, da);
    min_bs = std::min(min_bs, o.min_bs);
    cells += o.cells;
    feasible += o.feasible;
  }
};

struct Row {
  uint32_t structural;
  CompiledQuery bs1, bs2, da;
};

// Row-independent quantities of one recompute class.
struct ClassQueries {
  std::vector<Row> rows;
  std::vector<const EncodedTemplate*> encoded;
  std::array<CompiledQuery, kNumStationaryPairs> br;
  CompiledQuery cp, cc, macs, softmax;
};

ClassQueries class_queries(const TemplateLibrary& lib, bool recompute, bool prune) {
  ClassQueries q;
  q.encoded = lib.search_rows(recompute, prune);
  for (const EncodedTemplate* e : q.encoded)
    q.rows.push_back({structural_index_of(e->template_id), CompiledQuery((*e)[Query::BS_P]),
                      CompiledQuery((*e)[Query::BS_C]), CompiledQuery((*e)[Query::DA])});
  if (q.encoded.empty()) return q;
  MappingTemplate t = q.encoded.front()->tmpl;
  for (int st = 0; st < kNumStationaryPairs; ++st) {
    t.stationary = StationaryPair::from_index(st);
    q.br[st] = CompiledQuery(buffer_rf_expr(t));
  }
  q.cp = CompiledQuery(op1_compute_expr(t));
  q.cc = CompiledQuery(op2_compute_expr(t));
  q.macs = CompiledQuery(macs_expr(t));
  q.softmax = CompiledQuery(softmax_elems_expr(t));
  return q;
}

struct Context {
  const Workload& w;
  const AcceleratorConfig& hw;
  const std::vector<BoundaryVector>& tilings;
  std::array<ClassQueries, 2> classes;
};

// Evaluates every row of both classes at one tiling column. The energy terms
// are formed exactly as finish_metrics forms them so both paths agree bit for bit.
void evaluate_column(const Context& ctx, uint32_t col, Reducer& red) {
  const BoundaryVector& b = ctx.tilings[col];
  const ColumnTable table(b);
  const Workload& w = ctx.w;
  const AcceleratorConfig& hw = ctx.hw;
  const auto& e = hw.energy;
  const double heads = double(w.heads);
  const uint64_t head_rounds = ceil_div(w.heads, hw.num_arrays);
  const uint64_t f1 = op1_array_factor(b, hw), f2 = op2_array_factor(b, hw);
  const double hd = heads * e.e_dram;

  for (int rc = 0; rc < 2; ++rc) {
    const ClassQueries& q = ctx.classes[rc];
    if (q.rows.empty()) continue;
    std::array<double, kNumStationaryPairs> eb;
    std::array<uint64_t, kNumStationaryPairs> cycles;
    const uint64_t passes = q.cp.evaluate(table) * f1 + q.cc.evaluate(table) * f2;
    for (int st = 0; st < kNumStationaryPairs; ++st) {
      eb[st] = heads * e.e_buf * double(q.br[st].evaluate(table));
      cycles[st] = head_rounds * passes;
    }
    const double em = heads * e.e_mac * double(q.macs.evaluate(table));
    const double es = heads * e.e_sfu * w.c_softmax * double(q.softmax.evaluate(table));

    for (const Row& row : q.rows) {
      const uint64_t bs = std::max(row.bs1.evaluate(table), row.bs2.evaluate(table)) * hw.bytes_per_element;
      const uint64_t da = row.da.evaluate(table);
      red.offer_stair(bs, da);
      red.cells += kNumStationaryPairs;
      if (bs > hw.buffer_bytes) continue;
      red.feasible += kNumStationaryPairs;
      const uint64_t dc = dram_cycles(w.heads * da, hw);
      const double ed = hd * double(da);
      Candidate c;
      c.valid = true;
      c.dram = da;
      c.bid = col;
      for (int st = 0; st < kNumStationaryPairs; ++st) {
        c.energy = ed + eb[st] + em + es;
        c.latency = std::max(cycles[st], dc);
        c.tid = make_template_id(row.structural, StationaryPair::from_index(st));
        red.offer(c);
      }
    }
  }
}

// Direct path: every (template, stationary pair, tiling) through evaluate().
void evaluate_column_reference(const Context& ctx, uint32_t col, Reducer& red) {
  const BoundaryVector& b = ctx.tilings[col];
  for (int rc = 0; rc < 2; ++rc) {
    for (const EncodedTemplate* row : ctx.classes[rc].encoded) {
      MappingTemplate t = row->tmpl;
      const uint32_t s = structural_index_of(row->template_id);
      bool stair_done = false;
      for (int st = 0; st < kNumStationaryPairs; ++st) {
        t.stationary = StationaryPair::from_index(st);
        const Metrics m = evaluate(t, b, ctx.w, ctx.hw);
        if (!stair_done) red.offer_stair(m.buffer_bytes, m.dram_elems);
        stair_done = true;
        ++red.cells;
        if (!m.feasible) continue;
        ++red.feasible;
        red.offer({m.energy, m.latency_cycles, m.dram_elems, make_template_id(s, t.stationary), col, true});
      }
    }
  }
}

Solution materialize(const Candidate& c, const Context& ctx) {
  Solution s;
  s.template_id = c.tid;
  s.tmpl = template_by_id(c.tid);
  s.tiling_index = c.bid;
  s.tiling = ctx.tilings[c.bid];
  s.metrics = evaluate(s.tmpl, s.tiling, ctx.w, ctx.hw);
  return s;
}

}  // namespace

SearchResult run_search(const Workload& w, const AcceleratorConfig& hw, const SearchOptions& opts) {
  w.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const TemplateLibrary& lib = opts.library ? *opts.library : default_library();
  const std::vector<BoundaryVector> tilings = enumerate_tilings(w);
  Context ctx{w, hw, tilings, {class_queries(lib, false, opts.prune), class_queries(lib, true, opts.prune)}};
  const uint32_t ncols = uint32_t(tilings.size());

  Reducer total;
  switch (opts.kernel) {
    case Kernel::Serial:
      for (uint32_t col = 0; col < ncols; ++col) evaluate_column(ctx, col, total);
      break;
    case Kernel::Reference:
      for (uint32_t col = 0; col < ncols; ++col) evaluate_column_reference(ctx, col, total);
      break;
    case Kernel::Parallel: {
      const int threads = opts.threads > 0 ? opts.threads : omp_get_max_threads();
#pragma omp parallel num_threads(threads)
      {
        Reducer local;
#pragma omp for schedule(dynamic, 8) nowait
        for (int64_t col = 0; col < int64_t(ncols); ++col) evaluate_column(ctx, uint32_t(col), local);
#pragma omp critical(attnflow_merge)
        total.merge(local);
      }
      break;
    }
  }

  SearchResult r;
  if (total.best_e.valid) r.best_energy = materialize(total.best_e, ctx);
  if (total.best_l.valid) r.best_latency = materialize(total.best_l, ctx);
  if (total.best_x.valid) r.best_edp = materialize(total.best_x, ctx);
  for (const Candidate& c : total.front) r.pareto.push_back(materialize(c, ctx));
  r.buffer_dram_staircase = std::move(total.stair);
  r.min_buffer_bytes = total.min_bs;
  r.cells = total.cells;
  r.feasible_cells = total.feasible;
  r.template_rows = (ctx.classes[0].rows.size() + ctx.classes[1].rows.size()) * kNumStationaryPairs;
  r.tilings = tilings.size();
  r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

Solution optimize(const Workload& w, const AcceleratorConfig& hw, Objective objective, const SearchOptions& opts) {
  SearchResult r = run_search(w, hw, opts);
  if (!r.best_energy) throw InfeasibleError(r.min_buffer_bytes, hw.buffer_bytes);
  switch (objective) {
    case Objective::Latency: return *r.best_latency;
    case Objective::Edp: return *r.best_edp;
    case Objective::Energy:
    case Objective::Pareto: return *r.best_energy;
  }
  return *r.best_energy;
}

std::vector<Solution> pareto_front(const Workload& w, const AcceleratorConfig& hw, const SearchOptions& opts) {
  SearchResult r = run_search(w, hw, opts);
  if (r.pareto.empty()) throw InfeasibleError(r.min_buffer_bytes, hw.buffer_bytes);
  return std::move(r.pareto);
}

std::optional<uint64_t> min_dram_within(const std::vector<std::pair<uint64_t, uint64_t>>& staircase,
                                        uint64_t budget_bytes) {
  auto it = std::upper_bound(staircase.begin(), staircase.end(), budget_bytes,
                             [](uint64_t b, const std::pair<uint64_t, uint64_t>& s) { return b < s.first; });
  if (it == staircase.begin()) return std::nullopt;
  return std::prev(it)->second;
}

std::vector<std::pair<uint64_t, std::optional<uint64_t>>> dram_vs_buffer_curve(
    const Workload& w, const AcceleratorConfig& hw, const std::vector<uint64_t>& budgets,
    const SearchOptions& opts) {
  const SearchResult r = run_search(w, hw, opts);
  std::vector<std::pair<uint64_t, std::optional<uint64_t>>> out;
  for (uint64_t b : budgets) out.emplace_back(b, min_dram_within(r.buffer_dram_staircase, b));
  return out;
}

}  // namespace attnflow
