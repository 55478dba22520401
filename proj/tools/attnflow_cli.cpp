// attnflow: fused two-GEMM dataflow optimizer front end.
//
//   attnflow optimize --config run.json [--objective energy|latency|edp|pareto]
//   attnflow validate --config run.json --max-dim 4
//   attnflow sweep    --config run.json --buffer-list 64K,256K,1M
//
// Exit codes: 0 success, 1 usage or configuration error, 2 infeasible,
// 3 model/oracle mismatch (validate).

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>

#include "attnflow/config.hpp"
#include "attnflow/enumeration.hpp"
#include "attnflow/oracle.hpp"
#include "attnflow/search.hpp"

using namespace attnflow;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitMismatch = 3;

struct Common {
  std::string config;
  std::string cache_dir;
  int threads = 0;
  bool no_prune = false;
};

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// Library from the cache directory (environment wins over the flag) or built in memory.
const TemplateLibrary& library_for(const Common& c, double& build_ms) {
  static std::optional<TemplateLibrary> cached;
  const auto t0 = std::chrono::steady_clock::now();
  std::string dir = c.cache_dir;
  if (const char* env = std::getenv("ATTNFLOW_CACHE_DIR"); env && *env) dir = env;
  const TemplateLibrary* lib = nullptr;
  if (dir.empty()) {
    lib = &default_library();
  } else {
    cached = TemplateLibrary::load_or_build(dir);
    lib = &*cached;
  }
  build_ms = ms_since(t0);
  return *lib;
}

json library_counts(const TemplateLibrary& lib) {
  json out;
  const char* names[] = {"non_recompute", "recompute"};
  for (int rc = 0; rc < 2; ++rc) {
    const PruneStats& s = lib.stats[rc];
    out[names[rc]] = {{"rows_per_group", s.rows},
                      {"distinct_expressions", s.unique_keys},
                      {"retained_rows", s.retained_rows},
                      {"retained_distinct", s.retained_unique},
                      {"groups", kNumStationaryPairs}};
  }
  out["from_cache"] = lib.from_cache;
  return out;
}

// Every reported winner must re-validate before it is written.
void check_winner(const Solution& s, const AcceleratorConfig& hw) {
  if (!validate_template(s.tmpl) || s.metrics.buffer_bytes > hw.buffer_bytes || !s.metrics.feasible)
    throw std::logic_error("internal error: winner " + describe(s.tmpl) + " failed re-validation");
}

int cmd_optimize(const Common& c, const std::string& objective_name_arg, const std::string& out_dir) {
  const RunConfig cfg = load_config(c.config);
  cfg.workload.validate();
  const Objective objective = parse_objective(objective_name_arg);
  double lib_ms = 0;
  SearchOptions opts;
  opts.prune = !c.no_prune;
  opts.threads = c.threads;
  opts.library = &library_for(c, lib_ms);

  const SearchResult r = run_search(cfg.workload, cfg.hw, opts);
  std::filesystem::create_directories(out_dir);
  json report;
  report["request"] = {{"workload", to_json(cfg.workload)},
                       {"hardware", to_json(cfg.hw)},
                       {"objective", objective_name(objective)},
                       {"prune", opts.prune},
                       {"threads", c.threads > 0 ? c.threads : omp_get_max_threads()}};
  report["model"] = {{"heads", "replicated: energy, DRAM traffic and MACs scale with heads; compute latency "
                               "scales with ceil(heads/num_arrays); DRAM bandwidth is shared"},
                     {"capacity_check", "single-head footprint against buffer_bytes"},
                     {"energy_units", "coefficient units"}};
  report["counts"] = {{"templates", library_counts(*opts.library)},
                      {"template_rows_evaluated", r.template_rows},
                      {"tilings", r.tilings},
                      {"cells", r.cells},
                      {"feasible_cells", r.feasible_cells},
                      {"pareto_points", r.pareto.size()}};
  report["timings_ms"] = {{"library", lib_ms}, {"search", r.runtime_ms}};

  std::vector<Solution> rows;
  int code = kExitOk;
  if (!r.best_energy) {
    report["status"] = "infeasible";
    report["min_required_buffer_bytes"] = r.min_buffer_bytes;
    std::cerr << "attnflow: " << InfeasibleError(r.min_buffer_bytes, cfg.hw.buffer_bytes).what() << '\n';
    code = kExitInfeasible;
  } else {
    for (const Solution* s : {&*r.best_energy, &*r.best_latency, &*r.best_edp}) check_winner(*s, cfg.hw);
    for (const Solution& s : r.pareto) check_winner(s, cfg.hw);
    const Solution& win = objective == Objective::Latency ? *r.best_latency
                          : objective == Objective::Edp   ? *r.best_edp
                                                          : *r.best_energy;
    report["status"] = "ok";
    report["winner"] = to_json(win);
    report["winners"] = {{"energy", to_json(*r.best_energy)},
                         {"latency", to_json(*r.best_latency)},
                         {"edp", to_json(*r.best_edp)}};
    json front = json::array();
    for (const Solution& s : r.pareto) front.push_back(to_json(s));
    report["pareto_front"] = std::move(front);
    if (objective == Objective::Pareto)
      rows = r.pareto;
    else
      rows = {win};

    std::cout << "objective " << objective_name(objective) << ": " << describe(win.tmpl) << " tiling "
              << win.tiling.to_string() << "\n  energy " << win.metrics.energy << "  latency "
              << win.metrics.latency_cycles << " cycles  dram " << win.metrics.dram_elems << " elems  buffer "
              << win.metrics.buffer_bytes << " B\n  " << r.cells << " cells in " << r.runtime_ms << " ms, "
              << r.pareto.size() << " Pareto points\n";
  }

  std::ofstream(std::filesystem::path(out_dir) / "report.json") << report.dump(2) << '\n';
  std::ofstream csv(std::filesystem::path(out_dir) / "solutions.csv");
  write_solutions_csv(csv, rows);
  return code;
}

int cmd_validate(const Common& c, uint64_t max_dim, bool force) {
  if (max_dim > 12 && !force) {
    std::cerr << "attnflow: --max-dim " << max_dim << " exceeds 12; pass --force to run anyway\n";
    return kExitUsage;
  }
  if (max_dim == 0) {
    std::cerr << "attnflow: --max-dim must be positive\n";
    return kExitUsage;
  }
  RunConfig cfg = load_config(c.config);
  Workload w = cfg.workload;
  w.I = std::min(w.I, max_dim);
  w.K = std::min(w.K, max_dim);
  w.L = std::min(w.L, max_dim);
  w.J = std::min(w.J, max_dim);
  w.validate();

  const auto templates = enumerate_structural_templates();
  const auto tilings = enumerate_tilings(w);
  std::atomic<uint64_t> checked{0}, mismatches{0};
  std::mutex out_mu;
  const auto t0 = std::chrono::steady_clock::now();
  const int threads = c.threads > 0 ? c.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
  for (int64_t n = 0; n < int64_t(templates.size()); ++n) {
    for (const BoundaryVector& b : tilings) {
      const ComparisonReport rep = compare_with_analytical(templates[n], b);
      ++checked;
      if (rep.ok()) continue;
      if (++mismatches <= 20) {
        std::lock_guard<std::mutex> lock(out_mu);
        std::cerr << "mismatch: " << describe(templates[n]) << " tiling " << b.to_string()
                  << " buffer delta " << rep.bs_delta << " dram delta " << rep.da_delta
                  << (rep.fault ? " fault: " + rep.detail : "") << '\n';
      }
    }
  }
  std::cout << "validated " << checked << " (template, tiling) pairs for I=" << w.I << " K=" << w.K << " L=" << w.L
            << " J=" << w.J << " in " << ms_since(t0) << " ms: " << mismatches << " mismatches\n";
  return mismatches == 0 ? kExitOk : kExitMismatch;
}

int cmd_sweep(const Common& c, const std::string& buffer_list, const std::string& hw_list,
              const std::string& seqlen_list, const std::string& out_file) {
  RunConfig cfg = load_config(c.config);
  cfg.workload.validate();
  if (!buffer_list.empty()) cfg.buffer_list = parse_size_list(buffer_list);
  if (!seqlen_list.empty()) cfg.seqlen_list = parse_size_list(seqlen_list);
  if (!hw_list.empty()) {
    cfg.hw_list.clear();
    std::stringstream ss(hw_list);
    std::string item;
    while (std::getline(ss, item, ',')) cfg.hw_list.push_back(parse_array_shape(item));
  }
  if (cfg.buffer_list.empty() && cfg.hw_list.empty() && cfg.seqlen_list.empty()) {
    std::cerr << "attnflow: sweep needs --buffer-list, --hw-list or --seqlen-list (or sweep lists in the config)\n";
    return kExitUsage;
  }

  double lib_ms = 0;
  SearchOptions opts;
  opts.prune = !c.no_prune;
  opts.threads = c.threads;
  opts.library = &library_for(c, lib_ms);

  std::ofstream os(out_file);
  if (!os) throw std::runtime_error("cannot write " + out_file);
  os << "sweep,value,I,K,L,J,pe_rows,pe_cols,num_arrays,buffer_bytes,status,best_energy,best_energy_latency,"
        "best_energy_dram_elems,best_latency,best_latency_energy,min_dram_elems,runtime_ms\n";
  auto run_point = [&](const std::string& kind, const std::string& value, const Workload& w,
                       const AcceleratorConfig& hw) {
    const SearchResult r = run_search(w, hw, opts);
    os << kind << ',' << value << ',' << w.I << ',' << w.K << ',' << w.L << ',' << w.J << ',' << hw.pe_rows << ','
       << hw.pe_cols << ',' << hw.num_arrays << ',' << hw.buffer_bytes << ',';
    if (r.best_energy) {
      const auto min_da = min_dram_within(r.buffer_dram_staircase, hw.buffer_bytes);
      os << "ok," << format_double(r.best_energy->metrics.energy) << ',' << r.best_energy->metrics.latency_cycles
         << ',' << r.best_energy->metrics.dram_elems << ',' << r.best_latency->metrics.latency_cycles << ','
         << format_double(r.best_latency->metrics.energy) << ',' << *min_da;
    } else {
      os << "infeasible,,,,,,";
    }
    os << ',' << format_double(std::round(r.runtime_ms * 1000) / 1000) << '\n';
    std::cout << kind << '=' << value << ": " << (r.best_energy ? "ok" : "infeasible") << " (" << r.runtime_ms
              << " ms)\n";
  };
  for (uint64_t b : cfg.buffer_list) {
    AcceleratorConfig hw = cfg.hw;
    hw.buffer_bytes = b;
    run_point("buffer", std::to_string(b), cfg.workload, hw);
  }
  for (const ArrayShape& s : cfg.hw_list) {
    AcceleratorConfig hw = cfg.hw;
    hw.pe_rows = s.rows;
    hw.pe_cols = s.cols;
    if (s.arrays) hw.num_arrays = s.arrays;
    run_point("hw", s.to_string(), cfg.workload, hw);
  }
  for (uint64_t n : cfg.seqlen_list) {
    Workload w = cfg.workload;
    w.I = w.L = n;
    run_point("seqlen", std::to_string(n), w, cfg.hw);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fused two-GEMM dataflow optimizer"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON run configuration")->required();
    sub->add_option("--cache-dir", common.cache_dir, "Template cache directory (ATTNFLOW_CACHE_DIR overrides)");
    sub->add_option("--threads", common.threads, "Worker threads (default: OpenMP default)")
        ->check(CLI::NonNegativeNumber);
    sub->add_flag("--no-prune", common.no_prune, "Search the full template enumeration");
  };

  std::string objective = "energy", out_dir = ".";
  CLI::App* opt = app.add_subcommand("optimize", "Find the best mapping and write report.json and solutions.csv");
  add_common(opt);
  opt->add_option("--objective", objective, "energy, latency, edp or pareto")
      ->check(CLI::IsMember({"energy", "latency", "edp", "pareto"}));
  opt->add_option("--out-dir", out_dir, "Directory for report.json and solutions.csv");

  uint64_t max_dim = 4;
  bool force = false;
  CLI::App* val = app.add_subcommand("validate", "Check the analytical model against the tile-level oracle");
  add_common(val);
  val->add_option("--max-dim", max_dim, "Clip every workload dimension to this value");
  val->add_flag("--force", force, "Allow --max-dim above 12");

  std::string buffer_list, hw_list, seqlen_list, sweep_out = "sweep.csv";
  CLI::App* sw = app.add_subcommand("sweep", "Evaluate a list of buffer sizes, array shapes or sequence lengths");
  add_common(sw);
  sw->add_option("--buffer-list", buffer_list, "Comma-separated buffer sizes in bytes (K/M suffixes allowed)");
  sw->add_option("--hw-list", hw_list, "Comma-separated array shapes RxC or RxCxN");
  sw->add_option("--seqlen-list", seqlen_list, "Comma-separated sequence lengths (sets I = L)");
  sw->add_option("--out", sweep_out, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*opt) return cmd_optimize(common, objective, out_dir);
    if (*val) return cmd_validate(common, max_dim, force);
    if (*sw) return cmd_sweep(common, buffer_list, hw_list, seqlen_list, sweep_out);
  } catch (const ConfigError& e) {
    std::cerr << "attnflow: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InfeasibleError& e) {
    std::cerr << "attnflow: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "attnflow: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "attnflow: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
