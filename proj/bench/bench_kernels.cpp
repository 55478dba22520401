// Times the search kernels against each other on one workload, plus the exact
// and log-domain query evaluators.
//
//   bench_kernels [I K L J] [--reference]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <omp.h>

#include "attnflow/encoding.hpp"
#include "attnflow/enumeration.hpp"
#include "attnflow/search.hpp"

using namespace attnflow;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) { return std::chrono::duration<double, std::milli>(Clock::now() - t0).count(); }

void run(const char* label, const Workload& w, const AcceleratorConfig& hw, SearchOptions o, const SearchResult* ref) {
  const auto r = run_search(w, hw, o);
  const bool same = !ref || (r.best_energy && ref->best_energy &&
                             r.best_energy->metrics.energy == ref->best_energy->metrics.energy &&
                             r.best_energy->metrics.latency_cycles == ref->best_energy->metrics.latency_cycles);
  std::printf("%-22s %12llu cells %10.1f ms %12.3g cells/s  %s\n", label, (unsigned long long)r.cells, r.runtime_ms,
              double(r.cells) / (r.runtime_ms / 1000.0), same ? "" : "WINNER COST DIFFERS");
}

}  // namespace

int main(int argc, char** argv) {
  Workload w{512, 64, 512, 64};
  bool reference = false;
  int pos = 0;
  for (int a = 1; a < argc; ++a) {
    if (std::strcmp(argv[a], "--reference") == 0) {
      reference = true;
      continue;
    }
    const uint64_t v = std::strtoull(argv[a], nullptr, 10);
    if (v == 0 || pos >= 4) {
      std::fprintf(stderr, "usage: %s [I K L J] [--reference]\n", argv[0]);
      return 1;
    }
    (pos == 0 ? w.I : pos == 1 ? w.K : pos == 2 ? w.L : w.J) = v;
    ++pos;
  }
  const auto hw = AcceleratorConfig::accel1();
  std::printf("workload %llux%llux%llux%llu, %d OpenMP threads\n", (unsigned long long)w.I, (unsigned long long)w.K,
              (unsigned long long)w.L, (unsigned long long)w.J, omp_get_max_threads());

  const auto t0 = Clock::now();
  default_library();
  std::printf("%-22s %10.1f ms\n", "library build", ms_since(t0));

  SearchOptions o;
  o.kernel = Kernel::Serial;
  const auto serial = run_search(w, hw, o);
  run("serial", w, hw, o, nullptr);
  o.kernel = Kernel::Parallel;
  run("parallel", w, hw, o, &serial);
  o.prune = false;
  o.kernel = Kernel::Serial;
  run("serial, no prune", w, hw, o, &serial);
  o.kernel = Kernel::Parallel;
  run("parallel, no prune", w, hw, o, &serial);
  if (reference) {
    o.prune = true;
    o.kernel = Kernel::Reference;
    run("reference", w, hw, o, &serial);
  }

  // One query (the DRAM expression of every retained row) over every tiling.
  const auto tilings = enumerate_tilings(w);
  std::vector<const Polynomial*> polys;
  for (int rc = 0; rc < 2; ++rc)
    for (const auto* row : default_library().search_rows(rc, true)) polys.push_back(&(*row)[Query::DA]);
  const double n = double(polys.size()) * double(tilings.size());

  auto t1 = Clock::now();
  uint64_t sink = 0;
  std::vector<ColumnTable> cols;
  for (const auto& b : tilings) cols.emplace_back(b);
  for (const auto* p : polys) {
    const CompiledQuery q(*p);
    for (const auto& c : cols) sink += q.evaluate(c);
  }
  const double exact_ms = ms_since(t1);

  t1 = Clock::now();
  double fsink = 0;
  for (const auto* p : polys)
    for (double v : batch_evaluate(*p, tilings)) fsink += v;
  const double log_ms = ms_since(t1);
  std::printf("%-22s %12.0f evals %10.1f ms %12.3g evals/s\n", "exact subset table", n, exact_ms, n / (exact_ms / 1000));
  std::printf("%-22s %12.0f evals %10.1f ms %12.3g evals/s  (rel diff %.2g)\n", "log-domain", n, log_ms,
              n / (log_ms / 1000), std::abs(fsink - double(sink)) / double(sink));
  return 0;
}
