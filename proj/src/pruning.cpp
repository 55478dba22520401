#include "attnflow/pruning.hpp"

#include <array>
#include <random>
#include <string>
#include <unordered_map>

namespace attnflow {

const char* leq_name(LeqResult r) {
  switch (r) {
    case LeqResult::Unknown: return "UNKNOWN";
    case LeqResult::AlwaysLeq: return "ALWAYS_LEQ";
    case LeqResult::AlwaysLt: return "ALWAYS_LT";
  }
  return "?";
}

namespace {

bool term_leq(const Term& a, const Term& b) {
  if (a.coeff > b.coeff) return false;
  for (int s = 0; s < kNumSlots; ++s)
    if (a.exp[s] > b.exp[s]) return false;
  return true;
}

// Kuhn's augmenting-path bipartite matching.
bool augment(int u, const std::vector<std::vector<int>>& adj, std::vector<int>& match_v,
             std::vector<char>& seen) {
  for (int v : adj[u]) {
    if (seen[v]) continue;
    seen[v] = 1;
    if (match_v[v] < 0 || augment(match_v[v], adj, match_v, seen)) {
      match_v[v] = u;
      return true;
    }
  }
  return false;
}

}  // namespace

LeqResult symbolic_leq(const Polynomial& u, const Polynomial& v) {
  if (u == v) return LeqResult::AlwaysLeq;
  const auto& tu = u.terms();
  const auto& tv = v.terms();
  if (tu.size() > tv.size()) return LeqResult::Unknown;
  std::vector<std::vector<int>> adj(tu.size());
  for (size_t a = 0; a < tu.size(); ++a) {
    for (size_t b = 0; b < tv.size(); ++b)
      if (term_leq(tu[a], tv[b])) adj[a].push_back(int(b));
    if (adj[a].empty()) return LeqResult::Unknown;
  }
  std::vector<int> match_v(tv.size(), -1);
  for (size_t a = 0; a < tu.size(); ++a) {
    std::vector<char> seen(tv.size(), 0);
    if (!augment(int(a), adj, match_v, seen)) return LeqResult::Unknown;
  }
  return LeqResult::AlwaysLt;
}

DominanceKey dominance_key(const EncodedTemplate& e) {
  return {e[Query::BS_P], e[Query::BS_C], e[Query::DA]};
}

bool dominates(const DominanceKey& u, const DominanceKey& v) {
  const LeqResult a = symbolic_leq(u.bs_op1, v.bs_op1);
  if (a == LeqResult::Unknown) return false;
  const LeqResult b = symbolic_leq(u.bs_op2, v.bs_op2);
  if (b == LeqResult::Unknown) return false;
  const LeqResult c = symbolic_leq(u.dram, v.dram);
  if (c == LeqResult::Unknown) return false;
  return a == LeqResult::AlwaysLt || b == LeqResult::AlwaysLt || c == LeqResult::AlwaysLt;
}

namespace {

std::string key_string(const DominanceKey& k) {
  std::string s;
  for (const Polynomial* p : {&k.bs_op1, &k.bs_op2, &k.dram}) {
    for (const Term& t : p->terms()) {
      s += std::to_string(t.coeff);
      s += ':';
      s.append(reinterpret_cast<const char*>(t.exp.data()), t.exp.size());
    }
    s += '|';
  }
  return s;
}

// Sample tilings for the numeric prefilter. A necessary condition for u <= v
// everywhere is u <= v at each sample.
std::vector<BoundaryVector> prefilter_samples() {
  std::vector<BoundaryVector> out;
  std::mt19937_64 rng(0x5eed);
  std::uniform_int_distribution<uint64_t> dist(1, 64);
  for (int n = 0; n < 8; ++n) {
    BoundaryVector b;
    for (auto& x : b.b) x = dist(rng);
    out.push_back(b);
  }
  for (int s = 0; s < kNumSlots; ++s) {
    BoundaryVector b;
    b.b[s] = 97;
    out.push_back(b);
  }
  return out;
}

}  // namespace

std::vector<bool> prune_rows(const std::vector<DominanceKey>& keys, PruneStats* stats) {
  std::unordered_map<std::string, size_t> index;
  std::vector<size_t> unique_of(keys.size());
  std::vector<size_t> reps;
  for (size_t r = 0; r < keys.size(); ++r) {
    auto [it, fresh] = index.emplace(key_string(keys[r]), reps.size());
    if (fresh) reps.push_back(r);
    unique_of[r] = it->second;
  }

  const auto samples = prefilter_samples();
  const size_t ns = samples.size();
  const size_t nu = reps.size();
  std::vector<std::array<double, 3>> val(nu * ns);
  for (size_t u = 0; u < nu; ++u) {
    const DominanceKey& k = keys[reps[u]];
    for (size_t s = 0; s < ns; ++s)
      val[u * ns + s] = {k.bs_op1.evaluate_double(samples[s]), k.bs_op2.evaluate_double(samples[s]),
                         k.dram.evaluate_double(samples[s])};
  }
  auto numerically_leq = [&](size_t u, size_t v) {
    for (size_t s = 0; s < ns; ++s) {
      const auto& a = val[u * ns + s];
      const auto& b = val[v * ns + s];
      if (a[0] > b[0] || a[1] > b[1] || a[2] > b[2]) return false;
    }
    return true;
  };

  std::vector<char> dropped(nu, 0);
  for (size_t v = 0; v < nu; ++v) {
    for (size_t u = 0; u < nu && !dropped[v]; ++u) {
      if (u == v || !numerically_leq(u, v)) continue;
      if (dominates(keys[reps[u]], keys[reps[v]])) dropped[v] = 1;
    }
  }

  std::vector<bool> retained(keys.size());
  size_t kept_rows = 0, kept_unique = 0;
  for (size_t r = 0; r < keys.size(); ++r) {
    retained[r] = !dropped[unique_of[r]];
    kept_rows += retained[r];
  }
  for (size_t u = 0; u < nu; ++u) kept_unique += !dropped[u];
  if (stats) *stats = {keys.size(), nu, kept_rows, kept_unique};
  return retained;
}

}  // namespace attnflow
