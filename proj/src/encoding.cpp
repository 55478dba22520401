#include "attnflow/encoding.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "attnflow/analytics.hpp"

namespace attnflow {

const char* query_name(Query q) {
  static constexpr const char* kNames[] = {"BS_P", "BS_C", "DA", "C_P", "C_C", "BR"};
  return kNames[static_cast<int>(q)];
}

EncodedTemplate encode_template(const MappingTemplate& t, uint32_t template_id) {
  EncodedTemplate e;
  e.template_id = template_id;
  e.tmpl = t;
  e.q[int(Query::BS_P)] = op1_buffer_expr(t);
  e.q[int(Query::BS_C)] = op2_buffer_expr(t);
  e.q[int(Query::DA)] = total_dram_expr(t);
  e.q[int(Query::C_P)] = op1_compute_expr(t);
  e.q[int(Query::C_C)] = op2_compute_expr(t);
  e.q[int(Query::BR)] = buffer_rf_expr(t);
  return e;
}

ColumnTable::ColumnTable(const BoundaryVector& b) {
  v[0] = 1;
  for (int s = 0; s < kNumSlots; ++s) {
    const int lo = 1 << s;
    for (int m = 0; m < lo; ++m) v[lo + m] = v[m] * b.b[s];
  }
}

CompiledQuery::CompiledQuery(const Polynomial& p) {
  if (p.max_exponent() > 1) throw std::invalid_argument("query has an exponent above 1: " + p.to_string());
  entries.reserve(p.terms().size());
  for (const Term& t : p.terms()) entries.push_back({t.coeff, t.mask()});
}

std::vector<double> batch_evaluate(const Polynomial& p, const std::vector<BoundaryVector>& columns) {
  const size_t nt = p.terms().size();
  const size_t nc = columns.size();
  std::vector<double> lnb(kNumSlots * nc);
  for (size_t c = 0; c < nc; ++c)
    for (int s = 0; s < kNumSlots; ++s) lnb[s * nc + c] = std::log(double(columns[c].b[s]));

  std::vector<double> out(nc, 0.0);
  std::vector<double> row(nc);
  for (size_t t = 0; t < nt; ++t) {
    const Term& term = p.terms()[t];
    std::fill(row.begin(), row.end(), 0.0);
    for (int s = 0; s < kNumSlots; ++s) {
      if (!term.exp[s]) continue;
      const double q = term.exp[s];
      const double* src = &lnb[s * nc];
      for (size_t c = 0; c < nc; ++c) row[c] += q * src[c];
    }
    const double coeff = double(term.coeff);
    for (size_t c = 0; c < nc; ++c) out[c] += coeff * std::exp(row[c]);
  }
  return out;
}

namespace {

template <typename T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("cache file truncated");
  return v;
}

void put_template(std::ofstream& os, const MappingTemplate& t) {
  for (Dim d : t.loop_order) put<uint8_t>(os, uint8_t(d));
  for (uint8_t lv : t.level) put<uint8_t>(os, lv);
  put<uint8_t>(os, uint8_t(t.stationary.index()));
  put<uint8_t>(os, uint8_t(t.recompute));
}

MappingTemplate get_template(std::ifstream& is) {
  MappingTemplate t;
  for (Dim& d : t.loop_order) {
    const uint8_t v = get<uint8_t>(is);
    if (v >= 4) throw std::runtime_error("cache file has a bad loop variable");
    d = Dim(v);
  }
  for (uint8_t& lv : t.level) {
    lv = get<uint8_t>(is);
    if (lv > kIntraTile) throw std::runtime_error("cache file has a bad level");
  }
  const uint8_t st = get<uint8_t>(is);
  if (st >= 9) throw std::runtime_error("cache file has a bad stationary pair");
  t.stationary = StationaryPair::from_index(st);
  t.recompute = get<uint8_t>(is) != 0;
  return t;
}

}  // namespace

std::filesystem::path group_cache_path(const std::filesystem::path& dir, uint32_t group_id) {
  char name[32];
  std::snprintf(name, sizeof name, "group_%02u.afc", group_id);
  return dir / name;
}

void write_group_cache(const std::filesystem::path& file, const GroupCache& g) {
  if (g.retained.size() != g.rows.size()) throw std::invalid_argument("retained bitmap size mismatch");
  const auto tmp = std::filesystem::path(file.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write cache file " + tmp.string());
    put<uint32_t>(os, kCacheMagic);
    put<uint32_t>(os, kCacheSchemaVersion);
    put<uint32_t>(os, g.group_id);
    put<uint64_t>(os, g.rows.size());
    for (const EncodedTemplate& row : g.rows) {
      put<uint32_t>(os, row.template_id);
      put_template(os, row.tmpl);
      for (const Polynomial& p : row.q) {
        put<uint32_t>(os, uint32_t(p.terms().size()));
        for (const Term& t : p.terms()) {
          put<uint64_t>(os, t.coeff);
          os.write(reinterpret_cast<const char*>(t.exp.data()), kNumSlots);
        }
      }
    }
    std::vector<uint8_t> bits((g.rows.size() + 7) / 8, 0);
    for (size_t r = 0; r < g.rows.size(); ++r)
      if (g.retained[r]) bits[r / 8] |= uint8_t(1u << (r % 8));
    os.write(reinterpret_cast<const char*>(bits.data()), std::streamsize(bits.size()));
    if (!os) throw std::runtime_error("cannot write cache file " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

GroupCache read_group_cache(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open cache file " + file.string());
  if (get<uint32_t>(is) != kCacheMagic) throw std::runtime_error("not a cache file: " + file.string());
  if (get<uint32_t>(is) != kCacheSchemaVersion) throw std::runtime_error("cache schema mismatch: " + file.string());
  GroupCache g;
  g.group_id = get<uint32_t>(is);
  const uint64_t n = get<uint64_t>(is);
  if (n > (1u << 24)) throw std::runtime_error("cache file row count out of range");
  g.rows.resize(n);
  for (EncodedTemplate& row : g.rows) {
    row.template_id = get<uint32_t>(is);
    row.tmpl = get_template(is);
    for (Polynomial& p : row.q) {
      const uint32_t nt = get<uint32_t>(is);
      if (nt > 64) throw std::runtime_error("cache file term count out of range");
      std::vector<Term> terms(nt);
      for (Term& t : terms) {
        t.coeff = get<uint64_t>(is);
        is.read(reinterpret_cast<char*>(t.exp.data()), kNumSlots);
        if (!is) throw std::runtime_error("cache file truncated");
      }
      p = Polynomial(std::move(terms));
    }
  }
  std::vector<uint8_t> bits((n + 7) / 8);
  is.read(reinterpret_cast<char*>(bits.data()), std::streamsize(bits.size()));
  if (!is) throw std::runtime_error("cache file truncated");
  if (is.peek() != std::char_traits<char>::eof()) throw std::runtime_error("trailing data in cache file");
  g.retained.resize(n);
  for (size_t r = 0; r < n; ++r) g.retained[r] = (bits[r / 8] >> (r % 8)) & 1u;
  return g;
}

}  // namespace attnflow
