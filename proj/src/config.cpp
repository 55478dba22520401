#include "attnflow/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace attnflow {

using nlohmann::json;

std::string ArrayShape::to_string() const {
  std::string s = std::to_string(rows) + "x" + std::to_string(cols);
  if (arrays) s += "x" + std::to_string(arrays);
  return s;
}

ArrayShape parse_array_shape(const std::string& s) {
  std::vector<uint64_t> parts;
  size_t start = 0;
  while (true) {
    const size_t x = s.find_first_of("xX", start);
    const std::string piece = s.substr(start, x == std::string::npos ? std::string::npos : x - start);
    uint64_t v = 0;
    auto [p, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
    if (piece.empty() || ec != std::errc() || p != piece.data() + piece.size() || v == 0)
      throw std::invalid_argument("bad array shape '" + s + "' (expected RxC or RxCxN)");
    parts.push_back(v);
    if (x == std::string::npos) break;
    start = x + 1;
  }
  if (parts.size() < 2 || parts.size() > 3)
    throw std::invalid_argument("bad array shape '" + s + "' (expected RxC or RxCxN)");
  return {parts[0], parts[1], parts.size() == 3 ? parts[2] : 0};
}

std::vector<uint64_t> parse_size_list(const std::string& s) {
  std::vector<uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    uint64_t mult = 1;
    if (!item.empty()) {
      switch (item.back()) {
        case 'k': case 'K': mult = 1ull << 10; break;
        case 'm': case 'M': mult = 1ull << 20; break;
        case 'g': case 'G': mult = 1ull << 30; break;
        default: break;
      }
      if (mult != 1) item.pop_back();
    }
    uint64_t v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || p != item.data() + item.size())
      throw std::invalid_argument("bad list entry '" + item + "' in '" + s + "'");
    out.push_back(v * mult);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

ConfigError::ConfigError(const std::string& source, size_t line, size_t column, const std::string& what)
    : std::runtime_error(line ? source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what
                              : source + ": " + what),
      line_(line),
      column_(column) {}

namespace {

struct Position {
  size_t line = 0, column = 0;
};

Position position_of(const std::string& text, size_t offset) {
  Position p{1, 1};
  for (size_t n = 0; n < offset && n < text.size(); ++n) {
    if (text[n] == '\n') {
      ++p.line;
      p.column = 1;
    } else {
      ++p.column;
    }
  }
  return p;
}

// Walks the raw text for each quoted key of `path` in turn and returns where
// the last one starts.
Position locate(const std::string& text, const std::vector<std::string>& path) {
  size_t at = 0;
  for (const std::string& key : path) {
    const size_t found = text.find("\"" + key + "\"", at);
    if (found == std::string::npos) return {};
    at = found;
  }
  return path.empty() ? Position{} : position_of(text, at);
}

class Reader {
 public:
  Reader(const std::string& text, const std::string& source) : text_(text), source_(source) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
    const Position p = locate(text_, path);
    std::string name;
    for (const auto& k : path) name += (name.empty() ? "" : ".") + k;
    throw ConfigError(source_, p.line, p.column, name.empty() ? what : "'" + name + "': " + what);
  }

  void check_keys(const json& obj, const std::vector<std::string>& path,
                  std::initializer_list<const char*> allowed) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, _] : obj.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) {
        auto p = path;
        p.push_back(key);
        fail(p, "unknown key");
      }
    }
  }

  uint64_t integer(const json& v, const std::vector<std::string>& path, bool allow_zero = false) const {
    uint64_t out = 0;
    if (v.is_number_unsigned()) {
      out = v.get<uint64_t>();
    } else if (v.is_number_integer()) {
      fail(path, "must not be negative");
    } else if (v.is_number_float()) {
      const double d = v.get<double>();
      if (!(d >= 0) || d >= 18446744073709551616.0 || std::floor(d) != d) fail(path, "expected a non-negative integer");
      out = uint64_t(d);
    } else {
      fail(path, "expected a non-negative integer");
    }
    if (out == 0 && !allow_zero) fail(path, "must be positive");
    return out;
  }

  double number(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!(d >= 0) || !std::isfinite(d)) fail(path, "must be a finite non-negative number");
    return d;
  }

 private:
  const std::string& text_;
  const std::string& source_;
};

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const Position p = position_of(text, e.byte ? e.byte - 1 : 0);
    std::string what = e.what();
    const size_t colon = what.find("; ");
    if (colon != std::string::npos) what = what.substr(colon + 2);
    throw ConfigError(source, p.line, p.column, "JSON syntax error: " + what);
  }

  Reader rd(text, source);
  RunConfig cfg;
  rd.check_keys(doc, {}, {"workload", "hardware", "sweep"});
  if (!doc.contains("workload")) rd.fail({}, "missing required key 'workload'");

  const json& wl = doc["workload"];
  rd.check_keys(wl, {"workload"}, {"I", "K", "L", "J", "heads", "c_softmax"});
  for (const char* k : {"I", "K", "L", "J"})
    if (!wl.contains(k)) rd.fail({"workload"}, std::string("missing required key '") + k + "'");
  cfg.workload.I = rd.integer(wl["I"], {"workload", "I"});
  cfg.workload.K = rd.integer(wl["K"], {"workload", "K"});
  cfg.workload.L = rd.integer(wl["L"], {"workload", "L"});
  cfg.workload.J = rd.integer(wl["J"], {"workload", "J"});
  if (wl.contains("heads")) cfg.workload.heads = rd.integer(wl["heads"], {"workload", "heads"});
  if (wl.contains("c_softmax")) cfg.workload.c_softmax = rd.number(wl["c_softmax"], {"workload", "c_softmax"});

  if (doc.contains("hardware")) {
    const json& h = doc["hardware"];
    rd.check_keys(h, {"hardware"},
                  {"preset", "pe_rows", "pe_cols", "num_arrays", "buffer_bytes", "dram_bw_bytes_per_s", "freq_hz",
                   "bytes_per_element", "energy"});
    if (h.contains("preset")) {
      const json& p = h["preset"];
      if (p == "accel1")
        cfg.hw = AcceleratorConfig::accel1();
      else if (p == "accel2")
        cfg.hw = AcceleratorConfig::accel2();
      else
        rd.fail({"hardware", "preset"}, "expected \"accel1\" or \"accel2\"");
    }
    auto field = [&](const char* key, uint64_t& dst, bool allow_zero = false) {
      if (h.contains(key)) dst = rd.integer(h[key], {"hardware", key}, allow_zero);
    };
    field("pe_rows", cfg.hw.pe_rows);
    field("pe_cols", cfg.hw.pe_cols);
    field("num_arrays", cfg.hw.num_arrays);
    field("buffer_bytes", cfg.hw.buffer_bytes, true);
    field("dram_bw_bytes_per_s", cfg.hw.dram_bw_bytes_per_s);
    field("freq_hz", cfg.hw.freq_hz);
    field("bytes_per_element", cfg.hw.bytes_per_element);
    if (h.contains("energy")) {
      const json& e = h["energy"];
      rd.check_keys(e, {"hardware", "energy"}, {"e_dram", "e_buf", "e_mac", "e_sfu"});
      auto coeff = [&](const char* key, double& dst) {
        if (e.contains(key)) dst = rd.number(e[key], {"hardware", "energy", key});
      };
      coeff("e_dram", cfg.hw.energy.e_dram);
      coeff("e_buf", cfg.hw.energy.e_buf);
      coeff("e_mac", cfg.hw.energy.e_mac);
      coeff("e_sfu", cfg.hw.energy.e_sfu);
    }
  }

  if (doc.contains("sweep")) {
    const json& s = doc["sweep"];
    rd.check_keys(s, {"sweep"}, {"buffer_list", "hw_list", "seqlen_list"});
    auto list = [&](const char* key) -> const json& {
      const json& v = s[key];
      if (!v.is_array()) rd.fail({"sweep", key}, "expected an array");
      return v;
    };
    if (s.contains("buffer_list"))
      for (const json& v : list("buffer_list")) cfg.buffer_list.push_back(rd.integer(v, {"sweep", "buffer_list"}, true));
    if (s.contains("seqlen_list"))
      for (const json& v : list("seqlen_list")) cfg.seqlen_list.push_back(rd.integer(v, {"sweep", "seqlen_list"}));
    if (s.contains("hw_list"))
      for (const json& v : list("hw_list")) {
        if (!v.is_string()) rd.fail({"sweep", "hw_list"}, "expected strings like \"32x32x4\"");
        try {
          cfg.hw_list.push_back(parse_array_shape(v.get<std::string>()));
        } catch (const std::invalid_argument& e) {
          rd.fail({"sweep", "hw_list"}, e.what());
        }
      }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError(file.string(), 0, 0, "cannot open file");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), file.string());
}

json to_json(const Workload& w) {
  return {{"I", w.I}, {"K", w.K}, {"L", w.L}, {"J", w.J}, {"heads", w.heads}, {"c_softmax", w.c_softmax}};
}

json to_json(const AcceleratorConfig& hw) {
  return {{"pe_rows", hw.pe_rows},
          {"pe_cols", hw.pe_cols},
          {"num_arrays", hw.num_arrays},
          {"buffer_bytes", hw.buffer_bytes},
          {"dram_bw_bytes_per_s", hw.dram_bw_bytes_per_s},
          {"freq_hz", hw.freq_hz},
          {"bytes_per_element", hw.bytes_per_element},
          {"energy",
           {{"e_dram", hw.energy.e_dram}, {"e_buf", hw.energy.e_buf}, {"e_mac", hw.energy.e_mac},
            {"e_sfu", hw.energy.e_sfu}}}};
}

json to_json(const Metrics& m) {
  return {{"buffer_elems", m.buffer_elems},
          {"buffer_elems_op1", m.bs_op1},
          {"buffer_elems_op2", m.bs_op2},
          {"buffer_bytes", m.buffer_bytes},
          {"dram_elems_per_head", m.dram_elems},
          {"buffer_rf_elems_per_head", m.buffer_rf},
          {"macs_per_head", m.macs},
          {"softmax_elems_per_head", m.softmax_elems},
          {"compute_cycles", m.compute_cycles},
          {"dram_cycles", m.dram_cycles},
          {"latency_cycles", m.latency_cycles},
          {"energy", m.energy},
          {"energy_breakdown",
           {{"dram", m.energy_dram}, {"buffer", m.energy_buffer}, {"mac", m.energy_mac}, {"softmax", m.energy_softmax}}},
          {"utilization", m.utilization}};
}

json to_json(const Solution& s) {
  const MappingTemplate& t = s.tmpl;
  json levels;
  for (Operand op : kAllOperands) levels[std::string(1, operand_name(op))] = t.level_string(op);
  json tiles;
  for (Dim d : kAllDims) {
    const std::string n(1, dim_name(d));
    tiles[n + "_D"] = s.tiling.inter(d);
    tiles[n + "_G"] = s.tiling.intra(d);
  }
  return {{"mapping_id", s.template_id},
          {"loop_order", t.loop_order_string()},
          {"buffering_levels", levels},
          {"stationary", {{"op1", stationary_name(t.stationary.op1)}, {"op2", stationary_name(t.stationary.op2)}}},
          {"recompute", t.recompute},
          {"tiling", tiles},
          {"metrics", to_json(s.metrics)}};
}

const char* solutions_csv_header() {
  return "mapping_id,loop_order,lvl_A,lvl_B,lvl_C,lvl_D,lvl_E,stationary_op1,stationary_op2,recompute,"
         "i_D,k_D,l_D,j_D,i_G,k_G,l_G,j_G,buffer_bytes,dram_elems,macs,energy,latency_cycles,utilization";
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

void write_solutions_csv(std::ostream& os, const std::vector<Solution>& rows) {
  os << solutions_csv_header() << '\n';
  for (const Solution& s : rows) {
    const MappingTemplate& t = s.tmpl;
    os << s.template_id << ",\"" << t.loop_order_string() << '"';
    for (Operand op : kAllOperands) os << ',' << t.level_string(op);
    os << ',' << stationary_name(t.stationary.op1) << ',' << stationary_name(t.stationary.op2) << ','
       << int(t.recompute);
    for (uint64_t v : s.tiling.b) os << ',' << v;
    const Metrics& m = s.metrics;
    os << ',' << m.buffer_bytes << ',' << m.dram_elems << ',' << m.macs << ',' << format_double(m.energy) << ','
       << m.latency_cycles << ',' << format_double(m.utilization) << '\n';
  }
}

}  // namespace attnflow
