#include <doctest.h>

#include <sstream>
#include <string>

#include "attnflow/config.hpp"
#include "attnflow/enumeration.hpp"

using namespace attnflow;

namespace {

ConfigError error_of(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected a ConfigError");
  return ConfigError("", 0, 0, "");
}

}  // namespace

TEST_CASE("minimal config takes defaults") {
  const auto cfg = parse_config(R"({"workload": {"I": 64, "K": 16, "L": 64, "J": 16}})");
  CHECK(cfg.workload.I == 64);
  CHECK(cfg.workload.heads == 1);
  CHECK(cfg.workload.c_softmax == 10.0);
  CHECK(cfg.hw.pe_rows == AcceleratorConfig::accel1().pe_rows);
  CHECK(cfg.buffer_list.empty());
}

TEST_CASE("preset with overrides and sweeps") {
  const auto cfg = parse_config(R"({
    "workload": {"I": 512, "K": 64, "L": 512, "J": 64, "heads": 12, "c_softmax": 4.5},
    "hardware": {"preset": "accel2", "dram_bw_bytes_per_s": 8e9, "energy": {"e_dram": 150}},
    "sweep": {"buffer_list": [65536, 131072], "hw_list": ["16x16", "32x32x8"], "seqlen_list": [1024]}
  })");
  CHECK(cfg.workload.heads == 12);
  CHECK(cfg.workload.c_softmax == 4.5);
  CHECK(cfg.hw.pe_rows == 128);
  CHECK(cfg.hw.dram_bw_bytes_per_s == 8'000'000'000ull);
  CHECK(cfg.hw.energy.e_dram == 150.0);
  CHECK(cfg.hw.energy.e_buf == AcceleratorConfig::accel2().energy.e_buf);
  CHECK(cfg.buffer_list == std::vector<uint64_t>{65536, 131072});
  REQUIRE(cfg.hw_list.size() == 2);
  CHECK(cfg.hw_list[0].arrays == 0);
  CHECK(cfg.hw_list[1].to_string() == "32x32x8");
  CHECK(cfg.seqlen_list == std::vector<uint64_t>{1024});
}

TEST_CASE("zero buffer is accepted for infeasibility runs") {
  const auto cfg = parse_config(R"({"workload": {"I": 4, "K": 4, "L": 4, "J": 4}, "hardware": {"buffer_bytes": 0}})");
  CHECK(cfg.hw.buffer_bytes == 0);
}

TEST_CASE("errors carry line and column") {
  SUBCASE("negative extent") {
    const auto e = error_of("{\n  \"workload\": {\n    \"I\": 4, \"K\": 4, \"L\": -4, \"J\": 4}\n}");
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("cfg.json:3:") == 0);
    CHECK(std::string(e.what()).find("workload.L") != std::string::npos);
  }
  SUBCASE("syntax") {
    const auto e = error_of("{\n  \"workload\": {\"I\": 4,,}\n}");
    CHECK(e.line() == 2);
  }
  SUBCASE("unknown key") {
    const auto e = error_of("{\"workload\": {\"I\": 4, \"K\": 4, \"L\": 4, \"J\": 4},\n \"hardwear\": {}}");
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("hardwear") != std::string::npos);
  }
  SUBCASE("missing extent") {
    const auto e = error_of(R"({"workload": {"I": 4, "K": 4, "L": 4}})");
    CHECK(std::string(e.what()).find("'J'") != std::string::npos);
  }
  SUBCASE("fractional extent") { error_of(R"({"workload": {"I": 4.5, "K": 4, "L": 4, "J": 4}})"); }
  SUBCASE("bad preset") { error_of(R"({"workload": {"I": 4, "K": 4, "L": 4, "J": 4}, "hardware": {"preset": "gpu"}})"); }
  SUBCASE("bad array shape") {
    error_of(R"({"workload": {"I": 4, "K": 4, "L": 4, "J": 4}, "sweep": {"hw_list": ["32by32"]}})");
  }
}

TEST_CASE("size lists") {
  CHECK(parse_size_list("64K,1M,2048") == std::vector<uint64_t>{65536, 1048576, 2048});
  CHECK(parse_size_list("1G") == std::vector<uint64_t>{1ull << 30});
  CHECK_THROWS(parse_size_list("12Q"));
  CHECK_THROWS(parse_size_list(""));
}

TEST_CASE("array shapes") {
  const auto s = parse_array_shape("64x32x2");
  CHECK(s.rows == 64);
  CHECK(s.cols == 32);
  CHECK(s.arrays == 2);
  CHECK_THROWS(parse_array_shape("0x4"));
}

TEST_CASE("solutions csv") {
  std::ostringstream os;
  Solution s;
  s.template_id = 9;
  s.tmpl = template_by_id(9);
  s.metrics.energy = 1.5;
  write_solutions_csv(os, {s});
  std::istringstream is(os.str());
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  CHECK(header ==
        "mapping_id,loop_order,lvl_A,lvl_B,lvl_C,lvl_D,lvl_E,stationary_op1,stationary_op2,recompute,"
        "i_D,k_D,l_D,j_D,i_G,k_G,l_G,j_G,buffer_bytes,dram_elems,macs,energy,latency_cycles,utilization");
  CHECK(row.rfind("9,\"" + s.tmpl.loop_order_string() + "\",", 0) == 0);
  CHECK(row.find(",1.5,") != std::string::npos);
}

TEST_CASE("shortest double formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("json round trip of a workload") {
  Workload w{8, 4, 2, 16};
  w.heads = 3;
  const auto j = to_json(w);
  CHECK(j["I"] == 8);
  CHECK(j["heads"] == 3);
  CHECK(to_json(AcceleratorConfig::accel2())["pe_rows"] == 128);
}
