#pragma once

// JSON run configuration and report/CSV emission.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "attnflow/core.hpp"
#include "attnflow/search.hpp"

namespace attnflow {

/// PE array shape for hardware sweeps, written RxC or RxCxN.
struct ArrayShape {
  uint64_t rows = 0, cols = 0, arrays = 0;  // arrays 0 = keep the configured count
  std::string to_string() const;
};
ArrayShape parse_array_shape(const std::string& s);

struct RunConfig {
  Workload workload;
  AcceleratorConfig hw;
  std::vector<uint64_t> buffer_list;
  std::vector<ArrayShape> hw_list;
  std::vector<uint64_t> seqlen_list;
};

/// A configuration problem with its position in the source text (1-based;
/// 0 when unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, size_t line, size_t column, const std::string& what);
  size_t line() const { return line_; }
  size_t column() const { return column_; }

 private:
  size_t line_, column_;
};

RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& file);

/// Comma-separated list of sizes; accepts K/M/G suffixes (powers of 1024).
std::vector<uint64_t> parse_size_list(const std::string& s);

nlohmann::json to_json(const Workload& w);
nlohmann::json to_json(const AcceleratorConfig& hw);
nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const Solution& s);

/// Shortest decimal form that round-trips.
std::string format_double(double v);

/// Header row of solutions.csv.
const char* solutions_csv_header();
void write_solutions_csv(std::ostream& os, const std::vector<Solution>& rows);

}  // namespace attnflow
