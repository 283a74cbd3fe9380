#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace d2dlab {

// Shortest decimal that parses back to exactly the same value.
std::string format_double(double v);
std::string format_int(std::int64_t v);
std::string format_uint(std::uint64_t v);

// One result file. The layout is two comment lines (schema version, then
// config hash and seed), a header naming every column, and the data rows.
// Cells containing commas or quotes are quoted RFC-4180 style.
class CsvFile {
 public:
  CsvFile(const std::string& path, const std::string& schema,
          const std::vector<std::string>& columns, const std::string& config_hash,
          std::uint64_t seed);

  // Throws std::invalid_argument when the cell count differs from the header.
  void row(const std::vector<std::string>& cells);

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::size_t arity_;
  std::ofstream out_;
};

}  // namespace d2dlab
