#include "d2dlab/csv.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace d2dlab {

std::string format_double(double v) {
  char buf[64];
  const std::to_chars_result r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string format_int(std::int64_t v) {
  char buf[24];
  const std::to_chars_result r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string format_uint(std::uint64_t v) {
  char buf[24];
  const std::to_chars_result r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::string escaped(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

CsvFile::CsvFile(const std::string& path, const std::string& schema,
                 const std::vector<std::string>& columns, const std::string& config_hash,
                 std::uint64_t seed)
    : path_(path), arity_(columns.size()), out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot write '" + path + "'");
  out_ << "# schema: " << schema << "\n";
  out_ << "# run: config=" << config_hash << " seed=" << format_uint(seed) << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i)
    out_ << (i ? "," : "") << escaped(columns[i]);
  out_ << "\n";
}

void CsvFile::row(const std::vector<std::string>& cells) {
  if (cells.size() != arity_)
    throw std::invalid_argument("csv row arity mismatch in '" + path_ + "'");
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << escaped(cells[i]);
  out_ << "\n";
}

}  // namespace d2dlab
