#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace risopt::tools {

// Minimal CSV table. Lines starting with '#' are comments; the first
// non-comment line is the header. Fields never contain commas.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws if absent
  std::string render() const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);

// Shortest text that parses back to the same double ("nan" for NaN).
std::string format_double(double v);
double parse_double(const std::string& field);

}  // namespace risopt::tools
