#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace decaylab {

// 17 significant digits: enough to round-trip any double.
std::string fmt17(double x);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void raw_row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::filesystem::path path_;
};

// Creates parent directories; throws Error if the file cannot be opened.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace decaylab
