#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace rwgd::cli {

// Shortest round-trip form; non-finite values print as nan, inf, -inf.
std::string format_number(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace rwgd::cli
