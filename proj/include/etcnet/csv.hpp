#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace etcnet {

/// Doubles are printed with %.17g so values survive a parse round trip
/// exactly; reruns of the same config produce byte-identical files.
std::string fmt_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void flush() { out_.flush(); }
  std::size_t columns() const { return columns_; }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  static CsvTable read(const std::filesystem::path& path);
  int column_index(const std::string& name) const;  // -1 if absent
  std::vector<double> column(const std::string& name) const;
};

}  // namespace etcnet
