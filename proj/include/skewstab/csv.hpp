#ifndef SKEWSTAB_CSV_HPP
#define SKEWSTAB_CSV_HPP

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace skewstab {

// All floating point output goes through one formatter so that identical
// runs produce identical bytes.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot open output file: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out_ << ',';
      out_ << header[i];
    }
    out_ << '\n';
    cols_ = header.size();
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != cols_)
      throw std::logic_error("csv row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
  std::size_t cols_ = 0;
};

}  // namespace skewstab

#endif  // SKEWSTAB_CSV_HPP
