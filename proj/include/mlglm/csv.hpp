#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "mlglm/errors.hpp"

namespace mlglm {

// Fixed %.17g formatting so artifacts are byte-reproducible run to run.
inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header) : out_(path) {
    if (!out_) throw ConfigError("cannot open '" + path + "' for writing");
    out_ << header << "\n";
  }

  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ",";
      out_ << cells[i];
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

}  // namespace mlglm
