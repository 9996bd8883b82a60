#pragma once

#include <string>
#include <vector>

#include "confglm/common.hpp"

namespace confglm {

// Per-predictor min-max scaling record; two-level string columns are mapped
// to {0,1} by lexicographic level order before scaling.
struct ColumnScale {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  bool factor = false;
  std::string level0, level1;

  double to_original(double scaled) const {
    return min + scaled * (max - min);
  }
};

struct LoadedCsv {
  Dataset data;  // predictors scaled to [0,1]; response as read
  std::vector<ColumnScale> predictor_scales;
  std::string response_name;
  long dropped_rows = 0;
};

// Reads a headered CSV, keeping the response and the given predictors. Rows
// with a missing value in any selected column are dropped (counted in
// dropped_rows). Numeric predictors are min-max rescaled to [0,1]; exactly
// two-level string predictors become {0,1}.
LoadedCsv load_csv(const std::string& path, const std::string& response,
                   const std::vector<std::string>& predictors);

// Decimal text with 10 significant digits; the CSV round-trip contract.
std::string format_double(double v);

void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace confglm
