#include "confglm/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace confglm {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool is_missing(const std::string& s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" ||
         s == "NULL";
}

bool parse_number(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

LoadedCsv load_csv(const std::string& path, const std::string& response,
                   const std::vector<std::string>& predictors) {
  if (predictors.empty())
    throw std::invalid_argument("at least one predictor column is required");

  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("empty file: " + path);
  const auto header = split_line(line);

  auto column_of = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw std::invalid_argument("column not found: " + name);
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t resp_col = column_of(response);
  std::vector<std::size_t> pred_cols;
  for (const auto& p : predictors) pred_cols.push_back(column_of(p));

  std::vector<std::string> resp_raw;
  std::vector<std::vector<std::string>> pred_raw(predictors.size());
  long dropped = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_line(line);
    bool missing = fields.size() <= resp_col || is_missing(fields[resp_col]);
    for (auto c : pred_cols)
      if (fields.size() <= c || is_missing(fields[c])) missing = true;
    if (missing) {
      ++dropped;
      continue;
    }
    resp_raw.push_back(fields[resp_col]);
    for (std::size_t j = 0; j < pred_cols.size(); ++j)
      pred_raw[j].push_back(fields[pred_cols[j]]);
  }
  if (resp_raw.empty())
    throw std::invalid_argument("no complete rows in " + path);

  const auto n = static_cast<Eigen::Index>(resp_raw.size());
  LoadedCsv out;
  out.response_name = response;
  out.dropped_rows = dropped;
  out.data.y.resize(n);
  out.data.x.resize(n, static_cast<Eigen::Index>(predictors.size()));

  for (Eigen::Index i = 0; i < n; ++i) {
    double v;
    if (!parse_number(resp_raw[static_cast<std::size_t>(i)], v))
      throw std::invalid_argument("non-numeric response value '" +
                                  resp_raw[static_cast<std::size_t>(i)] +
                                  "' in column " + response);
    out.data.y[i] = v;
  }

  for (std::size_t j = 0; j < predictors.size(); ++j) {
    ColumnScale scale;
    scale.name = predictors[j];
    const auto& raw = pred_raw[j];

    bool numeric = true;
    std::vector<double> values(raw.size());
    for (std::size_t i = 0; i < raw.size() && numeric; ++i)
      numeric = parse_number(raw[i], values[i]);

    if (!numeric) {
      std::set<std::string> levels(raw.begin(), raw.end());
      if (levels.size() != 2)
        throw std::invalid_argument(
            "column " + predictors[j] +
            " is non-numeric and does not have exactly two levels");
      scale.factor = true;
      scale.level0 = *levels.begin();
      scale.level1 = *std::next(levels.begin());
      for (std::size_t i = 0; i < raw.size(); ++i)
        values[i] = raw[i] == scale.level0 ? 0.0 : 1.0;
    }

    double lo = values[0], hi = values[0];
    for (double v : values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    scale.min = lo;
    scale.max = hi;
    const double span = hi - lo;
    for (Eigen::Index i = 0; i < n; ++i)
      out.data.x(i, static_cast<Eigen::Index>(j)) =
          span > 0.0 ? (values[static_cast<std::size_t>(i)] - lo) / span : 0.0;
    out.predictor_scales.push_back(std::move(scale));
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream outfile(path);
  if (!outfile) throw std::invalid_argument("cannot write file: " + path);
  for (std::size_t j = 0; j < header.size(); ++j)
    outfile << (j ? "," : "") << header[j];
  outfile << "\n";
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j)
      outfile << (j ? "," : "") << row[j];
    outfile << "\n";
  }
}

}  // namespace confglm
