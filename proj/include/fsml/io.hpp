#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fsml/curve.hpp"

namespace fsml::io {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text, const std::string& context);
long long parse_int(std::string_view text, const std::string& context);

/// Comma-separated table with a header row. Fields are trimmed; quoting is
/// not supported.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // source line per row

  /// Index of a header column; ParseError naming `source` if absent.
  std::size_t column(std::string_view name, const std::string& source) const;
};

CsvTable read_csv(std::istream& in, const std::string& source);
CsvTable read_csv_file(const std::string& path);

/// Long format `curve_id,t,value`. Curves appear in order of first row;
/// each curve's observations are sorted by time.
std::vector<fda::SampledCurve> read_curves(std::istream& in, const std::string& source);
std::vector<fda::SampledCurve> read_curves_file(const std::string& path);
void write_curves(std::ostream& out, const std::vector<fda::SampledCurve>& curves);

/// `curve_id,label`.
std::vector<std::pair<std::string, int>> read_labels_file(const std::string& path);
void write_labels(std::ostream& out, const std::vector<std::string>& ids, const std::vector<int>& labels);

/// Labels aligned with `ids`; ParseError for ids without a label.
std::vector<int> align_labels(const std::vector<std::string>& ids,
                              const std::vector<std::pair<std::string, int>>& labels);

/// Rows `id,v1,...,vk` under the given header (header includes the id column).
void write_id_matrix(std::ostream& out, const std::vector<std::string>& header, const std::vector<std::string>& ids,
                     const Eigen::MatrixXd& values);

/// Square matrix with a header row of ids.
void write_square_matrix(std::ostream& out, const std::vector<std::string>& ids, const Eigen::MatrixXd& values);
std::pair<std::vector<std::string>, Eigen::MatrixXd> read_square_matrix_file(const std::string& path);

std::ofstream open_output(const std::string& path);

}  // namespace fsml::io
