#include "fsml/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "fsml/error.hpp"

namespace fsml::io {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& context) {
  text = trim(text);
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* begin = text.data();
  if (!text.empty() && text.front() == '+') ++begin;
  const auto res = std::from_chars(begin, text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ParseError(context + ": expected a number, found '" + std::string(text) + "'");
  return v;
}

long long parse_int(std::string_view text, const std::string& context) {
  text = trim(text);
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ParseError(context + ": expected an integer, found '" + std::string(text) + "'");
  return v;
}

std::size_t CsvTable::column(std::string_view name, const std::string& source) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ParseError(source + ": missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size())
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                       " fields, found " + std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw ParseError(source + ": empty file, header row expected");
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_csv(in, path);
}

std::vector<fda::SampledCurve> read_curves(std::istream& in, const std::string& source) {
  const CsvTable table = read_csv(in, source);
  const std::size_t id_col = table.column("curve_id", source);
  const std::size_t t_col = table.column("t", source);
  const std::size_t v_col = table.column("value", source);
  std::vector<fda::SampledCurve> curves;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string ctx = source + ":" + std::to_string(table.line_numbers[r]);
    auto [it, inserted] = index.try_emplace(row[id_col], curves.size());
    if (inserted) curves.push_back(fda::SampledCurve{row[id_col], {}, {}});
    fda::SampledCurve& c = curves[it->second];
    c.times.push_back(parse_double(row[t_col], ctx));
    c.values.push_back(parse_double(row[v_col], ctx));
  }
  for (auto& c : curves) {
    std::vector<std::size_t> order(c.times.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c.times[a] < c.times[b]; });
    std::vector<double> t, v;
    for (std::size_t k : order) {
      t.push_back(c.times[k]);
      v.push_back(c.values[k]);
    }
    c.times = std::move(t);
    c.values = std::move(v);
    for (std::size_t k = 1; k < c.times.size(); ++k)
      if (c.times[k] == c.times[k - 1])
        throw ParseError(source + ": curve '" + c.id + "' has repeated time " + format_double(c.times[k]));
  }
  return curves;
}

std::vector<fda::SampledCurve> read_curves_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_curves(in, path);
}

void write_curves(std::ostream& out, const std::vector<fda::SampledCurve>& curves) {
  out << "curve_id,t,value\n";
  for (const auto& c : curves)
    for (std::size_t k = 0; k < c.times.size(); ++k)
      out << c.id << ',' << format_double(c.times[k]) << ',' << format_double(c.values[k]) << '\n';
}

std::vector<std::pair<std::string, int>> read_labels_file(const std::string& path) {
  const CsvTable table = read_csv_file(path);
  const std::size_t id_col = table.column("curve_id", path);
  const std::size_t y_col = table.column("label", path);
  std::vector<std::pair<std::string, int>> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    out.emplace_back(table.rows[r][id_col], static_cast<int>(parse_int(table.rows[r][y_col],
                                                                       path + ":" + std::to_string(table.line_numbers[r]))));
  return out;
}

void write_labels(std::ostream& out, const std::vector<std::string>& ids, const std::vector<int>& labels) {
  out << "curve_id,label\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << ',' << labels[i] << '\n';
}

std::vector<int> align_labels(const std::vector<std::string>& ids,
                              const std::vector<std::pair<std::string, int>>& labels) {
  std::map<std::string, int> lookup;
  for (const auto& [id, y] : labels) {
    if (!lookup.emplace(id, y).second) throw ParseError("duplicate label for curve '" + id + "'");
  }
  std::vector<int> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = lookup.find(id);
    if (it == lookup.end()) throw ParseError("no label for curve '" + id + "'");
    out.push_back(it->second);
  }
  return out;
}

void write_id_matrix(std::ostream& out, const std::vector<std::string>& header, const std::vector<std::string>& ids,
                     const Eigen::MatrixXd& values) {
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    out << ids[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < values.cols(); ++c) out << ',' << format_double(values(r, c));
    out << '\n';
  }
}

void write_square_matrix(std::ostream& out, const std::vector<std::string>& ids, const Eigen::MatrixXd& values) {
  for (std::size_t c = 0; c < ids.size(); ++c) out << (c ? "," : "") << ids[c];
  out << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << format_double(values(r, c));
    out << '\n';
  }
}

std::pair<std::vector<std::string>, Eigen::MatrixXd> read_square_matrix_file(const std::string& path) {
  const CsvTable table = read_csv_file(path);
  const std::size_t n = table.header.size();
  if (table.rows.size() != n)
    throw ParseError(path + ": expected " + std::to_string(n) + " rows, found " + std::to_string(table.rows.size()));
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_double(table.rows[r][c], path + ":" + std::to_string(table.line_numbers[r]));
  return {table.header, m};
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

}  // namespace fsml::io
