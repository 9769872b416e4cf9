#include "lhr/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace lhr {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double parse_entry(std::string_view cell, std::size_t row, std::size_t col) {
  cell = trim(cell);
  double value = 0.0;
  const auto *end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value))
    throw ParseError("matrix-csv: bad entry '" + std::string(cell) +
                     "' at row " + std::to_string(row + 1) + ", column " +
                     std::to_string(col + 1));
  return value;
}

} // namespace

Matrix read_matrix_csv(std::istream &in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = trim(line);
    if (view.empty())
      continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = view.find(',', start);
      const std::string_view cell = view.substr(
          start, comma == std::string_view::npos ? view.npos : comma - start);
      row.push_back(parse_entry(cell, rows.size(), row.size()));
      if (comma == std::string_view::npos)
        break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("matrix-csv: row " + std::to_string(rows.size() + 1) +
                       " has " + std::to_string(row.size()) +
                       " entries, expected " +
                       std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw ParseError("matrix-csv: no rows");

  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

Matrix read_matrix_csv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open " + path.string());
  return read_matrix_csv(in);
}

void write_matrix_csv(std::ostream &out, const Matrix &m) {
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0)
        out.put(',');
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, m(i, j),
                                     std::chars_format::general, 17);
      out.write(buf, ptr - buf);
    }
    out.put('\n');
  }
}

void write_matrix_csv(const std::filesystem::path &path, const Matrix &m) {
  std::ofstream out(path);
  if (!out)
    throw ParseError("cannot write " + path.string());
  write_matrix_csv(out, m);
}

} // namespace lhr
