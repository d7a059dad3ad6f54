#include "l1cert/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "l1cert/linalg.hpp"

namespace l1cert {

namespace {

std::vector<double> parse_csv_line(const std::string& line, const std::string& path,
                                   std::size_t lineno) {
  std::vector<double> values;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &pos);
    } catch (const std::exception&) {
      std::ostringstream msg;
      msg << path << ":" << lineno << ": cannot parse '" << cell << "' as a number";
      throw IOError(msg.str());
    }
    while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
    if (pos != cell.size()) {
      std::ostringstream msg;
      msg << path << ":" << lineno << ": trailing characters in '" << cell << "'";
      throw IOError(msg.str());
    }
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << path << ":" << lineno << ": non-finite value";
      throw IOError(msg.str());
    }
    values.push_back(v);
  }
  return values;
}

std::vector<std::vector<double>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    rows.push_back(parse_csv_line(line, path, lineno));
    if (rows.size() > 1 && rows.back().size() != rows.front().size()) {
      std::ostringstream msg;
      msg << path << ":" << lineno << ": ragged row (" << rows.back().size()
          << " values, expected " << rows.front().size() << ")";
      throw IOError(msg.str());
    }
  }
  if (rows.empty()) throw IOError(path + ": no data");
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Matrix read_matrix_csv(const std::string& path) {
  const auto rows = read_rows(path);
  const Index r = static_cast<Index>(rows.size());
  const Index c = static_cast<Index>(rows.front().size());
  Matrix a(r, c);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) {
      a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return a;
}

Vector read_vector_csv(const std::string& path) {
  const auto rows = read_rows(path);
  if (rows.front().size() != 1) {
    throw IOError(path + ": expected a single-column file");
  }
  Vector v(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) v[static_cast<Index>(i)] = rows[i][0];
  return v;
}

void write_matrix_csv(const std::string& path, const Matrix& a) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write " + path);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(a(i, j));
    }
    out << '\n';
  }
}

void write_vector_csv(const std::string& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write " + path);
  for (Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
}

}  // namespace l1cert
