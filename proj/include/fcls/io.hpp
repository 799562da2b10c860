#pragma once

#include "fcls/edge_vector.hpp"

#include <Eigen/Dense>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fcls {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Decimal with 17 significant digits, enough for a bit-stable double round trip.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, int line_no, const std::string& path) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\r')) ++pos;
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw IoError(path + ":" + std::to_string(line_no) + ": cannot parse number '" + s + "'");
  }
}

/// Edge-vector file: header line `d=<n>`, then one value per line in
/// edge-index order.
inline void write_edge_vector(const std::string& path, const EdgeVectord& beta) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "d=" << beta.d << "\n";
  for (Index l = 0; l < beta.size(); ++l) out << format_double(beta.values(l)) << "\n";
}

inline EdgeVectord read_edge_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ":1: empty file");
  if (line.rfind("d=", 0) != 0) throw IoError(path + ":1: expected header 'd=<n>'");
  Index d = 0;
  try {
    d = std::stol(line.substr(2));
  } catch (const std::exception&) {
    throw IoError(path + ":1: cannot parse node count in '" + line + "'");
  }
  if (d < 1) throw IoError(path + ":1: node count must be >= 1");
  Eigen::VectorXd values(num_edges(d));
  int line_no = 1;
  for (Index l = 0; l < values.size(); ++l) {
    if (!std::getline(in, line))
      throw IoError(path + ": expected " + std::to_string(values.size()) + " values, got " +
                    std::to_string(l));
    ++line_no;
    values(l) = parse_double(line, line_no, path);
  }
  return EdgeVectord(d, values);
}

/// Plain CSV matrix, row-major, no header.
inline void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << format_double(m(i, j));
    }
    out << "\n";
  }
}

inline Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(parse_double(cell, line_no, path));
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(path + ":" + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": empty matrix");
  Eigen::MatrixXd m(Index(rows.size()), Index(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m(Index(i), Index(j)) = rows[i][j];
  return m;
}

inline Eigen::VectorXd read_vector_csv(const std::string& path) {
  Eigen::MatrixXd m = read_matrix_csv(path);
  if (m.cols() != 1) throw IoError(path + ": expected a single-column CSV");
  return m.col(0);
}

}  // namespace fcls
