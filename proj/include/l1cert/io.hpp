#pragma once

#include <string>

#include "l1cert/common.hpp"

namespace l1cert {

class IOError : public std::runtime_error {
 public:
  explicit IOError(const std::string& what) : std::runtime_error(what) {}
};

// Plain CSV, one matrix row per line, no header; vectors are single-column.
// Writers use 17 significant digits so a read-back reproduces every value to
// the last ulp. Readers reject ragged rows and non-finite values.
Matrix read_matrix_csv(const std::string& path);
Vector read_vector_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& a);
void write_vector_csv(const std::string& path, const Vector& v);

std::string format_double(double v);

}  // namespace l1cert
