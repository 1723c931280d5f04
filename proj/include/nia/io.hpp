#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "nia/tensor.hpp"

namespace nia::io {

// Little-endian primitives, independent of host byte order.
void write_u64(std::ostream& os, std::uint64_t v);
std::uint64_t read_u64(std::istream& is);
void write_f64(std::ostream& os, double v);
double read_f64(std::istream& is);
void write_string(std::ostream& os, const std::string& s);  // u64 length + raw bytes
std::string read_string(std::istream& is);

// Tensor block: u64 rows, u64 cols, then rows*cols doubles row-major.
void write_tensor(std::ostream& os, const ad::Tensor& t);
ad::Tensor read_tensor(std::istream& is, bool requires_grad = false);

// Throws std::runtime_error naming the file on any stream failure.
void require_stream(const std::ios& s, const std::string& what);

}  // namespace nia::io
