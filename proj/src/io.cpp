#include "nia/io.hpp"

#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace nia::io {

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw std::runtime_error("io: truncated u64");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(os, bits);
}

double read_f64(std::istream& is) {
    const std::uint64_t bits = read_u64(is);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void write_string(std::ostream& os, const std::string& s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
    const std::uint64_t n = read_u64(is);
    if (n > (std::uint64_t{1} << 20)) throw std::runtime_error("io: implausible string length");
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    if (!is) throw std::runtime_error("io: truncated string");
    return s;
}

void write_tensor(std::ostream& os, const ad::Tensor& t) {
    write_u64(os, t.rows());
    write_u64(os, t.cols());
    for (double v : t.data()) write_f64(os, v);
}

ad::Tensor read_tensor(std::istream& is, bool requires_grad) {
    const std::uint64_t rows = read_u64(is);
    const std::uint64_t cols = read_u64(is);
    if (rows * cols > (std::uint64_t{1} << 28)) throw std::runtime_error("io: implausible tensor size");
    std::vector<double> data(rows * cols);
    for (auto& v : data) v = read_f64(is);
    return ad::Tensor::from(rows, cols, std::move(data), requires_grad);
}

void require_stream(const std::ios& s, const std::string& what) {
    if (!s.good()) throw std::runtime_error("io: cannot open or read/write " + what);
}

}  // namespace nia::io
