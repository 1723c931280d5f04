#pragma once

#include <cstddef>

#include "nia/sparse.hpp"

namespace nia::kernels {

// Runtime switch between the serial reference kernels and the OpenMP ones.
// Both compute identical floating-point results: the parallel variants only
// partition output rows, never a reduction.
void set_parallel(bool on);
bool parallel_enabled();

// Dispatchers stay serial below this many multiply-adds.
inline constexpr std::size_t parallel_grain = std::size_t{1} << 15;

// c(m x n) = a(m x k) * b(k x n), row-major; accumulate adds into c.
void matmul_serial(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n, bool accumulate = false);
void matmul_omp(const double* a, const double* b, double* c,
                std::size_t m, std::size_t k, std::size_t n, bool accumulate = false);
void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n, bool accumulate = false);

// c(m x n) = a(m x k) * b(n x k)^T
void matmul_nt_serial(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate = false);
void matmul_nt_omp(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n, bool accumulate = false);
void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n, bool accumulate = false);

// c(k x n) = a(m x k)^T * b(m x n)
void matmul_tn_serial(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate = false);
void matmul_tn_omp(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n, bool accumulate = false);
void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n, bool accumulate = false);

// y(rows x n) = S * x(cols x n)
void spmm_serial(const CsrPattern& s, const double* values, const double* x, double* y,
                 std::size_t n, bool accumulate = false);
void spmm_omp(const CsrPattern& s, const double* values, const double* x, double* y,
              std::size_t n, bool accumulate = false);
void spmm(const CsrPattern& s, const double* values, const double* x, double* y,
          std::size_t n, bool accumulate = false);

// x(cols x n) += S^T * dy(rows x n); serial scatter, used only in backward passes.
void spmm_transpose_acc(const CsrPattern& s, const double* values, const double* dy, double* dx,
                        std::size_t n);

// dvalues[p] += dot(dy[row(p), :], x[col(p), :])
void spmm_grad_values_serial(const CsrPattern& s, const double* x, const double* dy,
                             double* dvalues, std::size_t n);
void spmm_grad_values_omp(const CsrPattern& s, const double* x, const double* dy,
                          double* dvalues, std::size_t n);
void spmm_grad_values(const CsrPattern& s, const double* x, const double* dy,
                      double* dvalues, std::size_t n);

}  // namespace nia::kernels
