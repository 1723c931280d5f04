#include "nia/kernels.hpp"

#include <atomic>

namespace nia::kernels {

namespace {
std::atomic<bool> g_parallel{true};

inline bool go_parallel(std::size_t work) {
    return g_parallel.load(std::memory_order_relaxed) && work >= parallel_grain;
}
}  // namespace

void set_parallel(bool on) { g_parallel.store(on, std::memory_order_relaxed); }
bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

// Each output row is owned by exactly one iteration, so the OpenMP variants
// produce bit-identical results to the serial ones.

void matmul_serial(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        if (!accumulate) {
            for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        }
        const double* ai = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = ai[p];
            if (av == 0.0) continue;
            const double* bp = b + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

void matmul_omp(const double* a, const double* b, double* c,
                std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double* ci = c + i * n;
        if (!accumulate) {
            for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        }
        const double* ai = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = ai[p];
            if (av == 0.0) continue;
            const double* bp = b + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    if (go_parallel(m * k * n))
        matmul_omp(a, b, c, m, k, n, accumulate);
    else
        matmul_serial(a, b, c, m, k, n, accumulate);
}

void matmul_nt_serial(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            if (accumulate)
                ci[j] += acc;
            else
                ci[j] = acc;
        }
    }
}

void matmul_nt_omp(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            if (accumulate)
                ci[j] += acc;
            else
                ci[j] = acc;
        }
    }
}

void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    if (go_parallel(m * k * n))
        matmul_nt_omp(a, b, c, m, k, n, accumulate);
    else
        matmul_nt_serial(a, b, c, m, k, n, accumulate);
}

void matmul_tn_serial(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < k; ++i) {
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < m; ++p) acc += a[p * k + i] * b[p * n + j];
            if (accumulate)
                ci[j] += acc;
            else
                ci[j] = acc;
        }
    }
}

void matmul_tn_omp(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(k); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < m; ++p) acc += a[p * k + i] * b[p * n + j];
            if (accumulate)
                ci[j] += acc;
            else
                ci[j] = acc;
        }
    }
}

void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    if (go_parallel(m * k * n))
        matmul_tn_omp(a, b, c, m, k, n, accumulate);
    else
        matmul_tn_serial(a, b, c, m, k, n, accumulate);
}

void spmm_serial(const CsrPattern& s, const double* values, const double* x, double* y,
                 std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < s.rows; ++i) {
        double* yi = y + i * n;
        if (!accumulate) {
            for (std::size_t j = 0; j < n; ++j) yi[j] = 0.0;
        }
        for (std::size_t p = s.offsets[i]; p < s.offsets[i + 1]; ++p) {
            const double v = values[p];
            const double* xr = x + s.indices[p] * n;
            for (std::size_t j = 0; j < n; ++j) yi[j] += v * xr[j];
        }
    }
}

void spmm_omp(const CsrPattern& s, const double* values, const double* x, double* y,
              std::size_t n, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(s.rows); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double* yi = y + i * n;
        if (!accumulate) {
            for (std::size_t j = 0; j < n; ++j) yi[j] = 0.0;
        }
        for (std::size_t p = s.offsets[i]; p < s.offsets[i + 1]; ++p) {
            const double v = values[p];
            const double* xr = x + s.indices[p] * n;
            for (std::size_t j = 0; j < n; ++j) yi[j] += v * xr[j];
        }
    }
}

void spmm(const CsrPattern& s, const double* values, const double* x, double* y,
          std::size_t n, bool accumulate) {
    if (go_parallel(s.nnz() * n))
        spmm_omp(s, values, x, y, n, accumulate);
    else
        spmm_serial(s, values, x, y, n, accumulate);
}

void spmm_transpose_acc(const CsrPattern& s, const double* values, const double* dy, double* dx,
                        std::size_t n) {
    for (std::size_t i = 0; i < s.rows; ++i) {
        const double* dyi = dy + i * n;
        for (std::size_t p = s.offsets[i]; p < s.offsets[i + 1]; ++p) {
            const double v = values[p];
            double* dxr = dx + s.indices[p] * n;
            for (std::size_t j = 0; j < n; ++j) dxr[j] += v * dyi[j];
        }
    }
}

void spmm_grad_values_serial(const CsrPattern& s, const double* x, const double* dy,
                             double* dvalues, std::size_t n) {
    for (std::size_t i = 0; i < s.rows; ++i) {
        const double* dyi = dy + i * n;
        for (std::size_t p = s.offsets[i]; p < s.offsets[i + 1]; ++p) {
            const double* xr = x + s.indices[p] * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += dyi[j] * xr[j];
            dvalues[p] += acc;
        }
    }
}

void spmm_grad_values_omp(const CsrPattern& s, const double* x, const double* dy,
                          double* dvalues, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(s.rows); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double* dyi = dy + i * n;
        for (std::size_t p = s.offsets[i]; p < s.offsets[i + 1]; ++p) {
            const double* xr = x + s.indices[p] * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += dyi[j] * xr[j];
            dvalues[p] += acc;
        }
    }
}

void spmm_grad_values(const CsrPattern& s, const double* x, const double* dy,
                      double* dvalues, std::size_t n) {
    if (go_parallel(s.nnz() * n))
        spmm_grad_values_omp(s, x, dy, dvalues, n);
    else
        spmm_grad_values_serial(s, x, dy, dvalues, n);
}

}  // namespace nia::kernels
