// Times the serial kernels against their OpenMP counterparts so regressions
// in either path show up before they hit a training run.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "nia/kernels.hpp"
#include "nia/sparse.hpp"

namespace {

using clk = std::chrono::steady_clock;

double seconds_of(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    const auto t0 = clk::now();
    for (int r = 0; r < reps; ++r) fn();
    return std::chrono::duration<double>(clk::now() - t0).count() / reps;
}

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace

int main() {
    std::mt19937_64 rng(7);
    std::printf("%-28s %12s %12s %8s\n", "kernel", "serial (s)", "omp (s)", "speedup");

    for (const std::size_t n : {128, 256, 512}) {
        const auto a = random_vec(n * n, rng);
        const auto b = random_vec(n * n, rng);
        std::vector<double> c(n * n);
        const int reps = n <= 256 ? 10 : 3;
        const double ts = seconds_of(
            [&] { nia::kernels::matmul_serial(a.data(), b.data(), c.data(), n, n, n, false); }, reps);
        const double tp = seconds_of(
            [&] { nia::kernels::matmul_omp(a.data(), b.data(), c.data(), n, n, n, false); }, reps);
        char name[64];
        std::snprintf(name, sizeof name, "matmul %zux%zu", n, n);
        std::printf("%-28s %12.6f %12.6f %8.2f\n", name, ts, tp, ts / tp);
    }

    for (const std::size_t n : {2000, 8000}) {
        std::vector<std::pair<std::size_t, std::size_t>> entries;
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (std::size_t i = 0; i < 20 * n; ++i) entries.emplace_back(pick(rng), pick(rng));
        const auto pattern = nia::make_pattern(n, n, entries);
        const auto vals = random_vec(pattern->nnz(), rng);
        const std::size_t d = 64;
        const auto x = random_vec(n * d, rng);
        std::vector<double> y(n * d);
        const double ts = seconds_of(
            [&] { nia::kernels::spmm_serial(*pattern, vals.data(), x.data(), y.data(), d, false); }, 5);
        const double tp = seconds_of(
            [&] { nia::kernels::spmm_omp(*pattern, vals.data(), x.data(), y.data(), d, false); }, 5);
        char name[64];
        std::snprintf(name, sizeof name, "spmm n=%zu nnz=%zu", n, pattern->nnz());
        std::printf("%-28s %12.6f %12.6f %8.2f\n", name, ts, tp, ts / tp);
    }

    return 0;
}
