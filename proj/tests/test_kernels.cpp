#include <array>
#include <random>
#include <vector>

#include <doctest.h>

#include "nia/kernels.hpp"
#include "nia/sparse.hpp"

using namespace nia;

namespace {

std::vector<double> rand_vec(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST_CASE("matmul variants: omp is bit-identical to serial") {
    std::mt19937_64 rng(11);
    for (const auto [m, k, n] : {std::array<std::size_t, 3>{3, 4, 5},
                                 std::array<std::size_t, 3>{17, 9, 23},
                                 std::array<std::size_t, 3>{64, 64, 64}}) {
        const auto a = rand_vec(m * k, rng);
        const auto b = rand_vec(k * n, rng);
        const auto bt = rand_vec(n * k, rng);
        const auto at = rand_vec(m * k, rng);  // for tn: a is m x k, output k x n
        const auto bn = rand_vec(m * n, rng);

        std::vector<double> c1(m * n, 0.5), c2(m * n, 0.5);
        kernels::matmul_serial(a.data(), b.data(), c1.data(), m, k, n, true);
        kernels::matmul_omp(a.data(), b.data(), c2.data(), m, k, n, true);
        CHECK(c1 == c2);

        std::vector<double> d1(m * n), d2(m * n);
        kernels::matmul_nt_serial(a.data(), bt.data(), d1.data(), m, k, n, false);
        kernels::matmul_nt_omp(a.data(), bt.data(), d2.data(), m, k, n, false);
        CHECK(d1 == d2);

        std::vector<double> e1(k * n, -1.0), e2(k * n, -1.0);
        kernels::matmul_tn_serial(at.data(), bn.data(), e1.data(), m, k, n, true);
        kernels::matmul_tn_omp(at.data(), bn.data(), e2.data(), m, k, n, true);
        CHECK(e1 == e2);
    }
}

TEST_CASE("matmul against a hand example") {
    // [1 2; 3 4] * [5 6; 7 8] = [19 22; 43 50]
    const std::vector<double> a{1, 2, 3, 4}, b{5, 6, 7, 8};
    std::vector<double> c(4);
    kernels::matmul(a.data(), b.data(), c.data(), 2, 2, 2);
    CHECK(c == std::vector<double>{19, 22, 43, 50});

    // nt: same product with b stored transposed
    const std::vector<double> bt{5, 7, 6, 8};
    std::vector<double> c2(4);
    kernels::matmul_nt(a.data(), bt.data(), c2.data(), 2, 2, 2);
    CHECK(c2 == c);

    // tn: a^T * b with a stored normally
    std::vector<double> c3(4);
    kernels::matmul_tn(a.data(), b.data(), c3.data(), 2, 2, 2);
    // a^T = [1 3; 2 4], product = [26 30; 38 44]
    CHECK(c3 == std::vector<double>{26, 30, 38, 44});
}

TEST_CASE("spmm matches a dense loop and omp matches serial") {
    std::mt19937_64 rng(23);
    const std::size_t n = 37, d = 8;
    std::vector<std::pair<std::size_t, std::size_t>> entries;
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int i = 0; i < 150; ++i) entries.emplace_back(pick(rng), pick(rng));
    const auto pattern = make_pattern(n, n, entries);
    const auto vals = rand_vec(pattern->nnz(), rng);
    const auto x = rand_vec(n * d, rng);

    std::vector<double> dense(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = pattern->row(i);
        for (std::size_t p = 0; p < row.size(); ++p)
            dense[i * n + row[p]] = vals[pattern->offsets[i] + p];
    }
    std::vector<double> want(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t f = 0; f < d; ++f) want[i * d + f] += dense[i * n + j] * x[j * d + f];

    std::vector<double> y1(n * d), y2(n * d);
    kernels::spmm_serial(*pattern, vals.data(), x.data(), y1.data(), d, false);
    kernels::spmm_omp(*pattern, vals.data(), x.data(), y2.data(), d, false);
    CHECK(y1 == y2);
    for (std::size_t i = 0; i < n * d; ++i) CHECK(y1[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("spmm_grad_values matches the dense definition") {
    std::mt19937_64 rng(29);
    const std::size_t n = 12, d = 5;
    std::vector<std::pair<std::size_t, std::size_t>> entries;
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int i = 0; i < 40; ++i) entries.emplace_back(pick(rng), pick(rng));
    const auto pattern = make_pattern(n, n, entries);
    const auto x = rand_vec(n * d, rng);
    const auto dy = rand_vec(n * d, rng);

    std::vector<double> g1(pattern->nnz(), 0.0), g2(pattern->nnz(), 0.0);
    kernels::spmm_grad_values_serial(*pattern, x.data(), dy.data(), g1.data(), d);
    kernels::spmm_grad_values_omp(*pattern, x.data(), dy.data(), g2.data(), d);
    CHECK(g1 == g2);

    for (std::size_t i = 0; i < n; ++i) {
        const auto row = pattern->row(i);
        for (std::size_t p = 0; p < row.size(); ++p) {
            double want = 0.0;
            for (std::size_t f = 0; f < d; ++f) want += dy[i * d + f] * x[row[p] * d + f];
            CHECK(g1[pattern->offsets[i] + p] == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("spmm_transpose_acc scatters into x correctly") {
    // 2x3 matrix S = [[1, 0, 2], [0, 3, 0]]; S^T * dy with dy 2x1.
    const auto pattern = make_pattern(2, 3, {{0, 0}, {0, 2}, {1, 1}});
    const std::vector<double> vals{1.0, 2.0, 3.0};
    const std::vector<double> dy{10.0, 20.0};
    std::vector<double> dx(3, 1.0);
    kernels::spmm_transpose_acc(*pattern, vals.data(), dy.data(), dx.data(), 1);
    CHECK(dx == std::vector<double>{11.0, 61.0, 21.0});
}

TEST_CASE("dispatch honours the runtime switch") {
    std::mt19937_64 rng(31);
    const std::size_t m = 8, k = 8, n = 8;
    const auto a = rand_vec(m * k, rng);
    const auto b = rand_vec(k * n, rng);
    std::vector<double> c_on(m * n), c_off(m * n);

    kernels::set_parallel(true);
    CHECK(kernels::parallel_enabled());
    kernels::matmul(a.data(), b.data(), c_on.data(), m, k, n);

    kernels::set_parallel(false);
    CHECK_FALSE(kernels::parallel_enabled());
    kernels::matmul(a.data(), b.data(), c_off.data(), m, k, n);
    kernels::set_parallel(true);

    CHECK(c_on == c_off);
}

TEST_CASE("make_pattern sorts, dedups and validates") {
    const auto p = make_pattern(3, 3, {{2, 1}, {0, 2}, {0, 0}, {0, 2}});
    CHECK(p->nnz() == 3);
    CHECK(p->offsets == std::vector<std::size_t>{0, 2, 2, 3});
    CHECK(p->indices == std::vector<std::size_t>{0, 2, 1});
    CHECK_THROWS(make_pattern(2, 2, {{2, 0}}));
    CHECK_THROWS(make_pattern(2, 2, {{0, 5}}));
}
