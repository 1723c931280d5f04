#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "nia/sparse.hpp"

namespace nia::ad {

// Dense row-major matrix with an optional gradient buffer. Copies share
// storage; the tape keeps operands alive by capturing these handles.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
    static Tensor from(std::size_t rows, std::size_t cols, std::vector<double> data,
                       bool requires_grad = false);
    static Tensor row(std::vector<double> data, bool requires_grad = false);
    static Tensor column(std::vector<double> data, bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);

    bool defined() const { return d_ != nullptr; }
    std::size_t rows() const { return d_->rows; }
    std::size_t cols() const { return d_->cols; }
    std::size_t size() const { return d_->v.size(); }

    double& at(std::size_t i, std::size_t j) { return d_->v[i * d_->cols + j]; }
    double at(std::size_t i, std::size_t j) const { return d_->v[i * d_->cols + j]; }
    double item() const;  // value of a 1x1 tensor

    std::vector<double>& data() { return d_->v; }
    const std::vector<double>& data() const { return d_->v; }

    bool requires_grad() const { return d_->requires_grad; }
    void set_requires_grad(bool on) { d_->requires_grad = on; }

    // Gradient buffer, allocated to zeros on first access.
    std::vector<double>& grad() const;
    bool has_grad() const { return !d_->g.empty(); }
    void zero_grad() const;

    Tensor clone() const;  // deep copy of values, detached (no grad requirement)

private:
    struct Data {
        std::size_t rows = 0, cols = 0;
        std::vector<double> v;
        mutable std::vector<double> g;
        bool requires_grad = false;
    };
    std::shared_ptr<Data> d_;
};

// Records backward closures during eager forward evaluation and replays them
// in reverse. A tape is consumed by backward(); recording must start over.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    void record(std::function<void()> fn) { nodes_.push_back(std::move(fn)); }
    std::size_t size() const { return nodes_.size(); }

    // Seeds d(loss)/d(loss) = 1 and propagates to every requires_grad leaf.
    void backward(const Tensor& loss);

private:
    std::vector<std::function<void()>> nodes_;
};

// Sparse matrix whose values may live on the tape (soft injected edges).
struct SparseTensor {
    std::shared_ptr<const CsrPattern> pattern;
    Tensor values;  // nnz x 1
};

SparseTensor as_sparse_tensor(const CsrMatrix& m);

inline bool taping(const Tape* tape, const Tensor& a) { return tape && a.requires_grad(); }
inline bool taping(const Tape* tape, const Tensor& a, const Tensor& b) {
    return tape && (a.requires_grad() || b.requires_grad());
}

// Primitive operations. `tape == nullptr` evaluates without recording.
Tensor matmul(Tape* tape, const Tensor& a, const Tensor& b);
Tensor spmm(Tape* tape, const CsrMatrix& s, const Tensor& x);
Tensor spmm(Tape* tape, const SparseTensor& s, const Tensor& x);
Tensor add(Tape* tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape* tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape* tape, const Tensor& a, const Tensor& b);
Tensor add_bias(Tape* tape, const Tensor& a, const Tensor& bias);
Tensor scale(Tape* tape, const Tensor& a, double c);
Tensor relu(Tape* tape, const Tensor& a);
Tensor sigmoid(Tape* tape, const Tensor& a);
Tensor log_elem(Tape* tape, const Tensor& a);
Tensor rsqrt(Tape* tape, const Tensor& a);
Tensor row_softmax(Tape* tape, const Tensor& a);
Tensor concat_cols(Tape* tape, const Tensor& a, const Tensor& b);
Tensor concat_rows(Tape* tape, const Tensor& a, const Tensor& b);
Tensor repeat_rows(Tape* tape, const Tensor& a, std::size_t m);
Tensor gather_rows(Tape* tape, const Tensor& a, const std::vector<std::size_t>& rows);
Tensor gather_elems(Tape* tape, const Tensor& a, const std::vector<std::size_t>& flat_idx);
Tensor reshape_vec(Tape* tape, const Tensor& a, std::size_t rows, std::size_t cols);
Tensor sum_all(Tape* tape, const Tensor& a);

// out (len x 1) = base; out[dst] += src[src_idx] for every (dst, src_idx) pair.
Tensor scatter_add(Tape* tape, const std::vector<double>& base,
                   const std::vector<std::pair<std::size_t, std::size_t>>& updates,
                   const Tensor& src);

// Mean negative log likelihood of probs[r, labels[r]] over the given rows.
Tensor nll_rows(Tape* tape, const Tensor& probs, const std::vector<int>& labels,
                const std::vector<std::size_t>& rows);

// Sum over targets of probs[t, y_t] - max_{k != y_t} probs[t, k].
Tensor margin_sum(Tape* tape, const Tensor& probs, const std::vector<std::size_t>& target_rows,
                  const std::vector<int>& labels);

// Uniform(-s, s) init with s = sqrt(6 / (fan_in + fan_out)).
Tensor glorot(std::size_t rows, std::size_t cols, std::mt19937_64& rng, bool requires_grad = true);

}  // namespace nia::ad
