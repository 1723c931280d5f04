#include "nia/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nia/kernels.hpp"

namespace nia::ad {

namespace {
void check(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(std::string("tensor: ") + msg);
}
}  // namespace

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
    Tensor t;
    t.d_ = std::make_shared<Data>();
    t.d_->rows = rows;
    t.d_->cols = cols;
    t.d_->v.assign(rows * cols, 0.0);
    t.d_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::from(std::size_t rows, std::size_t cols, std::vector<double> data, bool requires_grad) {
    check(data.size() == rows * cols, "from: data length does not match shape");
    Tensor t = zeros(rows, cols, requires_grad);
    t.d_->v = std::move(data);
    return t;
}

Tensor Tensor::row(std::vector<double> data, bool requires_grad) {
    const std::size_t n = data.size();
    return from(1, n, std::move(data), requires_grad);
}

Tensor Tensor::column(std::vector<double> data, bool requires_grad) {
    const std::size_t n = data.size();
    return from(n, 1, std::move(data), requires_grad);
}

Tensor Tensor::scalar(double v, bool requires_grad) { return from(1, 1, {v}, requires_grad); }

double Tensor::item() const {
    check(size() == 1, "item: tensor is not 1x1");
    return d_->v[0];
}

std::vector<double>& Tensor::grad() const {
    if (d_->g.empty()) d_->g.assign(d_->v.size(), 0.0);
    return d_->g;
}

void Tensor::zero_grad() const {
    if (!d_->g.empty()) std::fill(d_->g.begin(), d_->g.end(), 0.0);
}

Tensor Tensor::clone() const {
    Tensor t = zeros(rows(), cols(), false);
    t.d_->v = d_->v;
    return t;
}

void Tape::backward(const Tensor& loss) {
    if (nodes_.empty())
        throw std::logic_error("tape: backward on an empty tape (already consumed or nothing recorded)");
    if (loss.size() != 1) throw std::invalid_argument("tape: backward expects a scalar loss");
    if (!loss.requires_grad())
        throw std::logic_error("tape: loss does not depend on any requires_grad leaf");
    loss.grad()[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
    nodes_.clear();
}

SparseTensor as_sparse_tensor(const CsrMatrix& m) {
    return {m.pattern, Tensor::column(m.values)};
}

namespace {
Tensor make_out(const Tape* tape, std::size_t rows, std::size_t cols, bool grad_flows) {
    Tensor out = Tensor::zeros(rows, cols, tape != nullptr && grad_flows);
    return out;
}
}  // namespace

Tensor matmul(Tape* tape, const Tensor& a, const Tensor& b) {
    check(a.cols() == b.rows(), "matmul: inner dimensions disagree");
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out = make_out(tape, m, n, a.requires_grad() || b.requires_grad());
    kernels::matmul(a.data().data(), b.data().data(), out.data().data(), m, k, n);
    if (taping(tape, a, b)) {
        tape->record([a, b, out, m, k, n]() {
            const double* go = out.grad().data();
            if (a.requires_grad())
                kernels::matmul_nt(go, b.data().data(), a.grad().data(), m, n, k, true);
            if (b.requires_grad())
                kernels::matmul_tn(a.data().data(), go, b.grad().data(), m, k, n, true);
        });
    }
    return out;
}

Tensor spmm(Tape* tape, const CsrMatrix& s, const Tensor& x) {
    check(s.cols() == x.rows(), "spmm: inner dimensions disagree");
    const std::size_t n = x.cols();
    Tensor out = make_out(tape, s.rows(), n, x.requires_grad());
    kernels::spmm(*s.pattern, s.values.data(), x.data().data(), out.data().data(), n);
    if (taping(tape, x)) {
        tape->record([s, x, out, n]() {
            kernels::spmm_transpose_acc(*s.pattern, s.values.data(), out.grad().data(),
                                        x.grad().data(), n);
        });
    }
    return out;
}

Tensor spmm(Tape* tape, const SparseTensor& s, const Tensor& x) {
    check(s.pattern->cols == x.rows(), "spmm: inner dimensions disagree");
    check(s.values.size() == s.pattern->nnz(), "spmm: values length does not match pattern");
    const std::size_t n = x.cols();
    Tensor out = make_out(tape, s.pattern->rows, n, x.requires_grad() || s.values.requires_grad());
    kernels::spmm(*s.pattern, s.values.data().data(), x.data().data(), out.data().data(), n);
    if (tape && (x.requires_grad() || s.values.requires_grad())) {
        tape->record([s, x, out, n]() {
            const double* go = out.grad().data();
            if (x.requires_grad())
                kernels::spmm_transpose_acc(*s.pattern, s.values.data().data(), go,
                                            x.grad().data(), n);
            if (s.values.requires_grad())
                kernels::spmm_grad_values(*s.pattern, x.data().data(), go,
                                          s.values.grad().data(), n);
        });
    }
    return out;
}

Tensor add(Tape* tape, const Tensor& a, const Tensor& b) {
    check(a.rows() == b.rows() && a.cols() == b.cols(), "add: shape mismatch");
    Tensor out = make_out(tape, a.rows(), a.cols(), a.requires_grad() || b.requires_grad());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
    if (taping(tape, a, b)) {
        tape->record([a, b, out]() {
            const auto& go = out.grad();
            if (a.requires_grad()) {
                auto& ga = a.grad();
                for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
            }
            if (b.requires_grad()) {
                auto& gb = b.grad();
                for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i];
            }
        });
    }
    return out;
}

Tensor sub(Tape* tape, const Tensor& a, const Tensor& b) {
    check(a.rows() == b.rows() && a.cols() == b.cols(), "sub: shape mismatch");
    Tensor out = make_out(tape, a.rows(), a.cols(), a.requires_grad() || b.requires_grad());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
    if (taping(tape, a, b)) {
        tape->record([a, b, out]() {
            const auto& go = out.grad();
            if (a.requires_grad()) {
                auto& ga = a.grad();
                for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
            }
            if (b.requires_grad()) {
                auto& gb = b.grad();
                for (std::size_t i = 0; i < go.size(); ++i) gb[i] -= go[i];
            }
        });
    }
    return out;
}

Tensor mul(Tape* tape, const Tensor& a, const Tensor& b) {
    check(a.rows() == b.rows() && a.cols() == b.cols(), "mul: shape mismatch");
    Tensor out = make_out(tape, a.rows(), a.cols(), a.requires_grad() || b.requires_grad());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
    if (taping(tape, a, b)) {
        tape->record([a, b, out]() {
            const auto& go = out.grad();
            if (a.requires_grad()) {
                auto& ga = a.grad();
                for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * b.data()[i];
            }
            if (b.requires_grad()) {
                auto& gb = b.grad();
                for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i] * a.data()[i];
            }
        });
    }
    return out;
}

Tensor add_bias(Tape* tape, const Tensor& a, const Tensor& bias) {
    check(bias.rows() == 1 && bias.cols() == a.cols(), "add_bias: bias must be 1 x cols");
    Tensor out = make_out(tape, a.rows(), a.cols(), a.requires_grad() || bias.requires_grad());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            out.at(i, j) = a.at(i, j) + bias.at(0, j);
    if (taping(tape, a, bias)) {
        tape->record([a, bias, out]() {
            const auto& go = out.grad();
            if (a.requires_grad()) {
                auto& ga = a.grad();
                for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
            }
            if (bias.requires_grad()) {
                auto& gb = bias.grad();
                for (std::size_t i = 0; i < out.rows(); ++i)
                    for (std::size_t j = 0; j < out.cols(); ++j)
                        gb[j] += go[i * out.cols() + j];
            }
        });
    }
    return out;
}

Tensor scale(Tape* tape, const Tensor& a, double c) {
    Tensor out = make_out(tape, a.rows(), a.cols(), a.requires_grad());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * c;
    if (taping(tape, a)) {
        tape->record([a, out, c]() {
            const auto& go = out.grad();
            auto& ga = a.grad();
            for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * c;
        });
    }
    return out;
}

Tensor relu(Tape* tape, const Tensor& a) {
    Tensor out = make_out(tape, a.rows(), a.cols(), a.requires_grad());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] > 0.0 ? a.data()[i] : 0.0;
    if (taping(tape, a)) {
        tape->record([a, out]() {
            const auto& go = out.grad();
            auto& ga = a.grad();
            for (std::size_t i = 0; i < go.size(); ++i)
                if (a.data()[i] > 0.0) ga[i] += go[i];
        });
    }
    return out;
}

Tensor sigmoid(Tape* tape, const Tensor& a) {
    Tensor out = make_out(tape, a.rows(), a.cols(), a.requires_grad());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = 1.0 / (1.0 + std::exp(-a.data()[i]));
    if (taping(tape, a)) {
        tape->record([a, out]() {
            const auto& go = out.grad();
            auto& ga = a.grad();
            for (std::size_t i = 0; i < go.size(); ++i) {
                const double s = out.data()[i];
                ga[i] += go[i] * s * (1.0 - s);
            }
        });
    }
    return out;
}

Tensor log_elem(Tape* tape, const Tensor& a) {
    Tensor out = make_out(tape, a.rows(), a.cols(), a.requires_grad());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = std::log(a.data()[i]);
    if (taping(tape, a)) {
        tape->record([a, out]() {
            const auto& go = out.grad();
            auto& ga = a.grad();
            for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] / a.data()[i];
        });
    }
    return out;
}

Tensor rsqrt(Tape* tape, const Tensor& a) {
    Tensor out = make_out(tape, a.rows(), a.cols(), a.requires_grad());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = 1.0 / std::sqrt(a.data()[i]);
    if (taping(tape, a)) {
        tape->record([a, out]() {
            const auto& go = out.grad();
            auto& ga = a.grad();
            for (std::size_t i = 0; i < go.size(); ++i) {
                const double r = out.data()[i];
                ga[i] += go[i] * (-0.5) * r * r * r;
            }
        });
    }
    return out;
}

Tensor row_softmax(Tape* tape, const Tensor& a) {
    Tensor out = make_out(tape, a.rows(), a.cols(), a.requires_grad());
    const std::size_t c = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* xi = a.data().data() + i * c;
        double* yi = out.data().data() + i * c;
        double mx = xi[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, xi[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            yi[j] = std::exp(xi[j] - mx);
            sum += yi[j];
        }
        for (std::size_t j = 0; j < c; ++j) yi[j] /= sum;
    }
    if (taping(tape, a)) {
        tape->record([a, out, c]() {
            const auto& go = out.grad();
            auto& ga = a.grad();
            for (std::size_t i = 0; i < out.rows(); ++i) {
                const double* yi = out.data().data() + i * c;
                const double* gi = go.data() + i * c;
                double dot = 0.0;
                for (std::size_t j = 0; j < c; ++j) dot += gi[j] * yi[j];
                for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += yi[j] * (gi[j] - dot);
            }
        });
    }
    return out;
}

Tensor concat_cols(Tape* tape, const Tensor& a, const Tensor& b) {
    check(a.rows() == b.rows(), "concat_cols: row counts differ");
    const std::size_t r = a.rows(), ca = a.cols(), cb = b.cols();
    Tensor out = make_out(tape, r, ca + cb, a.requires_grad() || b.requires_grad());
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < ca; ++j) out.at(i, j) = a.at(i, j);
        for (std::size_t j = 0; j < cb; ++j) out.at(i, ca + j) = b.at(i, j);
    }
    if (taping(tape, a, b)) {
        tape->record([a, b, out, r, ca, cb]() {
            const auto& go = out.grad();
            if (a.requires_grad()) {
                auto& ga = a.grad();
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < ca; ++j)
                        ga[i * ca + j] += go[i * (ca + cb) + j];
            }
            if (b.requires_grad()) {
                auto& gb = b.grad();
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < cb; ++j)
                        gb[i * cb + j] += go[i * (ca + cb) + ca + j];
            }
        });
    }
    return out;
}

Tensor concat_rows(Tape* tape, const Tensor& a, const Tensor& b) {
    check(a.cols() == b.cols(), "concat_rows: column counts differ");
    const std::size_t c = a.cols();
    Tensor out = make_out(tape, a.rows() + b.rows(), c, a.requires_grad() || b.requires_grad());
    std::copy(a.data().begin(), a.data().end(), out.data().begin());
    std::copy(b.data().begin(), b.data().end(), out.data().begin() + a.size());
    if (taping(tape, a, b)) {
        tape->record([a, b, out]() {
            const auto& go = out.grad();
            if (a.requires_grad()) {
                auto& ga = a.grad();
                for (std::size_t i = 0; i < a.size(); ++i) ga[i] += go[i];
            }
            if (b.requires_grad()) {
                auto& gb = b.grad();
                for (std::size_t i = 0; i < b.size(); ++i) gb[i] += go[a.size() + i];
            }
        });
    }
    return out;
}

Tensor repeat_rows(Tape* tape, const Tensor& a, std::size_t m) {
    check(a.rows() == 1, "repeat_rows: input must be a single row");
    const std::size_t c = a.cols();
    Tensor out = make_out(tape, m, c, a.requires_grad());
    for (std::size_t i = 0; i < m; ++i)
        std::copy(a.data().begin(), a.data().end(), out.data().begin() + i * c);
    if (taping(tape, a)) {
        tape->record([a, out, m, c]() {
            const auto& go = out.grad();
            auto& ga = a.grad();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < c; ++j) ga[j] += go[i * c + j];
        });
    }
    return out;
}

Tensor gather_rows(Tape* tape, const Tensor& a, const std::vector<std::size_t>& rows) {
    for (std::size_t r : rows) check(r < a.rows(), "gather_rows: row out of range");
    const std::size_t c = a.cols();
    Tensor out = make_out(tape, rows.size(), c, a.requires_grad());
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(a.data().begin() + rows[i] * c, a.data().begin() + (rows[i] + 1) * c,
                  out.data().begin() + i * c);
    if (taping(tape, a)) {
        tape->record([a, out, rows, c]() {
            const auto& go = out.grad();
            auto& ga = a.grad();
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t j = 0; j < c; ++j) ga[rows[i] * c + j] += go[i * c + j];
        });
    }
    return out;
}

Tensor gather_elems(Tape* tape, const Tensor& a, const std::vector<std::size_t>& flat_idx) {
    for (std::size_t k : flat_idx) check(k < a.size(), "gather_elems: index out of range");
    Tensor out = make_out(tape, flat_idx.size(), 1, a.requires_grad());
    for (std::size_t i = 0; i < flat_idx.size(); ++i) out.data()[i] = a.data()[flat_idx[i]];
    if (taping(tape, a)) {
        tape->record([a, out, flat_idx]() {
            const auto& go = out.grad();
            auto& ga = a.grad();
            for (std::size_t i = 0; i < flat_idx.size(); ++i) ga[flat_idx[i]] += go[i];
        });
    }
    return out;
}

Tensor reshape_vec(Tape* tape, const Tensor& a, std::size_t rows, std::size_t cols) {
    check(rows * cols == a.size(), "reshape_vec: element count changes");
    Tensor out = make_out(tape, rows, cols, a.requires_grad());
    out.data() = a.data();
    if (taping(tape, a)) {
        tape->record([a, out]() {
            const auto& go = out.grad();
            auto& ga = a.grad();
            for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
        });
    }
    return out;
}

Tensor sum_all(Tape* tape, const Tensor& a) {
    Tensor out = make_out(tape, 1, 1, a.requires_grad());
    double s = 0.0;
    for (double v : a.data()) s += v;
    out.data()[0] = s;
    if (taping(tape, a)) {
        tape->record([a, out]() {
            const double g = out.grad()[0];
            auto& ga = a.grad();
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
        });
    }
    return out;
}

Tensor scatter_add(Tape* tape, const std::vector<double>& base,
                   const std::vector<std::pair<std::size_t, std::size_t>>& updates,
                   const Tensor& src) {
    for (const auto& [dst, si] : updates) {
        check(dst < base.size(), "scatter_add: destination out of range");
        check(si < src.size(), "scatter_add: source index out of range");
    }
    Tensor out = make_out(tape, base.size(), 1, src.requires_grad());
    out.data() = base;
    for (const auto& [dst, si] : updates) out.data()[dst] += src.data()[si];
    if (taping(tape, src)) {
        tape->record([src, out, updates]() {
            const auto& go = out.grad();
            auto& gs = src.grad();
            for (const auto& [dst, si] : updates) gs[si] += go[dst];
        });
    }
    return out;
}

Tensor nll_rows(Tape* tape, const Tensor& probs, const std::vector<int>& labels,
                const std::vector<std::size_t>& rows) {
    check(!rows.empty(), "nll_rows: empty row set");
    check(labels.size() == probs.rows(), "nll_rows: one label per row required");
    const std::size_t c = probs.cols();
    for (std::size_t r : rows) {
        check(r < probs.rows(), "nll_rows: row out of range");
        check(labels[r] >= 0 && static_cast<std::size_t>(labels[r]) < c, "nll_rows: label out of range");
    }
    Tensor out = make_out(tape, 1, 1, probs.requires_grad());
    double s = 0.0;
    for (std::size_t r : rows) s -= std::log(probs.at(r, static_cast<std::size_t>(labels[r])));
    out.data()[0] = s / static_cast<double>(rows.size());
    if (taping(tape, probs)) {
        tape->record([probs, out, labels, rows, c]() {
            const double g = out.grad()[0] / static_cast<double>(rows.size());
            auto& gp = probs.grad();
            for (std::size_t r : rows) {
                const auto j = static_cast<std::size_t>(labels[r]);
                gp[r * c + j] -= g / probs.at(r, j);
            }
        });
    }
    return out;
}

Tensor margin_sum(Tape* tape, const Tensor& probs, const std::vector<std::size_t>& target_rows,
                  const std::vector<int>& labels) {
    check(!target_rows.empty(), "margin_sum: empty target set");
    check(labels.size() == probs.rows(), "margin_sum: one label per row required");
    const std::size_t c = probs.cols();
    check(c >= 2, "margin_sum: need at least two classes");
    std::vector<std::size_t> best(target_rows.size());
    double s = 0.0;
    for (std::size_t i = 0; i < target_rows.size(); ++i) {
        const std::size_t r = target_rows[i];
        check(r < probs.rows(), "margin_sum: target row out of range");
        const int y = labels[r];
        check(y >= 0 && static_cast<std::size_t>(y) < c, "margin_sum: label out of range");
        std::size_t k = static_cast<std::size_t>(y) == 0 ? 1 : 0;
        for (std::size_t j = 0; j < c; ++j) {
            if (j == static_cast<std::size_t>(y)) continue;
            if (probs.at(r, j) > probs.at(r, k)) k = j;
        }
        best[i] = k;
        s += probs.at(r, static_cast<std::size_t>(y)) - probs.at(r, k);
    }
    Tensor out = make_out(tape, 1, 1, probs.requires_grad());
    out.data()[0] = s;
    if (taping(tape, probs)) {
        tape->record([probs, out, target_rows, labels, best, c]() {
            const double g = out.grad()[0];
            auto& gp = probs.grad();
            for (std::size_t i = 0; i < target_rows.size(); ++i) {
                const std::size_t r = target_rows[i];
                gp[r * c + static_cast<std::size_t>(labels[r])] += g;
                gp[r * c + best[i]] -= g;
            }
        });
    }
    return out;
}

Tensor glorot(std::size_t rows, std::size_t cols, std::mt19937_64& rng, bool requires_grad) {
    const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-s, s);
    Tensor t = Tensor::zeros(rows, cols, requires_grad);
    for (auto& v : t.data()) v = dist(rng);
    return t;
}

}  // namespace nia::ad
