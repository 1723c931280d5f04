#include "nia/gumbel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nia {

std::vector<double> sample_gumbel(std::size_t len, std::mt19937_64& rng) {
    if (len == 0) throw std::invalid_argument("gumbel: empty sample");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> g(len);
    for (auto& v : g) {
        const double u = std::clamp(unif(rng), 1e-12, 1.0 - 1e-12);
        v = -std::log(-std::log(u));
    }
    return g;
}

ad::Tensor gumbel_softmax(ad::Tape* tape, const ad::Tensor& z, const GumbelConfig& cfg,
                          std::mt19937_64& rng) {
    if (!(cfg.tau > 0.0)) throw std::invalid_argument("gumbel: temperature must be positive");
    if (z.rows() != 1) throw std::invalid_argument("gumbel: scores must be a single row");
    ad::Tensor scores = z;
    if (cfg.eps != 0.0) {
        auto noise = sample_gumbel(z.cols(), rng);
        for (auto& v : noise) v *= cfg.eps;
        scores = ad::add(tape, scores, ad::Tensor::row(std::move(noise)));
    }
    return ad::row_softmax(tape, ad::scale(tape, scores, 1.0 / cfg.tau));
}

ad::Tensor gumbel_topk(ad::Tape* tape, const ad::Tensor& z, const GumbelConfig& cfg,
                       std::mt19937_64& rng) {
    const std::size_t len = z.cols();
    if (cfg.k < 1) throw std::invalid_argument("gumbel: selection budget must be at least 1");
    if (cfg.k > len) throw std::invalid_argument("gumbel: selection budget exceeds score length");
    std::vector<double> mask(len, 0.0);
    ad::Tensor out;
    for (std::size_t round = 0; round < cfg.k; ++round) {
        ad::Tensor scores = round == 0 ? z : ad::add(tape, z, ad::Tensor::row(mask));
        ad::Tensor draw = gumbel_softmax(tape, scores, cfg, rng);
        out = round == 0 ? draw : ad::add(tape, out, draw);
        if (round + 1 == cfg.k) break;
        std::size_t best = 0;
        for (std::size_t i = 1; i < len; ++i)
            if (draw.at(0, i) > draw.at(0, best)) best = i;
        mask[best] = -1e30;
    }
    return out;
}

std::vector<double> harden(const std::vector<double>& relaxed, std::size_t k) {
    if (k == 0 || k > relaxed.size())
        throw std::invalid_argument("gumbel: harden budget must be in [1, len]");
    std::vector<std::size_t> order(relaxed.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return relaxed[a] > relaxed[b]; });
    std::vector<double> out(relaxed.size(), 0.0);
    for (std::size_t i = 0; i < k; ++i) out[order[i]] = 1.0;
    return out;
}

}  // namespace nia
