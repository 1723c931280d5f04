#include "nia/sbm.hpp"

#include <random>
#include <stdexcept>

namespace nia {

Graph make_sbm(const SbmConfig& cfg) {
    if (cfg.nodes < 2 || cfg.classes < 2 || cfg.dim < 1)
        throw std::invalid_argument("sbm: need at least 2 nodes, 2 classes and 1 feature");
    if (cfg.classes > cfg.nodes) throw std::invalid_argument("sbm: more classes than nodes");

    const std::size_t n = cfg.nodes, K = cfg.classes, d = cfg.dim;
    std::mt19937_64 rng(cfg.seed);

    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i * K / n);

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::pair<std::size_t, std::size_t>> entries;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double p = labels[i] == labels[j] ? cfg.p_in : cfg.p_out;
            if (unif(rng) < p) {
                entries.emplace_back(i, j);
                entries.emplace_back(j, i);
            }
        }
    }

    std::vector<double> attrs(n * d);
    const std::size_t slice = std::max<std::size_t>(1, d / K);
    std::normal_distribution<double> gauss(0.0, cfg.noise);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        const std::size_t lo = std::min(d, c * slice);
        const std::size_t hi = c + 1 == K ? d : std::min(d, (c + 1) * slice);
        for (std::size_t j = 0; j < d; ++j) {
            const bool aligned = j >= lo && j < hi;
            if (cfg.kind == AttrKind::continuous)
                attrs[i * d + j] = (aligned ? cfg.signal : 0.0) + gauss(rng);
            else
                attrs[i * d + j] = unif(rng) < (aligned ? cfg.p_hi : cfg.p_lo) ? 1.0 : 0.0;
        }
    }

    Graph g;
    auto pattern = make_pattern(n, n, entries);
    g.adjacency = {pattern, std::vector<double>(pattern->nnz(), 1.0)};
    g.attributes = ad::Tensor::from(n, d, std::move(attrs));
    g.labels = std::move(labels);
    g.num_classes = static_cast<int>(K);
    g.attr_kind = cfg.kind;
    return g;
}

}  // namespace nia
