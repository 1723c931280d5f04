#include "nia/gnn.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "nia/io.hpp"
#include "nia/rmsprop.hpp"

namespace nia {

const char* to_string(GnnKind k) { return k == GnnKind::gcn ? "gcn" : "appnp"; }

GnnKind gnn_kind_from(const std::string& s) {
    if (s == "gcn") return GnnKind::gcn;
    if (s == "appnp") return GnnKind::appnp;
    throw std::invalid_argument("gnn: unknown model kind '" + s + "'");
}

namespace {

void bump(const SurrogateModel& m) {
    if (m.forward_calls) m.forward_calls->fetch_add(1, std::memory_order_relaxed);
}

template <typename Adj>
ad::Tensor probs_impl(ad::Tape* tape, GnnKind kind, const GnnParams& p, const Adj& adj,
                      const ad::Tensor& x) {
    using namespace ad;
    if (x.cols() != p.w0.rows()) throw std::invalid_argument("gnn: attribute width mismatch");
    if (kind == GnnKind::gcn) {
        Tensor h1 = relu(tape, spmm(tape, adj, matmul(tape, x, p.w0)));
        return row_softmax(tape, spmm(tape, adj, matmul(tape, h1, p.w1)));
    }
    Tensor h = matmul(tape, relu(tape, matmul(tape, x, p.w0)), p.w1);
    Tensor z = h;
    for (std::size_t step = 0; step < p.steps; ++step)
        z = add(tape, scale(tape, spmm(tape, adj, z), 1.0 - p.alpha), scale(tape, h, p.alpha));
    return row_softmax(tape, z);
}

}  // namespace

ad::Tensor forward_probs(ad::Tape* tape, GnnKind kind, const GnnParams& p, const CsrMatrix& adj,
                         const ad::Tensor& x) {
    return probs_impl(tape, kind, p, adj, x);
}

ad::Tensor forward_probs(ad::Tape* tape, GnnKind kind, const GnnParams& p,
                         const ad::SparseTensor& adj, const ad::Tensor& x) {
    return probs_impl(tape, kind, p, adj, x);
}

ad::Tensor model_forward(const SurrogateModel& m, const Graph& g) {
    bump(m);
    const CsrMatrix adj =
        graph_checksum(g) == m.fitted_checksum ? m.clean_norm_adj : normalize_adjacency(g);
    return forward_probs(nullptr, m.kind, m.params, adj, g.attributes);
}

ad::Tensor model_forward(const SurrogateModel& m, const PerturbedView& view) {
    bump(m);
    const CsrMatrix adj = normalize_adjacency(view);
    ad::Tensor x = ad::concat_rows(nullptr, view.base->attributes,
                                   ad::Tensor::row(view.plan.attrs));
    return forward_probs(nullptr, m.kind, m.params, adj, x);
}

ad::Tensor perturbed_forward(ad::Tape* tape, const SurrogateModel& m, const Graph& g,
                             const PerturbedStructure& ps, const ad::Tensor& injected_attrs,
                             const ad::Tensor& edge_weights) {
    using namespace ad;
    bump(m);
    if (edge_weights.size() != ps.candidates.size())
        throw std::invalid_argument("gnn: weight count differs from candidate count");
    Tensor deg = scatter_add(tape, ps.degree_plus1, ps.degree_updates, edge_weights);
    Tensor rsq = rsqrt(tape, deg);
    Tensor raw = scatter_add(tape, ps.values_template, ps.injected_slots, edge_weights);
    Tensor vals = mul(tape, raw,
                      mul(tape, gather_elems(tape, rsq, ps.entry_rows),
                          gather_elems(tape, rsq, ps.entry_cols)));
    SparseTensor adj{ps.pattern, vals};
    Tensor x = concat_rows(tape, g.attributes, injected_attrs);
    return forward_probs(tape, m.kind, m.params, adj, x);
}

ad::Tensor hidden_representation(const SurrogateModel& m, const Graph& g) {
    using namespace ad;
    const CsrMatrix adj =
        graph_checksum(g) == m.fitted_checksum ? m.clean_norm_adj : normalize_adjacency(g);
    if (m.kind == GnnKind::gcn)
        return relu(nullptr, spmm(nullptr, adj, matmul(nullptr, g.attributes, m.params.w0)));
    return spmm(nullptr, adj, relu(nullptr, matmul(nullptr, g.attributes, m.params.w0)));
}

ad::Tensor class_representation(const SurrogateModel& m, int y, int k) {
    using namespace ad;
    const auto K = static_cast<int>(m.classes());
    if (y < 0 || y >= K || k < 0 || k >= K)
        throw std::invalid_argument("gnn: class index out of range");
    Tensor w = matmul(nullptr, m.params.w0, m.params.w1);  // d x K
    const std::size_t d = w.rows();
    Tensor u = Tensor::zeros(1, 2 * d);
    for (std::size_t i = 0; i < d; ++i) {
        u.at(0, i) = w.at(i, static_cast<std::size_t>(y));
        u.at(0, d + i) = w.at(i, static_cast<std::size_t>(k));
    }
    return u;
}

ad::Tensor transform_injected(ad::Tape* tape, const SurrogateModel& m, const ad::Tensor& a_inj) {
    return ad::relu(tape, ad::matmul(tape, a_inj, m.params.w0));
}

int most_likely_class(const ad::Tensor& probs, int label, std::size_t t) {
    const std::size_t c = probs.cols();
    if (c < 2) throw std::invalid_argument("gnn: need at least two classes");
    std::size_t best = label == 0 ? 1 : 0;
    for (std::size_t k = 0; k < c; ++k) {
        if (k == static_cast<std::size_t>(label)) continue;
        if (probs.at(t, k) > probs.at(t, best)) best = k;
    }
    return static_cast<int>(best);
}

int most_likely_class(const SurrogateModel& m, const Graph& g, std::size_t t) {
    return most_likely_class(model_forward(m, g), g.labels[t], t);
}

double accuracy(const ad::Tensor& probs, const std::vector<int>& labels,
                const std::vector<std::size_t>& nodes) {
    if (nodes.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i : nodes) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < probs.cols(); ++k)
            if (probs.at(i, k) > probs.at(i, best)) best = k;
        hits += static_cast<int>(best) == labels[i];
    }
    return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

SurrogateModel train_surrogate(const Graph& g, GnnKind kind, const TrainConfig& cfg) {
    using namespace ad;
    const auto train_ids = g.nodes_with(SplitTag::train);
    const auto val_ids = g.nodes_with(SplitTag::val);
    if (train_ids.empty() || val_ids.empty())
        throw std::invalid_argument("gnn: graph has no train/val split");

    std::mt19937_64 rng(cfg.seed);
    SurrogateModel m;
    m.kind = kind;
    m.params.w0 = glorot(g.dim(), cfg.hidden, rng);
    m.params.w1 = glorot(cfg.hidden, static_cast<std::size_t>(g.num_classes), rng);
    m.params.alpha = cfg.alpha;
    m.params.steps = cfg.steps;
    m.clean_norm_adj = normalize_adjacency(g);
    m.fitted_checksum = graph_checksum(g);
    m.forward_calls = std::make_shared<std::atomic<std::uint64_t>>(0);

    RmsProp opt({m.params.w0, m.params.w1}, cfg.lr, 0.99, 1e-8, cfg.weight_decay);
    Tensor best_w0 = m.params.w0.clone(), best_w1 = m.params.w1.clone();
    double best_val = -1.0;
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Tape tape;
        Tensor probs = forward_probs(&tape, kind, m.params, m.clean_norm_adj, g.attributes);
        Tensor loss = nll_rows(&tape, probs, g.labels, train_ids);
        if (!std::isfinite(loss.item())) throw std::runtime_error("gnn: non-finite training loss");
        opt.zero_grad();
        tape.backward(loss);
        opt.step();

        Tensor eval = forward_probs(nullptr, kind, m.params, m.clean_norm_adj, g.attributes);
        const double val = accuracy(eval, g.labels, val_ids);
        if (val > best_val) {
            best_val = val;
            best_w0.data() = m.params.w0.data();
            best_w1.data() = m.params.w1.data();
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    m.params.w0.data() = best_w0.data();
    m.params.w1.data() = best_w1.data();
    return m;
}

namespace {
constexpr char kMagic[] = "NIAGNN1";
}

void save_model(const SurrogateModel& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    io::require_stream(os, path);
    io::write_string(os, kMagic);
    io::write_u64(os, 1);  // format version
    io::write_string(os, to_string(m.kind));
    io::write_u64(os, m.dim());
    io::write_u64(os, m.hidden());
    io::write_u64(os, m.classes());
    io::write_f64(os, m.params.alpha);
    io::write_u64(os, m.params.steps);
    io::write_u64(os, m.fitted_checksum);
    io::write_tensor(os, m.params.w0);
    io::write_tensor(os, m.params.w1);
    if (!os) throw std::runtime_error("gnn: failed writing " + path);
}

SurrogateModel load_model(const std::string& path, const Graph& g) {
    std::ifstream is(path, std::ios::binary);
    io::require_stream(is, path);
    if (io::read_string(is) != kMagic) throw std::runtime_error("gnn: bad checkpoint magic in " + path);
    if (io::read_u64(is) != 1) throw std::runtime_error("gnn: unsupported checkpoint version in " + path);
    SurrogateModel m;
    m.kind = gnn_kind_from(io::read_string(is));
    const auto d = io::read_u64(is), h = io::read_u64(is), K = io::read_u64(is);
    m.params.alpha = io::read_f64(is);
    m.params.steps = io::read_u64(is);
    m.fitted_checksum = io::read_u64(is);
    m.params.w0 = io::read_tensor(is, true);
    m.params.w1 = io::read_tensor(is, true);
    if (m.params.w0.rows() != d || m.params.w0.cols() != h || m.params.w1.rows() != h ||
        m.params.w1.cols() != K)
        throw std::runtime_error("gnn: checkpoint shape header disagrees with tensors in " + path);
    if (g.dim() != d || static_cast<std::uint64_t>(g.num_classes) != K)
        throw std::runtime_error("gnn: checkpoint does not match the provided graph");
    if (m.fitted_checksum != graph_checksum(g))
        throw std::runtime_error("gnn: checkpoint was fitted on a different graph or split");
    m.clean_norm_adj = normalize_adjacency(g);
    m.forward_calls = std::make_shared<std::atomic<std::uint64_t>>(0);
    return m;
}

std::uint64_t forward_count(const SurrogateModel& m) {
    return m.forward_calls ? m.forward_calls->load(std::memory_order_relaxed) : 0;
}

}  // namespace nia
