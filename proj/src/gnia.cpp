#include "nia/gnia.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "nia/io.hpp"
#include "nia/rmsprop.hpp"

namespace nia {

const char* to_string(GniaAblation a) {
    switch (a) {
        case GniaAblation::none: return "none";
        case GniaAblation::no_attr: return "no_attr";
        case GniaAblation::no_edge: return "no_edge";
        case GniaAblation::no_joint: return "no_joint";
    }
    return "none";
}

GniaAblation ablation_from(const std::string& s) {
    if (s == "none") return GniaAblation::none;
    if (s == "no_attr") return GniaAblation::no_attr;
    if (s == "no_edge") return GniaAblation::no_edge;
    if (s == "no_joint") return GniaAblation::no_joint;
    throw std::invalid_argument("gnia: unknown ablation '" + s + "'");
}

InstanceFeatures build_features(const SurrogateModel& m, const Graph& g,
                                const ad::Tensor& hidden_rows, const ad::Tensor& clean_probs,
                                const AttackInstance& inst) {
    using namespace ad;
    if (inst.targets.empty()) throw std::invalid_argument("gnia: instance without targets");
    InstanceFeatures feat;
    feat.targets = inst.targets;
    feat.delta = inst.delta;

    const std::size_t h = hidden_rows.cols();
    const std::size_t d = g.dim();
    feat.r_t = Tensor::zeros(1, h);
    feat.u_t = Tensor::zeros(1, 2 * d);
    const double inv = 1.0 / static_cast<double>(inst.targets.size());
    for (std::size_t t : inst.targets) {
        for (std::size_t j = 0; j < h; ++j) feat.r_t.at(0, j) += inv * hidden_rows.at(t, j);
        const int k_t = most_likely_class(clean_probs, g.labels[t], t);
        const Tensor u = class_representation(m, g.labels[t], k_t);
        for (std::size_t j = 0; j < 2 * d; ++j) feat.u_t.at(0, j) += inv * u.at(0, j);
    }

    const auto candidates = candidate_set(g, inst.targets);
    feat.k_edges = std::min(inst.delta, candidates.size());
    // candidate rows carry an is-target flag: the edge scorer must tell the
    // targets apart from their neighbours, and hidden rows alone make that an
    // equality-matching task a small mlp learns poorly
    feat.cand_rows = Tensor::zeros(candidates.size(), h + 1);
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        for (std::size_t j = 0; j < h; ++j)
            feat.cand_rows.at(ci, j) = hidden_rows.at(candidates[ci], j);
        const bool is_target = std::find(inst.targets.begin(), inst.targets.end(),
                                         candidates[ci]) != inst.targets.end();
        feat.cand_rows.at(ci, h) = is_target ? 1.0 : 0.0;
    }
    feat.ps = build_perturbed_structure(g, candidates);
    return feat;
}

GniaParams gnia_init(std::size_t d, std::size_t h, std::size_t h_a, std::size_t h_e,
                     std::mt19937_64& rng) {
    using namespace ad;
    GniaParams p;
    p.wa0 = glorot(h + 2 * d, h_a, rng);
    p.ba0 = Tensor::zeros(1, h_a, true);
    p.wa1 = glorot(h_a, d, rng);
    p.ba1 = Tensor::zeros(1, d, true);
    p.we0 = glorot(3 * h + 1 + 2 * d, h_e, rng);
    p.be0 = Tensor::zeros(1, h_e, true);
    p.we1 = glorot(h_e, 1, rng);
    p.be1 = Tensor::zeros(1, 1, true);
    return p;
}

namespace {

ad::Tensor mlp2(ad::Tape* tape, const ad::Tensor& in, const ad::Tensor& w0, const ad::Tensor& b0,
                const ad::Tensor& w1, const ad::Tensor& b1) {
    using namespace ad;
    return add_bias(tape, matmul(tape, relu(tape, add_bias(tape, matmul(tape, in, w0), b0)), w1),
                    b1);
}

ad::Tensor attribute_logits(ad::Tape* tape, const GniaParams& p, const InstanceFeatures& feat) {
    const ad::Tensor in = ad::concat_cols(tape, feat.r_t, feat.u_t);
    return mlp2(tape, in, p.wa0, p.ba0, p.wa1, p.ba1);
}

ad::Tensor bounds_row(const std::vector<double>& v) { return ad::Tensor::row(v); }

std::vector<double> random_khot(std::size_t len, std::size_t k, std::mt19937_64& rng) {
    std::vector<std::size_t> ids(len);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<double> out(len, 0.0);
    for (std::size_t i = 0; i < std::min(k, len); ++i) out[ids[i]] = 1.0;
    return out;
}

// Donor rows for the decoupled attribute substitution. Discrete rows above
// the l0 budget would fail plan validation, so they are never drawn.
std::vector<double> random_node_attrs(const Graph& g, std::mt19937_64& rng) {
    std::vector<std::size_t> pool;
    if (g.attr_kind == AttrKind::discrete) {
        const std::size_t budget = attribute_bounds(g).l0_budget;
        for (std::size_t i = 0; i < g.n(); ++i) {
            std::size_t ones = 0;
            for (std::size_t j = 0; j < g.dim(); ++j) ones += g.attributes.at(i, j) != 0.0;
            if (ones <= budget) pool.push_back(i);
        }
    } else {
        pool.resize(g.n());
        std::iota(pool.begin(), pool.end(), std::size_t{0});
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t node = pool[pick(rng)];
    std::vector<double> a(g.dim());
    for (std::size_t j = 0; j < g.dim(); ++j) a[j] = g.attributes.at(node, j);
    return a;
}

}  // namespace

ad::Tensor generate_attributes(ad::Tape* tape, const GniaParams& p, const InstanceFeatures& feat,
                               const AttributeBounds& bounds, AttrKind kind,
                               const GumbelConfig& cfg, std::mt19937_64& rng) {
    using namespace ad;
    Tensor logits = attribute_logits(tape, p, feat);
    if (kind == AttrKind::continuous) {
        std::vector<double> span(bounds.hi.size());
        for (std::size_t j = 0; j < span.size(); ++j) span[j] = bounds.hi[j] - bounds.lo[j];
        return add(tape, bounds_row(bounds.lo),
                   mul(tape, sigmoid(tape, logits), bounds_row(span)));
    }
    GumbelConfig acfg = cfg;
    acfg.k = std::min(bounds.l0_budget, logits.size());
    return gumbel_topk(tape, logits, acfg, rng);
}

ad::Tensor generate_edges(ad::Tape* tape, const GniaParams& p, const SurrogateModel& m,
                          const InstanceFeatures& feat, const ad::Tensor& a_inj,
                          const GumbelConfig& cfg, std::mt19937_64& rng, bool joint) {
    using namespace ad;
    const std::size_t mcount = feat.cand_rows.rows();
    Tensor r_inj = joint ? transform_injected(tape, m, a_inj)
                         : Tensor::zeros(1, m.hidden());
    Tensor ctx = concat_cols(tape, r_inj, concat_cols(tape, feat.r_t, feat.u_t));
    Tensor in = concat_cols(tape, repeat_rows(tape, ctx, mcount), feat.cand_rows);
    Tensor scores = reshape_vec(tape, mlp2(tape, in, p.we0, p.be0, p.we1, p.be1), 1, mcount);
    GumbelConfig ecfg = cfg;
    ecfg.k = feat.k_edges;
    return gumbel_topk(tape, scores, ecfg, rng);
}

ad::Tensor gnia_soft_loss(ad::Tape* tape, const GniaParams& p, const SurrogateModel& m,
                          const Graph& g, const InstanceFeatures& feat,
                          const AttributeBounds& bounds, const GumbelConfig& cfg,
                          std::mt19937_64& rng, GniaAblation ablation) {
    using namespace ad;
    Tensor a_inj = ablation == GniaAblation::no_attr
                       ? Tensor::row(random_node_attrs(g, rng))
                       : generate_attributes(tape, p, feat, bounds, g.attr_kind, cfg, rng);
    Tensor e_inj = ablation == GniaAblation::no_edge
                       ? Tensor::row(random_khot(feat.cand_rows.rows(), feat.k_edges, rng))
                       : generate_edges(tape, p, m, feat, a_inj, cfg, rng,
                                        ablation != GniaAblation::no_joint);
    Tensor probs = perturbed_forward(tape, m, g, feat.ps, a_inj, e_inj);
    std::vector<int> labels_ext = g.labels;
    labels_ext.push_back(0);
    return margin_sum(tape, probs, feat.targets, labels_ext);
}

AttackOutcome gnia_infer(const GniaParams& p, const SurrogateModel& m, const Graph& g,
                         const ad::Tensor& hidden_rows, const ad::Tensor& clean_probs,
                         const AttackInstance& inst, const AttributeBounds& bounds, double tau,
                         GniaAblation ablation, std::mt19937_64& rng) {
    using namespace ad;
    using clock = std::chrono::steady_clock;
    const auto started = clock::now();

    const InstanceFeatures feat = build_features(m, g, hidden_rows, clean_probs, inst);
    GumbelConfig quiet{tau, 0.0, 1, 1.0};

    InjectionPlan plan;
    plan.candidates = feat.ps.candidates;
    plan.delta = inst.delta;
    plan.hardened = true;

    if (ablation == GniaAblation::no_attr) {
        plan.attrs = random_node_attrs(g, rng);
    } else if (g.attr_kind == AttrKind::continuous) {
        plan.attrs = generate_attributes(nullptr, p, feat, bounds, g.attr_kind, quiet, rng).data();
    } else {
        const Tensor relaxed = generate_attributes(nullptr, p, feat, bounds, g.attr_kind, quiet, rng);
        plan.attrs = harden(relaxed.data(), std::min(bounds.l0_budget, relaxed.size()));
    }

    if (ablation == GniaAblation::no_edge) {
        plan.edge_weights = random_khot(plan.candidates.size(), feat.k_edges, rng);
    } else {
        const Tensor relaxed = generate_edges(nullptr, p, m, feat, Tensor::row(plan.attrs), quiet,
                                              rng, ablation != GniaAblation::no_joint);
        plan.edge_weights = harden(relaxed.data(), feat.k_edges);
    }

    AttackOutcome out;
    out.wall_time = std::chrono::duration<double>(clock::now() - started).count();

    const Tensor probs = perturbed_forward(nullptr, m, g, feat.ps, Tensor::row(plan.attrs),
                                           Tensor::row(plan.edge_weights));
    out.loss_final = attack_loss(probs, inst.targets, g.labels);
    out.loss_initial = out.loss_final;
    out.success = misclassified_flags(probs, inst.targets, g.labels);
    out.plan = std::move(plan);
    return out;
}

namespace {

double validation_rate(const GniaParams& p, const SurrogateModel& m, const Graph& g,
                       const ad::Tensor& hidden_rows, const ad::Tensor& clean_probs,
                       const std::vector<AttackInstance>& val_set, const AttributeBounds& bounds,
                       double tau, GniaAblation ablation, std::mt19937_64& rng) {
    if (val_set.empty()) return 0.0;
    std::size_t wins = 0;
    for (const auto& inst : val_set) {
        const AttackOutcome out =
            gnia_infer(p, m, g, hidden_rows, clean_probs, inst, bounds, tau, ablation, rng);
        wins += std::all_of(out.success.begin(), out.success.end(), [](bool b) { return b; });
    }
    return static_cast<double>(wins) / static_cast<double>(val_set.size());
}

}  // namespace

GniaParams gnia_train(const Graph& g, const SurrogateModel& m,
                      const std::vector<AttackInstance>& train_set,
                      const std::vector<AttackInstance>& val_set, const GniaTrainConfig& cfg,
                      GniaTrainStats* stats) {
    using namespace ad;
    if (train_set.empty()) throw std::invalid_argument("gnia: empty training set");
    if (cfg.patience >= cfg.max_epochs)
        throw std::invalid_argument("gnia: patience must be below max_epochs");

    const Tensor hidden_rows = hidden_representation(m, g);
    const Tensor clean_probs = model_forward(m, g);
    const AttributeBounds bounds = attribute_bounds(g);

    std::vector<InstanceFeatures> feats;
    feats.reserve(train_set.size());
    for (const auto& inst : train_set)
        feats.push_back(build_features(m, g, hidden_rows, clean_probs, inst));

    std::mt19937_64 rng(cfg.seed);
    GniaParams p = gnia_init(g.dim(), m.hidden(), cfg.hidden_attr, cfg.hidden_edge, rng);
    RmsProp opt(p.all(), cfg.lr);
    GumbelConfig gcfg = cfg.gumbel;

    std::vector<Tensor> best;
    for (const auto& t : p.all()) best.push_back(t.clone());
    double best_rate = -1.0;
    std::size_t since_best = 0, epochs_run = 0;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        ++epochs_run;
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t at = 0; at < order.size(); at += cfg.minibatch) {
            const std::size_t stop = std::min(order.size(), at + cfg.minibatch);
            Tape tape;
            Tensor total;
            for (std::size_t i = at; i < stop; ++i) {
                Tensor one =
                    gnia_soft_loss(&tape, p, m, g, feats[order[i]], bounds, gcfg, rng, cfg.ablation);
                total = i == at ? one : add(&tape, total, one);
            }
            Tensor loss = scale(&tape, total, 1.0 / static_cast<double>(stop - at));
            if (!std::isfinite(loss.item()))
                throw std::runtime_error("gnia: non-finite training loss");
            opt.zero_grad();
            tape.backward(loss);
            opt.step();
        }
        gcfg.decay_step();

        std::mt19937_64 val_rng(cfg.seed ^ 0x5eedULL);
        const double rate = validation_rate(p, m, g, hidden_rows, clean_probs, val_set, bounds,
                                            gcfg.tau, cfg.ablation, val_rng);
        if (rate > best_rate) {
            best_rate = rate;
            const auto now = p.all();
            for (std::size_t i = 0; i < now.size(); ++i) best[i].data() = now[i].data();
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }

    auto out = p.all();
    for (std::size_t i = 0; i < out.size(); ++i) out[i].data() = best[i].data();
    if (stats) {
        stats->epochs_run = epochs_run;
        stats->best_val_rate = best_rate < 0.0 ? 0.0 : best_rate;
    }
    return p;
}

namespace {
constexpr char kMagic[] = "NIAGNIA1";
}

void save_gnia(const GniaParams& p, AttrKind kind, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    io::require_stream(os, path);
    io::write_string(os, kMagic);
    io::write_u64(os, 1);  // format version
    io::write_u64(os, p.wa1.cols());                      // d
    io::write_u64(os, (p.we0.rows() - 1 - 2 * p.wa1.cols()) / 3);  // h
    io::write_u64(os, p.hidden_attr());
    io::write_u64(os, p.hidden_edge());
    io::write_string(os, to_string(kind));
    for (const auto& t : p.all()) io::write_tensor(os, t);
    if (!os) throw std::runtime_error("gnia: failed writing " + path);
}

GniaParams load_gnia(const std::string& path, const Graph& g, const SurrogateModel& m) {
    std::ifstream is(path, std::ios::binary);
    io::require_stream(is, path);
    if (io::read_string(is) != kMagic)
        throw std::runtime_error("gnia: bad checkpoint magic in " + path);
    if (io::read_u64(is) != 1)
        throw std::runtime_error("gnia: unsupported checkpoint version in " + path);
    const auto d = io::read_u64(is);
    const auto h = io::read_u64(is);
    const auto h_a = io::read_u64(is);
    const auto h_e = io::read_u64(is);
    const AttrKind kind = attr_kind_from(io::read_string(is));
    if (d != g.dim() || kind != g.attr_kind)
        throw std::runtime_error("gnia: checkpoint does not match the graph");
    if (h != m.hidden())
        throw std::runtime_error("gnia: checkpoint does not match the surrogate width");

    GniaParams p;
    for (ad::Tensor* t : {&p.wa0, &p.ba0, &p.wa1, &p.ba1, &p.we0, &p.be0, &p.we1, &p.be1})
        *t = io::read_tensor(is, true);
    if (p.wa0.rows() != h + 2 * d || p.wa0.cols() != h_a || p.wa1.cols() != d ||
        p.we0.rows() != 3 * h + 1 + 2 * d || p.we0.cols() != h_e || p.we1.cols() != 1)
        throw std::runtime_error("gnia: checkpoint tensor shapes disagree with the header");
    return p;
}

}  // namespace nia
