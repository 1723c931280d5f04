// Release gate: one line per criterion, PASS only when the measured numbers
// clear the pinned thresholds. Exits nonzero if anything fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nia/attack.hpp"
#include "nia/baselines.hpp"
#include "nia/gnia.hpp"
#include "nia/gnn.hpp"
#include "nia/graph.hpp"
#include "nia/gumbel.hpp"
#include "nia/harness.hpp"
#include "nia/sbm.hpp"
#include "nia/tensor.hpp"
#include "oracles.hpp"

using namespace nia;
using ad::Tape;
using ad::Tensor;

namespace {

using clk = std::chrono::steady_clock;

double seconds_since(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

int g_failures = 0;
bool g_side_graphs_intact = true;  // criterion 10 folds in graphs used by other criteria

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %2d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: finite differences over every primitive and the whole
// generator chain, >= 50 seeds, rel err < 1e-4, under one minute
// ---------------------------------------------------------------------------

double fd_worst(const std::vector<Tensor>& params, const std::function<Tensor(Tape*)>& loss_fn,
                std::size_t* checked) {
    Tape tape;
    const Tensor loss = loss_fn(&tape);
    for (const auto& p : params) p.zero_grad();
    tape.backward(loss);
    double worst = 0.0;
    for (auto p : params) {
        if (!p.requires_grad()) continue;
        const auto grad = p.grad();
        const auto rep = oracle::check_gradient(p.data(), grad,
                                                [&] { return loss_fn(nullptr).item(); });
        worst = std::max(worst, rep.worst_rel);
        *checked += rep.checked;
    }
    return worst;
}

double primitive_sweep(std::uint64_t seed, std::size_t* checked) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;

    auto a = ad::glorot(3, 4, rng), b = ad::glorot(4, 3, rng), c = ad::glorot(3, 4, rng);
    auto bias = ad::glorot(1, 4, rng);
    worst = std::max(worst, fd_worst({a, b, c, bias}, [&](Tape* t) {
        auto mm = ad::matmul(t, a, b);                       // 3x3
        auto mixed = ad::mul(t, ad::add(t, a, c), ad::sub(t, a, c));
        auto biased = ad::add_bias(t, mixed, bias);
        auto act = ad::mul(t, ad::relu(t, biased), ad::sigmoid(t, ad::scale(t, biased, 0.6)));
        auto soft = ad::row_softmax(t, act);
        auto joined = ad::concat_cols(t, soft, ad::repeat_rows(t, bias, 3));
        auto stacked = ad::concat_rows(t, joined, joined);   // 6x8
        auto picked = ad::gather_rows(t, stacked, {1, 4, 2});
        auto flat = ad::gather_elems(t, picked, {0, 3, 9, 17});
        auto sq = ad::reshape_vec(t, flat, 2, 2);
        return ad::add(t, ad::sum_all(t, ad::mul(t, sq, sq)),
                       ad::sum_all(t, ad::mul(t, mm, mm)));
    }, checked));

    auto pos = ad::glorot(2, 3, rng);
    for (auto& v : pos.data()) v = std::abs(v) + 0.5;
    worst = std::max(worst, fd_worst({pos}, [&](Tape* t) {
        return ad::sum_all(t, ad::mul(t, ad::log_elem(t, pos), ad::rsqrt(t, pos)));
    }, checked));

    const auto pattern = make_pattern(3, 3, {{0, 0}, {0, 1}, {1, 2}, {2, 0}, {2, 2}});
    auto vals = ad::glorot(5, 1, rng);
    auto x = ad::glorot(3, 2, rng);
    worst = std::max(worst, fd_worst({vals, x}, [&](Tape* t) {
        ad::SparseTensor s{pattern, vals};
        auto y = ad::spmm(t, s, x);
        return ad::sum_all(t, ad::mul(t, y, y));
    }, checked));

    auto src = ad::glorot(3, 1, rng);
    worst = std::max(worst, fd_worst({src}, [&](Tape* t) {
        auto out = ad::scatter_add(t, {0.5, 1.5}, {{0, 0}, {1, 1}, {0, 2}}, src);
        return ad::sum_all(t, ad::mul(t, out, out));
    }, checked));

    auto logits = ad::glorot(4, 3, rng);
    const std::vector<int> labels{0, 2, 1, 2};
    worst = std::max(worst, fd_worst({logits}, [&](Tape* t) {
        auto p = ad::row_softmax(t, logits);
        return ad::add(t, ad::nll_rows(t, p, labels, {0, 1, 2, 3}),
                       ad::margin_sum(t, p, {1, 3}, labels));
    }, checked));

    return worst;
}

void criterion_1() {
    const auto t0 = clk::now();
    double worst = 0.0;
    std::size_t checked = 0, seeds = 0;

    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        worst = std::max(worst, primitive_sweep(seed, &checked));

        // whole generator chain on a small graph, frozen noise
        SbmConfig sc;
        sc.nodes = 12;
        sc.dim = 3;
        sc.seed = seed;
        sc.kind = seed % 2 ? AttrKind::discrete : AttrKind::continuous;
        sc.p_in = 0.5;
        sc.p_out = 0.15;
        Graph g = split_nodes(make_sbm(sc), seed);
        TrainConfig tc;
        tc.hidden = 3;
        tc.epochs = 3;
        tc.patience = 3;
        tc.seed = seed;
        const auto m = train_surrogate(g, GnnKind::gcn, tc);
        std::mt19937_64 prng(seed * 31 + 1);
        const auto params = gnia_init(g.dim(), m.hidden(), 4, 4, prng);
        const auto bounds = attribute_bounds(g);
        const auto hidden = hidden_representation(m, g);
        const auto probs = model_forward(m, g);
        AttackInstance inst;
        inst.targets = {seed % g.n()};
        inst.delta = 2;
        const auto feat = build_features(m, g, hidden, probs, inst);
        GumbelConfig gc;
        gc.tau = 1.0;
        gc.eps = 0.5;
        const std::uint64_t noise_seed = seed ^ 0xabcdef;
        worst = std::max(worst, fd_worst(params.all(), [&](Tape* t) {
            std::mt19937_64 noise(noise_seed);
            return gnia_soft_loss(t, params, m, g, feat, bounds, gc, noise, GniaAblation::none);
        }, &checked));
        ++seeds;
    }

    const double secs = seconds_since(t0);
    const bool pass = seeds >= 50 && worst < 1e-4 && checked > 5000 && secs < 60.0;
    report(1, pass, fmt("gradients vs central differences: %zu seeds, %zu values, worst rel err %.2e, %.1fs",
                        seeds, checked, worst, secs));
}

// ---------------------------------------------------------------------------
// criterion 2: sparse GCN forward equals a dense nested-loop reference
// ---------------------------------------------------------------------------

void criterion_2() {
    std::mt19937_64 rng(271828);
    double worst = 0.0;
    std::size_t graphs = 0;
    for (const std::size_t n : {5, 10, 20, 35, 50}) {
        for (int rep = 0; rep < 2; ++rep) {
            std::vector<std::pair<std::size_t, std::size_t>> entries;
            std::bernoulli_distribution edge(0.15);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (edge(rng)) {
                        entries.emplace_back(i, j);
                        entries.emplace_back(j, i);
                    }
            Graph g;
            g.adjacency.pattern = make_pattern(n, n, entries);
            g.adjacency.values.assign(g.adjacency.pattern->nnz(), 1.0);
            const std::size_t d = 6, h = 5, k = 3;
            g.attributes = ad::glorot(n, d, rng, false);
            g.labels.assign(n, 0);
            g.num_classes = int(k);

            SurrogateModel m;
            m.kind = GnnKind::gcn;
            m.params.w0 = ad::glorot(d, h, rng, false);
            m.params.w1 = ad::glorot(h, k, rng, false);
            m.clean_norm_adj = normalize_adjacency(g);
            m.fitted_checksum = graph_checksum(g);
            m.forward_calls = std::make_shared<std::atomic<std::uint64_t>>(0);

            std::vector<double> adj(n * n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (const auto j : g.adjacency.pattern->row(i)) adj[i * n + j] = 1.0;
            const auto want = oracle::dense_gcn(adj, n, g.attributes.data(), d,
                                                m.params.w0.data(), h, m.params.w1.data(), k);
            const auto got = model_forward(m, g);
            for (std::size_t i = 0; i < want.size(); ++i)
                worst = std::max(worst, std::abs(got.data()[i] - want[i]));
            ++graphs;
        }
    }
    report(2, worst <= 1e-10, fmt("sparse vs dense forward on %zu graphs (n <= 50): max abs diff %.2e",
                                  graphs, worst));
}

// ---------------------------------------------------------------------------
// criterion 3: relaxation reductions, exhaustive over lengths 1..8
// ---------------------------------------------------------------------------

void criterion_3() {
    std::mt19937_64 rng(3141);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    bool softmax_exact = true, k1_exact = true, mass_ok = true, harden_ok = true;
    double worst_mass = 0.0;

    for (std::size_t len = 1; len <= 8; ++len) {
        for (int rep = 0; rep < 4; ++rep) {
            std::vector<double> zv(len);
            for (auto& v : zv) v = u(rng);
            const Tensor z = Tensor::row(zv);

            for (const double tau : tau_grid) {
                GumbelConfig quiet;
                quiet.tau = tau;
                quiet.eps = 0.0;
                std::mt19937_64 r1(9);
                const auto gs = gumbel_softmax(nullptr, z, quiet, r1);
                const auto plain = ad::row_softmax(nullptr, ad::scale(nullptr, z, 1.0 / tau));
                for (std::size_t i = 0; i < len; ++i)
                    softmax_exact &= gs.at(0, i) == plain.at(0, i);

                GumbelConfig noisy;
                noisy.tau = tau;
                noisy.eps = 0.9;
                noisy.k = 1;
                std::mt19937_64 ra(17), rb(17);
                const auto one = gumbel_topk(nullptr, z, noisy, ra);
                const auto ref = gumbel_softmax(nullptr, z, noisy, rb);
                for (std::size_t i = 0; i < len; ++i) k1_exact &= one.at(0, i) == ref.at(0, i);
            }

            for (std::size_t k = 1; k <= len; ++k) {
                GumbelConfig cfg;
                cfg.tau = 0.7;
                cfg.eps = 0.8;
                cfg.k = k;
                const auto relaxed = gumbel_topk(nullptr, z, cfg, rng);
                double mass = 0.0;
                for (const double v : relaxed.data()) mass += v;
                worst_mass = std::max(worst_mass, std::abs(mass - double(k)));
                mass_ok &= std::abs(mass - double(k)) <= 1e-6;

                const auto hard = harden(relaxed.data(), k);
                std::size_t ones = 0;
                for (const double v : hard) {
                    harden_ok &= (v == 0.0 || v == 1.0);
                    ones += v == 1.0;
                }
                harden_ok &= ones == k;
            }
        }
    }
    const bool pass = softmax_exact && k1_exact && mass_ok && harden_ok;
    report(3, pass, fmt("reductions over lengths 1..8: eps=0 exact=%d, k=1 exact=%d, worst |mass-k|=%.1e, k-hot=%d",
                        int(softmax_exact), int(k1_exact), worst_mass, int(harden_ok)));
}

// ---------------------------------------------------------------------------
// criterion 4: micro-scale optimality against brute force
// ---------------------------------------------------------------------------

void criterion_4() {
    const auto t0 = clk::now();
    std::size_t provable = 0, matched = 0, graphs = 0;

    for (std::uint64_t seed = 1; seed <= 24; ++seed) {
        SbmConfig sc;
        sc.nodes = 8 + seed % 5;  // 8..12
        sc.dim = 3;
        sc.seed = seed * 131;
        sc.kind = AttrKind::discrete;
        sc.p_in = 0.5;
        sc.p_out = 0.2;
        sc.p_hi = 0.8;
        sc.p_lo = 0.1;
        Graph g = split_nodes(make_sbm(sc), seed);
        TrainConfig tc;
        tc.hidden = 4;
        tc.epochs = 60;
        tc.patience = 60;
        tc.seed = seed;
        const auto m = train_surrogate(g, GnnKind::gcn, tc);
        const auto bounds = attribute_bounds(g);
        const std::vector<std::size_t> targets{seed % g.n()};
        const auto cands = candidate_set(g, targets);
        ++graphs;

        // brute force over every 0/1 attribute row within the l0 budget and
        // every single-edge choice
        bool any_success = false;
        for (std::size_t mask = 0; mask < 8 && !any_success; ++mask) {
            std::size_t ones = 0;
            for (std::size_t b = 0; b < 3; ++b) ones += (mask >> b) & 1;
            if (ones > bounds.l0_budget) continue;
            for (std::size_t e = 0; e < cands.size() && !any_success; ++e) {
                InjectionPlan plan;
                plan.attrs = {double(mask & 1), double((mask >> 1) & 1), double((mask >> 2) & 1)};
                plan.candidates = cands;
                plan.edge_weights.assign(cands.size(), 0.0);
                plan.edge_weights[e] = 1.0;
                plan.delta = 1;
                plan.hardened = true;
                const auto out = evaluate_plan(m, g, targets, plan);
                any_success = std::all_of(out.success.begin(), out.success.end(),
                                          [](bool b) { return b; });
            }
        }
        if (!any_success) continue;
        ++provable;

        OptiConfig cfg;
        cfg.max_iters = 400;
        cfg.patience = 400;
        cfg.restarts = 3;
        cfg.seed = seed;
        const auto out = opti_attack(m, g, targets, bounds, 1, cfg);
        const bool won = !out.success.empty() &&
                         std::all_of(out.success.begin(), out.success.end(),
                                     [](bool b) { return b; });
        matched += won;
    }

    const double secs = seconds_since(t0);
    const double frac = provable ? double(matched) / double(provable) : 0.0;
    const bool pass = graphs >= 20 && provable > 0 && frac >= 0.9 && secs < 600.0;
    report(4, pass, fmt("micro optimality: %zu graphs, %zu provably attackable, opti matched %zu (%.0f%%), %.1fs",
                        graphs, provable, matched, 100.0 * frac, secs));
}

// ---------------------------------------------------------------------------
// shared fixtures for the scaled experiments (criteria 5, 6, 7, 9, 10)
// ---------------------------------------------------------------------------

// SBM whose rows carry class-specific marker dimensions plus shared noise
// dimensions. Markers are sparse (rate pm on the own block, cross elsewhere),
// so the trained model leans on them, while the noise dims lift the mean row
// popcount to `pop`. The l0 budget tracks that mean, which keeps a payload of
// one full marker block within budget.
Graph marker_sbm(std::size_t classes, std::size_t nodes, double p_in, double p_out,
                 std::uint64_t seed) {
    constexpr std::size_t markers = 16, noise = 48;
    constexpr double pm = 0.09, cross = 0.015, pop = 16.0;
    SbmConfig sc;
    sc.nodes = nodes;
    sc.classes = classes;
    sc.dim = 1;
    sc.p_in = p_in;
    sc.p_out = p_out;
    sc.kind = AttrKind::discrete;
    sc.seed = seed;
    Graph g = make_sbm(sc);
    const std::size_t d = classes * markers + noise;
    const double pn = (pop - double(markers) * pm - double((classes - 1) * markers) * cross) /
                      double(noise);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> attrs(g.n() * d, 0.0);
    for (std::size_t i = 0; i < g.n(); ++i) {
        const auto c = static_cast<std::size_t>(g.labels[i]);
        for (std::size_t j = 0; j < classes * markers; ++j) {
            const bool own = j / markers == c;
            attrs[i * d + j] = unif(rng) < (own ? pm : cross) ? 1.0 : 0.0;
        }
        for (std::size_t j = classes * markers; j < d; ++j)
            attrs[i * d + j] = unif(rng) < pn ? 1.0 : 0.0;
    }
    g.attributes = Tensor::from(g.n(), d, std::move(attrs));
    return g;
}

struct Fixture {
    Graph g;
    SurrogateModel gcn;
    SurrogateModel appnp;
    double gcn_test_acc = 0.0;
    AttributeBounds bounds;
    Tensor hidden;
    Tensor probs;
    GniaParams gnia_full;
    double build_secs = 0.0;
    double gnia_train_secs = 0.0;
    GniaTrainConfig gnia_cfg;
    std::vector<AttackInstance> train_set, val_set;
};

GniaTrainConfig gnia_config() {
    GniaTrainConfig cfg;
    cfg.lr = 1e-3;
    cfg.max_epochs = 240;
    cfg.patience = 60;
    cfg.minibatch = 32;
    cfg.hidden_attr = 64;
    cfg.hidden_edge = 64;
    cfg.gumbel.tau = 1.0;
    cfg.gumbel.eps = 1.0;
    cfg.gumbel.decay = 0.99;
    cfg.seed = 5;
    return cfg;
}

Fixture build_fixture() {
    const auto t0 = clk::now();
    Fixture f;
    f.g = split_nodes(marker_sbm(2, 200, 0.0225, 0.00225, 2028), 33);

    TrainConfig tc;
    tc.hidden = 16;
    tc.epochs = 300;
    tc.patience = 30;
    tc.weight_decay = 5e-3;
    tc.seed = 7;
    f.gcn = train_surrogate(f.g, GnnKind::gcn, tc);
    f.gcn_test_acc =
        accuracy(model_forward(f.gcn, f.g), f.g.labels, f.g.nodes_with(SplitTag::test));

    TrainConfig vc = tc;
    vc.seed = 12;
    f.appnp = train_surrogate(f.g, GnnKind::appnp, vc);

    f.bounds = attribute_bounds(f.g);
    f.hidden = hidden_representation(f.gcn, f.g);
    f.probs = model_forward(f.gcn, f.g);

    f.gnia_cfg = gnia_config();
    f.train_set = single_instances(f.g.nodes_with(SplitTag::train), 1);
    f.val_set = single_instances(f.g.nodes_with(SplitTag::val), 1);
    f.build_secs = seconds_since(t0);

    const auto t1 = clk::now();
    f.gnia_full = gnia_train(f.g, f.gcn, f.train_set, f.val_set, f.gnia_cfg);
    f.gnia_train_secs = seconds_since(t1);
    return f;
}

// greedy disjoint two-target groups, both members within two hops
std::vector<std::vector<std::size_t>> pair_groups(const Graph& g,
                                                  const std::vector<std::size_t>& pool) {
    const auto adjacent_or_sharing = [&](std::size_t a, std::size_t b) {
        const auto ra = g.adjacency.pattern->row(a);
        const auto rb = g.adjacency.pattern->row(b);
        if (std::binary_search(ra.begin(), ra.end(), b)) return true;
        std::size_t i = 0, j = 0;
        while (i < ra.size() && j < rb.size()) {
            if (ra[i] == rb[j]) return true;
            ra[i] < rb[j] ? ++i : ++j;
        }
        return false;
    };
    std::vector<std::vector<std::size_t>> out;
    std::vector<bool> used(g.n(), false);
    std::vector<std::size_t> sorted = pool;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t ui = 0; ui < sorted.size(); ++ui) {
        const std::size_t u = sorted[ui];
        if (used[u]) continue;
        for (std::size_t vi = ui + 1; vi < sorted.size(); ++vi) {
            const std::size_t v = sorted[vi];
            if (used[v] || !adjacent_or_sharing(u, v)) continue;
            out.push_back({u, v});
            used[u] = used[v] = true;
            break;
        }
    }
    return out;
}

OptiConfig opti_config() {
    OptiConfig cfg;
    cfg.lr = 1e-2;
    cfg.max_iters = 1000;
    cfg.patience = 50;
    cfg.tol = 1e-6;
    return cfg;
}

struct ScenarioResult {
    double rate = 0.0;
    double clean_rate = 0.0;
    double mean_wall = 0.0;
    std::size_t attacks = 0;
};

ScenarioResult run(const Fixture& f, const std::string& method, const SurrogateModel& victim,
                   ScenarioKind kind, std::uint64_t seed, GniaAblation abl,
                   const GniaParams* params, std::size_t* attack_counter) {
    ScenarioSpec spec;
    spec.kind = kind;
    spec.method = method;
    spec.seed = seed;
    MethodConfigs cfgs;
    cfgs.opti = opti_config();
    cfgs.gnia = params;
    cfgs.gnia_tau = 1.0;
    cfgs.ablation = abl;
    const auto [records, man] = run_scenario(f.g, f.gcn, victim, spec, cfgs);
    if (attack_counter) *attack_counter += records.size();
    return {man.rate, man.clean_rate, man.mean_wall_time, man.attacks};
}

// ---------------------------------------------------------------------------

int main_impl() {
    std::printf("acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();

    std::size_t total_attacks = 0;

    // ---- criterion 5: scaled efficacy on a 200-node SBM ----
    const auto t5 = clk::now();
    Fixture f = build_fixture();
    const auto fixture_checksum = graph_checksum(f.g);
    const auto opti_res = run(f, "opti", f.gcn, ScenarioKind::single_target, 50, GniaAblation::none,
                              nullptr, &total_attacks);
    const auto gnia_res = run(f, "gnia", f.gcn, ScenarioKind::single_target, 51,
                              GniaAblation::none, &f.gnia_full, &total_attacks);
    const auto rand_res = run(f, "random", f.gcn, ScenarioKind::single_target, 52,
                              GniaAblation::none, nullptr, &total_attacks);
    const double secs5 = seconds_since(t5);
    {
        const bool pass = f.gcn_test_acc >= 0.90 && opti_res.rate >= 0.90 &&
                          gnia_res.rate >= 0.8 * opti_res.rate &&
                          opti_res.rate >= rand_res.rate + 0.30 &&
                          gnia_res.rate >= rand_res.rate + 0.30 && secs5 < 1800.0;
        report(5, pass,
               fmt("200-node SBM: clean acc %.3f, opti %.3f, generator %.3f, random %.3f (%zu targets), %.0fs",
                   f.gcn_test_acc, opti_res.rate, gnia_res.rate, rand_res.rate, opti_res.attacks,
                   secs5));
    }

    // ---- criterion 6: crafting-time ratio over >= 100 shared instances ----
    {
        std::vector<AttackInstance> instances;
        for (std::size_t i = 0; i < 100; ++i) instances.push_back({{i}, 1});
        double opti_time = 0.0, gnia_time = 0.0;
        const auto ocfg = opti_config();
        std::mt19937_64 rng(60);
        for (std::size_t i = 0; i < instances.size(); ++i) {
            OptiConfig cfg = ocfg;
            cfg.seed = 600 + i;
            const auto a = opti_attack(f.gcn, f.g, instances[i].targets, f.bounds, 1, cfg);
            validate_plan(f.g, f.bounds, a.plan);
            opti_time += a.wall_time;
            const auto b = gnia_infer(f.gnia_full, f.gcn, f.g, f.hidden, f.probs, instances[i],
                                      f.bounds, 1.0, GniaAblation::none, rng);
            validate_plan(f.g, f.bounds, b.plan);
            gnia_time += b.wall_time;
        }
        total_attacks += 2 * instances.size();
        const double mean_opti = opti_time / double(instances.size());
        const double mean_gnia = gnia_time / double(instances.size());
        const bool pass = mean_gnia <= mean_opti / 100.0;
        report(6, pass, fmt("crafting time over %zu instances: opti %.4fs, generator %.6fs (ratio %.0fx)",
                            instances.size(), mean_opti, mean_gnia,
                            mean_gnia > 0 ? mean_opti / mean_gnia : 0.0));
    }

    // ---- criterion 7: ablation ordering with 5-point gaps ----
    // Two-target groups on a sparse 4-class graph: low degree makes the wiring
    // pattern matter (two-hop relays carry real mass), which is where the edge
    // scorer's conditioning on the generated attributes shows up. Rates are
    // averaged over five training seeds; everything else is pinned.
    {
        const auto t7 = clk::now();
        Graph g7 = split_nodes(marker_sbm(4, 240, 0.040, 0.040 / 15.0, 97), 33);
        TrainConfig tc7;
        tc7.hidden = 24;
        tc7.epochs = 300;
        tc7.patience = 30;
        tc7.weight_decay = 5e-3;
        tc7.seed = 7;
        const auto gcn7 = train_surrogate(g7, GnnKind::gcn, tc7);
        const auto bounds7 = attribute_bounds(g7);
        const Tensor hidden7 = hidden_representation(gcn7, g7);
        const Tensor probs7 = model_forward(gcn7, g7);
        const auto train7 = group_instances(g7, pair_groups(g7, g7.nodes_with(SplitTag::train)));
        const auto val7 = group_instances(g7, pair_groups(g7, g7.nodes_with(SplitTag::val)));
        auto pool7 = g7.nodes_with(SplitTag::val);
        const auto test7 = g7.nodes_with(SplitTag::test);
        pool7.insert(pool7.end(), test7.begin(), test7.end());
        const auto eval7 = group_instances(g7, pair_groups(g7, pool7));
        const auto checksum7 = graph_checksum(g7);

        const GniaAblation abls[] = {GniaAblation::none, GniaAblation::no_joint,
                                     GniaAblation::no_edge, GniaAblation::no_attr};
        double rates[4] = {};
        for (int a = 0; a < 4; ++a) {
            double sum = 0.0;
            for (const std::uint64_t s : {5, 6, 7, 8, 9}) {
                GniaTrainConfig cfg = gnia_config();
                cfg.seed = s;
                cfg.ablation = abls[a];
                const auto params = gnia_train(g7, gcn7, train7, val7, cfg);
                std::mt19937_64 rng(43 + s);
                std::size_t wins = 0;
                for (const auto& inst : eval7) {
                    const auto out = gnia_infer(params, gcn7, g7, hidden7, probs7, inst, bounds7,
                                                1.0, abls[a], rng);
                    validate_plan(g7, bounds7, out.plan);
                    wins += std::all_of(out.success.begin(), out.success.end(),
                                        [](bool b) { return b; });
                    ++total_attacks;
                }
                sum += double(wins) / double(eval7.size());
            }
            rates[a] = sum / 5.0;
        }
        g_side_graphs_intact &= graph_checksum(g7) == checksum7;

        const bool pass = rates[0] >= rates[1] + 0.05 && rates[1] >= rates[2] + 0.05 &&
                          rates[1] >= rates[3] + 0.05;
        report(7, pass,
               fmt("ablations over %zu two-target groups x 5 seeds: full %.3f, no_joint %.3f, no_edge %.3f, no_attr %.3f, %.0fs",
                   eval7.size(), rates[0], rates[1], rates[2], rates[3], seconds_since(t7)));
    }

    // ---- criterion 8: budget rule and all-or-nothing metric ----
    {
        bool ok = multi_target_delta(3.7, 3, 30) == 11;
        ok &= multi_target_delta(1.0, 1, 2) == 1;
        ok &= multi_target_delta(10.0, 5, 8) == 4;
        ok &= multi_target_delta(0.05, 1, 40) == 1;
        ok &= multi_target_delta(2.5, 2, 100) == 5;

        // a group with one surviving target is a failed attack
        const Tensor p = Tensor::from(3, 2, {0.1, 0.9, 0.8, 0.2, 0.3, 0.7});
        const std::vector<int> labels{0, 0, 0};
        const auto flags = misclassified_flags(p, {0, 1, 2}, labels);
        ok &= flags[0] && !flags[1] && flags[2];
        AttackRecord partial;
        partial.flags.assign(flags.begin(), flags.end());
        partial.success = std::all_of(flags.begin(), flags.end(), [](bool b) { return b; });
        AttackRecord swept;
        swept.flags = {true, true, true};
        swept.success = true;
        ok &= !partial.success;
        ok &= misclassification_rate({partial, swept}) == 0.5;
        report(8, ok, "budget rule (3.7 * 3 vs 30/2 -> 11) and all-or-nothing grouping");
    }

    // ---- criterion 9: black-box transfer onto APPNP with access audit ----
    {
        const auto before = forward_count(f.appnp);
        const auto bb = run(f, "opti", f.appnp, ScenarioKind::black_box, 90, GniaAblation::none,
                            nullptr, &total_attacks);
        const auto used = forward_count(f.appnp) - before;
        const bool audit_ok = used == 1 + bb.attacks;  // one clean pass + one eval per attack
        const bool pass = bb.rate >= bb.clean_rate + 0.20 && audit_ok;
        report(9, pass, fmt("gcn -> appnp transfer: attacked %.3f vs clean %.3f over %zu targets, victim calls %llu (audit %s)",
                            bb.rate, bb.clean_rate, bb.attacks,
                            static_cast<unsigned long long>(used), audit_ok ? "ok" : "violated"));
    }

    // ---- criterion 10: volume run, zero mutations or violations ----
    {
        bool violations = false;
        std::uint64_t seed = 1000;
        const char* methods[] = {"random", "prefedge", "mostattr"};
        // at least one single- and one multi-target pass per baseline, then
        // keep going until the whole suite has crafted 10^3 attacks
        for (std::size_t mi = 0; mi < 6 || total_attacks < 1000; ++mi) {
            try {
                run(f, methods[mi % 3], f.gcn, mi % 2 ? ScenarioKind::multi_target
                                                      : ScenarioKind::single_target,
                    seed++, GniaAblation::none, nullptr, &total_attacks);
            } catch (const std::exception&) {
                violations = true;
                break;
            }
        }
        const bool intact = graph_checksum(f.g) == fixture_checksum && g_side_graphs_intact;
        const bool pass = !violations && intact && total_attacks >= 1000;
        report(10, pass, fmt("%zu attacks across all methods: %s, base graphs %s",
                             total_attacks, violations ? "violations found" : "all plans valid",
                             intact ? "unchanged" : "mutated"));
    }

    std::printf("acceptance: %d criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}

}  // namespace

int main() {
#ifdef _OPENMP
    // the gate numbers are pinned exactly; parallel reductions must not
    // reassociate them between machines
    omp_set_num_threads(1);
#endif
    try {
        return main_impl();
    } catch (const std::exception& e) {
        std::printf("acceptance: aborted by exception: %s\n", e.what());
        return 2;
    }
}
