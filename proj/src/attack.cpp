#include "nia/attack.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "nia/rmsprop.hpp"

namespace nia {

double attack_loss(const ad::Tensor& probs, const std::vector<std::size_t>& targets,
                   const std::vector<int>& labels) {
    if (targets.empty()) throw std::invalid_argument("attack: empty target set");
    double sum = 0.0;
    for (std::size_t t : targets) {
        const auto y = static_cast<std::size_t>(labels[t]);
        if (y >= probs.cols()) throw std::invalid_argument("attack: label out of range");
        double runner = -1.0;
        for (std::size_t k = 0; k < probs.cols(); ++k)
            if (k != y && probs.at(t, k) > runner) runner = probs.at(t, k);
        sum += probs.at(t, y) - runner;
    }
    return sum;
}

std::vector<bool> misclassified_flags(const ad::Tensor& probs,
                                      const std::vector<std::size_t>& targets,
                                      const std::vector<int>& labels) {
    std::vector<bool> flags(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const std::size_t t = targets[i];
        std::size_t best = 0;
        for (std::size_t k = 1; k < probs.cols(); ++k)
            if (probs.at(t, k) > probs.at(t, best)) best = k;
        flags[i] = static_cast<int>(best) != labels[t];
    }
    return flags;
}

AttackOutcome evaluate_plan(const SurrogateModel& m, const Graph& g,
                            const std::vector<std::size_t>& targets, InjectionPlan plan) {
    AttackOutcome out;
    PerturbedView view = inject_node(g, std::move(plan));
    const ad::Tensor probs = model_forward(m, view);
    out.loss_final = attack_loss(probs, targets, g.labels);
    out.loss_initial = out.loss_final;
    out.success = misclassified_flags(probs, targets, g.labels);
    out.plan = std::move(view.plan);
    return out;
}

namespace {

struct HardenedEval {
    InjectionPlan plan;
    double loss = 0.0;
    std::vector<bool> success;
};

// Noise-free relaxed draw, then exact k-hot projection.
std::vector<double> harden_scores(const ad::Tensor& scores, double tau, std::size_t k) {
    GumbelConfig quiet{tau, 0.0, k, 1.0};
    std::mt19937_64 unused(0);
    const ad::Tensor relaxed = gumbel_topk(nullptr, scores, quiet, unused);
    return harden(relaxed.data(), k);
}

}  // namespace

AttackOutcome opti_attack(const SurrogateModel& m, const Graph& g,
                          const std::vector<std::size_t>& targets, const AttributeBounds& bounds,
                          std::size_t delta, const OptiConfig& cfg) {
    using namespace ad;
    using clock = std::chrono::steady_clock;
    const auto started = clock::now();

    if (delta == 0) throw std::invalid_argument("attack: edge budget must be positive");
    const auto candidates = candidate_set(g, targets);
    const std::size_t mcount = candidates.size();
    const std::size_t d = g.dim();
    const std::size_t k_edges = std::min(delta, mcount);
    const bool discrete = g.attr_kind == AttrKind::discrete;
    const std::size_t k_attr = discrete ? std::min(bounds.l0_budget, d) : 0;

    const PerturbedStructure ps = build_perturbed_structure(g, candidates);
    std::vector<int> labels_ext = g.labels;
    labels_ext.push_back(0);  // injected node row, never a target

    Tensor span = Tensor::zeros(1, d);  // hi - lo, for the continuous stretch
    Tensor low = Tensor::zeros(1, d);
    for (std::size_t j = 0; j < d; ++j) {
        low.at(0, j) = bounds.lo[j];
        span.at(0, j) = bounds.hi[j] - bounds.lo[j];
    }

    auto attrs_from = [&](Tape* tape, const Tensor& attr_var, std::mt19937_64& rng,
                          const GumbelConfig& gcfg) {
        if (!discrete) {
            return add(tape, low, mul(tape, sigmoid(tape, attr_var), span));
        }
        GumbelConfig acfg = gcfg;
        acfg.k = k_attr;
        return gumbel_topk(tape, attr_var, acfg, rng);
    };

    auto evaluate_hardened = [&](const Tensor& attr_var, const Tensor& edge_var,
                                 double tau) -> HardenedEval {
        HardenedEval ev;
        ev.plan.candidates = candidates;
        ev.plan.delta = delta;
        ev.plan.hardened = true;
        ev.plan.edge_weights = harden_scores(edge_var, tau, k_edges);
        if (discrete) {
            ev.plan.attrs = harden_scores(attr_var, tau, k_attr);
        } else {
            std::mt19937_64 unused(0);
            GumbelConfig quiet{tau, 0.0, 1, 1.0};
            ev.plan.attrs = attrs_from(nullptr, attr_var, unused, quiet).data();
        }
        const Tensor probs = perturbed_forward(nullptr, m, g, ps, Tensor::row(ev.plan.attrs),
                                               Tensor::row(ev.plan.edge_weights));
        ev.loss = attack_loss(probs, targets, g.labels);
        ev.success = misclassified_flags(probs, targets, g.labels);
        return ev;
    };

    AttackOutcome out;
    bool have_best = false;
    for (std::size_t restart = 0; restart < std::max<std::size_t>(1, cfg.restarts); ++restart) {
        std::mt19937_64 rng(cfg.seed + restart);
        GumbelConfig gcfg = cfg.gumbel;
        Tensor attr_var = Tensor::zeros(1, d, true);
        Tensor edge_var = Tensor::zeros(1, mcount, true);
        RmsProp opt({attr_var, edge_var}, cfg.lr);

        HardenedEval best = evaluate_hardened(attr_var, edge_var, gcfg.tau);
        if (restart == 0) out.loss_initial = best.loss;
        std::size_t since_best = 0;

        for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
            Tape tape;
            Tensor a_inj = attrs_from(&tape, attr_var, rng, gcfg);
            GumbelConfig ecfg = gcfg;
            ecfg.k = k_edges;
            Tensor e_inj = gumbel_topk(&tape, edge_var, ecfg, rng);
            Tensor probs = perturbed_forward(&tape, m, g, ps, a_inj, e_inj);
            Tensor loss = margin_sum(&tape, probs, targets, labels_ext);
            if (!std::isfinite(loss.item()))
                throw std::runtime_error("attack: non-finite relaxed loss");
            opt.zero_grad();
            tape.backward(loss);
            opt.step();
            gcfg.decay_step();

            HardenedEval now = evaluate_hardened(attr_var, edge_var, gcfg.tau);
            if (now.loss < best.loss - cfg.tol) {
                best = std::move(now);
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                break;
            }
        }

        if (!have_best || best.loss < out.loss_final) {
            out.plan = std::move(best.plan);
            out.loss_final = best.loss;
            out.success = std::move(best.success);
            have_best = true;
        }
    }

    out.wall_time = std::chrono::duration<double>(clock::now() - started).count();
    return out;
}

}  // namespace nia
