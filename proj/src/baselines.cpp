#include "nia/baselines.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace nia {

namespace {

std::vector<double> copy_attrs(const Graph& g, std::size_t node) {
    std::vector<double> a(g.dim());
    for (std::size_t j = 0; j < g.dim(); ++j) a[j] = g.attributes.at(node, j);
    return a;
}

// Donors whose rows a copied plan may legally carry. On discrete graphs a
// row above the l0 budget would fail validation, so such nodes are excluded;
// at least one node always sits at or below the rounded mean.
std::vector<std::size_t> donor_pool(const Graph& g) {
    std::vector<std::size_t> pool;
    if (g.attr_kind != AttrKind::discrete) {
        pool.resize(g.n());
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        return pool;
    }
    const std::size_t budget = attribute_bounds(g).l0_budget;
    for (std::size_t i = 0; i < g.n(); ++i) {
        std::size_t ones = 0;
        for (std::size_t j = 0; j < g.dim(); ++j) ones += g.attributes.at(i, j) != 0.0;
        if (ones <= budget) pool.push_back(i);
    }
    return pool;
}

std::vector<double> random_valid_attrs(const Graph& g, std::mt19937_64& rng) {
    const auto pool = donor_pool(g);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    return copy_attrs(g, pool[pick(rng)]);
}

std::vector<double> uniform_edges(std::size_t m, std::size_t delta, std::mt19937_64& rng) {
    std::vector<std::size_t> ids(m);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<double> w(m, 0.0);
    for (std::size_t i = 0; i < std::min(delta, m); ++i) w[ids[i]] = 1.0;
    return w;
}

InjectionPlan base_plan(const Graph& g, const std::vector<std::size_t>& targets,
                        std::size_t delta) {
    if (delta == 0) throw std::invalid_argument("baseline: edge budget must be positive");
    InjectionPlan plan;
    plan.candidates = candidate_set(g, targets);
    plan.delta = delta;
    plan.hardened = true;
    return plan;
}

}  // namespace

InjectionPlan random_attack(const Graph& g, const std::vector<std::size_t>& targets,
                            std::size_t delta, std::mt19937_64& rng) {
    InjectionPlan plan = base_plan(g, targets, delta);
    plan.attrs = random_valid_attrs(g, rng);
    plan.edge_weights = uniform_edges(plan.candidates.size(), delta, rng);
    return plan;
}

InjectionPlan most_attr_attack(const Graph& g, const SurrogateModel& m,
                               const std::vector<std::size_t>& targets, std::size_t delta,
                               std::mt19937_64& rng, bool* fallback_used) {
    InjectionPlan plan = base_plan(g, targets, delta);
    const ad::Tensor probs = model_forward(m, g);

    // majority label of the group, ties toward the smaller class id
    std::map<int, std::size_t> votes;
    for (std::size_t t : targets) ++votes[g.labels[t]];
    int y = targets.empty() ? 0 : g.labels[targets[0]];
    std::size_t top = 0;
    for (const auto& [label, count] : votes)
        if (count > top) top = count, y = label;

    // runner-up class of the group's mean prediction row
    const std::size_t K = probs.cols();
    std::vector<double> mean_row(K, 0.0);
    for (std::size_t t : targets)
        for (std::size_t k = 0; k < K; ++k)
            mean_row[k] += probs.at(t, k) / static_cast<double>(targets.size());
    std::size_t k_t = static_cast<std::size_t>(y) == 0 ? 1 : 0;
    for (std::size_t k = 0; k < K; ++k) {
        if (k == static_cast<std::size_t>(y)) continue;
        if (mean_row[k] > mean_row[k_t]) k_t = k;
    }

    std::vector<std::size_t> pool;
    for (const std::size_t i : donor_pool(g))
        if (g.labels[i] == static_cast<int>(k_t)) pool.push_back(i);

    if (fallback_used) *fallback_used = pool.empty();
    if (pool.empty()) {
        plan.attrs = random_valid_attrs(g, rng);
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        plan.attrs = copy_attrs(g, pool[pick(rng)]);
    }
    plan.edge_weights = uniform_edges(plan.candidates.size(), delta, rng);
    return plan;
}

InjectionPlan pref_edge_attack(const Graph& g, const std::vector<std::size_t>& targets,
                               std::size_t delta, std::mt19937_64& rng) {
    InjectionPlan plan = base_plan(g, targets, delta);
    plan.attrs = random_valid_attrs(g, rng);

    const std::size_t m = plan.candidates.size();
    std::vector<double> weight(m);
    for (std::size_t i = 0; i < m; ++i)
        weight[i] = std::max<std::size_t>(1, g.degree(plan.candidates[i]));
    plan.edge_weights.assign(m, 0.0);
    for (std::size_t round = 0; round < std::min(delta, m); ++round) {
        const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
        std::uniform_real_distribution<double> unif(0.0, total);
        double r = unif(rng);
        std::size_t chosen = m;  // set below; roundoff falls through to the last live index
        for (std::size_t i = 0; i < m; ++i) {
            if (weight[i] <= 0.0) continue;
            chosen = i;
            if (r < weight[i]) break;
            r -= weight[i];
        }
        plan.edge_weights[chosen] = 1.0;
        weight[chosen] = 0.0;
    }
    return plan;
}

}  // namespace nia
