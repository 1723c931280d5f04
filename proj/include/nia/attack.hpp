#pragma once

#include <cstdint>
#include <vector>

#include "nia/gnn.hpp"
#include "nia/graph.hpp"
#include "nia/gumbel.hpp"

namespace nia {

struct OptiConfig {
    double lr = 1e-2;
    std::size_t max_iters = 1000;
    std::size_t patience = 50;   // iterations without a tol improvement before stopping
    double tol = 1e-6;
    std::size_t restarts = 1;
    GumbelConfig gumbel;         // k is derived per attack; tau/eps/decay apply
    std::uint64_t seed = 0;
};

struct AttackOutcome {
    InjectionPlan plan;          // hardened
    double loss_initial = 0.0;   // hardened loss before any update
    double loss_final = 0.0;     // hardened loss of the returned plan
    std::vector<bool> success;   // per target, from the hardened plan
    double wall_time = 0.0;      // seconds spent crafting the attack
};

// Sum over targets of p[t, y_t] - max_{k != y_t} p[t, k]; negative for a
// target exactly when some wrong class outscores the label.
double attack_loss(const ad::Tensor& probs, const std::vector<std::size_t>& targets,
                   const std::vector<int>& labels);

// Predicted class != label, per target (argmax ties toward lower index).
std::vector<bool> misclassified_flags(const ad::Tensor& probs,
                                      const std::vector<std::size_t>& targets,
                                      const std::vector<int>& labels);

// Evaluate one hardened plan against a model: loss + per-target flags.
AttackOutcome evaluate_plan(const SurrogateModel& m, const Graph& g,
                            const std::vector<std::size_t>& targets, InjectionPlan plan);

// Gradient attack over free attribute and edge variables for one target set.
AttackOutcome opti_attack(const SurrogateModel& m, const Graph& g,
                          const std::vector<std::size_t>& targets, const AttributeBounds& bounds,
                          std::size_t delta, const OptiConfig& cfg);

}  // namespace nia
