#pragma once

#include <random>
#include <vector>

#include "nia/gnn.hpp"
#include "nia/graph.hpp"

namespace nia {

// Attributes copied from a uniformly drawn existing node; delta candidates
// drawn uniformly without replacement.
InjectionPlan random_attack(const Graph& g, const std::vector<std::size_t>& targets,
                            std::size_t delta, std::mt19937_64& rng);

// Attributes copied from a random node of the class the surrogate is most
// likely to flip the target(s) into; edges as random_attack. Falls back to
// random attributes when no node has that class (fallback_used reports it).
InjectionPlan most_attr_attack(const Graph& g, const SurrogateModel& m,
                               const std::vector<std::size_t>& targets, std::size_t delta,
                               std::mt19937_64& rng, bool* fallback_used = nullptr);

// Candidates drawn without replacement with probability proportional to
// degree (degree 0 counts as 1); attributes as random_attack.
InjectionPlan pref_edge_attack(const Graph& g, const std::vector<std::size_t>& targets,
                               std::size_t delta, std::mt19937_64& rng);

}  // namespace nia
