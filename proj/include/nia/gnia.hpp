#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nia/attack.hpp"
#include "nia/gnn.hpp"
#include "nia/graph.hpp"
#include "nia/gumbel.hpp"

namespace nia {

// Two two-layer MLPs: one maps [r_t || u_t] to attribute logits, the other
// scores each candidate from [r_inj || r_t || u_t || r_c].
struct GniaParams {
    ad::Tensor wa0, ba0, wa1, ba1;
    ad::Tensor we0, be0, we1, be1;

    std::vector<ad::Tensor> all() const { return {wa0, ba0, wa1, ba1, we0, be0, we1, be1}; }
    std::size_t hidden_attr() const { return wa0.cols(); }
    std::size_t hidden_edge() const { return we0.cols(); }
};

enum class GniaAblation { none, no_attr, no_edge, no_joint };

const char* to_string(GniaAblation a);
GniaAblation ablation_from(const std::string& s);

struct GniaTrainConfig {
    double lr = 1e-3;            // selected from {1e-5, 1e-4, 1e-3}
    std::size_t max_epochs = 2000;
    std::size_t patience = 100;  // epochs without validation improvement
    std::size_t minibatch = 32;
    std::size_t hidden_attr = 512;
    std::size_t hidden_edge = 512;
    GumbelConfig gumbel;         // eps decays once per epoch
    std::uint64_t seed = 0;
    GniaAblation ablation = GniaAblation::none;
};

// One attack task: a target node or group plus its edge budget.
struct AttackInstance {
    std::vector<std::size_t> targets;
    std::size_t delta = 1;
};

// Everything the generators need about one instance, precomputed from the
// clean graph so repeated forwards never touch graph code again.
struct InstanceFeatures {
    std::vector<std::size_t> targets;
    std::size_t delta = 1;
    std::size_t k_edges = 1;
    ad::Tensor r_t;        // 1 x h, group mean
    ad::Tensor u_t;        // 1 x 2d, group mean
    ad::Tensor cand_rows;  // m x (h+1): candidate hidden rows plus an is-target flag
    PerturbedStructure ps;
};

InstanceFeatures build_features(const SurrogateModel& m, const Graph& g,
                                const ad::Tensor& hidden_rows, const ad::Tensor& clean_probs,
                                const AttackInstance& inst);

GniaParams gnia_init(std::size_t d, std::size_t h, std::size_t h_a, std::size_t h_e,
                     std::mt19937_64& rng);

// Soft attribute row (1 x d). Continuous graphs stretch a sigmoid into
// [lo, hi]; discrete graphs draw a relaxed l0-hot vector.
ad::Tensor generate_attributes(ad::Tape* tape, const GniaParams& p, const InstanceFeatures& feat,
                               const AttributeBounds& bounds, AttrKind kind,
                               const GumbelConfig& cfg, std::mt19937_64& rng);

// Soft candidate weights (1 x m) conditioned on the attribute row through
// r_inj; with joint=false the conditioning vector is zero.
ad::Tensor generate_edges(ad::Tape* tape, const GniaParams& p, const SurrogateModel& m,
                          const InstanceFeatures& feat, const ad::Tensor& a_inj,
                          const GumbelConfig& cfg, std::mt19937_64& rng, bool joint);

// Relaxed forward for training and gradient checks: generators, injection,
// surrogate, margin loss, all on one tape. Ablated components are replaced
// by random draws from `rng`.
ad::Tensor gnia_soft_loss(ad::Tape* tape, const GniaParams& p, const SurrogateModel& m,
                          const Graph& g, const InstanceFeatures& feat,
                          const AttributeBounds& bounds, const GumbelConfig& cfg,
                          std::mt19937_64& rng, GniaAblation ablation);

struct GniaTrainStats {
    std::size_t epochs_run = 0;
    double best_val_rate = 0.0;
};

GniaParams gnia_train(const Graph& g, const SurrogateModel& m,
                      const std::vector<AttackInstance>& train_set,
                      const std::vector<AttackInstance>& val_set, const GniaTrainConfig& cfg,
                      GniaTrainStats* stats = nullptr);

// Single deterministic forward (no optimization): craft a hardened plan,
// then evaluate it. wall_time covers only the crafting part.
AttackOutcome gnia_infer(const GniaParams& p, const SurrogateModel& m, const Graph& g,
                         const ad::Tensor& hidden_rows, const ad::Tensor& clean_probs,
                         const AttackInstance& inst, const AttributeBounds& bounds, double tau,
                         GniaAblation ablation, std::mt19937_64& rng);

void save_gnia(const GniaParams& p, AttrKind kind, const std::string& path);
GniaParams load_gnia(const std::string& path, const Graph& g, const SurrogateModel& m);

}  // namespace nia
