#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "nia/tensor.hpp"

namespace nia {

// Temperatures tried during model selection.
inline constexpr std::array<double, 5> tau_grid = {0.01, 0.1, 1.0, 10.0, 100.0};

struct GumbelConfig {
    double tau = 1.0;    // softmax temperature, > 0
    double eps = 1.0;    // exploration strength, >= 0
    std::size_t k = 1;   // selection budget
    double decay = 0.99; // multiplicative eps decay per epoch

    void decay_step() { eps *= decay; }
};

// Standard Gumbel draws G = -log(-log U), U clamped away from {0,1}.
std::vector<double> sample_gumbel(std::size_t len, std::mt19937_64& rng);

// softmax((z + eps*G) / tau) over a 1 x len score row. Differentiable in z;
// the noise is a constant. With eps == 0 no randomness is consumed and the
// result equals the temperature-scaled softmax exactly.
ad::Tensor gumbel_softmax(ad::Tape* tape, const ad::Tensor& z, const GumbelConfig& cfg,
                          std::mt19937_64& rng);

// Sum of cfg.k masked draws. After each round the argmax of that round's
// relaxed output is masked (score -1e30) so it cannot win again; noise is
// fresh per round. Total mass is exactly k softmax masses.
ad::Tensor gumbel_topk(ad::Tape* tape, const ad::Tensor& z, const GumbelConfig& cfg,
                       std::mt19937_64& rng);

// Exactly k ones at the k largest entries, ties broken toward lower index.
std::vector<double> harden(const std::vector<double>& relaxed, std::size_t k);

}  // namespace nia
