#pragma once

#include <cstdint>

#include "nia/graph.hpp"

namespace nia {

// Stochastic block model with class-aligned attributes. Each class owns a
// contiguous block of nodes and a contiguous slice of the feature space;
// aligned features carry the signal, the rest are background.
struct SbmConfig {
    std::size_t nodes = 200;
    std::size_t classes = 2;
    std::size_t dim = 16;
    double p_in = 0.1;
    double p_out = 0.01;
    AttrKind kind = AttrKind::continuous;
    double signal = 1.0;   // continuous: mean shift of aligned features
    double noise = 0.5;    // continuous: stddev around the class mean
    double p_hi = 0.5;     // discrete: P(feature=1) when aligned
    double p_lo = 0.05;    // discrete: P(feature=1) otherwise
    std::uint64_t seed = 0;
};

Graph make_sbm(const SbmConfig& cfg);

}  // namespace nia
