#include "nia/rmsprop.hpp"

#include <cmath>
#include <stdexcept>

namespace nia::ad {

RmsProp::RmsProp(std::vector<Tensor> params, double lr, double decay, double eps,
                 double weight_decay)
    : params_(std::move(params)), lr_(lr), decay_(decay), eps_(eps), weight_decay_(weight_decay) {
    sq_avg_.reserve(params_.size());
    for (const auto& p : params_) {
        if (!p.defined() || !p.requires_grad())
            throw std::invalid_argument("rmsprop: every parameter must require grad");
        sq_avg_.emplace_back(p.size(), 0.0);
    }
}

void RmsProp::step() {
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        auto& w = params_[pi].data();
        const auto& g = params_[pi].grad();
        auto& s = sq_avg_[pi];
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double gi = g[i] + weight_decay_ * w[i];
            s[i] = decay_ * s[i] + (1.0 - decay_) * gi * gi;
            w[i] -= lr_ * gi / (std::sqrt(s[i]) + eps_);
        }
    }
}

void RmsProp::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

}  // namespace nia::ad
