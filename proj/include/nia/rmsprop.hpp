#pragma once

#include <vector>

#include "nia/tensor.hpp"

namespace nia::ad {

// RMSprop with optional L2 weight decay. Square averages are kept per
// parameter element and survive for the lifetime of the optimizer.
class RmsProp {
public:
    RmsProp(std::vector<Tensor> params, double lr, double decay = 0.99, double eps = 1e-8,
            double weight_decay = 0.0);

    void step();        // consume .grad() of every parameter
    void zero_grad();   // reset .grad() of every parameter
    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }
    const std::vector<Tensor>& params() const { return params_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> sq_avg_;
    double lr_, decay_, eps_, weight_decay_;
};

}  // namespace nia::ad
