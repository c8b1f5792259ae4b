#pragma once

#include <vector>

#include "glac/model.hpp"

namespace glac {

// Adam with bias correction. Weight decay enters as grad += wd*param
// before the moment updates (plain L2, not decoupled).
class Adam {
public:
    Adam(double lr, double weight_decay = 0.0, double beta1 = 0.9,
         double beta2 = 0.999, double eps = 1e-8);

    // One update over the registry. Moment buffers are keyed by position,
    // so the same registry must be passed every step.
    void step(std::vector<GlacModel::Named>& params);

    size_t steps_taken() const { return t_; }
    double learning_rate() const { return lr_; }

private:
    double lr_, wd_, beta1_, beta2_, eps_;
    size_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

double global_grad_norm(const std::vector<GlacModel::Named>& params);

// Scales every gradient by max_norm/norm when the global norm exceeds
// max_norm. max_norm 0 disables.
void clip_global_norm(std::vector<GlacModel::Named>& params, double max_norm);

} // namespace glac
