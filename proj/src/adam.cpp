#include "glac/adam.hpp"

#include <cmath>

#include "glac/error.hpp"

namespace glac {

Adam::Adam(double lr, double weight_decay, double beta1, double beta2,
           double eps)
    : lr_(lr), wd_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (lr < 0 || weight_decay < 0) {
        throw ParamError("adam: negative learning rate or weight decay");
    }
}

void Adam::step(std::vector<GlacModel::Named>& params) {
    if (m_.empty()) {
        m_.resize(params.size());
        v_.resize(params.size());
        for (size_t i = 0; i < params.size(); ++i) {
            m_[i].assign(params[i].tensor.numel(), 0.0);
            v_[i].assign(params[i].tensor.numel(), 0.0);
        }
    }
    if (m_.size() != params.size()) {
        throw ContractError("adam: registry size changed between steps");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));

    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& p = params[i].tensor;
        if (m_[i].size() != p.numel()) {
            throw ContractError("adam: parameter " + params[i].name +
                                " changed shape");
        }
        std::vector<double>& data = p.data();
        std::vector<double>& grad = p.grad();
        for (size_t j = 0; j < data.size(); ++j) {
            const double g = grad[j] + wd_ * data[j];
            m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g;
            v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g * g;
            const double mhat = m_[i][j] / bc1;
            const double vhat = v_[i][j] / bc2;
            data[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

double global_grad_norm(const std::vector<GlacModel::Named>& params) {
    double sq = 0.0;
    for (const GlacModel::Named& n : params) {
        Tensor t = n.tensor;
        if (!t.has_grad()) continue;
        for (double g : t.grad()) sq += g * g;
    }
    return std::sqrt(sq);
}

void clip_global_norm(std::vector<GlacModel::Named>& params, double max_norm) {
    if (max_norm <= 0.0) return;
    const double norm = global_grad_norm(params);
    if (norm <= max_norm) return;
    const double scale = max_norm / norm;
    for (GlacModel::Named& n : params) {
        if (!n.tensor.has_grad()) continue;
        for (double& g : n.tensor.grad()) g *= scale;
    }
}

} // namespace glac
