#include "flowgat/optim.hpp"

#include <cmath>

namespace flowgat::ad {

AdamState::AdamState(std::vector<TensorPtr> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    for (const auto& p : params_) {
        if (!p->requires_grad) {
            throw ConfigError("AdamState: parameter '" + p->name + "' does not require grad");
        }
        first_moment_.emplace_back(p->size(), 0.0);
        second_moment_.emplace_back(p->size(), 0.0);
    }
}

void AdamState::step() {
    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        auto& p = *params_[pi];
        auto& m = first_moment_[pi];
        auto& v = second_moment_[pi];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double g = p.grad[i];
            if (!std::isfinite(g)) {
                throw NumericError("non-finite gradient in parameter '" +
                                   (p.name.empty() ? std::string("<unnamed>") : p.name) +
                                   "' at element " + std::to_string(i));
            }
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p.data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
    }
}

}  // namespace flowgat::ad
