#pragma once

#include <cstddef>
#include <vector>

#include "flowgat/tensor.hpp"

namespace flowgat::ad {

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Adam with bias correction. Moment buffers are allocated per parameter at
// construction and match the parameter shapes exactly; step_count advances by
// one per applied step.
class AdamState {
public:
    explicit AdamState(std::vector<TensorPtr> params, AdamConfig cfg = {});

    // Applies one update from the parameters' current grad buffers.
    // Throws NumericError on a non-finite gradient, naming the parameter.
    void step();

    std::size_t step_count() const { return step_count_; }
    const AdamConfig& config() const { return cfg_; }
    const std::vector<TensorPtr>& params() const { return params_; }

private:
    std::vector<TensorPtr> params_;
    AdamConfig cfg_;
    std::vector<std::vector<double>> first_moment_;
    std::vector<std::vector<double>> second_moment_;
    std::size_t step_count_ = 0;
};

}  // namespace flowgat::ad
