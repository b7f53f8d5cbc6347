#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "flowgat/errors.hpp"

namespace flowgat::ad {

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

// Dense f64 tensor, row-major. The grad buffer exists only when requires_grad
// is set and is accumulated (+=) across fan-out during Tape::backward.
class Tensor : public std::enable_shared_from_this<Tensor> {
public:
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
    std::string name;

    static TensorPtr zeros(std::vector<std::size_t> shape, bool requires_grad = false);
    static TensorPtr from_data(std::vector<std::size_t> shape, std::vector<double> values,
                               bool requires_grad = false);
    static TensorPtr scalar(double value, bool requires_grad = false);

    std::size_t size() const { return data.size(); }
    std::size_t rows() const { return shape.empty() ? 1 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? size() / rows() : shape[1]; }
    bool is_scalar() const { return data.size() == 1; }

    double value() const;
    double& at(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

    void zero_grad();
    TensorPtr named(std::string n);
};

std::string shape_str(const std::vector<std::size_t>& shape);

// Records operations in execution order, which is already topological: every
// input of an op was created before it. backward() replays the adjoints in
// reverse. A tape built with recording = false stores nothing, for inference.
class Tape {
public:
    explicit Tape(bool recording = true) : recording_(recording) {}

    bool recording() const { return recording_; }

    void record(const char* op, std::vector<TensorPtr> inputs, TensorPtr output,
                std::function<void()> backward);

    // Seeds loss grad with 1 and propagates through the recorded ops.
    // Throws ConfigError if loss is not scalar.
    void backward(const TensorPtr& loss);

    std::size_t op_count() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

private:
    struct Node {
        const char* op;
        std::vector<TensorPtr> inputs;
        TensorPtr output;
        std::function<void()> back;
    };
    std::vector<Node> nodes_;
    bool recording_;
};

}  // namespace flowgat::ad
