#include "flowgat/tensor.hpp"

#include <numeric>
#include <sstream>

namespace flowgat::ad {

namespace {
std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (const auto d : shape) {
        n *= d;
    }
    return n;
}
}  // namespace

TensorPtr Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
    auto t = std::make_shared<Tensor>();
    t->shape = std::move(shape);
    t->data.assign(shape_product(t->shape), 0.0);
    t->requires_grad = requires_grad;
    if (requires_grad) {
        t->grad.assign(t->data.size(), 0.0);
    }
    return t;
}

TensorPtr Tensor::from_data(std::vector<std::size_t> shape, std::vector<double> values,
                            bool requires_grad) {
    const std::size_t expected = shape_product(shape);
    if (values.size() != expected) {
        throw DimensionError("tensor data size " + std::to_string(values.size()) +
                             " does not match shape " + shape_str(shape));
    }
    auto t = std::make_shared<Tensor>();
    t->shape = std::move(shape);
    t->data = std::move(values);
    t->requires_grad = requires_grad;
    if (requires_grad) {
        t->grad.assign(t->data.size(), 0.0);
    }
    return t;
}

TensorPtr Tensor::scalar(double value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

double Tensor::value() const {
    if (!is_scalar()) {
        throw ConfigError("value() called on non-scalar tensor of shape " + shape_str(shape));
    }
    return data[0];
}

void Tensor::zero_grad() {
    if (requires_grad) {
        grad.assign(data.size(), 0.0);
    }
}

TensorPtr Tensor::named(std::string n) {
    name = std::move(n);
    return shared_from_this();
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        os << (i ? "x" : "") << shape[i];
    }
    os << "]";
    return os.str();
}

void Tape::record(const char* op, std::vector<TensorPtr> inputs, TensorPtr output,
                  std::function<void()> backward) {
    if (!recording_ || !output->requires_grad) {
        return;
    }
    nodes_.push_back(Node{op, std::move(inputs), std::move(output), std::move(backward)});
}

void Tape::backward(const TensorPtr& loss) {
    if (!loss->is_scalar()) {
        throw ConfigError("backward requires a scalar loss, got shape " + shape_str(loss->shape));
    }
    if (!loss->requires_grad) {
        return;  // nothing on the tape depends on trainable parameters
    }
    loss->grad.assign(1, 1.0);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        it->back();
    }
}

}  // namespace flowgat::ad
