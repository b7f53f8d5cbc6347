#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace flowgat {

// Shared checkpoint container for all models: a JSON header (model kind,
// metadata, parameter names and shapes) followed by the concatenated f64
// little-endian buffers in header order.
struct NamedBuffer {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> values;
};

struct Checkpoint {
    std::string model_kind;
    nlohmann::json meta;
    std::vector<NamedBuffer> params;

    const NamedBuffer& find(const std::string& name) const;
    bool has(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace flowgat
