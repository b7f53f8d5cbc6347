#include "flowgat/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "flowgat/errors.hpp"

namespace flowgat {

static_assert(std::endian::native == std::endian::little,
              "checkpoint and graph files assume a little-endian host");

namespace {
constexpr char kMagic[4] = {'F', 'G', 'C', 'K'};

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (const auto d : shape) {
        n *= d;
    }
    return n;
}
}  // namespace

const NamedBuffer& Checkpoint::find(const std::string& name) const {
    for (const auto& p : params) {
        if (p.name == name) {
            return p;
        }
    }
    throw DataError("checkpoint has no parameter named '" + name + "'");
}

bool Checkpoint::has(const std::string& name) const {
    for (const auto& p : params) {
        if (p.name == name) {
            return true;
        }
    }
    return false;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    nlohmann::json header;
    header["format"] = "flowgat-checkpoint";
    header["version"] = 1;
    header["model"] = ckpt.model_kind;
    header["meta"] = ckpt.meta;
    auto params = nlohmann::json::array();
    for (const auto& p : ckpt.params) {
        if (p.values.size() != shape_product(p.shape)) {
            throw ConfigError("checkpoint parameter '" + p.name + "' shape/value size mismatch");
        }
        params.push_back({{"name", p.name}, {"shape", p.shape}});
    }
    header["params"] = std::move(params);
    const std::string header_bytes = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot open checkpoint file for writing: " + path);
    }
    out.write(kMagic, 4);
    const std::uint64_t hlen = header_bytes.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
    for (const auto& p : ckpt.params) {
        out.write(reinterpret_cast<const char*>(p.values.data()),
                  static_cast<std::streamsize>(p.values.size() * sizeof(double)));
    }
    if (!out) {
        throw DataError("failed writing checkpoint: " + path);
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open checkpoint file: " + path);
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw DataError("not a checkpoint file: " + path);
    }
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    if (!in || hlen == 0 || hlen > (1ull << 30)) {
        throw DataError("corrupt checkpoint header: " + path);
    }
    std::string header_bytes(hlen, '\0');
    in.read(header_bytes.data(), static_cast<std::streamsize>(hlen));
    if (!in) {
        throw DataError("truncated checkpoint header: " + path);
    }
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_bytes);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad checkpoint header json: " + std::string(e.what()));
    }

    Checkpoint ckpt;
    ckpt.model_kind = header.at("model").get<std::string>();
    ckpt.meta = header.value("meta", nlohmann::json::object());
    for (const auto& pj : header.at("params")) {
        NamedBuffer buf;
        buf.name = pj.at("name").get<std::string>();
        buf.shape = pj.at("shape").get<std::vector<std::size_t>>();
        buf.values.resize(shape_product(buf.shape));
        in.read(reinterpret_cast<char*>(buf.values.data()),
                static_cast<std::streamsize>(buf.values.size() * sizeof(double)));
        if (!in) {
            throw DataError("truncated checkpoint payload at parameter '" + buf.name + "'");
        }
        ckpt.params.push_back(std::move(buf));
    }
    return ckpt;
}

}  // namespace flowgat
