#include "flowgat/knn_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "flowgat/errors.hpp"
#include "flowgat/kernels.hpp"

namespace flowgat {

namespace {

constexpr double kNormFloor = 1e-12;

double squared_euclidean(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

}  // namespace

Metric parse_metric(const std::string& name) {
    if (name == "euclidean") return Metric::euclidean;
    if (name == "cosine") return Metric::cosine;
    throw ConfigError("unknown metric '" + name + "' (expected euclidean or cosine)");
}

const char* metric_name(Metric m) {
    return m == Metric::euclidean ? "euclidean" : "cosine";
}

double pairwise_distance(std::span<const double> a, std::span<const double> b, Metric metric) {
    if (a.size() != b.size()) {
        throw DimensionError("pairwise_distance: size mismatch " + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()));
    }
    if (metric == Metric::euclidean) return std::sqrt(squared_euclidean(a, b));
    double na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (std::sqrt(na) <= kNormFloor || std::sqrt(nb) <= kNormFloor) {
        throw DataError("pairwise_distance: cosine metric with near-zero norm vector");
    }
    return cosine_distance(a, b);
}

KnnGraph build_knn_graph(const FeatureMatrix& points, std::size_t k, Metric metric) {
    const std::size_t n = points.rows;
    if (n < 2) throw DataError("build_knn_graph: need at least 2 points, got " + std::to_string(n));
    if (k < 1) throw ConfigError("build_knn_graph: k must be >= 1");
    if (k >= n) {
        throw ConfigError("build_knn_graph: k=" + std::to_string(k) +
                          " must be smaller than the number of points " + std::to_string(n));
    }

    if (metric == Metric::cosine) {
        std::vector<std::size_t> degenerate;
        for (std::size_t i = 0; i < n; ++i) {
            double norm = 0.0;
            for (double v : points.row(i)) norm += v * v;
            if (std::sqrt(norm) <= kNormFloor) degenerate.push_back(i);
        }
        if (!degenerate.empty()) {
            std::ostringstream msg;
            msg << "build_knn_graph: cosine metric undefined for near-zero rows [";
            for (std::size_t j = 0; j < degenerate.size() && j < 16; ++j) {
                if (j) msg << ", ";
                msg << degenerate[j];
            }
            if (degenerate.size() > 16) msg << ", ...";
            msg << "] (" << degenerate.size() << " total)";
            throw DataError(msg.str());
        }
    }

    // Directed k-best pass. Each query owns its output slice, so the parallel
    // schedule cannot change the result.
    std::vector<std::uint32_t> knn(n * k);
    kernels::for_each_index(n, [&](std::size_t i) {
        const auto qi = points.row(i);
        // (distance, index) pairs, kept sorted ascending; lexicographic order
        // makes equal distances resolve to the lower index.
        std::vector<std::pair<double, std::uint32_t>> best;
        best.reserve(k + 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = metric == Metric::euclidean ? squared_euclidean(qi, points.row(j))
                                                         : cosine_distance(qi, points.row(j));
            const std::pair<double, std::uint32_t> cand{d, static_cast<std::uint32_t>(j)};
            if (best.size() == k && !(cand < best.back())) continue;
            best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
            if (best.size() > k) best.pop_back();
        }
        for (std::size_t s = 0; s < k; ++s) knn[i * k + s] = best[s].second;
    });

    // Symmetrize by union: adjacency of i = sorted unique {knn(i)} ∪ {j : i ∈ knn(j)}.
    std::vector<std::vector<std::uint32_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t s = 0; s < k; ++s) {
            const std::uint32_t j = knn[i * k + s];
            adj[i].push_back(j);
            adj[j].push_back(static_cast<std::uint32_t>(i));
        }
    }

    KnnGraph graph;
    graph.node_count = n;
    graph.metric = metric;
    graph.k = static_cast<std::uint8_t>(k);
    graph.symmetrized = true;
    graph.offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = adj[i];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        graph.offsets[i + 1] = graph.offsets[i] + row.size();
    }
    graph.neighbors.resize(graph.offsets[n]);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(adj[i].begin(), adj[i].end(), graph.neighbors.begin() + graph.offsets[i]);
    }
    return graph;
}

GraphStats graph_stats(const KnnGraph& graph) {
    GraphStats s;
    s.node_count = graph.node_count;
    s.edge_count = graph.edge_count();
    if (graph.node_count == 0) return s;
    s.min_degree = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < graph.node_count; ++i) {
        const std::size_t d = graph.degree(i);
        s.min_degree = std::min(s.min_degree, d);
        s.max_degree = std::max(s.max_degree, d);
    }
    s.mean_degree = static_cast<double>(graph.neighbors.size()) / static_cast<double>(graph.node_count);

    std::vector<bool> seen(graph.node_count, false);
    std::vector<std::uint32_t> stack;
    for (std::size_t start = 0; start < graph.node_count; ++start) {
        if (seen[start]) continue;
        ++s.component_count;
        seen[start] = true;
        stack.push_back(static_cast<std::uint32_t>(start));
        while (!stack.empty()) {
            const auto u = stack.back();
            stack.pop_back();
            for (const auto v : graph.row(u)) {
                if (!seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
            }
        }
    }
    return s;
}

void save_knn_graph(const std::string& path, const KnnGraph& graph) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_knn_graph: cannot open '" + path + "' for writing");
    out.write("KNNG", 4);
    const std::uint16_t version = 1;
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    write_u64(out, graph.node_count);
    write_u64(out, graph.edge_count());
    const std::uint8_t metric = static_cast<std::uint8_t>(graph.metric);
    const std::uint8_t sym = graph.symmetrized ? 1 : 0;
    out.write(reinterpret_cast<const char*>(&metric), 1);
    out.write(reinterpret_cast<const char*>(&graph.k), 1);
    out.write(reinterpret_cast<const char*>(&sym), 1);
    for (std::uint64_t v : graph.offsets) write_u64(out, v);
    for (std::uint32_t v : graph.neighbors) write_u64(out, v);
    if (!out) throw DataError("save_knn_graph: write failed for '" + path + "'");
}

KnnGraph load_knn_graph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_knn_graph: cannot open '" + path + "'");
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "KNNG", 4) != 0) {
        throw DataError("load_knn_graph: '" + path + "' is not a KNNG file");
    }
    std::uint16_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    if (version != 1) throw DataError("load_knn_graph: unsupported version " + std::to_string(version));

    KnnGraph graph;
    graph.node_count = read_u64(in);
    const std::uint64_t edge_count = read_u64(in);
    std::uint8_t metric = 0, k = 0, sym = 0;
    in.read(reinterpret_cast<char*>(&metric), 1);
    in.read(reinterpret_cast<char*>(&k), 1);
    in.read(reinterpret_cast<char*>(&sym), 1);
    if (metric > 1) throw DataError("load_knn_graph: bad metric byte");
    graph.metric = static_cast<Metric>(metric);
    graph.k = k;
    graph.symmetrized = sym != 0;

    graph.offsets.resize(graph.node_count + 1);
    for (auto& v : graph.offsets) v = read_u64(in);
    graph.neighbors.resize(2 * edge_count);
    for (auto& v : graph.neighbors) {
        const std::uint64_t raw = read_u64(in);
        if (raw >= graph.node_count) throw DataError("load_knn_graph: neighbor index out of range");
        v = static_cast<std::uint32_t>(raw);
    }
    if (!in) throw DataError("load_knn_graph: truncated file '" + path + "'");
    if (graph.offsets.back() != graph.neighbors.size()) {
        throw DataError("load_knn_graph: offsets inconsistent with neighbor count");
    }
    return graph;
}

void export_edge_list_csv(const std::string& path, const KnnGraph& graph) {
    std::ofstream out(path);
    if (!out) throw DataError("export_edge_list_csv: cannot open '" + path + "'");
    out << "source,target\n";
    for (std::size_t i = 0; i < graph.node_count; ++i) {
        for (std::uint32_t j : graph.row(i)) {
            if (j > i) out << i << ',' << j << '\n';
        }
    }
    if (!out) throw DataError("export_edge_list_csv: write failed for '" + path + "'");
}

}  // namespace flowgat
