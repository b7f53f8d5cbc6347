#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowgat/matrix.hpp"

namespace flowgat {

enum class Metric : std::uint8_t { euclidean = 0, cosine = 1 };

Metric parse_metric(const std::string& name);
const char* metric_name(Metric m);

// Euclidean distance or cosine distance (1 - cosine similarity, in [0, 2]).
// Cosine requires both norms > 1e-12.
double pairwise_distance(std::span<const double> a, std::span<const double> b, Metric metric);

// Undirected KNN graph in CSR form. Rows are sorted, contain no self edges
// and no duplicates; when symmetrized, (u, v) is present iff (v, u) is.
struct KnnGraph {
    std::size_t node_count = 0;
    std::vector<std::uint64_t> offsets;     // node_count + 1
    std::vector<std::uint32_t> neighbors;   // concatenated sorted rows
    Metric metric = Metric::euclidean;
    std::uint8_t k = 0;
    bool symmetrized = false;

    std::span<const std::uint32_t> row(std::size_t i) const {
        return {neighbors.data() + offsets[i], static_cast<std::size_t>(offsets[i + 1] - offsets[i])};
    }
    std::size_t degree(std::size_t i) const {
        return static_cast<std::size_t>(offsets[i + 1] - offsets[i]);
    }
    // each undirected edge counted once
    std::size_t edge_count() const { return neighbors.size() / 2; }
};

// Connects every point to its k nearest distinct neighbors under the metric,
// then symmetrizes by union. Ties in distance prefer the lower node index.
// The scan parallelizes over query rows; output is identical in serial mode.
KnnGraph build_knn_graph(const FeatureMatrix& points, std::size_t k, Metric metric);

struct GraphStats {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    std::size_t min_degree = 0;
    std::size_t max_degree = 0;
    double mean_degree = 0.0;
    std::size_t component_count = 0;
};

GraphStats graph_stats(const KnnGraph& graph);

// Binary format: magic "KNNG", version u16, node_count u64, edge_count u64,
// metric u8, k u8, symmetrized u8, then offsets and neighbors as u64 LE.
void save_knn_graph(const std::string& path, const KnnGraph& graph);
KnnGraph load_knn_graph(const std::string& path);

// debugging export: one "u,v" line per undirected edge with u < v
void export_edge_list_csv(const std::string& path, const KnnGraph& graph);

}  // namespace flowgat
