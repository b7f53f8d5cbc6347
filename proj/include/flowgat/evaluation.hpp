#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowgat/dataset.hpp"
#include "flowgat/dimred.hpp"
#include "flowgat/knn_graph.hpp"

namespace flowgat {

struct ClassMetrics {
    std::string name;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    // zero-denominator cases render as 0.0 with the flag set
    bool precision_degenerate = false;
    bool recall_degenerate = false;
};

struct ClassificationReport {
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;                // label_count entries
    std::vector<std::vector<std::size_t>> confusion;    // [true][predicted]
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
    std::size_t total = 0;
};

// Confusion-matrix derived metrics; rows of the matrix are true classes.
ClassificationReport classification_report(const std::vector<int>& y_true,
                                           const std::vector<int>& y_pred,
                                           std::size_t label_count = LabelMap::kClassCount);

nlohmann::json report_to_json(const ClassificationReport& report);
std::string report_to_text(const ClassificationReport& report);

// Abstract operation counts for the analytic cost model. Layer counts follow
// the encoder/decoder split: c = a + b.
struct CostInputs {
    std::uint64_t n_instances = 0;     // N
    std::uint64_t dim = 0;             // D, width at the graph/GAT stage
    std::uint64_t edges = 0;           // E
    std::uint64_t components = 0;      // C (PCA)
    std::uint64_t head_dim = 0;        // K
    std::uint64_t heads = 0;           // H
    std::uint64_t gat_layers = 0;      // n
    std::uint64_t encoder_layers = 0;  // a
    std::uint64_t decoder_layers = 0;  // b
    std::uint64_t layer_count = 0;     // c, must equal a + b
    std::uint64_t d_in = 0;            // widest layer input (AE/VAE)
    std::uint64_t d_out = 0;           // widest layer output (AE/VAE)
};

struct CostEstimate {
    std::uint64_t reducer_cost = 0;
    std::uint64_t graph_cost = 0;
    std::uint64_t gat_cost = 0;
    std::uint64_t total = 0;
};

// reducer: AE c·d_in·d_out, VAE c·d_in·d_out + 1 (the sampling step),
// PCA N·D·C; graph: N·D² + E·D; gat: n·(N·D·K + H·E·K).
CostEstimate cost_estimate(ReducerKind method, const CostInputs& inputs);

nlohmann::json cost_to_json(const CostInputs& inputs);
std::string cost_table_text(const CostInputs& inputs);

struct GridKey {
    ReducerKind reducer = ReducerKind::ae_encoder;
    std::size_t k = 3;
    Metric metric = Metric::euclidean;

    bool operator==(const GridKey&) const = default;
};

std::string grid_key_str(const GridKey& key);

// The full 3 reducers x {3, 5} x {euclidean, cosine} product in canonical
// order (reducer-major, then k, then metric).
std::vector<GridKey> full_grid();

struct GridCell {
    GridKey key;
    ClassificationReport report;
};

struct GridSummary {
    std::vector<GridCell> cells;  // canonical order
    GridKey best;
    double best_accuracy = 0.0;
    double mean_euclidean_accuracy = 0.0;
    double mean_cosine_accuracy = 0.0;
    std::string observation;  // metric comparison, recorded not asserted
};

// Requires exactly the 12 grid configurations; a missing or duplicate cell is
// a ConfigError naming the offenders.
GridSummary grid_report(const std::vector<GridCell>& cells);

std::string grid_to_csv(const GridSummary& summary);
nlohmann::json grid_to_json(const GridSummary& summary);
std::string grid_to_text(const GridSummary& summary);

}  // namespace flowgat
