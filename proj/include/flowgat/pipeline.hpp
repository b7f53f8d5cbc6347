#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flowgat/dataset.hpp"
#include "flowgat/dimred.hpp"
#include "flowgat/evaluation.hpp"
#include "flowgat/gat.hpp"
#include "flowgat/knn_graph.hpp"

namespace flowgat {

// Resolved configuration of one end-to-end run. Defaults mirror the training
// protocol: 20 epochs, batch 128, lr 0.001, latent width 8, k in {3, 5}.
struct PipelineConfig {
    std::string input_path;  // empty -> synthesize a corpus

    // synthetic corpus parameters (used when input_path is empty)
    std::size_t synth_n = 10000;
    std::size_t synth_dim = 32;
    double synth_separation = 6.0;

    ReducerKind reducer = ReducerKind::vae_encoder;
    std::size_t latent_dim = 8;
    std::size_t hidden_dim = 32;
    std::size_t k = 3;
    Metric metric = Metric::euclidean;
    std::size_t epochs = 20;
    std::size_t batch = 128;
    double lr = 0.001;
    std::uint64_t seed = 0;
    std::string out_dir;        // empty -> derived from output root
    bool allow_any_k = false;   // lifts the k in {3, 5} restriction
    bool class_weights = false;

    // Throws ConfigError on invalid settings; runs before any compute.
    void validate() const;
};

// Output root: $FLOWGAT_OUT when set, else ./out.
std::filesystem::path default_output_root();

// key=value configuration file (one pair per line, '#' comments). Flags given
// on the command line override file values; see apply_config_kv for keys.
void load_config_file(const std::string& path, PipelineConfig& cfg);
void apply_config_kv(PipelineConfig& cfg, const std::string& key, const std::string& value);

// The resolved config as the same key=value format, for archiving.
std::string config_to_kv(const PipelineConfig& cfg);

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct PipelineResult {
    std::filesystem::path out_dir;
    ClassificationReport report;
    std::vector<StageTiming> timings;
    GraphStats graph;
};

// dataset -> split -> scale -> reduce -> graph -> train -> eval, writing every
// intermediate artifact into the output directory. Stage failures propagate
// with the stage name prefixed; artifacts written before the failure remain.
PipelineResult run_pipeline(const PipelineConfig& cfg);

struct GridFailure {
    GridKey key;
    std::string error;
};

struct GridRunResult {
    std::filesystem::path out_dir;
    std::vector<GridCell> cells;              // successful cells
    std::vector<GridFailure> failures;
    std::optional<GridSummary> summary;       // present when all 12 succeeded

    bool all_ok() const { return failures.empty(); }
};

// All 12 reducer x k x metric cells over one shared dataset, split, and
// scaler; each reducer is trained once and reused across its four cells.
// Cell failures are recorded and the remaining cells still run.
GridRunResult run_grid(const PipelineConfig& base);

// Reduced-feature artifact: z0..z{L-1} columns plus an integer label column.
void save_reduced_csv(const std::string& path, const FeatureMatrix& reduced,
                      const std::vector<int>& labels);
struct ReducedData {
    FeatureMatrix features;
    std::vector<int> labels;
};
ReducedData load_reduced_csv(const std::string& path);

}  // namespace flowgat
