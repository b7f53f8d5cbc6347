#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowgat/matrix.hpp"
#include "flowgat/rng.hpp"

namespace flowgat {

// Fixed class vocabulary of the CICIoT2022 NetFlow corpus, in stable order.
// Lookup is tolerant to case and space/underscore variants ("tcp_flood").
class LabelMap {
public:
    static constexpr std::size_t kClassCount = 5;
    static const std::array<std::string, kClassCount>& names();
    static int index_of(const std::string& name);  // throws DataError on unknown
    static const std::string& name_of(int index);
};

struct FlowDataset {
    FeatureMatrix features;
    std::vector<int> labels;
    std::vector<std::string> label_names;
    std::vector<std::string> feature_names;

    std::size_t size() const { return features.rows; }
};

struct IngestStats {
    std::size_t rows_in = 0;
    std::size_t rows_kept = 0;
    std::size_t rows_dropped = 0;  // non-finite feature values
    std::vector<std::string> dropped_columns;
};

// Parses a NetFlow CSV with a header row. Columns that do not parse as
// numbers on every row (flow ids, IPs, timestamps) are dropped, as are
// explicitly listed ones; rows with non-finite feature values are dropped and
// counted. Labels map through LabelMap; an unknown class name is an error.
FlowDataset load_netflow_csv(const std::string& path,
                             const std::string& label_column = "Label",
                             const std::vector<std::string>& drop_columns = {},
                             IngestStats* stats = nullptr);

void save_dataset_csv(const std::string& path, const FlowDataset& ds);

// Binary container: magic, counts, names, u32 labels, row-major f64 features.
void save_dataset_binary(const std::string& path, const FlowDataset& ds);
FlowDataset load_dataset_binary(const std::string& path);
bool is_dataset_binary(const std::string& path);

// Per-column min-max scaler fit on train rows only; apply maps to [0, 1] and
// clamps values outside the fitted range. Constant columns map to 0.
struct Scaler {
    std::vector<double> mins;
    std::vector<double> maxs;
    bool fitted = false;
};

Scaler fit_scaler(const FeatureMatrix& train);
FeatureMatrix apply_scaler(const Scaler& scaler, const FeatureMatrix& data);

struct SplitSpec {
    double test_fraction = 0.20;
    double val_fraction_of_train = 0.10;
    std::uint64_t seed = 0;
};

struct SplitIds {
    std::vector<std::uint32_t> train_ids;
    std::vector<std::uint32_t> val_ids;
    std::vector<std::uint32_t> test_ids;
};

// Seeded shuffle split: test_fraction of all rows to test, then
// val_fraction_of_train of the remainder to validation. The three id arrays
// are sorted, disjoint, and exhaustive.
SplitIds split(std::size_t n, const SplitSpec& spec);

void save_split_json(const std::string& path, const SplitIds& ids, std::uint64_t seed);
SplitIds load_split_json(const std::string& path);

// Class mix of the CICIoT2022 corpus; used as the default synthetic profile.
extern const std::array<double, LabelMap::kClassCount> kCiciotClassProportions;

// Gaussian blobs at seeded random centers scaled by separation, with class
// counts round(n * p_i) and the rounding remainder assigned to the largest
// class.
FlowDataset synth_blobs(std::size_t n,
                        const std::array<double, LabelMap::kClassCount>& class_proportions,
                        std::size_t dim, double separation, std::uint64_t seed);

}  // namespace flowgat
