#include "flowgat/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace flowgat {

const std::array<double, LabelMap::kClassCount> kCiciotClassProportions = {
    0.80870, 0.17130, 0.01418, 0.00379, 0.00203};

namespace {

std::string canonical_label(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char ch : s) {
        if (ch == '_' || ch == ' ' || ch == '-') {
            out.push_back(' ');
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    // collapse runs of spaces and trim
    std::string squeezed;
    for (const char ch : out) {
        if (ch == ' ' && (squeezed.empty() || squeezed.back() == ' ')) {
            continue;
        }
        squeezed.push_back(ch);
    }
    while (!squeezed.empty() && squeezed.back() == ' ') {
        squeezed.pop_back();
    }
    return squeezed;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (const char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return s.substr(b, e - b);
}

// Full-field numeric parse; "inf"/"nan" spellings count as numeric so the row
// cleaning rule can see them.
bool parse_double_field(const std::string& raw, double& out) {
    const std::string f = trim(raw);
    if (f.empty()) {
        out = std::numeric_limits<double>::quiet_NaN();
        return true;  // empty cell: numeric column candidate, row gets dropped
    }
    const char* begin = f.data();
    const char* end = f.data() + f.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec == std::errc() && ptr == end) {
        return true;
    }
    // from_chars does not accept "inf"/"infinity"/"nan"; fall back to strtod
    char* sptr = nullptr;
    const double v = std::strtod(f.c_str(), &sptr);
    if (sptr == f.c_str() + f.size() && sptr != f.c_str()) {
        out = v;
        return true;
    }
    return false;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

const std::array<std::string, LabelMap::kClassCount>& LabelMap::names() {
    static const std::array<std::string, kClassCount> kNames = {
        "Normal", "HTTP flood", "TCP flood", "Brute force", "UDP flood"};
    return kNames;
}

int LabelMap::index_of(const std::string& name) {
    const std::string canon = canonical_label(name);
    for (std::size_t i = 0; i < kClassCount; ++i) {
        if (canonical_label(names()[i]) == canon) {
            return static_cast<int>(i);
        }
    }
    throw DataError("unknown class label: '" + name + "'");
}

const std::string& LabelMap::name_of(int index) {
    if (index < 0 || static_cast<std::size_t>(index) >= kClassCount) {
        throw ConfigError("label index out of range: " + std::to_string(index));
    }
    return names()[static_cast<std::size_t>(index)];
}

FlowDataset load_netflow_csv(const std::string& path, const std::string& label_column,
                             const std::vector<std::string>& drop_columns, IngestStats* stats) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open csv file: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("empty csv file: " + path);
    }
    const std::vector<std::string> header = split_csv_line(line);
    std::ptrdiff_t label_idx = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (trim(header[i]) == label_column) {
            label_idx = static_cast<std::ptrdiff_t>(i);
            break;
        }
    }
    if (label_idx < 0) {
        throw DataError("label column '" + label_column + "' not found in " + path);
    }

    // Pass 1: decide which columns are numeric on every row.
    std::vector<bool> numeric(header.size(), true);
    numeric[static_cast<std::size_t>(label_idx)] = false;
    for (std::size_t i = 0; i < header.size(); ++i) {
        for (const auto& name : drop_columns) {
            if (trim(header[i]) == name) {
                numeric[i] = false;
            }
        }
    }
    std::size_t rows_in = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        ++rows_in;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw DataError("row " + std::to_string(rows_in) + " has " +
                            std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(header.size()));
        }
        double v;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (numeric[i] && !parse_double_field(fields[i], v)) {
                numeric[i] = false;
            }
        }
    }

    std::vector<std::size_t> feature_cols;
    std::vector<std::string> feature_names;
    std::vector<std::string> dropped_cols;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (numeric[i]) {
            feature_cols.push_back(i);
            feature_names.push_back(trim(header[i]));
        } else if (static_cast<std::ptrdiff_t>(i) != label_idx) {
            dropped_cols.push_back(trim(header[i]));
        }
    }
    if (feature_cols.empty()) {
        throw DataError("no numeric feature columns in " + path);
    }

    // Pass 2: build the matrix, dropping rows with non-finite values.
    in.clear();
    in.seekg(0);
    std::getline(in, line);  // header
    std::vector<double> values;
    std::vector<int> labels;
    std::size_t rows_dropped = 0;
    std::vector<double> rowbuf(feature_cols.size());
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        bool finite = true;
        for (std::size_t c = 0; c < feature_cols.size(); ++c) {
            double v;
            parse_double_field(fields[feature_cols[c]], v);
            if (!std::isfinite(v)) {
                finite = false;
                break;
            }
            rowbuf[c] = v;
        }
        if (!finite) {
            ++rows_dropped;
            continue;
        }
        labels.push_back(LabelMap::index_of(fields[static_cast<std::size_t>(label_idx)]));
        values.insert(values.end(), rowbuf.begin(), rowbuf.end());
    }
    if (labels.empty()) {
        throw DataError("no usable rows in " + path);
    }

    FlowDataset ds;
    ds.features.rows = labels.size();
    ds.features.cols = feature_cols.size();
    ds.features.data = std::move(values);
    ds.labels = std::move(labels);
    ds.feature_names = std::move(feature_names);
    ds.label_names.assign(LabelMap::names().begin(), LabelMap::names().end());
    if (stats) {
        stats->rows_in = rows_in;
        stats->rows_kept = ds.labels.size();
        stats->rows_dropped = rows_dropped;
        stats->dropped_columns = dropped_cols;
    }
    return ds;
}

void save_dataset_csv(const std::string& path, const FlowDataset& ds) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError("cannot open file for writing: " + path);
    }
    for (std::size_t c = 0; c < ds.feature_names.size(); ++c) {
        out << ds.feature_names[c] << ',';
    }
    out << "Label\n";
    for (std::size_t i = 0; i < ds.features.rows; ++i) {
        for (std::size_t c = 0; c < ds.features.cols; ++c) {
            out << format_double(ds.features.at(i, c)) << ',';
        }
        out << LabelMap::name_of(ds.labels[i]) << '\n';
    }
    if (!out) {
        throw DataError("failed writing dataset csv: " + path);
    }
}

namespace {
constexpr char kDatasetMagic[4] = {'F', 'G', 'D', 'S'};

void write_string(std::ofstream& out, const std::string& s) {
    const std::uint32_t len = static_cast<std::uint32_t>(s.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    return s;
}
}  // namespace

void save_dataset_binary(const std::string& path, const FlowDataset& ds) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot open file for writing: " + path);
    }
    out.write(kDatasetMagic, 4);
    const std::uint16_t version = 1;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::uint64_t rows = ds.features.rows, cols = ds.features.cols;
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    const std::uint32_t label_count = static_cast<std::uint32_t>(ds.label_names.size());
    out.write(reinterpret_cast<const char*>(&label_count), sizeof(label_count));
    for (const auto& n : ds.label_names) {
        write_string(out, n);
    }
    for (const auto& n : ds.feature_names) {
        write_string(out, n);
    }
    for (const int l : ds.labels) {
        const std::uint32_t v = static_cast<std::uint32_t>(l);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    out.write(reinterpret_cast<const char*>(ds.features.data.data()),
              static_cast<std::streamsize>(ds.features.data.size() * sizeof(double)));
    if (!out) {
        throw DataError("failed writing dataset: " + path);
    }
}

FlowDataset load_dataset_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open file: " + path);
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kDatasetMagic, 4) != 0) {
        throw DataError("not a binary dataset file: " + path);
    }
    std::uint16_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (version != 1) {
        throw DataError("unsupported dataset file version");
    }
    std::uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    std::uint32_t label_count = 0;
    in.read(reinterpret_cast<char*>(&label_count), sizeof(label_count));
    FlowDataset ds;
    for (std::uint32_t i = 0; i < label_count; ++i) {
        ds.label_names.push_back(read_string(in));
    }
    for (std::uint64_t i = 0; i < cols; ++i) {
        ds.feature_names.push_back(read_string(in));
    }
    ds.labels.resize(rows);
    for (auto& l : ds.labels) {
        std::uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        l = static_cast<int>(v);
    }
    ds.features.rows = rows;
    ds.features.cols = cols;
    ds.features.data.resize(rows * cols);
    in.read(reinterpret_cast<char*>(ds.features.data.data()),
            static_cast<std::streamsize>(ds.features.data.size() * sizeof(double)));
    if (!in) {
        throw DataError("truncated dataset file: " + path);
    }
    return ds;
}

bool is_dataset_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[4] = {};
    in.read(magic, 4);
    return in && std::memcmp(magic, kDatasetMagic, 4) == 0;
}

Scaler fit_scaler(const FeatureMatrix& train) {
    if (train.rows == 0) {
        throw DataError("fit_scaler: no rows");
    }
    Scaler s;
    s.mins.assign(train.cols, std::numeric_limits<double>::infinity());
    s.maxs.assign(train.cols, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < train.rows; ++i) {
        for (std::size_t c = 0; c < train.cols; ++c) {
            const double v = train.at(i, c);
            s.mins[c] = std::min(s.mins[c], v);
            s.maxs[c] = std::max(s.maxs[c], v);
        }
    }
    s.fitted = true;
    return s;
}

FeatureMatrix apply_scaler(const Scaler& scaler, const FeatureMatrix& data) {
    if (!scaler.fitted) {
        throw ConfigError("apply_scaler: scaler has not been fit");
    }
    if (data.cols != scaler.mins.size()) {
        throw DimensionError("apply_scaler: data has " + std::to_string(data.cols) +
                             " columns, scaler was fit on " + std::to_string(scaler.mins.size()));
    }
    FeatureMatrix out(data.rows, data.cols);
    for (std::size_t i = 0; i < data.rows; ++i) {
        for (std::size_t c = 0; c < data.cols; ++c) {
            const double range = scaler.maxs[c] - scaler.mins[c];
            double v = range > 0.0 ? (data.at(i, c) - scaler.mins[c]) / range : 0.0;
            out.at(i, c) = std::min(1.0, std::max(0.0, v));
        }
    }
    return out;
}

SplitIds split(std::size_t n, const SplitSpec& spec) {
    if (spec.test_fraction <= 0.0 || spec.test_fraction >= 1.0 ||
        spec.val_fraction_of_train <= 0.0 || spec.val_fraction_of_train >= 1.0) {
        throw ConfigError("split fractions must lie in (0, 1)");
    }
    if (n < 10) {
        throw DataError("split: need at least 10 rows, got " + std::to_string(n));
    }
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    Rng rng(spec.seed);
    rng.shuffle(perm);

    const std::size_t test_n = static_cast<std::size_t>(static_cast<double>(n) * spec.test_fraction);
    const std::size_t rest = n - test_n;
    const std::size_t val_n =
        static_cast<std::size_t>(static_cast<double>(rest) * spec.val_fraction_of_train);
    if (test_n == 0 || val_n == 0 || rest == val_n) {
        throw DataError("split: " + std::to_string(n) + " rows leave an empty partition");
    }

    SplitIds ids;
    ids.test_ids.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(test_n));
    ids.val_ids.assign(perm.begin() + static_cast<std::ptrdiff_t>(test_n),
                       perm.begin() + static_cast<std::ptrdiff_t>(test_n + val_n));
    ids.train_ids.assign(perm.begin() + static_cast<std::ptrdiff_t>(test_n + val_n), perm.end());
    std::sort(ids.test_ids.begin(), ids.test_ids.end());
    std::sort(ids.val_ids.begin(), ids.val_ids.end());
    std::sort(ids.train_ids.begin(), ids.train_ids.end());
    return ids;
}

void save_split_json(const std::string& path, const SplitIds& ids, std::uint64_t seed) {
    nlohmann::json j;
    j["seed"] = seed;
    j["train_ids"] = ids.train_ids;
    j["val_ids"] = ids.val_ids;
    j["test_ids"] = ids.test_ids;
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError("cannot open split file for writing: " + path);
    }
    out << j.dump(2) << '\n';
}

SplitIds load_split_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open split file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad split json: " + std::string(e.what()));
    }
    SplitIds ids;
    ids.train_ids = j.at("train_ids").get<std::vector<std::uint32_t>>();
    ids.val_ids = j.at("val_ids").get<std::vector<std::uint32_t>>();
    ids.test_ids = j.at("test_ids").get<std::vector<std::uint32_t>>();
    return ids;
}

FlowDataset synth_blobs(std::size_t n,
                        const std::array<double, LabelMap::kClassCount>& class_proportions,
                        std::size_t dim, double separation, std::uint64_t seed) {
    if (n == 0) {
        throw ConfigError("synth_blobs: need n >= 1, got 0");
    }
    double psum = 0.0;
    for (const double p : class_proportions) {
        psum += p;
    }
    if (std::abs(psum - 1.0) > 1e-6) {
        throw ConfigError("synth_blobs: class proportions sum to " + std::to_string(psum));
    }

    std::array<long long, LabelMap::kClassCount> counts{};
    long long total = 0;
    std::size_t largest = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        counts[c] = std::llround(static_cast<double>(n) * class_proportions[c]);
        total += counts[c];
        if (class_proportions[c] > class_proportions[largest]) {
            largest = c;
        }
    }
    // rounding remainder goes to the largest class
    counts[largest] += static_cast<long long>(n) - total;
    if (counts[largest] < 0) {
        throw ConfigError("synth_blobs: degenerate class proportions");
    }

    Rng rng(seed);
    FeatureMatrix centers(LabelMap::kClassCount, dim);
    for (std::size_t c = 0; c < centers.rows; ++c) {
        for (std::size_t d = 0; d < dim; ++d) {
            centers.at(c, d) = separation * rng.uniform(-1.0, 1.0);
        }
    }

    FlowDataset ds;
    ds.features = FeatureMatrix(n, dim);
    ds.labels.reserve(n);
    std::size_t row = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        for (std::size_t i = 0; i < static_cast<std::size_t>(counts[c]); ++i, ++row) {
            for (std::size_t d = 0; d < dim; ++d) {
                ds.features.at(row, d) = centers.at(c, d) + rng.normal();
            }
            ds.labels.push_back(static_cast<int>(c));
        }
    }
    ds.label_names.assign(LabelMap::names().begin(), LabelMap::names().end());
    ds.feature_names.reserve(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        ds.feature_names.push_back("f" + std::to_string(d));
    }
    return ds;
}

}  // namespace flowgat
