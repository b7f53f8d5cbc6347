#include "flowgat/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <type_traits>

#include "flowgat/errors.hpp"

namespace fs = std::filesystem;

namespace flowgat {

namespace {

template <typename F>
auto run_stage(std::vector<StageTiming>& timings, const std::string& name, F&& fn)
    -> decltype(fn()) {
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&] {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        timings.push_back({name, secs});
        std::ostringstream line;
        line << "[pipeline] " << name << " finished in " << std::fixed << std::setprecision(3)
             << secs << " s";
        std::cout << line.str() << std::endl;
    };
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            finish();
        } else {
            auto out = fn();
            finish();
            return out;
        }
    } catch (const NumericError& e) {
        throw NumericError("stage " + name + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError("stage " + name + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError("stage " + name + ": " + e.what());
    }
}

FlowDataset obtain_dataset(const PipelineConfig& cfg) {
    if (!cfg.input_path.empty()) {
        if (is_dataset_binary(cfg.input_path)) return load_dataset_binary(cfg.input_path);
        IngestStats stats;
        FlowDataset ds = load_netflow_csv(cfg.input_path, "Label", {}, &stats);
        if (stats.rows_dropped > 0) {
            std::cout << "[pipeline] dropped " << stats.rows_dropped
                      << " rows with non-finite features" << std::endl;
        }
        return ds;
    }
    return synth_blobs(cfg.synth_n, kCiciotClassProportions, cfg.synth_dim,
                       cfg.synth_separation, cfg.seed);
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct ReducerArtifacts {
    FeatureMatrix reduced;
    Checkpoint ckpt;
};

ReducerArtifacts fit_and_reduce(const PipelineConfig& cfg, const FeatureMatrix& scaled,
                                const std::vector<std::uint32_t>& train_ids,
                                const Scaler& scaler) {
    const FeatureMatrix train_rows = gather_rows(scaled, train_ids);
    TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch = cfg.batch;
    tc.lr = cfg.lr;
    tc.seed = cfg.seed;
    tc.latent_dim = cfg.latent_dim;
    tc.hidden_dim = cfg.hidden_dim;

    ReducerArtifacts out;
    switch (cfg.reducer) {
        case ReducerKind::ae_encoder: {
            const AeModel model = train_autoencoder(train_rows, tc);
            out.reduced = reduce(model, scaled);
            out.ckpt = to_checkpoint(model);
            break;
        }
        case ReducerKind::vae_encoder: {
            const VaeModel model = train_vae(train_rows, tc);
            out.reduced = reduce(model, scaled);
            out.ckpt = to_checkpoint(model);
            break;
        }
        case ReducerKind::pca: {
            const PcaModel model = fit_pca(train_rows, cfg.latent_dim);
            out.reduced = reduce(model, scaled);
            out.ckpt = to_checkpoint(model);
            break;
        }
    }
    out.ckpt.params.push_back({"scaler.min", {scaler.mins.size()}, scaler.mins});
    out.ckpt.params.push_back({"scaler.max", {scaler.maxs.size()}, scaler.maxs});
    return out;
}

nlohmann::json config_json(const PipelineConfig& cfg) {
    nlohmann::json j = {{"reducer", reducer_name(cfg.reducer)},
                        {"k", cfg.k},
                        {"metric", metric_name(cfg.metric)},
                        {"latent_dim", cfg.latent_dim},
                        {"hidden_dim", cfg.hidden_dim},
                        {"epochs", cfg.epochs},
                        {"batch", cfg.batch},
                        {"lr", cfg.lr},
                        {"seed", cfg.seed},
                        {"class_weights", cfg.class_weights}};
    if (cfg.input_path.empty()) {
        j["synth"] = {{"n", cfg.synth_n},
                      {"dim", cfg.synth_dim},
                      {"separation", cfg.synth_separation}};
    } else {
        j["input"] = cfg.input_path;
    }
    return j;
}

nlohmann::json dataset_json(const FlowDataset& ds) {
    std::vector<std::size_t> counts(LabelMap::kClassCount, 0);
    for (const int label : ds.labels) ++counts[static_cast<std::size_t>(label)];
    nlohmann::json class_counts;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        class_counts[LabelMap::name_of(static_cast<int>(c))] = counts[c];
    }
    return {{"rows", ds.size()},
            {"features", ds.features.cols},
            {"class_counts", class_counts}};
}

nlohmann::json graph_json(const GraphStats& stats) {
    return {{"nodes", stats.node_count},
            {"edges", stats.edge_count},
            {"min_degree", stats.min_degree},
            {"max_degree", stats.max_degree},
            {"mean_degree", stats.mean_degree},
            {"components", stats.component_count}};
}

void write_timings(const fs::path& path, const std::vector<StageTiming>& timings) {
    std::ostringstream out;
    out << "stage,seconds\n" << std::fixed << std::setprecision(6);
    for (const auto& t : timings) out << t.stage << ',' << t.seconds << '\n';
    write_text_file(path, out.str());
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

void PipelineConfig::validate() const {
    if (k < 1) throw ConfigError("config: k must be >= 1");
    if (!allow_any_k && k != 3 && k != 5) {
        throw ConfigError("config: k=" + std::to_string(k) +
                          " outside {3, 5}; pass the any-k override to allow it");
    }
    if (latent_dim < 1) throw ConfigError("config: latent_dim must be >= 1");
    if (hidden_dim < 1) throw ConfigError("config: hidden_dim must be >= 1");
    if (epochs < 1) throw ConfigError("config: epochs must be >= 1");
    if (batch < 1) throw ConfigError("config: batch must be >= 1");
    if (lr < 0.0) throw ConfigError("config: lr must be >= 0");
    if (input_path.empty()) {
        if (synth_n < 1000) throw ConfigError("config: synthetic corpus needs n >= 1000");
        if (synth_dim < latent_dim) {
            throw ConfigError("config: synth dim " + std::to_string(synth_dim) +
                              " is narrower than latent_dim " + std::to_string(latent_dim));
        }
    }
}

std::filesystem::path default_output_root() {
    if (const char* env = std::getenv("FLOWGAT_OUT"); env != nullptr && *env != '\0') {
        return fs::path(env);
    }
    return fs::path("out");
}

void apply_config_kv(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    auto as_size = [&](const std::string& v) -> std::size_t {
        std::size_t out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
            throw ConfigError("config: '" + key + "' expects an unsigned integer, got '" + v + "'");
        }
        return out;
    };
    auto as_double = [&](const std::string& v) -> double {
        try {
            std::size_t used = 0;
            const double out = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
        }
    };
    auto as_bool = [&](const std::string& v) -> bool {
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
    };

    if (key == "input") cfg.input_path = value;
    else if (key == "n") cfg.synth_n = as_size(value);
    else if (key == "dim") cfg.synth_dim = as_size(value);
    else if (key == "separation") cfg.synth_separation = as_double(value);
    else if (key == "reducer") cfg.reducer = parse_reducer(value);
    else if (key == "latent_dim") cfg.latent_dim = as_size(value);
    else if (key == "hidden_dim") cfg.hidden_dim = as_size(value);
    else if (key == "k") cfg.k = as_size(value);
    else if (key == "metric") cfg.metric = parse_metric(value);
    else if (key == "epochs") cfg.epochs = as_size(value);
    else if (key == "batch") cfg.batch = as_size(value);
    else if (key == "lr") cfg.lr = as_double(value);
    else if (key == "seed") cfg.seed = as_size(value);
    else if (key == "out") cfg.out_dir = value;
    else if (key == "allow_any_k") cfg.allow_any_k = as_bool(value);
    else if (key == "class_weights") cfg.class_weights = as_bool(value);
    else throw ConfigError("config: unknown key '" + key + "'");
}

void load_config_file(const std::string& path, PipelineConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        const auto begin = s.find_first_not_of(" \t\r");
        const auto end = s.find_last_not_of(" \t\r");
        return begin == std::string::npos ? std::string{} : s.substr(begin, end - begin + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(lineno) + " of '" + path +
                              "' is not key=value");
        }
        apply_config_kv(cfg, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
}

std::string config_to_kv(const PipelineConfig& cfg) {
    std::ostringstream out;
    out << "input=" << cfg.input_path << '\n';
    out << "n=" << cfg.synth_n << '\n';
    out << "dim=" << cfg.synth_dim << '\n';
    out << "separation=" << format_double(cfg.synth_separation) << '\n';
    out << "reducer=" << reducer_name(cfg.reducer) << '\n';
    out << "latent_dim=" << cfg.latent_dim << '\n';
    out << "hidden_dim=" << cfg.hidden_dim << '\n';
    out << "k=" << cfg.k << '\n';
    out << "metric=" << metric_name(cfg.metric) << '\n';
    out << "epochs=" << cfg.epochs << '\n';
    out << "batch=" << cfg.batch << '\n';
    out << "lr=" << format_double(cfg.lr) << '\n';
    out << "seed=" << cfg.seed << '\n';
    out << "out=" << cfg.out_dir << '\n';
    out << "allow_any_k=" << (cfg.allow_any_k ? "true" : "false") << '\n';
    out << "class_weights=" << (cfg.class_weights ? "true" : "false") << '\n';
    return out.str();
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    PipelineResult result;
    result.out_dir = cfg.out_dir.empty()
                         ? default_output_root() /
                               (std::string("pipeline_") + reducer_name(cfg.reducer) + "_" +
                                std::to_string(cfg.k) + "_" + metric_name(cfg.metric) + "_seed" +
                                std::to_string(cfg.seed))
                         : fs::path(cfg.out_dir);
    fs::create_directories(result.out_dir);
    PipelineConfig archived = cfg;
    archived.out_dir = result.out_dir.string();
    write_text_file(result.out_dir / "config.txt", config_to_kv(archived));
    auto& timings = result.timings;

    const FlowDataset ds = run_stage(timings, "dataset", [&] {
        FlowDataset d = obtain_dataset(cfg);
        if (cfg.input_path.empty()) {
            save_dataset_csv((result.out_dir / "dataset.csv").string(), d);
        }
        return d;
    });

    const SplitIds ids = run_stage(timings, "split", [&] {
        SplitIds s = split(ds.size(), SplitSpec{.seed = cfg.seed});
        save_split_json((result.out_dir / "split.json").string(), s, cfg.seed);
        return s;
    });

    struct Scaled {
        Scaler scaler;
        FeatureMatrix all;
    };
    const Scaled scaled = run_stage(timings, "scale", [&] {
        Scaled s;
        s.scaler = fit_scaler(gather_rows(ds.features, ids.train_ids));
        s.all = apply_scaler(s.scaler, ds.features);
        return s;
    });

    const ReducerArtifacts reduced = run_stage(timings, "reduce", [&] {
        ReducerArtifacts r = fit_and_reduce(cfg, scaled.all, ids.train_ids, scaled.scaler);
        save_checkpoint((result.out_dir / "reducer.ckpt").string(), r.ckpt);
        save_reduced_csv((result.out_dir / "reduced.csv").string(), r.reduced, ds.labels);
        return r;
    });

    const KnnGraph graph = run_stage(timings, "graph", [&] {
        KnnGraph g = build_knn_graph(reduced.reduced, cfg.k, cfg.metric);
        save_knn_graph((result.out_dir / "graph.knng").string(), g);
        return g;
    });
    result.graph = graph_stats(graph);

    const GatModel model = run_stage(timings, "train", [&] {
        GatTrainConfig gc;
        gc.topology.input_dim = cfg.latent_dim;
        gc.epochs = cfg.epochs;
        gc.batch = cfg.batch;
        gc.lr = cfg.lr;
        gc.seed = cfg.seed;
        gc.class_weights = cfg.class_weights;
        GatModel m = train_gat(graph, reduced.reduced, ds.labels, ids, gc);
        save_checkpoint((result.out_dir / "model.ckpt").string(), to_checkpoint(m));
        save_history_csv((result.out_dir / "history.csv").string(), m.history);
        return m;
    });

    result.report = run_stage(timings, "eval", [&] {
        const GatPrediction pred = predict(model, graph, reduced.reduced, ids.test_ids);
        std::vector<int> y_true;
        y_true.reserve(ids.test_ids.size());
        for (const auto id : ids.test_ids) y_true.push_back(ds.labels[id]);
        const ClassificationReport rep = classification_report(y_true, pred.classes);

        nlohmann::json doc = {{"config", config_json(cfg)},
                              {"dataset", dataset_json(ds)},
                              {"graph", graph_json(result.graph)},
                              {"results", report_to_json(rep)},
                              {"warnings", model.warnings}};
        write_text_file(result.out_dir / "report.json", doc.dump(2) + "\n");
        write_text_file(result.out_dir / "report.txt", report_to_text(rep));
        return rep;
    });

    write_timings(result.out_dir / "timings.csv", timings);
    std::ostringstream done;
    done << "[pipeline] test accuracy " << std::fixed << std::setprecision(4)
         << result.report.accuracy << ", artifacts in " << result.out_dir.string();
    std::cout << done.str() << std::endl;
    return result;
}

GridRunResult run_grid(const PipelineConfig& base) {
    PipelineConfig probe = base;
    probe.k = 3;
    probe.metric = Metric::euclidean;
    probe.validate();

    GridRunResult result;
    result.out_dir = base.out_dir.empty()
                         ? default_output_root() / ("grid_seed" + std::to_string(base.seed))
                         : fs::path(base.out_dir);
    fs::create_directories(result.out_dir);

    std::vector<StageTiming> timings;
    const FlowDataset ds = run_stage(timings, "dataset", [&] {
        FlowDataset d = obtain_dataset(base);
        if (base.input_path.empty()) {
            save_dataset_csv((result.out_dir / "dataset.csv").string(), d);
        }
        return d;
    });
    const SplitIds ids = run_stage(timings, "split", [&] {
        SplitIds s = split(ds.size(), SplitSpec{.seed = base.seed});
        save_split_json((result.out_dir / "split.json").string(), s, base.seed);
        return s;
    });
    // the shared manifest is copied byte-for-byte into every cell
    const std::string split_bytes = read_text_file(result.out_dir / "split.json");

    Scaler scaler;
    FeatureMatrix scaled;
    run_stage(timings, "scale", [&] {
        scaler = fit_scaler(gather_rows(ds.features, ids.train_ids));
        scaled = apply_scaler(scaler, ds.features);
    });

    for (const auto reducer :
         {ReducerKind::ae_encoder, ReducerKind::vae_encoder, ReducerKind::pca}) {
        PipelineConfig reducer_cfg = base;
        reducer_cfg.reducer = reducer;

        ReducerArtifacts artifacts;
        bool reducer_ok = true;
        std::string reducer_error;
        try {
            artifacts = run_stage(timings, std::string("reduce:") + reducer_name(reducer), [&] {
                return fit_and_reduce(reducer_cfg, scaled, ids.train_ids, scaler);
            });
        } catch (const std::exception& e) {
            reducer_ok = false;
            reducer_error = e.what();
        }

        for (const std::size_t k : {std::size_t{3}, std::size_t{5}}) {
            for (const auto metric : {Metric::euclidean, Metric::cosine}) {
                const GridKey key{reducer, k, metric};
                if (!reducer_ok) {
                    result.failures.push_back({key, reducer_error});
                    continue;
                }
                const fs::path cell_dir =
                    result.out_dir / (std::string(reducer_name(reducer)) + "_" +
                                      std::to_string(k) + "_" + metric_name(metric));
                try {
                    fs::create_directories(cell_dir);
                    PipelineConfig cell_cfg = reducer_cfg;
                    cell_cfg.k = k;
                    cell_cfg.metric = metric;
                    cell_cfg.out_dir = cell_dir.string();
                    write_text_file(cell_dir / "config.txt", config_to_kv(cell_cfg));
                    write_text_file(cell_dir / "split.json", split_bytes);
                    save_reduced_csv((cell_dir / "reduced.csv").string(), artifacts.reduced,
                                     ds.labels);
                    save_checkpoint((cell_dir / "reducer.ckpt").string(), artifacts.ckpt);

                    const KnnGraph graph = build_knn_graph(artifacts.reduced, k, metric);
                    save_knn_graph((cell_dir / "graph.knng").string(), graph);

                    GatTrainConfig gc;
                    gc.topology.input_dim = cell_cfg.latent_dim;
                    gc.epochs = cell_cfg.epochs;
                    gc.batch = cell_cfg.batch;
                    gc.lr = cell_cfg.lr;
                    gc.seed = cell_cfg.seed;
                    gc.class_weights = cell_cfg.class_weights;
                    const GatModel model =
                        train_gat(graph, artifacts.reduced, ds.labels, ids, gc);
                    save_checkpoint((cell_dir / "model.ckpt").string(), to_checkpoint(model));
                    save_history_csv((cell_dir / "history.csv").string(), model.history);

                    const GatPrediction pred =
                        predict(model, graph, artifacts.reduced, ids.test_ids);
                    std::vector<int> y_true;
                    for (const auto id : ids.test_ids) y_true.push_back(ds.labels[id]);
                    const ClassificationReport rep = classification_report(y_true, pred.classes);

                    nlohmann::json doc = {{"config", config_json(cell_cfg)},
                                          {"dataset", dataset_json(ds)},
                                          {"graph", graph_json(graph_stats(graph))},
                                          {"results", report_to_json(rep)},
                                          {"warnings", model.warnings}};
                    write_text_file(cell_dir / "report.json", doc.dump(2) + "\n");
                    write_text_file(cell_dir / "report.txt", report_to_text(rep));

                    result.cells.push_back({key, rep});
                    std::ostringstream line;
                    line << "[grid] " << grid_key_str(key) << " accuracy " << std::fixed
                         << std::setprecision(4) << rep.accuracy;
                    std::cout << line.str() << std::endl;
                } catch (const std::exception& e) {
                    result.failures.push_back({key, e.what()});
                    std::cout << "[grid] " << grid_key_str(key) << " FAILED: " << e.what()
                              << std::endl;
                }
            }
        }
    }

    write_timings(result.out_dir / "timings.csv", timings);
    if (result.all_ok()) {
        result.summary = grid_report(result.cells);
        write_text_file(result.out_dir / "grid_summary.csv", grid_to_csv(*result.summary));
        write_text_file(result.out_dir / "grid_summary.json",
                        grid_to_json(*result.summary).dump(2) + "\n");
        write_text_file(result.out_dir / "grid_summary.txt", grid_to_text(*result.summary));
        std::cout << grid_to_text(*result.summary);
    } else {
        nlohmann::json failed = nlohmann::json::array();
        for (const auto& f : result.failures) {
            failed.push_back({{"cell", grid_key_str(f.key)}, {"error", f.error}});
        }
        nlohmann::json done = nlohmann::json::array();
        for (const auto& c : result.cells) done.push_back(grid_key_str(c.key));
        const nlohmann::json doc = {{"failures", failed}, {"completed", done}};
        write_text_file(result.out_dir / "grid_summary.json", doc.dump(2) + "\n");
    }
    return result;
}

void save_reduced_csv(const std::string& path, const FeatureMatrix& reduced,
                      const std::vector<int>& labels) {
    if (labels.size() != reduced.rows) {
        throw DimensionError("save_reduced_csv: " + std::to_string(labels.size()) +
                             " labels for " + std::to_string(reduced.rows) + " rows");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_reduced_csv: cannot open '" + path + "'");
    for (std::size_t c = 0; c < reduced.cols; ++c) out << 'z' << c << ',';
    out << "label\n";
    for (std::size_t i = 0; i < reduced.rows; ++i) {
        for (std::size_t c = 0; c < reduced.cols; ++c) {
            out << format_double(reduced.at(i, c)) << ',';
        }
        out << labels[i] << '\n';
    }
    if (!out) throw DataError("save_reduced_csv: write failed for '" + path + "'");
}

ReducedData load_reduced_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("load_reduced_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("load_reduced_csv: empty file '" + path + "'");
    std::size_t cols = 0;
    {
        std::stringstream header(line);
        std::string field;
        std::vector<std::string> names;
        while (std::getline(header, field, ',')) names.push_back(field);
        if (names.empty() || names.back() != "label") {
            throw DataError("load_reduced_csv: last column must be 'label'");
        }
        cols = names.size() - 1;
        if (cols == 0) throw DataError("load_reduced_csv: no feature columns");
    }

    ReducedData out;
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string field;
        std::size_t got = 0;
        while (std::getline(row, field, ',')) {
            double v = 0.0;
            const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
            if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
                throw DataError("load_reduced_csv: bad number at line " + std::to_string(lineno));
            }
            if (got < cols) {
                values.push_back(v);
            } else {
                out.labels.push_back(static_cast<int>(v));
            }
            ++got;
        }
        if (got != cols + 1) {
            throw DataError("load_reduced_csv: line " + std::to_string(lineno) + " has " +
                            std::to_string(got) + " fields, expected " + std::to_string(cols + 1));
        }
    }
    out.features = FeatureMatrix(out.labels.size(), cols);
    out.features.data = std::move(values);
    return out;
}

}  // namespace flowgat
