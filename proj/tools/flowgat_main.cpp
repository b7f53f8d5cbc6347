// flowgat: NetFlow botnet detection over a KNN graph with a multi-head GAT.
//
// Subcommands cover the stages individually (synth, reduce, graph, train,
// eval) and end to end (pipeline, grid), plus the analytic cost model (cost).
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
// failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "flowgat/errors.hpp"
#include "flowgat/evaluation.hpp"
#include "flowgat/pipeline.hpp"

namespace fs = std::filesystem;
using namespace flowgat;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct CommonFlags {
    std::string config_file;
    std::string input;
    std::string out;
    std::string reducer = "vae";
    std::string metric = "euclidean";
    std::size_t k = 3;
    std::size_t epochs = 20;
    std::size_t batch = 128;
    double lr = 0.001;
    std::uint64_t seed = 0;
    std::size_t latent_dim = 8;
    std::size_t hidden_dim = 32;
    std::size_t n = 10000;
    std::size_t dim = 32;
    double separation = 6.0;
    bool allow_any_k = false;
    bool class_weights = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_file, "key=value config file (flags override)");
    cmd->add_option("--input", flags.input, "dataset path (CSV or binary); omit to synthesize");
    cmd->add_option("--out", flags.out, "output directory (default: $FLOWGAT_OUT or ./out)");
    cmd->add_option("--seed", flags.seed, "PRNG seed");
    cmd->add_option("--reducer", flags.reducer, "ae | vae | pca")
        ->check(CLI::IsMember({"ae", "vae", "pca"}));
    cmd->add_option("--k", flags.k, "KNN neighbor count (3 or 5 unless --allow-any-k)");
    cmd->add_option("--metric", flags.metric, "euclidean | cosine")
        ->check(CLI::IsMember({"euclidean", "cosine"}));
    cmd->add_option("--epochs", flags.epochs, "training epochs");
    cmd->add_option("--batch", flags.batch, "mini-batch size");
    cmd->add_option("--lr", flags.lr, "Adam learning rate");
    cmd->add_option("--latent-dim", flags.latent_dim, "reduced width");
    cmd->add_option("--hidden-dim", flags.hidden_dim, "reducer hidden width");
    cmd->add_option("--n", flags.n, "synthetic corpus size");
    cmd->add_option("--dim", flags.dim, "synthetic feature count");
    cmd->add_option("--separation", flags.separation, "synthetic cluster separation");
    cmd->add_flag("--allow-any-k", flags.allow_any_k, "lift the k in {3, 5} restriction");
    cmd->add_flag("--class-weights", flags.class_weights, "inverse-frequency loss weighting");
}

PipelineConfig resolve_config(const CLI::App* cmd, const CommonFlags& flags) {
    PipelineConfig cfg;
    if (!flags.config_file.empty()) load_config_file(flags.config_file, cfg);
    auto given = [&](const std::string& name) { return cmd->count(name) > 0; };
    if (given("--input")) cfg.input_path = flags.input;
    if (given("--out")) cfg.out_dir = flags.out;
    if (given("--seed")) cfg.seed = flags.seed;
    if (given("--reducer")) cfg.reducer = parse_reducer(flags.reducer);
    if (given("--k")) cfg.k = flags.k;
    if (given("--metric")) cfg.metric = parse_metric(flags.metric);
    if (given("--epochs")) cfg.epochs = flags.epochs;
    if (given("--batch")) cfg.batch = flags.batch;
    if (given("--lr")) cfg.lr = flags.lr;
    if (given("--latent-dim")) cfg.latent_dim = flags.latent_dim;
    if (given("--hidden-dim")) cfg.hidden_dim = flags.hidden_dim;
    if (given("--n")) cfg.synth_n = flags.n;
    if (given("--dim")) cfg.synth_dim = flags.dim;
    if (given("--separation")) cfg.synth_separation = flags.separation;
    if (given("--allow-any-k")) cfg.allow_any_k = flags.allow_any_k;
    if (given("--class-weights")) cfg.class_weights = flags.class_weights;
    return cfg;
}

fs::path out_or_default(const PipelineConfig& cfg, const std::string& leaf) {
    return cfg.out_dir.empty() ? default_output_root() / leaf : fs::path(cfg.out_dir);
}

FlowDataset load_input(const PipelineConfig& cfg) {
    if (cfg.input_path.empty()) {
        return synth_blobs(cfg.synth_n, kCiciotClassProportions, cfg.synth_dim,
                           cfg.synth_separation, cfg.seed);
    }
    if (is_dataset_binary(cfg.input_path)) return load_dataset_binary(cfg.input_path);
    return load_netflow_csv(cfg.input_path);
}

int cmd_synth(const PipelineConfig& cfg) {
    cfg.validate();
    const fs::path dir = out_or_default(cfg, "synth_seed" + std::to_string(cfg.seed));
    fs::create_directories(dir);
    const FlowDataset ds = synth_blobs(cfg.synth_n, kCiciotClassProportions, cfg.synth_dim,
                                       cfg.synth_separation, cfg.seed);
    save_dataset_csv((dir / "dataset.csv").string(), ds);
    save_dataset_binary((dir / "dataset.bin").string(), ds);
    std::cout << "wrote " << ds.size() << " rows x " << ds.features.cols << " features to "
              << dir.string() << std::endl;
    return 0;
}

int cmd_reduce(const PipelineConfig& cfg) {
    cfg.validate();
    const fs::path dir = out_or_default(cfg, std::string("reduce_") + reducer_name(cfg.reducer) +
                                                 "_seed" + std::to_string(cfg.seed));
    fs::create_directories(dir);
    const FlowDataset ds = load_input(cfg);
    const SplitIds ids = split(ds.size(), SplitSpec{.seed = cfg.seed});
    save_split_json((dir / "split.json").string(), ids, cfg.seed);
    const Scaler scaler = fit_scaler(gather_rows(ds.features, ids.train_ids));
    const FeatureMatrix scaled = apply_scaler(scaler, ds.features);
    const FeatureMatrix train_rows = gather_rows(scaled, ids.train_ids);

    TrainConfig tc{.epochs = cfg.epochs,
                   .batch = cfg.batch,
                   .lr = cfg.lr,
                   .seed = cfg.seed,
                   .latent_dim = cfg.latent_dim,
                   .hidden_dim = cfg.hidden_dim};
    FeatureMatrix reduced;
    Checkpoint ckpt;
    switch (cfg.reducer) {
        case ReducerKind::ae_encoder: {
            const AeModel model = train_autoencoder(train_rows, tc);
            reduced = reduce(model, scaled);
            ckpt = to_checkpoint(model);
            break;
        }
        case ReducerKind::vae_encoder: {
            const VaeModel model = train_vae(train_rows, tc);
            reduced = reduce(model, scaled);
            ckpt = to_checkpoint(model);
            break;
        }
        case ReducerKind::pca: {
            const PcaModel model = fit_pca(train_rows, cfg.latent_dim);
            reduced = reduce(model, scaled);
            ckpt = to_checkpoint(model);
            std::cout << "explained variance ratios:";
            for (const double r : model.explained_variance_ratio) std::cout << ' ' << r;
            std::cout << std::endl;
            break;
        }
    }
    ckpt.params.push_back({"scaler.min", {scaler.mins.size()}, scaler.mins});
    ckpt.params.push_back({"scaler.max", {scaler.maxs.size()}, scaler.maxs});
    save_checkpoint((dir / "reducer.ckpt").string(), ckpt);
    save_reduced_csv((dir / "reduced.csv").string(), reduced, ds.labels);
    std::cout << "wrote reduced features to " << (dir / "reduced.csv").string() << std::endl;
    return 0;
}

int cmd_graph(const PipelineConfig& cfg) {
    cfg.validate();
    if (cfg.input_path.empty()) {
        throw ConfigError("graph: --input must point at a reduced.csv");
    }
    const fs::path dir = out_or_default(cfg, std::string("graph_") + std::to_string(cfg.k) + "_" +
                                                 metric_name(cfg.metric));
    fs::create_directories(dir);
    const ReducedData data = load_reduced_csv(cfg.input_path);
    const KnnGraph graph = build_knn_graph(data.features, cfg.k, cfg.metric);
    save_knn_graph((dir / "graph.knng").string(), graph);
    export_edge_list_csv((dir / "edges.csv").string(), graph);
    const GraphStats stats = graph_stats(graph);
    std::cout << "nodes " << stats.node_count << ", edges " << stats.edge_count << ", degree min "
              << stats.min_degree << " max " << stats.max_degree << " mean " << stats.mean_degree
              << std::endl;
    return 0;
}

int cmd_train(const PipelineConfig& cfg, const std::string& graph_path,
              const std::string& split_path) {
    cfg.validate();
    if (cfg.input_path.empty() || graph_path.empty() || split_path.empty()) {
        throw ConfigError("train: needs --input reduced.csv, --graph, and --split");
    }
    const fs::path dir = out_or_default(cfg, "train_seed" + std::to_string(cfg.seed));
    fs::create_directories(dir);
    const ReducedData data = load_reduced_csv(cfg.input_path);
    const KnnGraph graph = load_knn_graph(graph_path);
    const SplitIds ids = load_split_json(split_path);

    GatTrainConfig gc;
    gc.topology.input_dim = data.features.cols;
    gc.epochs = cfg.epochs;
    gc.batch = cfg.batch;
    gc.lr = cfg.lr;
    gc.seed = cfg.seed;
    gc.class_weights = cfg.class_weights;
    const GatModel model = train_gat(graph, data.features, data.labels, ids, gc);
    save_checkpoint((dir / "model.ckpt").string(), to_checkpoint(model));
    save_history_csv((dir / "history.csv").string(), model.history);
    std::cout << "final val accuracy " << model.history.back().val_acc << ", checkpoint in "
              << dir.string() << std::endl;
    return 0;
}

int cmd_eval(const PipelineConfig& cfg, const std::string& graph_path,
             const std::string& split_path, const std::string& model_path) {
    if (cfg.input_path.empty() || graph_path.empty() || split_path.empty() ||
        model_path.empty()) {
        throw ConfigError("eval: needs --input reduced.csv, --graph, --split, and --model");
    }
    const ReducedData data = load_reduced_csv(cfg.input_path);
    const KnnGraph graph = load_knn_graph(graph_path);
    const SplitIds ids = load_split_json(split_path);
    const GatModel model = gat_from_checkpoint(load_checkpoint(model_path));

    const GatPrediction pred = predict(model, graph, data.features, ids.test_ids);
    std::vector<int> y_true;
    for (const auto id : ids.test_ids) y_true.push_back(data.labels[id]);
    const ClassificationReport rep =
        classification_report(y_true, pred.classes, model.topology.label_count);
    std::cout << report_to_text(rep);
    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        std::ofstream out(fs::path(cfg.out_dir) / "report.json", std::ios::binary);
        out << report_to_json(rep).dump(2) << "\n";
        std::cout << "report written to " << cfg.out_dir << std::endl;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"botnet detection: dimension reduction, KNN graph, GAT classifier"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string graph_path, split_path, model_path;
    CostInputs cost_in{.n_instances = 1000,
                       .dim = 8,
                       .edges = 3000,
                       .components = 8,
                       .head_dim = 8,
                       .heads = 4,
                       .gat_layers = 2,
                       .encoder_layers = 2,
                       .decoder_layers = 2,
                       .layer_count = 4,
                       .d_in = 32,
                       .d_out = 32};
    bool cost_json = false;

    auto* synth = app.add_subcommand("synth", "generate a synthetic imbalanced corpus");
    auto* reduce_cmd = app.add_subcommand("reduce", "train a reducer and project the dataset");
    auto* graph_cmd = app.add_subcommand("graph", "build the KNN graph over reduced features");
    auto* train_cmd = app.add_subcommand("train", "train the GAT on an existing graph");
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a trained model on the test split");
    auto* pipeline_cmd = app.add_subcommand("pipeline", "run all stages end to end");
    auto* grid_cmd = app.add_subcommand("grid", "run the 12-cell reducer x k x metric grid");
    auto* cost_cmd = app.add_subcommand("cost", "print the analytic cost model");

    for (auto* cmd : {synth, reduce_cmd, graph_cmd, train_cmd, eval_cmd, pipeline_cmd, grid_cmd}) {
        add_common_flags(cmd, flags);
    }
    train_cmd->add_option("--graph", graph_path, "graph.knng path");
    train_cmd->add_option("--split", split_path, "split.json path");
    eval_cmd->add_option("--graph", graph_path, "graph.knng path");
    eval_cmd->add_option("--split", split_path, "split.json path");
    eval_cmd->add_option("--model", model_path, "model.ckpt path");

    cost_cmd->add_option("--N", cost_in.n_instances, "instance count");
    cost_cmd->add_option("--D", cost_in.dim, "reduced width");
    cost_cmd->add_option("--E", cost_in.edges, "edge count");
    cost_cmd->add_option("--C", cost_in.components, "PCA components");
    cost_cmd->add_option("--K", cost_in.head_dim, "per-head width");
    cost_cmd->add_option("--H", cost_in.heads, "attention heads");
    cost_cmd->add_option("--n", cost_in.gat_layers, "GAT layers");
    cost_cmd->add_option("--a", cost_in.encoder_layers, "encoder layers");
    cost_cmd->add_option("--b", cost_in.decoder_layers, "decoder layers");
    cost_cmd->add_option("--c", cost_in.layer_count, "total layers (a + b)");
    cost_cmd->add_option("--din", cost_in.d_in, "widest layer input");
    cost_cmd->add_option("--dout", cost_in.d_out, "widest layer output");
    cost_cmd->add_flag("--json", cost_json, "emit JSON instead of a table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help and friends
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the usage hint
        return kExitConfig;
    }

    try {
        if (synth->parsed()) return cmd_synth(resolve_config(synth, flags));
        if (reduce_cmd->parsed()) return cmd_reduce(resolve_config(reduce_cmd, flags));
        if (graph_cmd->parsed()) return cmd_graph(resolve_config(graph_cmd, flags));
        if (train_cmd->parsed()) {
            return cmd_train(resolve_config(train_cmd, flags), graph_path, split_path);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(resolve_config(eval_cmd, flags), graph_path, split_path, model_path);
        }
        if (pipeline_cmd->parsed()) {
            run_pipeline(resolve_config(pipeline_cmd, flags));
            return 0;
        }
        if (grid_cmd->parsed()) {
            const GridRunResult result = run_grid(resolve_config(grid_cmd, flags));
            if (!result.all_ok()) {
                std::cerr << result.failures.size() << " grid cell(s) failed" << std::endl;
                return kExitData;
            }
            return 0;
        }
        if (cost_cmd->parsed()) {
            if (cost_cmd->count("--c") == 0) {
                cost_in.layer_count = cost_in.encoder_layers + cost_in.decoder_layers;
            }
            if (cost_json) {
                std::cout << cost_to_json(cost_in).dump(2) << std::endl;
            } else {
                std::cout << cost_table_text(cost_in);
            }
            return 0;
        }
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << std::endl;
        return kExitNumeric;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << std::endl;
        return kExitData;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
