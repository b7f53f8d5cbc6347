#include "flowgat/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <sstream>

#include "flowgat/errors.hpp"

namespace flowgat {

namespace {

std::string class_label(std::size_t index, std::size_t label_count) {
    if (label_count == LabelMap::kClassCount) {
        return LabelMap::name_of(static_cast<int>(index));
    }
    return "class " + std::to_string(index);
}

std::string csv_column(const std::string& name) {
    std::string out;
    for (char ch : name) {
        out.push_back(ch == ' ' ? '_' : static_cast<char>(std::tolower(ch)));
    }
    return out;
}

}  // namespace

ClassificationReport classification_report(const std::vector<int>& y_true,
                                           const std::vector<int>& y_pred,
                                           std::size_t label_count) {
    if (y_true.size() != y_pred.size()) {
        throw ConfigError("classification_report: " + std::to_string(y_true.size()) +
                          " true labels vs " + std::to_string(y_pred.size()) + " predictions");
    }
    if (label_count < 1) throw ConfigError("classification_report: label_count must be >= 1");

    ClassificationReport rep;
    rep.total = y_true.size();
    rep.confusion.assign(label_count, std::vector<std::size_t>(label_count, 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i], p = y_pred[i];
        if (t < 0 || static_cast<std::size_t>(t) >= label_count || p < 0 ||
            static_cast<std::size_t>(p) >= label_count) {
            throw DataError("classification_report: label out of range at index " +
                            std::to_string(i));
        }
        ++rep.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }

    std::size_t trace = 0;
    double weighted_support = 0.0;
    for (std::size_t c = 0; c < label_count; ++c) {
        ClassMetrics m;
        m.name = class_label(c, label_count);
        std::size_t tp = rep.confusion[c][c];
        std::size_t fp = 0, fn = 0;
        for (std::size_t o = 0; o < label_count; ++o) {
            if (o == c) continue;
            fp += rep.confusion[o][c];
            fn += rep.confusion[c][o];
        }
        trace += tp;
        m.support = tp + fn;
        m.precision_degenerate = tp + fp == 0;
        m.recall_degenerate = tp + fn == 0;
        m.precision = m.precision_degenerate
                          ? 0.0
                          : static_cast<double>(tp) / static_cast<double>(tp + fp);
        m.recall =
            m.recall_degenerate ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
        m.f1 = m.precision + m.recall > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;

        rep.macro_precision += m.precision;
        rep.macro_recall += m.recall;
        rep.macro_f1 += m.f1;
        const double w = static_cast<double>(m.support);
        rep.weighted_precision += w * m.precision;
        rep.weighted_recall += w * m.recall;
        rep.weighted_f1 += w * m.f1;
        weighted_support += w;
        rep.per_class.push_back(std::move(m));
    }
    rep.accuracy = rep.total > 0
                       ? static_cast<double>(trace) / static_cast<double>(rep.total)
                       : 0.0;
    rep.macro_precision /= static_cast<double>(label_count);
    rep.macro_recall /= static_cast<double>(label_count);
    rep.macro_f1 /= static_cast<double>(label_count);
    if (weighted_support > 0.0) {
        rep.weighted_precision /= weighted_support;
        rep.weighted_recall /= weighted_support;
        rep.weighted_f1 /= weighted_support;
    }
    return rep;
}

nlohmann::json report_to_json(const ClassificationReport& report) {
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& m : report.per_class) {
        per_class.push_back({{"class", m.name},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"support", m.support},
                             {"precision_degenerate", m.precision_degenerate},
                             {"recall_degenerate", m.recall_degenerate}});
    }
    return {{"accuracy", report.accuracy},
            {"total", report.total},
            {"per_class", per_class},
            {"confusion", report.confusion},
            {"macro", {{"precision", report.macro_precision},
                       {"recall", report.macro_recall},
                       {"f1", report.macro_f1}}},
            {"weighted", {{"precision", report.weighted_precision},
                          {"recall", report.weighted_recall},
                          {"f1", report.weighted_f1}}}};
}

std::string report_to_text(const ClassificationReport& report) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << std::left << std::setw(14) << "class" << std::right << std::setw(11) << "precision"
        << std::setw(9) << "recall" << std::setw(9) << "f1" << std::setw(9) << "support"
        << '\n';
    for (const auto& m : report.per_class) {
        out << std::left << std::setw(14) << m.name << std::right << std::setw(11) << m.precision
            << std::setw(9) << m.recall << std::setw(9) << m.f1 << std::setw(9) << m.support;
        if (m.precision_degenerate || m.recall_degenerate) out << "  (degenerate)";
        out << '\n';
    }
    out << std::left << std::setw(14) << "macro" << std::right << std::setw(11)
        << report.macro_precision << std::setw(9) << report.macro_recall << std::setw(9)
        << report.macro_f1 << std::setw(9) << report.total << '\n';
    out << std::left << std::setw(14) << "weighted" << std::right << std::setw(11)
        << report.weighted_precision << std::setw(9) << report.weighted_recall << std::setw(9)
        << report.weighted_f1 << std::setw(9) << report.total << '\n';
    out << "accuracy " << report.accuracy << " over " << report.total << " instances\n";
    return out.str();
}

CostEstimate cost_estimate(ReducerKind method, const CostInputs& in) {
    if (in.layer_count != in.encoder_layers + in.decoder_layers) {
        throw ConfigError("cost_estimate: layer_count c=" + std::to_string(in.layer_count) +
                          " != a + b = " +
                          std::to_string(in.encoder_layers + in.decoder_layers));
    }
    CostEstimate est;
    switch (method) {
        case ReducerKind::ae_encoder:
            est.reducer_cost = in.layer_count * in.d_in * in.d_out;
            break;
        case ReducerKind::vae_encoder:
            est.reducer_cost = in.layer_count * in.d_in * in.d_out + 1;  // + sampling step
            break;
        case ReducerKind::pca:
            est.reducer_cost = in.n_instances * in.dim * in.components;
            break;
    }
    est.graph_cost = in.n_instances * in.dim * in.dim + in.edges * in.dim;
    est.gat_cost = in.gat_layers * (in.n_instances * in.dim * in.head_dim +
                                    in.heads * in.edges * in.head_dim);
    est.total = est.reducer_cost + est.graph_cost + est.gat_cost;
    return est;
}

nlohmann::json cost_to_json(const CostInputs& inputs) {
    nlohmann::json methods;
    for (const auto kind :
         {ReducerKind::ae_encoder, ReducerKind::vae_encoder, ReducerKind::pca}) {
        const CostEstimate est = cost_estimate(kind, inputs);
        methods[reducer_name(kind)] = {{"reducer_cost", est.reducer_cost},
                                       {"graph_cost", est.graph_cost},
                                       {"gat_cost", est.gat_cost},
                                       {"total", est.total}};
    }
    return {{"inputs",
             {{"N", inputs.n_instances},
              {"D", inputs.dim},
              {"E", inputs.edges},
              {"C", inputs.components},
              {"K", inputs.head_dim},
              {"H", inputs.heads},
              {"n", inputs.gat_layers},
              {"a", inputs.encoder_layers},
              {"b", inputs.decoder_layers},
              {"c", inputs.layer_count},
              {"d_in", inputs.d_in},
              {"d_out", inputs.d_out}}},
            {"methods", methods}};
}

std::string cost_table_text(const CostInputs& inputs) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "method" << std::right << std::setw(16) << "reducer"
        << std::setw(16) << "graph" << std::setw(16) << "gat" << std::setw(16) << "total"
        << '\n';
    for (const auto kind :
         {ReducerKind::ae_encoder, ReducerKind::vae_encoder, ReducerKind::pca}) {
        const CostEstimate est = cost_estimate(kind, inputs);
        out << std::left << std::setw(10) << reducer_name(kind) << std::right << std::setw(16)
            << est.reducer_cost << std::setw(16) << est.graph_cost << std::setw(16)
            << est.gat_cost << std::setw(16) << est.total << '\n';
    }
    return out.str();
}

std::string grid_key_str(const GridKey& key) {
    return std::string(reducer_name(key.reducer)) + "/" + std::to_string(key.k) + "/" +
           metric_name(key.metric);
}

std::vector<GridKey> full_grid() {
    std::vector<GridKey> keys;
    for (const auto reducer :
         {ReducerKind::ae_encoder, ReducerKind::vae_encoder, ReducerKind::pca}) {
        for (const std::size_t k : {std::size_t{3}, std::size_t{5}}) {
            for (const auto metric : {Metric::euclidean, Metric::cosine}) {
                keys.push_back({reducer, k, metric});
            }
        }
    }
    return keys;
}

GridSummary grid_report(const std::vector<GridCell>& cells) {
    const std::vector<GridKey> wanted = full_grid();
    GridSummary summary;
    std::vector<std::string> missing;
    for (const auto& key : wanted) {
        const auto hit = std::find_if(cells.begin(), cells.end(),
                                      [&](const GridCell& c) { return c.key == key; });
        if (hit == cells.end()) {
            missing.push_back(grid_key_str(key));
            continue;
        }
        if (std::count_if(cells.begin(), cells.end(),
                          [&](const GridCell& c) { return c.key == key; }) > 1) {
            throw ConfigError("grid_report: duplicate cell " + grid_key_str(key));
        }
        summary.cells.push_back(*hit);
    }
    if (!missing.empty()) {
        std::string msg = "grid_report: missing cells:";
        for (const auto& m : missing) msg += " " + m;
        throw ConfigError(msg);
    }
    if (cells.size() != wanted.size()) {
        throw ConfigError("grid_report: " + std::to_string(cells.size()) +
                          " cells given, expected " + std::to_string(wanted.size()));
    }

    double eu_sum = 0.0, cos_sum = 0.0;
    std::size_t eu_n = 0, cos_n = 0;
    bool first = true;
    for (const auto& cell : summary.cells) {
        if (cell.key.metric == Metric::euclidean) {
            eu_sum += cell.report.accuracy;
            ++eu_n;
        } else {
            cos_sum += cell.report.accuracy;
            ++cos_n;
        }
        if (first || cell.report.accuracy > summary.best_accuracy) {
            summary.best = cell.key;
            summary.best_accuracy = cell.report.accuracy;
            first = false;
        }
    }
    summary.mean_euclidean_accuracy = eu_sum / static_cast<double>(eu_n);
    summary.mean_cosine_accuracy = cos_sum / static_cast<double>(cos_n);
    std::ostringstream obs;
    obs << std::fixed << std::setprecision(4) << "mean accuracy euclidean "
        << summary.mean_euclidean_accuracy << " vs cosine " << summary.mean_cosine_accuracy
        << (summary.mean_euclidean_accuracy >= summary.mean_cosine_accuracy
                ? " (euclidean ahead on this corpus)"
                : " (cosine ahead on this corpus)");
    summary.observation = obs.str();
    return summary;
}

std::string grid_to_csv(const GridSummary& summary) {
    std::ostringstream out;
    out << "reducer,k,metric,accuracy";
    if (!summary.cells.empty()) {
        for (const auto& m : summary.cells.front().report.per_class) {
            out << ",f1_" << csv_column(m.name);
        }
    }
    out << '\n' << std::setprecision(17);
    for (const auto& cell : summary.cells) {
        out << reducer_name(cell.key.reducer) << ',' << cell.key.k << ','
            << metric_name(cell.key.metric) << ',' << cell.report.accuracy;
        for (const auto& m : cell.report.per_class) out << ',' << m.f1;
        out << '\n';
    }
    return out.str();
}

nlohmann::json grid_to_json(const GridSummary& summary) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& cell : summary.cells) {
        cells.push_back({{"reducer", reducer_name(cell.key.reducer)},
                         {"k", cell.key.k},
                         {"metric", metric_name(cell.key.metric)},
                         {"report", report_to_json(cell.report)}});
    }
    return {{"cells", cells},
            {"best",
             {{"reducer", reducer_name(summary.best.reducer)},
              {"k", summary.best.k},
              {"metric", metric_name(summary.best.metric)},
              {"accuracy", summary.best_accuracy}}},
            {"mean_euclidean_accuracy", summary.mean_euclidean_accuracy},
            {"mean_cosine_accuracy", summary.mean_cosine_accuracy},
            {"observation", summary.observation}};
}

std::string grid_to_text(const GridSummary& summary) {
    std::ostringstream out;
    out << std::left << std::setw(9) << "reducer" << std::setw(4) << "k" << std::setw(11)
        << "metric" << std::right << std::setw(10) << "accuracy" << std::setw(12) << "macro_f1"
        << '\n';
    out << std::fixed << std::setprecision(4);
    for (const auto& cell : summary.cells) {
        out << std::left << std::setw(9) << reducer_name(cell.key.reducer) << std::setw(4)
            << cell.key.k << std::setw(11) << metric_name(cell.key.metric) << std::right
            << std::setw(10) << cell.report.accuracy << std::setw(12) << cell.report.macro_f1;
        if (cell.key == summary.best) out << "  <- best";
        out << '\n';
    }
    out << summary.observation << '\n';
    return out.str();
}

}  // namespace flowgat
