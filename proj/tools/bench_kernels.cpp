// Times the serial reference kernels against the OpenMP variants and checks
// they agree bit for bit. Sizes roughly match the desk-scale pipeline.

#include <chrono>
#include <cstring>
#include <iomanip>
#include <iostream>
#include <vector>

#include "flowgat/gat.hpp"
#include "flowgat/kernels.hpp"
#include "flowgat/knn_graph.hpp"
#include "flowgat/matrix.hpp"
#include "flowgat/ops.hpp"
#include "flowgat/rng.hpp"

using namespace flowgat;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename F>
double timed(F&& fn, int reps) {
    const auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) fn();
    return seconds_since(t0) / reps;
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
    std::cout << std::left << std::setw(24) << name << std::right << std::fixed
              << std::setprecision(4) << std::setw(10) << serial_s * 1e3 << " ms"
              << std::setw(10) << parallel_s * 1e3 << " ms   speedup " << std::setprecision(2)
              << serial_s / parallel_s << "x   " << (identical ? "bit-identical" : "MISMATCH!")
              << '\n';
}

}  // namespace

int main() {
    std::cout << "threads available: " << kernels::thread_count() << "\n\n";
    Rng rng(7);

    {
        const std::size_t m = 512, p = 256, n = 512;
        std::vector<double> a(m * p), b(p * n), c_serial(m * n), c_parallel(m * n);
        for (auto& v : a) v = rng.normal();
        for (auto& v : b) v = rng.normal();
        const double ts = timed(
            [&] { kernels::serial::matmul_nn(a.data(), b.data(), c_serial.data(), m, p, n); }, 5);
        const double tp = timed(
            [&] { kernels::parallel::matmul_nn(a.data(), b.data(), c_parallel.data(), m, p, n); },
            5);
        report("matmul 512x256x512", ts, tp,
               std::memcmp(c_serial.data(), c_parallel.data(), m * n * sizeof(double)) == 0);
    }

    {
        const std::size_t n = 4000, d = 8;
        FeatureMatrix points(n, d);
        for (auto& v : points.data) v = rng.normal();
        kernels::set_exec_mode(kernels::ExecMode::serial);
        KnnGraph g_serial;
        const double ts = timed([&] { g_serial = build_knn_graph(points, 5, Metric::euclidean); }, 3);
        kernels::set_exec_mode(kernels::ExecMode::parallel);
        KnnGraph g_parallel;
        const double tp =
            timed([&] { g_parallel = build_knn_graph(points, 5, Metric::euclidean); }, 3);
        report("knn 4000x8 k=5", ts, tp,
               g_serial.offsets == g_parallel.offsets && g_serial.neighbors == g_parallel.neighbors);
    }

    {
        const std::size_t n = 4000, d = 8;
        FeatureMatrix points(n, d);
        for (auto& v : points.data) v = rng.normal();
        const KnnGraph graph = build_knn_graph(points, 5, Metric::euclidean);
        const AugmentedGraph aug = AugmentedGraph::from(graph);
        Rng init(11);
        const GatLayerParams layer = make_gat_layer(d, 8, 4, 0.2, init, "bench");
        auto x = ad::Tensor::from_data({n, d}, points.data, true);

        auto run = [&] {
            ad::Tape tape;
            auto out = gat_layer_forward(tape, x, aug, layer, HeadCombine::concat);
            auto loss = ad::weighted_sum(tape, out, std::vector<double>(out->size(), 1.0));
            x->zero_grad();
            for (std::size_t h = 0; h < layer.heads(); ++h) {
                layer.weights[h]->zero_grad();
                layer.attn[h]->zero_grad();
            }
            tape.backward(loss);
        };
        kernels::set_exec_mode(kernels::ExecMode::serial);
        const double ts = timed(run, 3);
        std::vector<double> grad_serial = layer.weights[0]->grad;
        kernels::set_exec_mode(kernels::ExecMode::parallel);
        const double tp = timed(run, 3);
        report("gat layer fwd+bwd 4000", ts, tp, grad_serial == layer.weights[0]->grad);
    }

    kernels::set_exec_mode(kernels::ExecMode::parallel);
    return 0;
}
