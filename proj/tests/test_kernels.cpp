#include <doctest.h>

#include <cstring>
#include <vector>

#include "flowgat/kernels.hpp"
#include "flowgat/rng.hpp"

using namespace flowgat;

namespace {

std::vector<double> random_buf(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

// Textbook triple loop, written independently of the library kernels.
void naive_nn(const double* a, const double* b, double* c,
              std::size_t m, std::size_t p, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t l = 0; l < p; ++l) acc += a[i * p + l] * b[l * n + j];
            c[i * n + j] = acc;
        }
}

struct ModeGuard {
    kernels::ExecMode saved = kernels::exec_mode();
    ~ModeGuard() { kernels::set_exec_mode(saved); }
};

}  // namespace

TEST_CASE("matmul_nn matches a naive reference") {
    const std::size_t m = 7, p = 5, n = 9;
    auto a = random_buf(m * p, 1);
    auto b = random_buf(p * n, 2);
    std::vector<double> got(m * n, 0.0), want(m * n, 0.0);
    kernels::serial::matmul_nn(a.data(), b.data(), got.data(), m, p, n);
    naive_nn(a.data(), b.data(), want.data(), m, p, n);
    for (std::size_t i = 0; i < m * n; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("matmul_tn and matmul_nt agree with explicit transposes") {
    const std::size_t m = 6, p = 4, n = 8;
    // tn: C = A^T B with A[p x m]
    auto a = random_buf(p * m, 3);
    auto b = random_buf(p * n, 4);
    std::vector<double> at(m * p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < m; ++j) at[j * p + i] = a[i * m + j];
    std::vector<double> got(m * n, 0.0), want(m * n, 0.0);
    kernels::serial::matmul_tn(a.data(), b.data(), got.data(), m, p, n);
    naive_nn(at.data(), b.data(), want.data(), m, p, n);
    for (std::size_t i = 0; i < m * n; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));

    // nt: C = A B^T with B[n x p]
    auto a2 = random_buf(m * p, 5);
    auto b2 = random_buf(n * p, 6);
    std::vector<double> b2t(p * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) b2t[j * n + i] = b2[i * p + j];
    std::vector<double> got2(m * n, 0.0), want2(m * n, 0.0);
    kernels::serial::matmul_nt(a2.data(), b2.data(), got2.data(), m, p, n);
    naive_nn(a2.data(), b2t.data(), want2.data(), m, p, n);
    for (std::size_t i = 0; i < m * n; ++i) CHECK(got2[i] == doctest::Approx(want2[i]).epsilon(1e-12));
}

TEST_CASE("accumulate flag adds on top of existing output") {
    const std::size_t m = 3, p = 4, n = 2;
    auto a = random_buf(m * p, 7);
    auto b = random_buf(p * n, 8);
    std::vector<double> base(m * n, 1.5);
    std::vector<double> fresh(m * n, 0.0);
    kernels::serial::matmul_nn(a.data(), b.data(), fresh.data(), m, p, n);
    kernels::serial::matmul_nn(a.data(), b.data(), base.data(), m, p, n, /*accumulate=*/true);
    for (std::size_t i = 0; i < m * n; ++i) CHECK(base[i] == doctest::Approx(1.5 + fresh[i]).epsilon(1e-12));
}

TEST_CASE("parallel matmuls are bit-identical to the serial reference") {
    ModeGuard guard;
    const struct { std::size_t m, p, n; } shapes[] = {
        {1, 1, 1}, {2, 3, 4}, {17, 31, 13}, {64, 48, 80}, {5, 128, 1},
    };
    std::uint64_t seed = 100;
    for (const auto& s : shapes) {
        auto a = random_buf(s.m * s.p, seed++);
        auto b = random_buf(s.p * s.n, seed++);
        auto at = random_buf(s.p * s.m, seed++);
        auto bt = random_buf(s.n * s.p, seed++);
        std::vector<double> cs(s.m * s.n), cp(s.m * s.n);

        kernels::serial::matmul_nn(a.data(), b.data(), cs.data(), s.m, s.p, s.n);
        kernels::parallel::matmul_nn(a.data(), b.data(), cp.data(), s.m, s.p, s.n);
        CHECK(std::memcmp(cs.data(), cp.data(), cs.size() * sizeof(double)) == 0);

        kernels::serial::matmul_tn(at.data(), b.data(), cs.data(), s.m, s.p, s.n);
        kernels::parallel::matmul_tn(at.data(), b.data(), cp.data(), s.m, s.p, s.n);
        CHECK(std::memcmp(cs.data(), cp.data(), cs.size() * sizeof(double)) == 0);

        kernels::serial::matmul_nt(a.data(), bt.data(), cs.data(), s.m, s.p, s.n);
        kernels::parallel::matmul_nt(a.data(), bt.data(), cp.data(), s.m, s.p, s.n);
        CHECK(std::memcmp(cs.data(), cp.data(), cs.size() * sizeof(double)) == 0);
    }
}

TEST_CASE("dispatching entry points follow the exec mode") {
    ModeGuard guard;
    const std::size_t m = 4, p = 6, n = 5;
    auto a = random_buf(m * p, 40);
    auto b = random_buf(p * n, 41);
    std::vector<double> want(m * n), got(m * n);
    kernels::serial::matmul_nn(a.data(), b.data(), want.data(), m, p, n);

    kernels::set_exec_mode(kernels::ExecMode::serial);
    CHECK(kernels::exec_mode() == kernels::ExecMode::serial);
    kernels::matmul_nn(a.data(), b.data(), got.data(), m, p, n);
    CHECK(std::memcmp(want.data(), got.data(), got.size() * sizeof(double)) == 0);

    kernels::set_exec_mode(kernels::ExecMode::parallel);
    CHECK(kernels::exec_mode() == kernels::ExecMode::parallel);
    kernels::matmul_nn(a.data(), b.data(), got.data(), m, p, n);
    CHECK(std::memcmp(want.data(), got.data(), got.size() * sizeof(double)) == 0);
}

TEST_CASE("for_each_index touches every index exactly once in both modes") {
    ModeGuard guard;
    for (auto mode : {kernels::ExecMode::serial, kernels::ExecMode::parallel}) {
        kernels::set_exec_mode(mode);
        const std::size_t n = 1013;
        std::vector<int> hits(n, 0);
        kernels::for_each_index(n, [&](std::size_t i) { hits[i] += 1; });
        for (std::size_t i = 0; i < n; ++i) CHECK(hits[i] == 1);
        // zero-length range is a no-op
        kernels::for_each_index(0, [&](std::size_t) { CHECK(false); });
    }
}

TEST_CASE("thread_count reports at least one thread") {
    CHECK(kernels::thread_count() >= 1);
}
