#include "flowgat/kernels.hpp"

#include <algorithm>
#include <atomic>

namespace flowgat::kernels {

namespace {
std::atomic<ExecMode> g_mode{ExecMode::parallel};
}

ExecMode exec_mode() { return g_mode.load(std::memory_order_relaxed); }

void set_exec_mode(ExecMode mode) { g_mode.store(mode, std::memory_order_relaxed); }

int thread_count() {
#ifdef _OPENMP
    return exec_mode() == ExecMode::parallel ? omp_get_max_threads() : 1;
#else
    return 1;
#endif
}

// The three GEMM variants all accumulate each output element in a fixed k
// order; the parallel versions share the loop body and only split the i range.

namespace serial {

void matmul_nn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        if (!accumulate) {
            std::fill(crow, crow + n, 0.0);
        }
        const double* arow = a + i * p;
        for (std::size_t k = 0; k < p; ++k) {
            const double aik = arow[k];
            const double* brow = b + k * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += aik * brow[j];
            }
        }
    }
}

void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        if (!accumulate) {
            std::fill(crow, crow + n, 0.0);
        }
        for (std::size_t k = 0; k < p; ++k) {
            const double aki = a[k * m + i];
            const double* brow = b + k * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += aki * brow[j];
            }
        }
    }
}

void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * p;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b + j * p;
            double sum = 0.0;
            for (std::size_t k = 0; k < p; ++k) {
                sum += arow[k] * brow[k];
            }
            crow[j] = accumulate ? crow[j] + sum : sum;
        }
    }
}

}  // namespace serial

namespace parallel {

void matmul_nn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(m); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double* crow = c + i * n;
        if (!accumulate) {
            std::fill(crow, crow + n, 0.0);
        }
        const double* arow = a + i * p;
        for (std::size_t k = 0; k < p; ++k) {
            const double aik = arow[k];
            const double* brow = b + k * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += aik * brow[j];
            }
        }
    }
}

void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(m); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double* crow = c + i * n;
        if (!accumulate) {
            std::fill(crow, crow + n, 0.0);
        }
        for (std::size_t k = 0; k < p; ++k) {
            const double aki = a[k * m + i];
            const double* brow = b + k * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += aki * brow[j];
            }
        }
    }
}

void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(m); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double* arow = a + i * p;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b + j * p;
            double sum = 0.0;
            for (std::size_t k = 0; k < p; ++k) {
                sum += arow[k] * brow[k];
            }
            crow[j] = accumulate ? crow[j] + sum : sum;
        }
    }
}

}  // namespace parallel

void matmul_nn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate) {
    if (exec_mode() == ExecMode::parallel) {
        parallel::matmul_nn(a, b, c, m, p, n, accumulate);
    } else {
        serial::matmul_nn(a, b, c, m, p, n, accumulate);
    }
}

void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate) {
    if (exec_mode() == ExecMode::parallel) {
        parallel::matmul_tn(a, b, c, m, p, n, accumulate);
    } else {
        serial::matmul_tn(a, b, c, m, p, n, accumulate);
    }
}

void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate) {
    if (exec_mode() == ExecMode::parallel) {
        parallel::matmul_nt(a, b, c, m, p, n, accumulate);
    } else {
        serial::matmul_nt(a, b, c, m, p, n, accumulate);
    }
}

}  // namespace flowgat::kernels
