#pragma once

#include <cstddef>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace flowgat::kernels {

// Execution mode for the data-parallel kernels. Both modes produce
// bit-identical output: parallel variants partition work by output element and
// keep the per-element accumulation order of the serial reference, so results
// never depend on the thread count or schedule.
enum class ExecMode { serial, parallel };

ExecMode exec_mode();
void set_exec_mode(ExecMode mode);
int thread_count();

// Serial reference implementations, kept as the comparison baseline for tests
// and the benchmark harness.
namespace serial {
// C[m x n] = A[m x p] * B[p x n]
void matmul_nn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate = false);
// C[m x n] = A^T * B with A[p x m], B[p x n]
void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate = false);
// C[m x n] = A * B^T with A[m x p], B[n x p]
void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate = false);
}  // namespace serial

namespace parallel {
void matmul_nn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate = false);
void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate = false);
void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate = false);
}  // namespace parallel

// Mode-dispatching entry points used by the rest of the library.
void matmul_nn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate = false);
void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate = false);
void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t p, std::size_t n, bool accumulate = false);

// Runs f(i) for i in [0, n). Parallel mode splits the index range across
// threads; f must only write state owned by index i.
template <typename F>
void for_each_index(std::size_t n, F&& f) {
#ifdef _OPENMP
    if (exec_mode() == ExecMode::parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            f(static_cast<std::size_t>(i));
        }
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) {
        f(i);
    }
}

}  // namespace flowgat::kernels
