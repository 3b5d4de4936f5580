// Compares the OpenMP matrix kernels against the serial reference at the
// shapes the training loop actually hits, and verifies both agree bitwise.
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "svqvae/kernels.hpp"
#include "svqvae/rng.hpp"

using svqvae::Matrix;
using svqvae::Rng;

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = 2.0 * rng.next_double() - 1.0;
    return m;
}

template <typename F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (dt < best) best = dt;
    }
    return best;
}

void bench_case(const char* name, std::size_t m, std::size_t k, std::size_t n, int reps) {
    Rng rng(7);
    const Matrix a = random_matrix(rng, m, k);
    const Matrix b = random_matrix(rng, k, n);

    Matrix out_serial, out_parallel;
    const double t_serial =
        time_best_of(reps, [&] { out_serial = svqvae::kernels::serial::matmul(a, b); });
    const double t_parallel =
        time_best_of(reps, [&] { out_parallel = svqvae::kernels::matmul(a, b); });

    const bool exact = svqvae::bitwise_equal(out_serial, out_parallel);
    const double gflops = 2.0 * double(m) * double(k) * double(n) / 1e9;
    std::printf("%-22s %4zux%-4zu * %4zux%-4zu  serial %8.2f ms (%6.2f GF/s)  omp %8.2f ms (%6.2f GF/s)  speedup %5.2fx  bitwise %s\n",
                name, m, k, k, n, t_serial * 1e3, gflops / t_serial, t_parallel * 1e3,
                gflops / t_parallel, t_serial / t_parallel, exact ? "equal" : "DIFFER");
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled; parallel kernels run serially\n");
#endif
    bench_case("mnist encoder fwd", 256, 784, 256, 5);
    bench_case("mnist decoder fwd", 256, 256, 784, 5);
    bench_case("mnist weight grad", 784, 256, 256, 5);
    bench_case("dense preset fwd", 128, 978, 1000, 5);
    bench_case("square 512", 512, 512, 512, 3);
    return 0;
}
