// Timings for the OpenMP kernels against their serial references: the naive
// direct-definition implementations at small sizes, and the optimized kernels
// at 1 vs N threads at working sizes. Run: segunc_bench [threads]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "segunc/geometry.hpp"
#include "segunc/parallel.hpp"
#include "segunc/phantom.hpp"
#include "segunc/reference.hpp"

using namespace segunc;

namespace {

template <typename Fn>
double time_best_of(int repeats, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

BinaryGrid ellipsoid_surface(int n, std::uint64_t seed) {
    PhantomConfig cfg;
    cfg.dims = {n, n, n};
    cfg.semi_axis_min = 0.22 * n;
    cfg.semi_axis_max = 0.30 * n;
    cfg.center_jitter = 0.05 * n;
    cfg.perturbation_amplitude = 0.04 * n;
    cfg.seed = seed;
    const PhantomCase c = make_phantom(cfg, 0);
    std::vector<std::uint8_t> mask(c.gt.size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = c.gt.values()[i] ? 1 : 0;
    return surface(BinaryGrid(c.gt.meta(), std::move(mask)));
}

void set_threads(int n) {
    static std::string env;
    env = "SEGUNC_THREADS=" + std::to_string(n);
    putenv(env.data());
}

}  // namespace

int main(int argc, char** argv) {
    const int max_threads = argc > 1 ? std::atoi(argv[1]) : worker_count();
    std::printf("kernel benchmark (max threads %d)\n\n", max_threads);

    {
        const int n = 24;
        const BinaryGrid surf = ellipsoid_surface(n, 11);
        set_threads(max_threads);
        const double naive =
            time_best_of(3, [&] { (void)reference::distance_field_bruteforce(surf); });
        const double fast = time_best_of(5, [&] { (void)distance_field(surf); });
        std::printf("distance field %d^3: naive %.4fs  separable %.6fs  (x%.0f)\n", n, naive, fast,
                    naive / fast);
    }
    {
        const int n = 128;
        const BinaryGrid surf = ellipsoid_surface(n, 12);
        set_threads(1);
        const double serial = time_best_of(5, [&] { (void)distance_field(surf); });
        set_threads(max_threads);
        const double parallel = time_best_of(5, [&] { (void)distance_field(surf); });
        std::printf("distance field %d^3: 1 thread %.4fs  %d threads %.4fs  (x%.2f)\n", n, serial,
                    max_threads, parallel, serial / parallel);
    }
    {
        const int n = 32;
        SplitMix64 rng(13);
        std::vector<float> v(static_cast<std::size_t>(n) * n * n);
        for (auto& x : v) x = static_cast<float>(rng.next_unit());
        const ScalarGrid grid(GridMeta{{n, n, n}, {1, 1, 1}}, std::move(v));
        SmoothingSpec spec;
        spec.sigma = 2.0;
        set_threads(max_threads);
        const double naive = time_best_of(3, [&] { (void)reference::gaussian_smooth_dense(grid, spec); });
        const double fast = time_best_of(5, [&] { (void)gaussian_smooth(grid, spec); });
        std::printf("gaussian smooth %d^3 (sigma 2): dense %.4fs  separable %.6fs  (x%.0f)\n", n,
                    naive, fast, naive / fast);
    }
    {
        const int n = 128;
        SplitMix64 rng(14);
        std::vector<float> v(static_cast<std::size_t>(n) * n * n);
        for (auto& x : v) x = static_cast<float>(rng.next_unit());
        const ScalarGrid grid(GridMeta{{n, n, n}, {1, 1, 1}}, std::move(v));
        SmoothingSpec spec;
        spec.sigma = 2.0;
        set_threads(1);
        const double serial = time_best_of(5, [&] { (void)gaussian_smooth(grid, spec); });
        set_threads(max_threads);
        const double parallel = time_best_of(5, [&] { (void)gaussian_smooth(grid, spec); });
        std::printf("gaussian smooth %d^3 (sigma 2): 1 thread %.4fs  %d threads %.4fs  (x%.2f)\n",
                    n, serial, max_threads, parallel, serial / parallel);
    }
    return 0;
}
