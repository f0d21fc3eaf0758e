// Throughput comparison of the serial reference episode kernel against the
// OpenMP kernel, with a bit-equality check between the two.
//
//   usage: bench_episode [episodes] [N] [n]

#include "mfpg/popsim.hpp"
#include "mfpg/model.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>

#if defined(_OPENMP)
#include <omp.h>
#endif

using namespace mfpg;

namespace {

double run_batch(bool parallel, const PolicyParams& th, const ModelParams& p,
                 const popsim::SimConfig& c, int episodes, double& checksum) {
    const auto start = std::chrono::steady_clock::now();
    checksum = 0.0;
    for (int e = 0; e < episodes; ++e) {
        const rng::NoiseStream stream(c.seed, static_cast<uint64_t>(e));
        checksum += parallel
                        ? popsim::run_episode(th, p, c, stream).j_pop
                        : popsim::run_episode_serial(th, p, c, stream).j_pop;
    }
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
}

}  // namespace

int main(int argc, char** argv) {
    const int episodes = argc > 1 ? std::atoi(argv[1]) : 200;
    const int particles = argc > 2 ? std::atoi(argv[2]) : 1000;
    const int steps = argc > 3 ? std::atoi(argv[3]) : 100;

    const ModelParams p = table1_params();
    PolicyParams th{(Matrix(1, 1) << -2.0).finished(),
                    (Matrix(1, 1) << -2.0).finished()};
    popsim::SimConfig c;
    c.T = 1.0;
    c.n = steps;
    c.N = particles;
    c.lambda = p.lambda;
    c.seed = 1;

#if defined(_OPENMP)
    std::cout << "threads: " << omp_get_max_threads() << "\n";
#else
    std::cout << "threads: 1 (OpenMP disabled)\n";
#endif
    std::cout << "episodes: " << episodes << ", N: " << particles
              << ", n: " << steps << "\n";

    double serial_sum = 0.0, parallel_sum = 0.0;
    const double t_serial = run_batch(false, th, p, c, episodes, serial_sum);
    const double t_parallel = run_batch(true, th, p, c, episodes, parallel_sum);

    const double steps_total =
        static_cast<double>(episodes) * particles * steps;
    std::cout << "serial reference: " << t_serial << " s ("
              << steps_total / t_serial / 1e6 << " M particle-steps/s)\n";
    std::cout << "openmp kernel:    " << t_parallel << " s ("
              << steps_total / t_parallel / 1e6 << " M particle-steps/s)\n";
    std::cout << "speedup: " << t_serial / t_parallel << "x\n";

    if (serial_sum != parallel_sum) {
        std::cout << "MISMATCH: serial and parallel kernels disagree ("
                  << serial_sum << " vs " << parallel_sum << ")\n";
        return 1;
    }
    std::cout << "kernels agree bit-exactly (checksum " << serial_sum << ")\n";
    return 0;
}
