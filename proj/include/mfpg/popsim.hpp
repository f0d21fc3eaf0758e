#pragma once

#include "mfpg/model.hpp"
#include "mfpg/rng.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mfpg::popsim {

enum class EntropyMode { sampled, analytic };

struct SimConfig {
    double T = 1.0;        // horizon
    int n = 100;           // steps, h = T/n
    int N = 100;           // particles
    double lambda = 0.0;   // entropy temperature used in execution
    uint64_t seed = 0;     // master seed
    EntropyMode entropy_mode = EntropyMode::sampled;
    double overflow_limit = 1e12;
    bool keep_trajectory = false;

    double h() const { return T / n; }
};

/// Raised when a particle state exceeds the overflow guard (unstable Theta).
struct OverflowError : std::runtime_error {
    int step;
    uint64_t episode;
    OverflowError(int step_, uint64_t episode_)
        : std::runtime_error("popsim.run_episode: state overflow at step " +
                             std::to_string(step_) + " (episode " +
                             std::to_string(episode_) + ")"),
          step(step_),
          episode(episode_) {}
};

/// Per-step record of the empirical mean, the averaged noises feeding the
/// mean recursion, and cross-sectional second moments.
struct TrajectorySummary {
    std::vector<Vector> mu;      // length n+1, mu at t_0..t_n
    std::vector<Vector> xi_bar;  // length n
    std::vector<Vector> w_bar;   // length n
    std::vector<Vector> w0;      // length n
    std::vector<Matrix> second_moment;  // length n, (1/N) sum_j X_j X_j^T
};

struct EpisodeResult {
    double j_pop = 0.0;
    std::optional<TrajectorySummary> trajectory;
};

/// Entropy term lambda * E[log p] of the Gaussian policy; equals
/// beta*upsilon(lambda) - lambda*m/2, and 0 in the lambda -> 0 limit.
double entropy_constant(double lambda, const Matrix& R);

/// Euler scheme for the N-particle system over the uniform grid, left-endpoint
/// discounted Riemann cost. Particle updates may run in parallel; the
/// empirical mean and all cost reductions are fixed-order, so the result is
/// bit-identical for any thread count.
EpisodeResult run_episode(const PolicyParams& th, const ModelParams& p,
                          const SimConfig& c, const rng::NoiseStream& stream);

/// Plain-loop reference used by the tests to pin down the parallel kernel.
/// `stream_permutation`, when given, maps particle j to noise sub-stream
/// stream_permutation[j] (exchangeability checks).
EpisodeResult run_episode_serial(
    const PolicyParams& th, const ModelParams& p, const SimConfig& c,
    const rng::NoiseStream& stream,
    const std::vector<uint32_t>* stream_permutation = nullptr);

/// Replays the empirical-mean recursion
///   mu_{l+1} = mu_l + ((Bhat + D zeta) mu_l + D S xi_bar_l) h
///              + sqrt(h) gamma w_bar_l + sqrt(h) gamma0 w0_l
/// from the stored averaged noises and returns max_l |replayed - stored|.
double aggregate_mean_identity(const TrajectorySummary& traj,
                               const PolicyParams& th, const ModelParams& p,
                               const SimConfig& c);

}  // namespace mfpg::popsim
