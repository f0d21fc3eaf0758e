#pragma once

#include <array>
#include <cstdint>

#include "mfpg/linalg.hpp"

namespace mfpg::rng {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11 constants).
/// Stateless: every 128-bit counter + 64-bit key pair maps to four uint32.
std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 4>& counter,
                                   const std::array<uint32_t, 2>& key);

enum class Channel : uint32_t {
    idiosyncratic = 0,
    common = 1,
    action = 2,
    initial = 3,
    sphere_theta = 4,
    sphere_zeta = 5,
};

/// Deterministic Gaussian stream for one episode. Draws are addressed by
/// (particle, step, channel, index) so values never depend on execution
/// order or thread count. Counter layout: {episode_lo, episode_hi, particle,
/// step<<8 | channel<<4 | block}; one Philox block yields a Box-Muller pair.
/// Limits: step < 2^24, index < 32.
class NoiseStream {
public:
    NoiseStream(uint64_t seed, uint64_t episode)
        : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
          episode_(episode) {}

    double gaussian(uint32_t particle, uint32_t step, Channel ch,
                    uint32_t index) const;

    /// Fills out[0..len) with the gaussians of indices 0..len-1.
    void fill_gaussian(uint32_t particle, uint32_t step, Channel ch,
                       double* out, Index len) const;
    Vector gaussian_vector(uint32_t particle, uint32_t step, Channel ch,
                           Index len) const;

    uint64_t episode() const { return episode_; }

private:
    std::array<uint32_t, 2> key_;
    uint64_t episode_;

    std::array<double, 2> pair(uint32_t particle, uint32_t step, Channel ch,
                               uint32_t block) const;
};

}  // namespace mfpg::rng
