#include "mfpg/rng.hpp"

#include <cassert>
#include <cmath>

namespace mfpg::rng {

namespace {

constexpr uint32_t kMul0 = 0xD2511F53u;
constexpr uint32_t kMul1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    const uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}

inline double u53_closed_open(uint32_t hi, uint32_t lo) {
    const uint64_t v = (static_cast<uint64_t>(hi) << 32) | lo;
    return static_cast<double>(v >> 11) * 0x1.0p-53;
}

}  // namespace

std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 4>& counter,
                                   const std::array<uint32_t, 2>& key) {
    uint32_t x0 = counter[0], x1 = counter[1], x2 = counter[2], x3 = counter[3];
    uint32_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
        uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, x0, hi0, lo0);
        mulhilo(kMul1, x2, hi1, lo1);
        const uint32_t y0 = hi1 ^ x1 ^ k0;
        const uint32_t y1 = lo1;
        const uint32_t y2 = hi0 ^ x3 ^ k1;
        const uint32_t y3 = lo0;
        x0 = y0; x1 = y1; x2 = y2; x3 = y3;
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return {x0, x1, x2, x3};
}

std::array<double, 2> NoiseStream::pair(uint32_t particle, uint32_t step,
                                        Channel ch, uint32_t block) const {
    assert(step < (1u << 24) && block < 16u);
    const std::array<uint32_t, 4> ctr = {
        static_cast<uint32_t>(episode_),
        static_cast<uint32_t>(episode_ >> 32),
        particle,
        (step << 8) | (static_cast<uint32_t>(ch) << 4) | block,
    };
    const auto w = philox4x32(ctr, key_);
    const double u1 =
        u53_closed_open(w[0], w[1]) + 0x1.0p-54;  // (0,1], safe for log
    const double u2 = u53_closed_open(w[2], w[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

double NoiseStream::gaussian(uint32_t particle, uint32_t step, Channel ch,
                             uint32_t index) const {
    const auto z = pair(particle, step, ch, index / 2);
    return z[index % 2];
}

void NoiseStream::fill_gaussian(uint32_t particle, uint32_t step, Channel ch,
                                double* out, Index len) const {
    for (Index i = 0; i < len; i += 2) {
        const auto z = pair(particle, step, ch, static_cast<uint32_t>(i / 2));
        out[i] = z[0];
        if (i + 1 < len) out[i + 1] = z[1];
    }
}

Vector NoiseStream::gaussian_vector(uint32_t particle, uint32_t step,
                                    Channel ch, Index len) const {
    Vector v(len);
    fill_gaussian(particle, step, ch, v.data(), len);
    return v;
}

}  // namespace mfpg::rng
