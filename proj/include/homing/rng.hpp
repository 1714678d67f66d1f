#pragma once

#include <cmath>
#include <cstdint>

namespace homing {

namespace detail {

/// Philox4x32-10 counter-based block cipher (Salmon et al. reference
/// constants). Each (key, counter) pair maps to four independent 32-bit
/// words, so per-path streams never overlap by construction.
struct Philox4x32 {
    static constexpr std::uint32_t kMult0 = 0xD2511F53u;
    static constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static void round(std::uint32_t ctr[4], std::uint32_t k0, std::uint32_t k1) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        const std::uint32_t c1 = ctr[1];
        const std::uint32_t c3 = ctr[3];
        ctr[0] = hi1 ^ c1 ^ k0;
        ctr[1] = lo1;
        ctr[2] = hi0 ^ c3 ^ k1;
        ctr[3] = lo0;
    }

    static void block(std::uint64_t key, std::uint64_t counter_hi, std::uint64_t counter_lo,
                      std::uint32_t out[4]) {
        std::uint32_t k0 = static_cast<std::uint32_t>(key);
        std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
        out[0] = static_cast<std::uint32_t>(counter_lo);
        out[1] = static_cast<std::uint32_t>(counter_lo >> 32);
        out[2] = static_cast<std::uint32_t>(counter_hi);
        out[3] = static_cast<std::uint32_t>(counter_hi >> 32);
        for (int r = 0; r < 10; ++r) {
            round(out, k0, k1);
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
    }
};

} // namespace detail

/// Stream of standard normal deviates for one Monte Carlo path,
/// fully determined by (base_seed, path_index): serial and parallel
/// executions draw bit-identical noise. One Philox block yields two
/// uniforms, turned into a Box-Muller pair.
class NormalStream {
public:
    NormalStream(std::uint64_t base_seed, std::uint64_t path_index)
        : key_(base_seed), path_(path_index) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        std::uint32_t w[4];
        detail::Philox4x32::block(key_, path_, block_++, w);
        const std::uint64_t a = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
        const std::uint64_t b = (static_cast<std::uint64_t>(w[2]) << 32) | w[3];
        // u1 in (0, 1] keeps the logarithm finite; u2 in [0, 1).
        const double u1 = static_cast<double>((a >> 11) + 1) * 0x1.0p-53;
        const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t key_;
    std::uint64_t path_;
    std::uint64_t block_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace homing
