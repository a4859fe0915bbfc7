#pragma once

// Counter-based random streams (Philox 4x32, 10 rounds). A stream is
// addressed by (seed, stream id); the stream id occupies the upper half
// of the 128-bit counter, so per-trace streams need no coordination and
// a path is reproducible from (seed, trace index) alone.

#include <cmath>
#include <cstdint>

namespace slereg {

class Philox {
public:
    Philox(std::uint64_t seed, std::uint64_t stream) {
        key_[0] = static_cast<std::uint32_t>(seed);
        key_[1] = static_cast<std::uint32_t>(seed >> 32);
        ctr_[0] = 0;
        ctr_[1] = 0;
        ctr_[2] = static_cast<std::uint32_t>(stream);
        ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
    }

    std::uint32_t next_u32() {
        if (idx_ == 4) {
            generate_block();
            idx_ = 0;
        }
        return block_[idx_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // uniform in (0,1]
    double next_unit() {
        const std::uint64_t bits = next_u64() >> 11;  // 53 bits
        return (static_cast<double>(bits) + 1.0) * 0x1p-53;
    }

    // standard normal via Box-Muller; draws come in deterministic pairs
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925287 * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        return rad * std::cos(ang);
    }

private:
    static void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                          std::uint32_t& hi) {
        const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
        lo = static_cast<std::uint32_t>(prod);
        hi = static_cast<std::uint32_t>(prod >> 32);
    }

    void generate_block() {
        std::uint32_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
        std::uint32_t k0 = key_[0], k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            std::uint32_t lo0, hi0, lo1, hi1;
            mul_hi_lo(0xD2511F53u, c0, lo0, hi0);
            mul_hi_lo(0xCD9E8D57u, c2, lo1, hi1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        block_[0] = c0;
        block_[1] = c1;
        block_[2] = c2;
        block_[3] = c3;
        if (++ctr_[0] == 0) ++ctr_[1];  // stream id in ctr_[2..3] untouched
    }

    std::uint32_t key_[2];
    std::uint32_t ctr_[4];
    std::uint32_t block_[4] = {0, 0, 0, 0};
    int idx_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace slereg
