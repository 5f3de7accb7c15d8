#ifndef AGMONLAB_RNG_HPP
#define AGMONLAB_RNG_HPP

#include <cmath>
#include <cstdint>

namespace agmonlab {

/** Counter-based random stream (Philox4x32-10).
 *
 * Each Monte Carlo replica owns its own stream: the pair (seed, stream id)
 * selects a sequence that is independent of how replicas are scheduled
 * across threads, so parallel runs reproduce serial runs bit for bit. */
class PhiloxStream {
  public:
    PhiloxStream(uint64_t seed, uint64_t stream)
        : key0_(uint32_t(seed)), key1_(uint32_t(seed >> 32)),
          ctr2_(uint32_t(stream)), ctr3_(uint32_t(stream >> 32)) {}

    uint32_t next_u32() {
        if (have_ == 0) refill();
        return buf_[--have_];
    }

    uint64_t next_u64() {
        uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /** Uniform double in (0,1]. */
    double uniform() {
        return double((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /** Standard normal via the 128-layer ziggurat. */
    double normal() {
        for (;;) {
            const uint32_t u = next_u32();
            const int iz = int(u & 127u);
            const int32_t hz = int32_t(u);
            if (uint32_t(hz < 0 ? -int64_t(hz) : hz) < zig_.kn[iz])
                return hz * zig_.wn[iz];
            const double x = normal_fix(hz, iz);
            if (!std::isnan(x)) return x;
        }
    }

  private:
    struct ZigTables {
        uint32_t kn[128];
        double wn[128];
        double fn[128];
        ZigTables() {
            const double m1 = 2147483648.0;
            double dn = 3.442619855899, tn = dn;
            const double vn = 9.91256303526217e-3;
            const double q = vn / std::exp(-0.5 * dn * dn);
            kn[0] = uint32_t((dn / q) * m1);
            kn[1] = 0;
            wn[0] = q / m1;
            wn[127] = dn / m1;
            fn[0] = 1.0;
            fn[127] = std::exp(-0.5 * dn * dn);
            for (int i = 126; i >= 1; i--) {
                dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
                kn[i + 1] = uint32_t((dn / tn) * m1);
                tn = dn;
                fn[i] = std::exp(-0.5 * dn * dn);
                wn[i] = dn / m1;
            }
        }
    };

    static inline const ZigTables zig_{};

    // Slow path: tail layer or wedge rejection. NaN means "retry".
    double normal_fix(int32_t hz, int iz) {
        const double r = 3.442619855899;
        double x = hz * zig_.wn[iz];
        if (iz == 0) {
            double y;
            do {
                x = -std::log(uniform()) * (1.0 / r);
                y = -std::log(uniform());
            } while (y + y < x * x);
            return hz > 0 ? r + x : -r - x;
        }
        if (zig_.fn[iz] + uniform() * (zig_.fn[iz - 1] - zig_.fn[iz]) <
            std::exp(-0.5 * x * x))
            return x;
        return std::nan("");
    }

    void refill() {
        uint32_t c0 = uint32_t(block_), c1 = uint32_t(block_ >> 32);
        uint32_t c2 = ctr2_, c3 = ctr3_;
        uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            const uint64_t p0 = 0xD2511F53ull * c0;
            const uint64_t p1 = 0xCD9E8D57ull * c2;
            const uint32_t n0 = uint32_t(p1 >> 32) ^ c1 ^ k0;
            const uint32_t n1 = uint32_t(p1);
            const uint32_t n2 = uint32_t(p0 >> 32) ^ c3 ^ k1;
            const uint32_t n3 = uint32_t(p0);
            c0 = n0; c1 = n1; c2 = n2; c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        buf_[0] = c0; buf_[1] = c1; buf_[2] = c2; buf_[3] = c3;
        have_ = 4;
        ++block_;
    }

    uint32_t key0_, key1_;
    uint32_t ctr2_, ctr3_;
    uint64_t block_ = 0;
    uint32_t buf_[4] = {0, 0, 0, 0};
    int have_ = 0;
};

} // namespace agmonlab

#endif
