#ifndef CPKIT_RNG_HPP
#define CPKIT_RNG_HPP

#include <cmath>
#include <cstdint>

namespace cpkit {

// splitmix64; used for seeding and counter-based stream derivation
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with a ziggurat normal sampler.  All arithmetic is plain
// IEEE-754 double, so a given seed reproduces bit-identical streams on any
// conforming platform regardless of thread count (streams are derived per
// work item, never shared).
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    // independent substream for work item `counter` under a master seed
    static Rng stream(std::uint64_t seed, std::uint64_t counter) {
        std::uint64_t sm = seed;
        std::uint64_t a = splitmix64(sm);
        sm = a ^ (counter * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
        return Rng(splitmix64(sm));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on [0,1), 53 bits
    double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) {
        // rejection to avoid modulo bias
        const std::uint64_t lim = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do { v = next_u64(); } while (v >= lim);
        return v % n;
    }

    // standard normal via 128-layer ziggurat
    double next_normal() {
        for (;;) {
            const std::uint64_t b = next_u64();
            const unsigned i = unsigned(b & 127u);
            const double sign = (b & 128u) ? -1.0 : 1.0;
            const double u = double(b >> 12) * 0x1.0p-52;
            const double x = u * tab().x[i];
            if (x < tab().x[i + 1]) return sign * x;
            if (i == 0) return sign * tail();
            const double y = tab().f[i] + next_unit() * (tab().f[i + 1] - tab().f[i]);
            if (y < std::exp(-0.5 * x * x)) return sign * x;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    double tail() {
        // Marsaglia tail for x > r
        for (;;) {
            const double x = -std::log(1.0 - next_unit()) / ZIG_R;
            const double y = -std::log(1.0 - next_unit());
            if (y + y > x * x) return ZIG_R + x;
        }
    }

    static constexpr double ZIG_R = 3.442619855899;
    static constexpr double ZIG_V = 9.91256303526217e-3;

    struct Tables {
        double x[129];
        double f[129];
        Tables() {
            const double fr = std::exp(-0.5 * ZIG_R * ZIG_R);
            x[0] = ZIG_V / fr; // base-layer width; excess over r redirects to the tail
            x[1] = ZIG_R;
            for (int i = 1; i < 127; ++i) {
                const double fi = std::exp(-0.5 * x[i] * x[i]);
                x[i + 1] = std::sqrt(-2.0 * std::log(ZIG_V / x[i] + fi));
            }
            x[128] = 0.0;
            f[0] = fr;
            for (int i = 1; i <= 128; ++i) f[i] = std::exp(-0.5 * x[i] * x[i]);
        }
    };
    static const Tables& tab() {
        static const Tables t;
        return t;
    }

    std::uint64_t s_[4];
};

} // namespace cpkit

#endif
