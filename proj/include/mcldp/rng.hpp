#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace mcldp {

// splitmix64 finalizer; used to derive well-separated substream seeds.
constexpr uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Folds a tuple of identifiers into one seed. Order-sensitive on purpose.
inline uint64_t derive_seed(std::initializer_list<uint64_t> parts) {
    uint64_t h = 0x8f1bbcdcbfa53e0bULL;
    for (uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
    return h;
}

// Deterministic random stream. The engine (mt19937_64) is fully specified by
// the standard; all variate mappings are implemented here rather than with
// std distributions, so identical seeds give identical sequences on every
// platform and toolchain.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a log() argument.
    double next_double_open() { return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    // Unbiased integer in [0, n) via Lemire's multiply-shift rejection.
    uint64_t below(uint64_t n) {
        for (;;) {
            uint64_t x = eng_();
            __uint128_t m = static_cast<__uint128_t>(x) * n;
            auto lo = static_cast<uint64_t>(m);
            if (lo < n) {
                uint64_t t = (0 - n) % n;
                if (lo < t) continue;
            }
            return static_cast<uint64_t>(m >> 64);
        }
    }

    // One normal variate per call (Box-Muller, second value discarded so the
    // consumption pattern stays fixed at two uniforms per call).
    double normal(double mean, double stddev) {
        double u1 = next_double_open();
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
    }

  private:
    std::mt19937_64 eng_;
};

// Logical stream identifiers. Every random decision in the simulator belongs
// to exactly one (master seed, stage, mechanism, user) stream, which makes
// results independent of evaluation order and worker count.
enum class Stage : uint64_t {
    kGroundTruth = 1,
    kValues = 2,
    kPerturb = 3,
    kChannel = 4,
    kFallback = 5,
};

inline Rng stream_rng(uint64_t master_seed, Stage stage, uint64_t mechanism, uint64_t user) {
    return Rng(derive_seed({master_seed, static_cast<uint64_t>(stage), mechanism, user}));
}

}  // namespace mcldp
