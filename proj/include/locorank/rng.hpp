#ifndef LOCORANK_RNG_HPP
#define LOCORANK_RNG_HPP

#include <cmath>
#include <cstdint>

namespace locorank {

/// splitmix64 step; also used to derive stream keys from (seed, index) pairs.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream key. Feeding the result back in lets callers
/// build keys from arbitrarily many components: mix(mix(seed, a), b).
inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + (index << 1));
    splitmix64(s);
    return splitmix64(s);
}

/// Small counter-based generator. Every consumer (synth participants, forest
/// trees, fold shuffles) owns its own Rng keyed by mix_key, so results do not
/// depend on scheduling or call interleaving. Distribution transforms are
/// implemented here rather than with <random> so that identical seeds give
/// identical bytes on any standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). Multiply-shift; tiny bias is irrelevant here.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Standard normal via Box-Muller (no cached spare: one draw consumes two
    /// uniforms, keeping the stream position independent of call history).
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// exp(N(0, sigma)); sigma = 0 degenerates to exactly 1.
    double lognormal(double sigma) { return sigma == 0.0 ? 1.0 : std::exp(sigma * normal()); }

  private:
    std::uint64_t state_;
};

}  // namespace locorank

#endif
