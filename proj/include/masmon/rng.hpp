#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace masmon {

// All randomness in this project flows through the generator below so that
// results are bit-stable across platforms and standard libraries. The
// standard <random> distributions are implementation-defined and would break
// byte-identical reports, so we roll our own on top of splitmix64.

inline std::uint64_t splitmix64_step(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derives an independent substream seed from (base, stream). Used for
// per-episode seeds, per-episode judge seeds and per-edge judge substreams:
//   episode_seed(e) = mix_seed(master_seed, 2*e)
//   judge_seed(e)   = mix_seed(master_seed, 2*e + 1)
//   edge_stream(i)  = mix_seed(judge_seed, i)   with i the canonical edge index
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t x = base ^ ((stream + 1) * 0x9E3779B97F4A7C15ULL);
    splitmix64_step(x);
    return splitmix64_step(x);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64_step(state_); }

    // Uniform in [0, bound). bound == 0 returns 0.
    std::uint32_t uniform_u32(std::uint32_t bound) {
        if (bound == 0) return 0;
        return static_cast<std::uint32_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    // Uniform double in [0, 1) with 53 bits of precision.
    double uniform_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform_real() < p; }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[uniform_u32(static_cast<std::uint32_t>(v.size()))];
    }

  private:
    std::uint64_t state_;
};

}  // namespace masmon
