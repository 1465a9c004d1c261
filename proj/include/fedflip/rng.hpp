#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace fedflip {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Named sub-streams of a run seed. Every consumer of randomness gets its own
// derived seed so that parallel and serial schedules draw identical values.
enum SeedStream : std::uint64_t {
    kInitStream = 1,       // model weight initialization
    kRoundStream = 2,      // per-(round, client) local training
    kAttackStream = 3,     // label-flip sampling
    kPartitionStream = 4,  // IID partitioning
    kSplitStream = 5,      // train/test split
    kSynthStream = 6,      // synthetic dataset generation
};

// derive_seed(s, a, b, ...) = chained splitmix64: state starts at
// splitmix64(s) and each tag t advances it to splitmix64(state ^ splitmix64(t)).
template <typename... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t seed, Tags... tags) {
    std::uint64_t state = splitmix64(seed);
    ((state = splitmix64(state ^ splitmix64(static_cast<std::uint64_t>(tags)))), ...);
    return state;
}

// mt19937_64 engine with hand-rolled draws. std::uniform_*_distribution and
// std::shuffle are implementation-defined, so they are not used anywhere;
// every draw here is bit-reproducible for a given seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // [0, 1) with 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased integer in [0, n); n must be positive
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[static_cast<std::size_t>(bounded(i))]);
        }
    }

  private:
    std::mt19937_64 engine_;
};

// 0, 1, ..., n-1 shuffled by `seed`
inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx);
    return idx;
}

}  // namespace fedflip
