#pragma once

#include <cstdint>
#include <limits>

namespace elab {

// Counter-based random substreams. A stream is fully determined by
// (seed, tag, a, b), so draws for voter i in race j never depend on the
// order in which voters are processed.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class StreamTag : std::uint64_t {
    Electorate = 0x656c6563ULL,
    Measures = 0x6d656173ULL,
    Responses = 0x72657370ULL,
    Votes = 0x766f7465ULL,
    Missing = 0x6d697373ULL,
};

/// SplitMix64 generator satisfying UniformRandomBitGenerator.
class StreamRng {
public:
    using result_type = std::uint64_t;

    explicit StreamRng(std::uint64_t state) noexcept : state_(state) {}

    StreamRng(std::uint64_t seed, StreamTag tag, std::uint64_t a = 0, std::uint64_t b = 0) noexcept
        : state_(splitmix64(splitmix64(splitmix64(seed ^ static_cast<std::uint64_t>(tag)) ^ a) ^
                            (b * 0xd1b54a32d192ed03ULL))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

}  // namespace elab
