#pragma once

#include <cstdint>

// Counter-based uniform generator.
//
// Every random quantity in the library is a pure function of
// (seed, stream, index1, index2).  This buys three things at once:
// reproducibility independent of thread scheduling, cheap seed splitting for
// replication studies, and common random numbers for free (fixing the seed
// fixes every draw a particle filter will ever make, whatever the model
// parameters are).

namespace lgc {

namespace detail {
inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

inline std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}
} // namespace detail

/// Independent substream derived from a root seed; stream r of a replication
/// study is reproducible in isolation as split_seed(root, r).
inline std::uint64_t split_seed(std::uint64_t root, std::uint64_t index) noexcept {
    return detail::mix64(root + (index + 1) * detail::kGamma);
}

/// Stateless uniform source keyed by a seed.
class CounterRng {
public:
    CounterRng() = default;
    explicit CounterRng(std::uint64_t seed) noexcept
        : key_(detail::mix64(seed ^ 0x5851f42d4c957f2dull)) {}

    std::uint64_t bits(std::uint64_t stream, std::uint64_t i, std::uint64_t j) const noexcept {
        std::uint64_t h = detail::mix64(key_ + stream * detail::kGamma);
        h = detail::mix64(h ^ (i + detail::kGamma));
        h = detail::mix64(h ^ (j + 0x8000000000000001ull));
        return h;
    }

    /// Uniform draw strictly inside (0,1).
    double uniform(std::uint64_t stream, std::uint64_t i, std::uint64_t j = 0) const noexcept {
        return (static_cast<double>(bits(stream, i, j) >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_ = 0x853c49e6748fea9bull;
};

/// Stream identifiers; keeping them in one place avoids accidental reuse.
namespace streams {
inline constexpr std::uint64_t latent = 1;      // innovations of latent path simulation
inline constexpr std::uint64_t init = 2;        // particle initialization at t = 0
inline constexpr std::uint64_t propagate = 3;   // truncated propagation draws
inline constexpr std::uint64_t resample = 4;    // multinomial resampling
inline constexpr std::uint64_t ancestor = 5;    // auxiliary-filter ancestor picks
inline constexpr std::uint64_t mc_link = 6;     // Monte-Carlo link endpoint estimates
inline constexpr std::uint64_t mc_generic = 7;  // miscellaneous Monte-Carlo oracles
} // namespace streams

} // namespace lgc
