#pragma once

#include <cstdint>
#include <vector>

namespace svqvae {

// Deterministic xoshiro256++ generator seeded through splitmix64.
// The same seed yields the same stream on every platform; normal variates
// use Box-Muller so no library distribution internals leak into results.
// One Rng owns one stream; never share an instance across threads.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // uniform in [0, 1), 53-bit resolution
    double next_double();

    // standard normal via Box-Muller (two uniforms per variate)
    double next_gaussian();

    // uniform integer in [0, n), unbiased via rejection; n must be > 0
    std::uint64_t next_below(std::uint64_t n);

    // Fisher-Yates permutation of 0..n-1
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::uint64_t state_[4];
};

}  // namespace svqvae
