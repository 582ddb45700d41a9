#pragma once
// xoshiro256** seeded through splitmix64. Streams for independent tasks are
// derived from a master seed and a task id, so adding a task never shifts
// the numbers another task sees.

#include <array>
#include <cstdint>

namespace ks {

std::uint64_t splitmix64(std::uint64_t& state);

// Seed of stream `stream` under `master`.
std::uint64_t derive_stream(std::uint64_t master, std::uint64_t stream);

class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();

    // Standard normal via Box-Muller (one value per call, two uniforms consumed).
    double normal();

    // Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

private:
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace ks
