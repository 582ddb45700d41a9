#pragma once
// Seeded generators for property tests. Kept independent of the library's
// own RNG so that a bug there cannot hide behind matching test inputs.

#include <cmath>
#include <cstdint>
#include <vector>

#include "ks/dd.hpp"
#include "ks/geometry.hpp"

namespace gen {

class Source {
public:
    explicit Source(std::uint64_t seed) : state_(seed ^ 0x6a09e667f3bcc909ull) {}

    std::uint64_t bits() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    double unit() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }
    double range(double lo, double hi) { return lo + (hi - lo) * unit(); }
    int below(int n) { return static_cast<int>(bits() % static_cast<std::uint64_t>(n)); }

    // Double-double with a random exponent in [-e, e] and a full lo word.
    ks::DD dd(int e = 20) {
        double hi = range(1.0, 2.0) * std::ldexp(1.0, below(2 * e + 1) - e);
        if (bits() & 1) hi = -hi;
        double lo = hi * range(-1.0, 1.0) * 0x1.0p-54;
        return ks::dd::quick_two_sum(hi, lo);
    }

    ks::DD positive_dd(int e = 20) { return ks::dd::abs(dd(e)); }

    ks::PointSet points(const ks::Domain& domain, std::size_t n) {
        std::vector<double> c;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < domain.dim(); ++j) c.push_back(range(domain.lower()[j], domain.upper()[j]));
        return ks::PointSet(domain, c, "gen");
    }

private:
    std::uint64_t state_;
};

}  // namespace gen
