#pragma once
#include <cstdint>
#include <string_view>
#include <vector>

namespace mrps {

// splitmix64: used for deriving independent sub-seeds from one global seed.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) { h ^= ch; h *= 0x100000001b3ULL; }
    return h;
}

// seed = global seed hashed with a domain tag, so each consumer gets its own stream
inline uint64_t derive_seed(uint64_t global_seed, std::string_view tag) {
    return splitmix64(global_seed ^ fnv1a(tag));
}

// Hand-rolled generator (xoshiro-free, just splitmix stream) with explicit draw
// routines; std::*_distribution is implementation-defined, which would break the
// identical-seed => identical-output contract across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, n) without modulo bias
    uint64_t below(uint64_t n) {
        if (n <= 1) return 0;
        uint64_t limit = ~uint64_t(0) - (~uint64_t(0) % n + 1) % n;
        uint64_t v;
        do { v = next_u64(); } while (v > limit);
        return v % n;
    }

    int range(int lo, int hi) { // inclusive bounds
        return lo + int(below(uint64_t(hi - lo + 1)));
    }

    double uniform01() { // [0,1)
        return double(next_u64() >> 11) * 0x1.0p-53;
    }

    bool coin() { return (next_u64() >> 63) != 0; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = size_t(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

} // namespace mrps
