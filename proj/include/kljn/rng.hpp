#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace kljn {

// splitmix64 finalizer; used to whiten and combine seed material.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Counter-based seed derivation: the derived stream depends only on the
// master seed and the stream identifiers, never on scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> stream) {
    std::uint64_t s = splitmix64(master);
    for (std::uint64_t v : stream) {
        s = splitmix64(s ^ splitmix64(v + 0x632be59bd9b4e019ull));
    }
    return s;
}

// Deterministic Gaussian/uniform source. mt19937_64 plus the libstdc++
// distributions; identical seeds give identical sequences on a given build.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    double gaussian() { return normal_(engine_); }
    double uniform01() { return uniform_(engine_); }
    bool coin() { return (engine_() & 1ull) != 0; }

    // log-uniform draw on [lo, hi]
    double log_uniform(double lo, double hi) {
        return lo * std::exp(uniform01() * std::log(hi / lo));
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace kljn
