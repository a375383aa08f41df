#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace kdlab {

// Deterministic RNG built on mt19937_64 (fully specified by the standard, so
// streams are bit-identical across platforms). Distribution transforms are
// hand-rolled here because the std distribution objects are
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller, one spare cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // Uniform integer in [0, n) by rejection, bias-free.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x = 0;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

    // Derives an independent stream seed from (root, tag, index). All
    // randomness in a run flows from one root seed through this scheme.
    static std::uint64_t derive(std::uint64_t root, std::string_view tag,
                                std::uint64_t index = 0) {
        std::uint64_t h = 1469598103934665603ull;  // FNV-1a offset basis
        auto mix_byte = [&h](std::uint8_t b) {
            h ^= b;
            h *= 1099511628211ull;
        };
        for (char c : tag) mix_byte(static_cast<std::uint8_t>(c));
        for (int i = 0; i < 8; ++i) mix_byte(static_cast<std::uint8_t>(root >> (8 * i)));
        for (int i = 0; i < 8; ++i) mix_byte(static_cast<std::uint8_t>(index >> (8 * i)));
        // splitmix64 finalizer
        h += 0x9e3779b97f4a7c15ull;
        h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
        h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
        return h ^ (h >> 31);
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace kdlab
