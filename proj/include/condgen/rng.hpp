#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string_view>

#include "condgen/error.hpp"

namespace condgen {

/// splitmix64 finalizer; used to turn arbitrary 64-bit material into seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a over a string, for seeding per-asset streams by identifier.
constexpr std::uint64_t hash_text(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace detail {
constexpr std::uint64_t fold_seed(std::uint64_t acc) noexcept { return acc; }

template <typename Tag, typename... Rest>
constexpr std::uint64_t fold_seed(std::uint64_t acc, Tag tag, Rest... rest) noexcept {
    if constexpr (std::is_convertible_v<Tag, std::string_view>) {
        acc = mix64(acc ^ hash_text(std::string_view(tag)));
    } else {
        acc = mix64(acc ^ static_cast<std::uint64_t>(tag));
    }
    return fold_seed(acc, rest...);
}
} // namespace detail

/// Order-sensitive seed derivation: derive_seed(master, step, asset_id, ...).
/// Streams derived from disjoint tag tuples are independent, so generation is
/// reproducible regardless of worker count or iteration order.
template <typename... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t master, Tags... tags) noexcept {
    return detail::fold_seed(mix64(master), tags...);
}

/// A self-contained random stream. The transforms are fixed here rather than
/// taken from <random> distributions so that generated artifacts are
/// bit-stable across standard library versions.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi].
    double uniform(double lo, double hi) {
        if (lo > hi) throw DomainError("uniform: lo > hi");
        return lo + (hi - lo) * uniform();
    }

    /// One Gaussian draw (Box-Muller). sigma == 0 returns the mean exactly.
    double normal(double mean, double sigma) {
        if (sigma < 0.0) throw DomainError("normal: negative sigma");
        if (sigma == 0.0) return mean;
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// One draw from a discrete distribution given by non-negative weights
    /// summing to ~1. Returns the chosen index.
    std::size_t categorical(std::span<const double> probs) {
        if (probs.empty()) throw DomainError("categorical: empty distribution");
        const double u = uniform();
        double cum = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            cum += probs[i];
            if (u < cum) return i;
        }
        return probs.size() - 1;
    }

    std::uint64_t next_bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace condgen
