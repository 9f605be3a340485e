#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <string_view>

namespace reflex {

/**
 * Seedable, splittable 64-bit generator (SplitMix64).
 *
 * Every draw is defined here bit for bit, so sequences are identical across
 * compilers and standard libraries. Streams are split by hashing a parent
 * seed with a tag and indices (`derive`), which keeps each stochastic choice
 * addressable by name and lets logs replay without storing generator state.
 */
class Rng {
public:
    explicit constexpr Rng(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Child seed for stream `tag` under `seed`, further keyed by `indices`.
    static constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                               std::initializer_list<std::uint64_t> indices = {}) noexcept {
        // FNV-1a over the tag, then fold in each index through the mixer.
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : tag) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        std::uint64_t z = mix(seed ^ mix(h));
        for (std::uint64_t i : indices) z = mix(z + 0x9e3779b97f4a7c15ULL + mix(i));
        return z;
    }

    static constexpr Rng derive(std::uint64_t seed, std::string_view tag,
                                std::initializer_list<std::uint64_t> indices = {}) noexcept {
        return Rng(derive_seed(seed, tag, indices));
    }

    constexpr std::uint64_t next_u64() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n); unbiased (Lemire's multiply-and-reject). n must be > 0.
    constexpr std::uint64_t below(std::uint64_t n) noexcept {
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    constexpr bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Standard normal draw (Box-Muller, no cached second value).
    double normal() noexcept {
        double u1 = uniform();
        const double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

} // namespace reflex
