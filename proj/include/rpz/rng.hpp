#pragma once

// Counter-based randomness. Every draw is a pure function of
// (key, index, lane), so results never depend on evaluation order or on how
// trials are distributed over threads.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace rpz {

constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t tag_of(std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed of one trial: hash(master_seed, trial_index, stream_tag).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::string_view stream) {
    return hash_combine(hash_combine(master, trial), tag_of(stream));
}

class CounterRng {
public:
    constexpr explicit CounterRng(std::uint64_t key) : key_(mix64(key)) {}

    constexpr std::uint64_t bits(std::uint64_t index, std::uint64_t lane = 0) const {
        return mix64(key_ ^ mix64(index * 0xd1342543de82ef95ULL + lane * 0x2545f4914f6cdd1dULL + 1));
    }

    /// Uniform on the open interval (0, 1).
    double uniform(std::uint64_t index, std::uint64_t lane = 0) const {
        return (static_cast<double>(bits(index, lane) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller on lanes (2*lane, 2*lane+1).
    double normal(std::uint64_t index, std::uint64_t lane = 0) const {
        const double u1 = uniform(index, 2 * lane);
        const double u2 = uniform(index, 2 * lane + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
};

}  // namespace rpz
