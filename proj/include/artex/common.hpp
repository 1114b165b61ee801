#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>

#include "artex/errors.hpp"

namespace artex {

// Native value in base units. Scenario configs state the display scale
// (e.g. 1 display coin = 10^9 units); the core only ever sees integers.
using Amount = std::uint64_t;
using Hash32 = std::array<std::uint8_t, 32>;

inline Amount checked_add(Amount a, Amount b) {
    Amount r;
    if (__builtin_add_overflow(a, b, &r))
        throw error(errc::arithmetic_overflow, "amount addition overflow");
    return r;
}

inline Amount checked_sub(Amount a, Amount b) {
    if (b > a)
        throw error(errc::arithmetic_overflow, "amount subtraction underflow");
    return a - b;
}

// Simulated wall clock, seconds. Advances only by explicit calls; shared by
// the ledger, identity service and exchange so a scenario has one timeline.
struct SimClock {
    std::uint64_t now = 0;
};

std::string to_hex(std::span<const std::uint8_t> bytes);
bool from_hex(std::string_view hex, std::span<std::uint8_t> out);

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// SplitMix64. Every random choice in a scenario flows from one of these so
// that (seed, call sequence) fully determines a run.
struct Rng {
    std::uint64_t state = 0;

    Rng() = default;
    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [lo, hi], inclusive. Rejection-free modulo is fine here:
    // ranges are tiny relative to 2^64.
    std::uint64_t range(std::uint64_t lo, std::uint64_t hi) {
        if (hi <= lo) return lo;
        return lo + next() % (hi - lo + 1);
    }

    double uniform01() {
        return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
    }

    void fill(std::span<std::uint8_t> out) {
        std::size_t i = 0;
        while (i < out.size()) {
            std::uint64_t v = next();
            std::size_t n = std::min<std::size_t>(8, out.size() - i);
            std::memcpy(out.data() + i, &v, n);
            i += n;
        }
    }

    // Derived stream for an independent purpose. Advances this stream once.
    Rng fork(std::string_view tag) {
        return Rng(next() ^ fnv1a64(tag));
    }
};

}  // namespace artex
