#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace sismon {

// Deterministic random stream. Uniform doubles are produced from the top 53
// bits of mt19937_64 output instead of std::uniform_real_distribution, whose
// algorithm is implementation-defined; this keeps draws bit-identical across
// standard libraries.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::uint64_t bits() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

// splitmix64 finalizer; bijective 64-bit mix.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a over bytes; stable across platforms.
inline std::uint64_t hash_bytes(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derives a substream seed from a master seed and a (tag, a, b) coordinate.
// The result depends only on its inputs, so replication b of a given cell
// gets the same stream no matter how many replications or workers run.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t a,
                                 std::uint64_t b) {
    std::uint64_t h = mix64(master ^ 0x5851f42d4c957f2dULL);
    h = mix64(h ^ hash_bytes(tag));
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    return h;
}

// Draws categories proportional to non-negative masses by inverting the
// cumulative sum (binary search). The cumulative sum is built left to right
// in index order, making draws a pure function of (masses, stream state).
class CdfSampler {
  public:
    explicit CdfSampler(std::span<const double> masses);

    std::size_t size() const { return cumulative_.size(); }
    double total() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

    std::size_t draw(RandomStream& rs) const;

  private:
    std::vector<double> cumulative_;
};

}  // namespace sismon
