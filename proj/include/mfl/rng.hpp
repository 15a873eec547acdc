#pragma once

#include <cstdint>
#include <random>

namespace mfl {

// splitmix64 finalizer; stable across platforms, used for all seed derivation.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Per-trajectory seed for trajectory `index` of an ensemble keyed by `master_seed`.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
    return mix64(master_seed ^ mix64(index + 1));
}

/// Reproducible stream of uniform draws in (0,1].
///
/// Backed by std::mt19937_64, whose output sequence is specified by the C++
/// standard, so identical seeds give identical draws on every platform. The
/// mapping to (0,1] is done by hand because std::uniform_real_distribution
/// is implementation-defined.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    /// Uniform draw in (0,1], 53-bit resolution.
    double next() {
        ++count_;
        return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t draws() const { return count_; }

  private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    std::uint64_t count_ = 0;
};

}  // namespace mfl
