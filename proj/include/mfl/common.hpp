#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mfl {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Composite mode index of the ladder: site-major, chain-minor.
// chain 0 = system (chain 1 of the physical model), chain 1 = ancilla.
inline int mode_index(int site, int chain) { return 2 * site + chain; }

/// Eigenvalues (or derived quantities) drifted past their tolerated range.
class NumericalError : public std::runtime_error {
  public:
    NumericalError(const std::string& what, double clamp_report)
        : std::runtime_error(what), clamp_report_(clamp_report) {}
    double clamp_report() const { return clamp_report_; }

  private:
    double clamp_report_;
};

/// A linear solve hit a near-singular matrix.
class ConditioningError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// FNV-1a, used for parameter and config identities.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a_append(std::uint64_t h, const void* data, std::size_t n) {
    return fnv1a(std::string_view(static_cast<const char*>(data), n), h);
}

}  // namespace mfl
