// Shared basics: problem tags, error types, deterministic RNG helpers.
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace escbundle {

enum class Problem { maxcut, stableset, coloring };

inline const char* problem_name(Problem p) {
    switch (p) {
        case Problem::maxcut:    return "maxcut";
        case Problem::stableset: return "stableset";
        case Problem::coloring:  return "coloring";
    }
    return "?";
}

inline Problem problem_from_name(const std::string& s) {
    if (s == "maxcut")    return Problem::maxcut;
    if (s == "stableset") return Problem::stableset;
    if (s == "coloring")  return Problem::coloring;
    throw std::invalid_argument("unknown problem tag: " + s);
}

// Input/format problems (bad instance files, malformed subsets).
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, long line = -1)
        : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    long line() const { return line_; }

  private:
    long line_;
};

// Numerical failures (IPM not converging, trial-point QP stalling).
class SolverError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Deterministic RNG. All randomized components draw through this wrapper so
// that a fixed seed reproduces the identical stream regardless of the
// standard library's distribution implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // uniform over {0, 1, ..., n-1}
    std::uint64_t below(std::uint64_t n) {
        // Lemire's unbiased multiply-shift rejection sampler.
        std::uint64_t x = engine_();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                x = engine_();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    int below_int(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

    // uniform in [0, 1)
    double uniform01() { return (engine_() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool coin() { return (engine_() & 1u) != 0; }

  private:
    std::mt19937_64 engine_;
};

}  // namespace escbundle
