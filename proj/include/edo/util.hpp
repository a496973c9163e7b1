#pragma once

#include <charconv>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace edo {

/// Raised for invalid configuration; the message names the offending field.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Engine RNG. A single stream drives every evolutionary decision so a run
/// is a pure function of (config, seed).
using Rng = std::mt19937_64;

inline double uniform_real(Rng& rng, double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Uniform index in [0, n). n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// Uniform integer in [lo, hi], inclusive.
inline long uniform_int(Rng& rng, long lo, long hi) {
    return std::uniform_int_distribution<long>(lo, hi)(rng);
}

/// ceil(x) with a guard against representation noise: values within 1e-9 of
/// an integer count as that integer (0.07 * 100 must give 7, not 8).
inline long ceil_count(double x) {
    const double nearest = std::nearbyint(x);
    if (std::abs(x - nearest) < 1e-9) return static_cast<long>(nearest);
    return static_cast<long>(std::ceil(x));
}

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view text) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw std::runtime_error("not a number: '" + std::string(text) + "'");
    return value;
}

}  // namespace edo
