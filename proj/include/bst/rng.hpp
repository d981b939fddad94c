#pragma once

#include <cmath>
#include <cstdint>

namespace bst {

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Purpose tags separating the random streams drawn for one trial.
enum class RngStream : std::uint64_t {
    ensemble = 0x01,
    signal_support = 0x02,
    signal_values = 0x03,
    noise = 0x04,
};

/// Counter-based generator keyed by (master seed, stream id, purpose tag).
/// Output i depends only on the key and i, so trials are reproducible
/// independent of scheduling; the normal variates come from Box-Muller on
/// the counter stream, not from the standard library distributions.
class CounterRng {
public:
    CounterRng(std::uint64_t master, std::uint64_t stream, RngStream purpose)
        : key_(detail::mix64(detail::mix64(master) ^
                             detail::mix64(stream * 0xC2B2AE3D27D4EB4Full) ^
                             static_cast<std::uint64_t>(purpose) * 0x165667B19E3779F9ull)) {}

    std::uint64_t next_u64() { return detail::mix64(key_ + counter_++ * 0x9E3779B97F4A7C15ull); }

    /// Uniform in (0, 1].
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Uniform integer in [0, bound) by rejection; bound must be positive.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace bst
