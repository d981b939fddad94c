#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace bst {

/// Coefficients [c_0..c_n] of prod_i (x + g_i), low degree first. The
/// degree-t coefficient counts off-diagonal block pairs sharing exactly t
/// indices when g_i = (per-mode count_i) - 1; the coefficients always sum
/// to prod_i (1 + g_i) and c_n = 1.
struct OverlapCoefficients {
    std::vector<double> c;

    int degree() const { return static_cast<int>(c.size()) - 1; }
    double sum() const {
        double total = 0.0;
        for (double v : c) total += v;
        return total;
    }
};

inline OverlapCoefficients expand_linear_factors(const std::vector<double>& offsets) {
    if (offsets.empty()) throw std::invalid_argument("at least one factor required");
    for (double g : offsets)
        if (g < 0.0) throw std::invalid_argument("factor offsets must be nonnegative");
    std::vector<double> c{1.0};
    for (double g : offsets) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t j = 0; j < c.size(); ++j) {
            next[j + 1] += c[j];
            next[j] += g * c[j];
        }
        c = std::move(next);
    }
    return OverlapCoefficients{std::move(c)};
}

/// Overlap coefficients for a total pair count. With per-mode counts the
/// offsets are count_i - 1; a bare scalar is completed symmetrically with
/// the uniform per-mode root count^(1/n) - 1.
inline OverlapCoefficients overlap_coefficients_for_count(double count, int modes,
                                                          const std::vector<double>* per_mode = nullptr) {
    if (count < 1.0) throw std::invalid_argument("count must be >= 1");
    if (modes < 1) throw std::invalid_argument("modes must be >= 1");
    std::vector<double> offsets;
    if (per_mode) {
        if (static_cast<int>(per_mode->size()) != modes)
            throw std::invalid_argument("per-mode counts must match mode count");
        double product = 1.0;
        for (double ci : *per_mode) {
            if (ci < 1.0) throw std::invalid_argument("per-mode counts must be >= 1");
            offsets.push_back(ci - 1.0);
            product *= ci;
        }
        if (std::abs(product - count) > 1e-9 * std::max(1.0, count))
            throw std::invalid_argument("per-mode counts do not factor the total count");
    } else {
        const double root = std::pow(count, 1.0 / modes);
        offsets.assign(modes, root - 1.0);
    }
    return expand_linear_factors(offsets);
}

}  // namespace bst
