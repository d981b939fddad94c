#pragma once

#include "bst/coherence.hpp"
#include "bst/overlap.hpp"

#include <optional>
#include <sstream>

namespace bst {

/// A bound evaluation that may carry a violated-premise note instead of
/// raising, so sweeps can tabulate guarantee coverage.
struct BoundValue {
    double value = std::numeric_limits<double>::quiet_NaN();
    std::string violated;  // empty when every premise held

    bool ok() const { return violated.empty(); }
};

inline BoundValue bound_ok(double v) { return BoundValue{v, {}}; }
inline BoundValue bound_violated(std::string why,
                                 double v = std::numeric_limits<double>::quiet_NaN()) {
    return BoundValue{v, std::move(why)};
}

/// Two-sided eigenvalue bounds for the Gram of a cascaded block dictionary
/// drawn from the profiled matrix set; symmetric around 1 by construction.
struct GramBounds {
    double lower = 1.0;
    double upper = 1.0;
    double count = 1.0;  // the pair-count argument used
};

namespace detail {

inline double coherence_spread(const CoherenceProfile& p, const OverlapCoefficients& count_poly) {
    const int n = p.modes;
    const double volume = static_cast<double>(p.block_volume());
    std::vector<double> d_offsets(n);
    for (int i = 0; i < n; ++i) d_offsets[i] = static_cast<double>(p.d[i]) - 1.0;
    const OverlapCoefficients within = expand_linear_factors(d_offsets);

    double spread = 0.0;
    for (int t = 0; t < n; ++t) {
        spread += within.c[t] * std::pow(p.mutual_sub[t], n - t);
        spread += count_poly.c[t] * std::pow(p.mutual_block[t], n) * volume;
    }
    return spread;
}

}  // namespace detail

inline GramBounds gram_eigenvalue_bounds(const CoherenceProfile& p, double count) {
    const double spread =
        detail::coherence_spread(p, overlap_coefficients_for_count(count, p.modes));
    return GramBounds{1.0 - spread, 1.0 + spread, count};
}

/// Per-mode count overload; used whenever a theorem supplies the per-mode
/// factorization (shadow sparsities, submatrix widths).
inline GramBounds gram_eigenvalue_bounds(const CoherenceProfile& p,
                                         const std::vector<double>& per_mode) {
    double count = 1.0;
    for (double c : per_mode) count *= c;
    const double spread =
        detail::coherence_spread(p, overlap_coefficients_for_count(count, p.modes, &per_mode));
    return GramBounds{1.0 - spread, 1.0 + spread, count};
}

/// Singular-value sandwich for the cross Gram of two disjoint block
/// families with per-mode cardinalities l and l_star.
struct SingularBounds {
    double lower = 0.0;
    double upper = 0.0;
    bool degenerate_upper = false;  // zero coherence collapses the cross Gram
};

inline SingularBounds cross_gram_singular_bounds(const CoherenceProfile& p,
                                                 const std::vector<double>& l,
                                                 const std::vector<double>& l_star) {
    const GramBounds wl = gram_eigenvalue_bounds(p, l);
    const GramBounds wr = gram_eigenvalue_bounds(p, l_star);
    double cols_l = 1.0, cols_r = 1.0;
    for (int t = 0; t < p.modes; ++t) {
        cols_l *= l[t] * static_cast<double>(p.d[t]);
        cols_r *= l_star[t] * static_cast<double>(p.d[t]);
    }
    const double cross = std::pow(p.mutual_block[0], p.modes);
    SingularBounds out;
    out.lower = std::sqrt(std::max(0.0, wl.lower)) * std::sqrt(std::max(0.0, wr.lower));
    out.upper = cross * std::max(cols_l, cols_r);
    out.degenerate_upper = (out.upper == 0.0);
    return out;
}

/// Exact-recovery-condition check for one iteration: positive margin means
/// the next selection cannot leave the true support.
struct ErcCheck {
    double margin = 0.0;             // 1 - (Z / sqrt(s)) * ||pinv(Dxi) Dpsi||_2
    double correlation_ratio = 1.0;  // Z, in [1, sqrt(k)]
    double operator_norm = 0.0;      // ||pinv(Dxi) Dpsi||_2
};

inline ErcCheck check_erc(const MeasurementEnsemble& e, const BlockSupport& support,
                          const DenseTensor& residual, Index s) {
    if (support.empty()) throw std::invalid_argument("erc check needs a nonempty support");
    const CascadingOperator dxi = build_cascading(e, support);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(dxi.matrix());
    if (cod.rank() < dxi.matrix().cols())
        throw std::runtime_error("support dictionary is rank deficient");

    const DenseTensor corr = e.correlate(residual);
    const BlockStructure& bs = e.structure();

    // Largest in-support correlation (the Z denominator).
    double best_in = 0.0;
    for (const auto& tuple : support.tuples()) {
        BlockSupport one(bs);
        one.insert(tuple);
        best_in = std::max(best_in, shadow_extract(corr, one).frobenius_norm());
    }
    if (best_in == 0.0) throw std::invalid_argument("residual is orthogonal to the support");

    const Vector projected = dxi.matrix().transpose() * vectorize(residual);
    const double z = projected.norm() / best_in;

    // The s largest off-support correlations.
    std::vector<std::pair<double, BlockIndexTuple>> off;
    std::vector<Index> odo(bs.modes(), 0);
    for (Index flat = 0; flat < bs.block_count(); ++flat) {
        BlockIndexTuple tuple(odo.begin(), odo.end());
        if (!support.contains(tuple)) {
            BlockSupport one(bs);
            one.insert(tuple);
            off.emplace_back(shadow_extract(corr, one).frobenius_norm(), tuple);
        }
        for (int t = 0; t < bs.modes(); ++t) {
            if (++odo[t] < bs.s[t]) break;
            odo[t] = 0;
        }
    }
    std::stable_sort(off.begin(), off.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    ErcCheck out;
    out.correlation_ratio = z;
    if (off.empty()) {
        out.margin = 1.0;
        return out;
    }
    BlockSupport psi(bs);
    for (Index j = 0; j < std::min<Index>(s, static_cast<Index>(off.size())); ++j)
        psi.insert(off[j].second);
    const CascadingOperator dpsi = build_cascading(e, psi);
    out.operator_norm = spectral_norm(cod.pseudoInverse() * dpsi.matrix());
    out.margin = 1.0 - z / std::sqrt(static_cast<double>(s)) * out.operator_norm;
    return out;
}

enum class SparsityRegime { least_restricted, most_restricted, explicit_ratio };

namespace detail {

/// Largest real root of x^3 + P x + Q = 0. The depressed-cubic closed form
/// is used when the discriminant is nonnegative; otherwise the three real
/// roots are obtained trigonometrically and the largest is returned.
inline double depressed_cubic_largest_root(double p, double q) {
    const double delta = 0.25 * q * q + p * p * p / 27.0;
    if (delta >= 0.0) {
        const double r = std::sqrt(delta);
        return std::cbrt(-0.5 * q + r) + std::cbrt(-0.5 * q - r);
    }
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double theta = std::acos(std::clamp(3.0 * q / (p * m), -1.0, 1.0)) / 3.0;
    return m * std::cos(theta);
}

}  // namespace detail

/// Largest block sparsity k for which the exact-recovery condition is
/// guaranteed; real-valued, caller floors. Infinite when the mutual block
/// coherence vanishes.
inline BoundValue reconstructible_sparsity(const CoherenceProfile& p, Index s,
                                           SparsityRegime regime, double z_ratio = 1.0) {
    const int n = p.modes;
    const double volume = static_cast<double>(p.block_volume());
    const double cross = std::pow(p.mutual_block[0], n) * volume;
    if (cross == 0.0) return bound_ok(std::numeric_limits<double>::infinity());

    const double sub = (volume - 1.0) * std::pow(p.mutual_sub[0], n);
    const double numerator = 1.0 - sub + cross;
    if (numerator <= 0.0) return bound_violated("sub-coherence term exceeds 1 + cross term", 0.0);
    const double root_s = std::sqrt(static_cast<double>(s));

    switch (regime) {
        case SparsityRegime::least_restricted:
            return bound_ok(root_s * numerator / ((1.0 + root_s) * cross));
        case SparsityRegime::explicit_ratio:
            if (z_ratio < 1.0) return bound_violated("correlation ratio below 1");
            return bound_ok(root_s * numerator / ((z_ratio + root_s) * cross));
        case SparsityRegime::most_restricted: {
            // Cubic in sqrt(k): y^3 + sqrt(s) y^2 + delta < 0.
            const double delta = -root_s * numerator / cross;
            const double pp = -static_cast<double>(s) / 3.0;
            const double qq = (27.0 * delta + 2.0 * std::pow(root_s, 3)) / 27.0;
            const double x = detail::depressed_cubic_largest_root(pp, qq);
            double y = x - root_s / 3.0;
            if (y <= 0.0) return bound_violated("no positive sparsity satisfies the cubic", 0.0);
            // Newton polish; the closed-form root loses a few digits to
            // cancellation when the cap is large.
            for (int it = 0; it < 4; ++it) {
                const double h = y * y * y + root_s * y * y + delta;
                const double dh = 3.0 * y * y + 2.0 * root_s * y;
                if (dh == 0.0) break;
                y -= h / dh;
            }
            return bound_ok(y * y);
        }
    }
    return bound_violated("unknown regime");
}

struct SparsityCaps {
    BoundValue least;
    BoundValue most;
};

/// Sparsity caps obtained through the mixed-norm spectral bound instead of
/// the Neumann-series route.
inline SparsityCaps mixed_norm_sparsity_caps(const CoherenceProfile& p, double theta) {
    SparsityCaps out;
    const int n = p.modes;
    const double volume = static_cast<double>(p.block_volume());
    const double cross = std::pow(p.mutual_block[0], n) * volume;
    if (cross == 0.0) {
        out.least = bound_ok(std::numeric_limits<double>::infinity());
        out.most = bound_ok(std::numeric_limits<double>::infinity());
        return out;
    }
    const double sub = (volume - 1.0) * std::pow(p.mutual_sub[0], n);

    const double inner = 1.25 - (sub - 1.0) / cross;
    out.least = inner < 0.0 ? bound_violated("negative radicand in least-restricted cap")
                            : bound_ok(std::pow(-0.5 + std::sqrt(inner), 2));

    if (theta <= 0.0) {
        out.most = bound_violated("theta must be positive");
        return out;
    }
    const double denom = 2.0 + 2.0 / cross - theta;
    if (denom <= 0.0) {
        out.most = bound_violated("theta too large; nonpositive denominator");
        return out;
    }
    const double ratio = (1.0 - sub) / cross;
    out.most = bound_ok((ratio * ratio + 1.0 + 2.0 / cross) / denom);
    return out;
}

/// Per-iteration geometric factor for the noiseless residual envelope:
/// ||R^(l+1)||^2 <= factor^(l+1) ||Y||^2.
inline BoundValue residual_decay_factor(const CoherenceProfile& p, Index k, Index s,
                                        double shadow_product, Index iteration) {
    const double count = shadow_product + static_cast<double>(s) * iteration;
    const GramBounds w = gram_eigenvalue_bounds(p, std::max(1.0, count));
    const GramBounds ws = gram_eigenvalue_bounds(p, static_cast<double>(s));
    const double factor =
        1.0 - static_cast<double>(s) * w.lower /
                  (static_cast<double>(k) * std::sqrt(w.upper) * ws.upper);
    if (w.lower <= 0.0)
        return bound_violated("gram lower bound nonpositive at count " + std::to_string(count),
                              factor);
    return bound_ok(factor);
}

/// Error cap when the run stopped because the residual fell below eps.
inline BoundValue stopping_error_bound(const CoherenceProfile& p, Index k, Index s, Index l_star,
                                       double shadow_product, double eps, double noise_norm) {
    const GramBounds wa = gram_eigenvalue_bounds(p, shadow_product + static_cast<double>(k));
    const GramBounds wb =
        gram_eigenvalue_bounds(p, std::max(1.0, shadow_product + static_cast<double>(s) * l_star));
    if (wa.lower <= 0.0) return bound_violated("gram lower bound nonpositive at shadow + k");
    if (wb.lower <= 0.0) return bound_violated("gram lower bound nonpositive at shadow + s*l");
    const double denom = std::sqrt(wa.lower) * std::sqrt(wb.lower);
    const double cap = 2.0 * std::sqrt(wa.upper) * eps / denom +
                       2.0 * (std::sqrt(wa.upper) + std::sqrt(wb.lower)) * noise_norm / denom;
    return bound_ok(cap);
}

struct SnrThreshold {
    BoundValue exact_db;       // branch-exact threshold
    BoundValue asymptotic_db;  // large-mode-count limit (1/sqrt(s) + 1) k / MAR
};

/// Minimum SNR guaranteeing full support selection within k iterations.
inline SnrThreshold snr_threshold(const CoherenceProfile& p, Index k, Index s,
                                  double shadow_product, double mar) {
    SnrThreshold out;
    const int n = p.modes;
    const double kd = static_cast<double>(k), sd = static_cast<double>(s);

    if (mar <= 0.0) {
        out.exact_db = bound_violated("ratio of block norms must be positive",
                                      std::numeric_limits<double>::infinity());
        out.asymptotic_db = out.exact_db;
        return out;
    }
    const double asym = (1.0 / std::sqrt(sd) + 1.0) * kd / mar;
    out.asymptotic_db = bound_ok(10.0 * std::log10(asym * asym));

    const GramBounds w_s = gram_eigenvalue_bounds(p, sd);
    const GramBounds w_ks = gram_eigenvalue_bounds(p, kd * sd);
    const GramBounds w_kn = gram_eigenvalue_bounds(p, std::pow(kd, n));
    const GramBounds w_shadow = gram_eigenvalue_bounds(p, shadow_product);
    if (w_ks.lower <= 0.0 || w_kn.lower <= 0.0) {
        out.exact_db = bound_violated("gram lower bound nonpositive; no guarantee");
        return out;
    }

    const double volume = static_cast<double>(p.block_volume());
    double numerator, core;
    if (n == 1) {
        const GramBounds w_k = gram_eigenvalue_bounds(p, kd);
        const double a = std::sqrt(kd) * std::sqrt(w_s.upper) * std::sqrt(w_k.upper) +
                         std::sqrt(kd * sd) * std::sqrt(w_ks.upper) * std::sqrt(w_k.upper);
        numerator = a * a;
        const double cd = p.mutual_block[0] * volume;
        core = std::sqrt(sd / kd) * std::sqrt(w_ks.lower) * std::sqrt(w_k.lower) - kd * cd -
               (kd * sd * cd) * (kd * sd * cd) / w_ks.lower;
    } else {
        const double a = std::sqrt(kd) * std::sqrt(w_s.upper) * std::sqrt(w_shadow.upper) +
                         std::sqrt(kd * sd) * std::sqrt(w_ks.upper) * std::sqrt(w_shadow.upper);
        numerator = a * a;
        const double cd = std::pow(p.mutual_block[n - 1], n) * volume;
        core = std::sqrt(sd / kd) * std::sqrt(w_ks.lower) * std::sqrt(w_kn.lower) -
               std::pow(kd, n) * cd - std::pow(kd, n + 1) * sd * cd * cd / w_ks.lower;
    }
    if (core <= 0.0) {
        out.exact_db = bound_violated("selection margin nonpositive; no guarantee");
        return out;
    }
    out.exact_db = bound_ok(10.0 * std::log10(numerator / std::pow(core * mar, 2)));
    return out;
}

/// Error cap for the full run under a satisfied SNR premise; the s = 1 and
/// s > 1 branches differ.
inline BoundValue recovery_error_bound(const CoherenceProfile& p, Index k, Index s,
                                       double shadow_product, double noise_norm) {
    if (s == 1) {
        const GramBounds w_k = gram_eigenvalue_bounds(p, static_cast<double>(k));
        if (w_k.lower <= 0.0) return bound_violated("gram lower bound nonpositive at k");
        return bound_ok(noise_norm / std::sqrt(w_k.lower));
    }
    const GramBounds w_a = gram_eigenvalue_bounds(p, shadow_product + static_cast<double>(k));
    const GramBounds w_ks = gram_eigenvalue_bounds(p, static_cast<double>(k) * s);
    if (w_a.lower <= 0.0) return bound_violated("gram lower bound nonpositive at shadow + k");
    if (w_ks.lower <= 0.0) return bound_violated("gram lower bound nonpositive at k*s");
    return bound_ok((1.0 + std::sqrt(w_a.upper) / std::sqrt(w_ks.lower)) * 2.0 * noise_norm /
                    std::sqrt(w_a.lower));
}

namespace detail {

inline double splitting_stage_value(int x, double s) {
    constexpr double e = 2.718281828459045235360287471352662498;
    return std::exp(static_cast<double>(x) - 2.0) * s * (e - 1.0) /
           (std::exp(static_cast<double>(x) - 1.0) - 1.0 + (e - 1.0) * x);
}

/// Smallest admissible splitting-stage count in 1..range_max; falls back to
/// range_max (flagged by the caller) when no stage is admissible.
inline std::pair<int, bool> splitting_stage(double remaining, double s) {
    constexpr double e = 2.718281828459045235360287471352662498;
    const int range_max =
        std::max(0, static_cast<int>(std::ceil(std::log(e * remaining / s)))) + 1;
    for (int x = 1; x <= range_max; ++x)
        if (splitting_stage_value(x, s) <= static_cast<double>(x)) return {x, true};
    return {range_max, false};
}

struct XiParts {
    double contraction = 0.0;  // the term compared against the Gram lower bound at k
    double beta = 0.0;
    bool beta_small = false;  // eta * beta < 1 held
};

inline BoundValue assemble_xi(const XiParts& parts, double gamma, double w_lower_k) {
    const double tail = std::sqrt((1.0 + 1.0 / gamma) / (1.0 - parts.beta));
    const double ratio = parts.contraction / w_lower_k;
    const double head = std::sqrt(parts.contraction) * (1.0 + tail) / std::sqrt(w_lower_k) /
                        (1.0 - std::sqrt(ratio));
    const double xi = head + tail;
    if (ratio >= 1.0)
        return bound_violated("contraction term reaches the gram lower bound at k", xi);
    return bound_ok(xi);
}

}  // namespace detail

/// Residual-to-noise amplification factors after exhausting the remaining
/// support (general-iterate form) and after exactly k iterations
/// (self-contained form with the pinned stage-count schedule).
struct ResidualNoiseFactors {
    BoundValue general;        // at iteration l with `remaining` support blocks left
    BoundValue self_contained; // after k iterations
    int stage_count = 1;       // stages used by the general form
    int stage_count_self = 1;  // stages used by the self-contained form
};

inline ResidualNoiseFactors residual_noise_factors(const CoherenceProfile& p, Index k, Index s,
                                                   Index iteration, Index remaining, double eta,
                                                   double gamma,
                                                   std::optional<int> stage_override = std::nullopt) {
    ResidualNoiseFactors out;
    constexpr double e = 2.718281828459045235360287471352662498;
    const double sd = static_cast<double>(s), kd = static_cast<double>(k);
    const double ld = static_cast<double>(iteration), theta = static_cast<double>(remaining);

    if (gamma <= 0.0) {
        out.general = bound_violated("gamma must be positive");
        out.self_contained = out.general;
        return out;
    }
    const GramBounds w_s = gram_eigenvalue_bounds(p, sd);
    const GramBounds w_k = gram_eigenvalue_bounds(p, kd);

    // General form: free eta, remaining = |support left|, after `iteration` picks.
    {
        auto [alpha, feasible] = detail::splitting_stage(theta, sd);
        if (stage_override) alpha = *stage_override, feasible = true;
        out.stage_count = alpha;
        const GramBounds w_mid = gram_eigenvalue_bounds(p, std::max(1.0, sd * ld + sd + theta));
        const GramBounds w_deep =
            gram_eigenvalue_bounds(p, std::max(1.0, sd * ld + sd * theta + theta));
        const GramBounds w_theta_n = gram_eigenvalue_bounds(p, std::pow(theta, p.modes));
        const double beta = std::exp(-alpha * w_deep.lower / w_s.upper);

        std::string why;
        if (!feasible) why = "no admissible stage count in range";
        else if (w_k.lower <= 0.0) why = "gram lower bound nonpositive at k";
        else if (w_deep.lower <= 0.0) why = "gram lower bound nonpositive at s*l + s*theta + theta";
        else if (w_mid.lower <= 0.0) why = "gram lower bound nonpositive at s*l + s + theta";
        else if (eta * beta >= 1.0) why = "eta * beta must be below 1";

        const double omega = std::max(1.0 / (eta * (1.0 - eta * beta)),
                                      1.0 - w_mid.lower / w_s.upper);
        const double contraction = omega * (1.0 + gamma) * w_theta_n.upper +
                                   (w_mid.lower / w_s.upper) * (1.0 + gamma) * w_theta_n.upper / eta;
        BoundValue v = detail::assemble_xi({contraction, beta, eta * beta < 1.0}, gamma,
                                           std::max(w_k.lower, 1e-300));
        if (!why.empty() && v.ok()) v = bound_violated(why, v.value);
        out.general = v;
    }

    // Self-contained form: remaining = k, iteration = 0, eta pinned so that
    // eta * beta = 1/e.
    {
        auto [alpha, feasible] = detail::splitting_stage(kd, sd);
        if (stage_override) alpha = *stage_override, feasible = true;
        out.stage_count_self = alpha;
        const GramBounds w_pin = gram_eigenvalue_bounds(p, std::max(1.0, sd * kd + kd));
        const GramBounds w_mid = gram_eigenvalue_bounds(p, std::max(1.0, sd + kd));
        const GramBounds w_k_n = gram_eigenvalue_bounds(p, std::pow(kd, p.modes));
        const double rate = w_pin.lower / w_s.upper;
        const double eta_pin = std::exp(alpha * rate) / e;
        const double beta = std::exp(-alpha * rate);

        std::string why;
        if (!feasible) why = "no admissible stage count in range";
        else if (w_pin.lower <= 0.0) why = "gram lower bound nonpositive at s*k + k";
        else if (w_k.lower <= 0.0) why = "gram lower bound nonpositive at k";

        const double omega = 1.0 / (eta_pin * (1.0 - 1.0 / e));
        const double contraction = omega * (1.0 + gamma) * w_k_n.upper +
                                   (w_mid.lower / w_s.upper) * (1.0 + gamma) * w_k_n.upper / eta_pin;
        BoundValue v = detail::assemble_xi({contraction, beta, true}, gamma,
                                           std::max(w_k.lower, 1e-300));
        if (!why.empty() && v.ok()) v = bound_violated(why, v.value);
        out.self_contained = v;
    }
    return out;
}

/// Error cap expressed through the self-contained residual factor.
inline BoundValue residual_based_error_bound(const CoherenceProfile& p, Index k, Index s,
                                             double shadow_product, double noise_norm,
                                             double xi_self) {
    const GramBounds w_pin =
        gram_eigenvalue_bounds(p, static_cast<double>(s) * k + static_cast<double>(k));
    const GramBounds w_a = gram_eigenvalue_bounds(p, shadow_product + static_cast<double>(k) * s);
    const GramBounds w_b = gram_eigenvalue_bounds(p, shadow_product + static_cast<double>(k));
    if (w_pin.lower <= 0.0) return bound_violated("gram lower bound nonpositive at s*k + k");
    if (w_a.lower <= 0.0) return bound_violated("gram lower bound nonpositive at shadow + k*s");
    if (w_b.lower <= 0.0) return bound_violated("gram lower bound nonpositive at shadow + k");
    return bound_ok(2.0 *
                    ((xi_self + 1.0) * std::sqrt(w_b.upper) / std::sqrt(w_a.lower) + 1.0) /
                    std::sqrt(w_b.lower) * noise_norm);
}

/// Named scalar results keyed by quantity, with input echoes; serializes to
/// one flat key/value CSV row.
class BoundReport {
public:
    void add(const std::string& key, double value, const std::string& flag = {}) {
        entries_.push_back({key, value, flag});
    }
    void add(const std::string& key, const BoundValue& v) { entries_.push_back({key, v.value, v.violated}); }

    struct Entry {
        std::string key;
        double value;
        std::string flag;
    };

    const std::vector<Entry>& entries() const { return entries_; }

    std::string to_csv() const {
        std::ostringstream header, row;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (i) header << ',', row << ',';
            header << entries_[i].key;
            if (!entries_[i].flag.empty())
                row << "violated:" << sanitize(entries_[i].flag);
            else {
                char buf[40];
                std::snprintf(buf, sizeof(buf), "%.17g", entries_[i].value);
                row << buf;
            }
        }
        return header.str() + "\n" + row.str() + "\n";
    }

private:
    static std::string sanitize(std::string s) {
        for (char& c : s)
            if (c == ',' || c == '\n') c = ';';
        return s;
    }
    std::vector<Entry> entries_;
};

}  // namespace bst
