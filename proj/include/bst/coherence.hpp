#pragma once

#include "bst/ensemble.hpp"

#include <cmath>
#include <limits>

namespace bst {

/// Largest singular value via a symmetric eigen-solve of the Gram matrix.
inline double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    const Matrix gram = (m.rows() <= m.cols()) ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// Max |<c_i, c_j>| over distinct unit columns; 0 for a single column.
inline double matrix_coherence(const Matrix& m) {
    if (m.cols() < 2) return 0.0;
    const Matrix gram = m.transpose() * m;
    double best = 0.0;
    for (Index i = 0; i < gram.rows(); ++i)
        for (Index j = 0; j < gram.cols(); ++j)
            if (i != j) best = std::max(best, std::abs(gram(i, j)));
    return best;
}

inline Index block_count_of(const Matrix& m, Index d) {
    if (d < 1 || m.cols() % d != 0)
        throw std::invalid_argument("matrix width not divisible by block length");
    return m.cols() / d;
}

/// Max cross-block Gram spectral norm divided by the block length.
inline double block_coherence(const Matrix& m, Index d) {
    const Index s = block_count_of(m, d);
    double best = 0.0;
    for (Index i = 0; i < s; ++i)
        for (Index j = i + 1; j < s; ++j) {
            const Matrix gram = m.middleCols(i * d, d).transpose() * m.middleCols(j * d, d);
            best = std::max(best, spectral_norm(gram) / static_cast<double>(d));
        }
    return best;
}

/// Max within-block inner product between distinct columns; 0 when d = 1.
inline double sub_coherence(const Matrix& m, Index d) {
    const Index s = block_count_of(m, d);
    if (d == 1) return 0.0;
    double best = 0.0;
    for (Index l = 0; l < s; ++l) {
        const Matrix gram = m.middleCols(l * d, d).transpose() * m.middleCols(l * d, d);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j)
                if (i != j) best = std::max(best, std::abs(gram(i, j)));
    }
    return best;
}

/// Largest diagonal block Gram spectral norm divided by the block length;
/// the shared-index factor in the t >= 1 mutual block coherence.
inline double shared_block_gain(const Matrix& m, Index d) {
    const Index s = block_count_of(m, d);
    double best = 0.0;
    for (Index i = 0; i < s; ++i) {
        const Matrix gram = m.middleCols(i * d, d).transpose() * m.middleCols(i * d, d);
        best = std::max(best, spectral_norm(gram) / static_cast<double>(d));
    }
    return best;
}

namespace detail {

/// Max over size-t mode subsets S of (prod_{l in S} shared[l] *
/// prod_{l not in S} crossed[l]) ^ exponent.
inline double max_over_subsets(const std::vector<double>& shared, const std::vector<double>& crossed,
                               int t, double exponent) {
    const int n = static_cast<int>(shared.size());
    double best = 0.0;
    // n is small (tensor mode count); enumerate subsets by bitmask.
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != t) continue;
        double prod = 1.0;
        for (int l = 0; l < n; ++l) prod *= (mask & (1u << l)) ? shared[l] : crossed[l];
        best = std::max(best, std::pow(prod, exponent));
    }
    return best;
}

}  // namespace detail

/// Mutual block coherence with t shared mode indices (0 <= t <= n-1),
/// computed via the per-mode Kronecker factorization.
inline double mutual_block_coherence(const MeasurementEnsemble& e, int t) {
    const int n = e.modes();
    if (t < 0 || t >= n) throw std::out_of_range("shared index count out of range");
    std::vector<double> mu(n), gain(n);
    for (int l = 0; l < n; ++l) {
        mu[l] = block_coherence(e.matrix(l), e.structure().d[l]);
        gain[l] = shared_block_gain(e.matrix(l), e.structure().d[l]);
    }
    return detail::max_over_subsets(gain, mu, t, 1.0 / n);
}

/// Mutual sub-coherence with t shared mode indices; 0 when every block
/// length is 1.
inline double mutual_sub_coherence(const MeasurementEnsemble& e, int t) {
    const int n = e.modes();
    if (t < 0 || t >= n) throw std::out_of_range("shared index count out of range");
    bool all_scalar = true;
    for (int l = 0; l < n; ++l)
        if (e.structure().d[l] != 1) all_scalar = false;
    if (all_scalar) return 0.0;

    std::vector<double> nu(n), ones(n, 1.0);
    for (int l = 0; l < n; ++l) nu[l] = sub_coherence(e.matrix(l), e.structure().d[l]);
    return detail::max_over_subsets(ones, nu, t, 1.0 / (n - t));
}

/// Every coherence quantity a bound evaluator needs, by shared-index count.
struct CoherenceProfile {
    int modes = 0;
    std::vector<Index> d;             // block lengths
    std::vector<double> mu;           // per-matrix block coherence
    std::vector<double> nu;           // per-matrix sub-coherence
    std::vector<double> mu_plain;     // per-matrix matrix coherence
    std::vector<double> mutual_block; // t = 0..n-1
    std::vector<double> mutual_sub;   // t = 0..n-1

    Index block_volume() const {
        Index v = 1;
        for (Index di : d) v *= di;
        return v;
    }
};

inline CoherenceProfile coherence_profile(const MeasurementEnsemble& e) {
    CoherenceProfile p;
    p.modes = e.modes();
    p.d = e.structure().d;
    p.mu.resize(p.modes);
    p.nu.resize(p.modes);
    p.mu_plain.resize(p.modes);
    for (int l = 0; l < p.modes; ++l) {
        p.mu[l] = block_coherence(e.matrix(l), e.structure().d[l]);
        p.nu[l] = sub_coherence(e.matrix(l), e.structure().d[l]);
        p.mu_plain[l] = matrix_coherence(e.matrix(l));
    }
    p.mutual_block.resize(p.modes);
    p.mutual_sub.resize(p.modes);
    for (int t = 0; t < p.modes; ++t) {
        p.mutual_block[t] = mutual_block_coherence(e, t);
        p.mutual_sub[t] = mutual_sub_coherence(e, t);
    }
    return p;
}

/// Fallback for modes with irregular block lengths: treat the listed modes
/// as unblocked (d_t = 1) and recompute the profile.
inline CoherenceProfile irregular_fallback_coherence(const MeasurementEnsemble& e,
                                                     const std::vector<int>& irregular_modes) {
    BlockStructure bs = e.structure();
    for (int t : irregular_modes) {
        if (t < 0 || t >= e.modes()) throw std::out_of_range("irregular mode out of range");
        bs.s[t] = bs.signal_dim(t);
        bs.d[t] = 1;
    }
    MeasurementEnsemble relabeled(e.matrices(), bs);
    return coherence_profile(relabeled);
}

inline std::vector<Index> shadow_sparsity(const BlockSupport& support) {
    return support.shadow_sparsity();
}

struct BlockMixedNorms {
    double row = 0.0;     // max block-row sum of block spectral norms
    double column = 0.0;  // max block-column sum
};

inline BlockMixedNorms block_mixed_norms(const Matrix& m, Index d) {
    if (d < 1 || m.rows() % d != 0 || m.cols() % d != 0)
        throw std::invalid_argument("matrix dimensions not divisible by block length");
    const Index rb = m.rows() / d, cb = m.cols() / d;
    Matrix norms(rb, cb);
    for (Index i = 0; i < rb; ++i)
        for (Index j = 0; j < cb; ++j) norms(i, j) = spectral_norm(m.block(i * d, j * d, d, d));
    BlockMixedNorms out;
    out.row = norms.rowwise().sum().maxCoeff();
    out.column = norms.colwise().sum().maxCoeff();
    return out;
}

/// ||X x1 D1 ... xn Dn||_F^2 / ||N||_F^2; infinity when the noise is zero.
inline double snr(const DenseTensor& x, const MeasurementEnsemble& e, const DenseTensor& noise) {
    const DenseTensor image = e.measure(x);
    if (!image.same_shape(noise)) throw std::invalid_argument("noise shape mismatch");
    const double noise_power = noise.values().squaredNorm();
    if (noise_power == 0.0) return std::numeric_limits<double>::infinity();
    return image.values().squaredNorm() / noise_power;
}

inline double snr_db(double ratio) { return 10.0 * std::log10(ratio); }

/// sqrt(k) * min supported block norm / ||X||_F, in (0, 1].
inline double min_to_average_ratio(const DenseTensor& x, const BlockSupport& support) {
    if (support.empty()) throw std::invalid_argument("empty support");
    const BlockStructure& bs = support.structure();
    if (!bs.conforms(x.shape())) throw std::invalid_argument("tensor does not conform to structure");

    const int n = bs.modes();
    double min_norm = std::numeric_limits<double>::infinity();
    for (const auto& tuple : support.tuples()) {
        double sq = 0.0;
        std::vector<Index> odo(n, 0);
        const Index volume = bs.block_volume();
        for (Index c = 0; c < volume; ++c) {
            std::vector<Index> idx(n);
            for (int t = 0; t < n; ++t) idx[t] = tuple[t] * bs.d[t] + odo[t];
            const double v = x[x.offset(idx)];
            sq += v * v;
            for (int t = 0; t < n; ++t) {
                if (++odo[t] < bs.d[t]) break;
                odo[t] = 0;
            }
        }
        if (sq == 0.0) throw std::invalid_argument("supported block with zero norm; ratio undefined");
        min_norm = std::min(min_norm, std::sqrt(sq));
    }
    return std::sqrt(static_cast<double>(support.cardinality())) * min_norm / x.frobenius_norm();
}

}  // namespace bst
