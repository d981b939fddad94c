#pragma once

#include "bst/ensemble.hpp"
#include "bst/rng.hpp"

namespace bst {

enum class EnsembleStyle {
    gaussian,                  // iid normal entries, columns normalized
    gaussian_block_orthogonal, // each column block orthonormalized
    high_coherence_small_dim,  // gaussian with deliberately few rows
};

struct EnsembleSpec {
    std::vector<Index> measurement_dims;  // M_i per mode
    BlockStructure structure;
    EnsembleStyle style = EnsembleStyle::gaussian;
    std::uint64_t seed = 0;
};

inline MeasurementEnsemble gen_ensemble(const EnsembleSpec& spec) {
    const int n = spec.structure.modes();
    if (static_cast<int>(spec.measurement_dims.size()) != n)
        throw std::invalid_argument("one measurement dimension per mode required");

    std::vector<Matrix> mats(n);
    for (int i = 0; i < n; ++i) {
        const Index rows = spec.measurement_dims[i];
        const Index cols = spec.structure.signal_dim(i);
        const Index d = spec.structure.d[i];
        if (rows < 1) throw std::invalid_argument("measurement dimension must be >= 1");
        if (spec.style == EnsembleStyle::gaussian_block_orthogonal && rows < d)
            throw std::invalid_argument("block orthogonalization needs at least d rows");

        CounterRng rng(spec.seed, static_cast<std::uint64_t>(i), RngStream::ensemble);
        Matrix m(rows, cols);
        for (Index c = 0; c < cols; ++c)
            for (Index r = 0; r < rows; ++r) m(r, c) = rng.next_gaussian();

        if (spec.style == EnsembleStyle::gaussian_block_orthogonal) {
            for (Index b = 0; b < spec.structure.s[i]; ++b) {
                auto block = m.middleCols(b * d, d);
                for (Index c = 0; c < d; ++c) {
                    for (Index prev = 0; prev < c; ++prev)
                        block.col(c) -= block.col(prev).dot(block.col(c)) * block.col(prev);
                    const double norm = block.col(c).norm();
                    if (norm < 1e-12) throw std::runtime_error("degenerate block draw");
                    block.col(c) /= norm;
                }
            }
        } else {
            for (Index c = 0; c < cols; ++c) m.col(c) /= m.col(c).norm();
        }
        mats[i] = std::move(m);
    }
    return MeasurementEnsemble(std::move(mats), spec.structure);
}

enum class SignalFamily { gaussian, two_pam };

struct SignalSpec {
    BlockStructure structure;
    Index k = 1;  // block sparsity
    SignalFamily family = SignalFamily::gaussian;
    std::uint64_t seed = 0;
};

/// Decodes a flat block id into a block index tuple (first mode fastest).
inline BlockIndexTuple decode_block_id(Index flat, const BlockStructure& bs) {
    BlockIndexTuple tuple(bs.modes());
    for (int t = 0; t < bs.modes(); ++t) {
        tuple[t] = flat % bs.s[t];
        flat /= bs.s[t];
    }
    return tuple;
}

inline Index encode_block_id(const BlockIndexTuple& tuple, const BlockStructure& bs) {
    Index flat = 0, stride = 1;
    for (int t = 0; t < bs.modes(); ++t) {
        flat += tuple[t] * stride;
        stride *= bs.s[t];
    }
    return flat;
}

inline std::pair<DenseTensor, BlockSupport> gen_signal(const SignalSpec& spec) {
    const BlockStructure& bs = spec.structure;
    const Index total = bs.block_count();
    if (spec.k < 1 || spec.k > total)
        throw std::invalid_argument("block sparsity must be in [1, number of blocks]");

    // k distinct block ids, uniform without replacement (partial shuffle).
    CounterRng pick(spec.seed, 0, RngStream::signal_support);
    std::vector<Index> ids(total);
    std::iota(ids.begin(), ids.end(), Index{0});
    BlockSupport support(bs);
    for (Index j = 0; j < spec.k; ++j) {
        const Index r = j + static_cast<Index>(pick.next_below(total - j));
        std::swap(ids[j], ids[r]);
        support.insert(decode_block_id(ids[j], bs));
    }

    CounterRng values(spec.seed, 1, RngStream::signal_values);
    DenseTensor x(bs.signal_shape());
    const int n = bs.modes();
    for (const auto& tuple : support.tuples()) {
        std::vector<Index> odo(n, 0);
        for (Index c = 0; c < bs.block_volume(); ++c) {
            std::vector<Index> idx(n);
            for (int t = 0; t < n; ++t) idx[t] = tuple[t] * bs.d[t] + odo[t];
            x[x.offset(idx)] = spec.family == SignalFamily::gaussian
                                   ? values.next_gaussian()
                                   : (values.next_u64() & 1 ? 1.0 : -1.0);
            for (int t = 0; t < n; ++t) {
                if (++odo[t] < bs.d[t]) break;
                odo[t] = 0;
            }
        }
    }
    return {std::move(x), std::move(support)};
}

/// Adds a Gaussian-direction noise tensor rescaled so the realized SNR
/// equals the target exactly; returns (noisy measurement, noise).
inline std::pair<DenseTensor, DenseTensor> add_noise(const DenseTensor& y_clean,
                                                     double target_snr_db, std::uint64_t seed) {
    const double clean_norm = y_clean.frobenius_norm();
    if (clean_norm == 0.0) throw std::invalid_argument("cannot calibrate noise on a zero signal");

    CounterRng rng(seed, 0, RngStream::noise);
    Vector g(y_clean.size());
    for (Index i = 0; i < g.size(); ++i) g[i] = rng.next_gaussian();
    const double target_norm = clean_norm / std::pow(10.0, target_snr_db / 20.0);
    g *= target_norm / g.norm();

    DenseTensor noise(y_clean.shape(), std::move(g));
    return {y_clean + noise, std::move(noise)};
}

}  // namespace bst
