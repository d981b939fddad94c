#pragma once

#include "bst/bounds.hpp"
#include "bst/datagen.hpp"
#include "bst/ensemble.hpp"

#include <optional>

namespace bst {

enum class SelectionRule { match, ols_1mode };

struct RecoveryConfig {
    Index k = 1;               // block sparsity budget
    Index s = 1;               // tuples selected per iteration; may exceed k,
                               // the final pruning keeps the best k blocks
    double eps = -1.0;         // residual tolerance; negative = 1e-6 * ||Y||_F
    Index max_iterations = -1; // negative = k
    SelectionRule rule = SelectionRule::match;
    bool prune_to_k = true;
    std::optional<BlockSupport> erc_reference;  // trace ERC margins against this support
};

struct RecoveryResult {
    DenseTensor estimate;
    BlockSupport support;
    std::vector<double> residual_norms;  // ||R^0||, ||R^1||, ...
    Index iterations = 0;
    std::vector<double> erc_margins;     // per iteration, when traced
    bool rank_deficient = false;         // minimum-norm fallback was used
    double orthogonality_defect = 0.0;   // max_l ||D^T vec(R^l)|| / ||Y||_F
};

struct LeastSquaresFit {
    Vector coefficients;  // block-major, tuple order of the support
    Vector residual;      // vec(Y) - D * coefficients
    bool rank_deficient = false;
};

/// Minimizes ||vec(Y) - D c|| over the cascading operator of the support;
/// minimum-norm solution with a flag when the operator is rank deficient.
inline LeastSquaresFit least_squares_on_support(const DenseTensor& y,
                                                const MeasurementEnsemble& e,
                                                const BlockSupport& support) {
    if (support.empty()) throw std::invalid_argument("least squares needs a nonempty support");
    const CascadingOperator op = build_cascading(e, support);
    // Near-parallel selections must fall back to the minimum-norm solution
    // instead of producing huge cancelling coefficients.
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
    cod.setThreshold(1e-10);
    cod.compute(op.matrix());
    LeastSquaresFit fit;
    fit.coefficients = cod.solve(vectorize(y));
    fit.residual = vectorize(y) - op.matrix() * fit.coefficients;
    fit.rank_deficient = cod.rank() < op.matrix().cols();
    return fit;
}

/// Scatters block-major coefficients back into a dense signal tensor.
inline DenseTensor scatter_coefficients(const Vector& coeffs, const BlockSupport& support) {
    const BlockStructure& bs = support.structure();
    const int n = bs.modes();
    const Index volume = bs.block_volume();
    DenseTensor x(bs.signal_shape());
    for (Index j = 0; j < support.cardinality(); ++j) {
        const auto& tuple = support.tuples()[j];
        std::vector<Index> odo(n, 0);
        for (Index c = 0; c < volume; ++c) {
            std::vector<Index> idx(n);
            for (int t = 0; t < n; ++t) idx[t] = tuple[t] * bs.d[t] + odo[t];
            x[x.offset(idx)] = coeffs[j * volume + c];
            for (int t = 0; t < n; ++t) {
                if (++odo[t] < bs.d[t]) break;
                odo[t] = 0;
            }
        }
    }
    return x;
}

namespace detail {

/// Squared block correlation per block id (first mode fastest), computed in
/// one pass from the back-projected residual.
inline std::vector<double> block_scores(const DenseTensor& corr, const BlockStructure& bs) {
    std::vector<double> scores(bs.block_count(), 0.0);
    const int n = bs.modes();
    std::vector<Index> idx(n, 0);
    for (Index flat = 0; flat < corr.size(); ++flat) {
        Index block = 0, stride = 1;
        for (int t = 0; t < n; ++t) {
            block += (idx[t] / bs.d[t]) * stride;
            stride *= bs.s[t];
        }
        scores[block] += corr[flat] * corr[flat];
        for (int t = 0; t < n; ++t) {
            if (++idx[t] < corr.dim(t)) break;
            idx[t] = 0;
        }
    }
    return scores;
}

inline void keep_best_k(RecoveryResult& result, const BlockStructure& bs, Index k) {
    if (result.support.cardinality() <= k) return;
    const Index volume = bs.block_volume();
    std::vector<std::pair<double, Index>> ranked;  // (block norm^2, position)
    for (Index j = 0; j < result.support.cardinality(); ++j) {
        const auto& tuple = result.support.tuples()[j];
        BlockSupport one(bs);
        one.insert(tuple);
        const double norm = shadow_extract(result.estimate, one).frobenius_norm();
        ranked.emplace_back(norm, j);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return result.support.tuples()[a.second] < result.support.tuples()[b.second];
    });

    BlockSupport pruned(bs);
    std::vector<Index> kept;
    for (Index j = 0; j < k; ++j) kept.push_back(ranked[j].second);
    std::sort(kept.begin(), kept.end());  // preserve selection order among survivors
    for (Index j : kept) pruned.insert(result.support.tuples()[j]);

    DenseTensor zeroed(result.estimate.shape());
    const int n = bs.modes();
    for (const auto& tuple : pruned.tuples()) {
        std::vector<Index> odo(n, 0);
        for (Index c = 0; c < volume; ++c) {
            std::vector<Index> idx(n);
            for (int t = 0; t < n; ++t) idx[t] = tuple[t] * bs.d[t] + odo[t];
            zeroed[zeroed.offset(idx)] = result.estimate[result.estimate.offset(idx)];
            for (int t = 0; t < n; ++t) {
                if (++odo[t] < bs.d[t]) break;
                odo[t] = 0;
            }
        }
    }
    result.estimate = std::move(zeroed);
    result.support = std::move(pruned);
}

}  // namespace detail

/// One-shot matched-selection recovery: per iteration score every unselected
/// block tuple by residual correlation, keep the s best, refit by least
/// squares, and stop at the sparsity budget or the residual tolerance.
/// The final estimate is pruned to the k largest blocks.
inline RecoveryResult tgbomp(const DenseTensor& y, const MeasurementEnsemble& e,
                             const RecoveryConfig& cfg) {
    if (y.shape() != e.measurement_shape())
        throw std::invalid_argument("measurement shape mismatch");
    if (cfg.k < 1) throw std::invalid_argument("sparsity budget must be >= 1");
    if (cfg.s < 1) throw std::invalid_argument("selection count must be >= 1");

    const BlockStructure& bs = e.structure();
    const double y_norm = y.frobenius_norm();
    const double eps = cfg.eps >= 0.0 ? cfg.eps : 1e-6 * y_norm;
    const Index max_iter = cfg.max_iterations > 0 ? cfg.max_iterations : cfg.k;

    RecoveryResult result;
    result.estimate = DenseTensor(bs.signal_shape());
    result.support = BlockSupport(bs);
    DenseTensor residual = y;
    result.residual_norms.push_back(residual.frobenius_norm());

    std::vector<bool> selected(bs.block_count(), false);

    while (result.iterations < max_iter && result.residual_norms.back() > eps) {
        if (cfg.erc_reference) {
            try {
                result.erc_margins.push_back(
                    check_erc(e, *cfg.erc_reference, residual, cfg.s).margin);
            } catch (const std::exception&) {
                result.erc_margins.push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }

        const DenseTensor corr = e.correlate(residual);
        const std::vector<double> scores = detail::block_scores(corr, bs);

        // Top s unselected block ids; ties go to the lexicographically
        // smallest tuple, which in first-mode-fastest encoding is the
        // smallest id under the reversed-tuple order.
        std::vector<Index> pool;
        for (Index id = 0; id < bs.block_count(); ++id)
            if (!selected[id]) pool.push_back(id);
        if (pool.empty()) break;

        const Index take = std::min<Index>(cfg.s, static_cast<Index>(pool.size()));
        std::stable_sort(pool.begin(), pool.end(), [&](Index a, Index b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return decode_block_id(a, bs) < decode_block_id(b, bs);
        });
        for (Index j = 0; j < take; ++j) {
            selected[pool[j]] = true;
            result.support.insert(decode_block_id(pool[j], bs));
        }

        LeastSquaresFit fit = least_squares_on_support(y, e, result.support);
        result.rank_deficient = result.rank_deficient || fit.rank_deficient;
        result.estimate = scatter_coefficients(fit.coefficients, result.support);
        residual = devectorize(y.shape(), fit.residual);

        const CascadingOperator op = build_cascading(e, result.support);
        if (y_norm > 0.0)
            result.orthogonality_defect =
                std::max(result.orthogonality_defect,
                         (op.matrix().transpose() * fit.residual).norm() / y_norm);
        result.residual_norms.push_back(residual.frobenius_norm());
        ++result.iterations;
    }

    if (cfg.prune_to_k) detail::keep_best_k(result, bs, cfg.k);
    return result;
}

/// Block orthogonal-least-squares baseline for 1-mode data: candidate
/// blocks are scored by the norm of their projection-normalized
/// correlations, one block per iteration.
inline RecoveryResult bols_1mode(const Vector& y, const Matrix& dictionary, Index d, Index k,
                                 double eps = -1.0) {
    if (dictionary.rows() != y.size()) throw std::invalid_argument("dictionary height mismatch");
    if (d < 1 || dictionary.cols() % d != 0)
        throw std::invalid_argument("dictionary width not divisible by block length");
    const Index s_blocks = dictionary.cols() / d;
    if (k < 1 || k > s_blocks) throw std::invalid_argument("sparsity budget out of range");
    const BlockStructure bs({d}, {s_blocks});

    const double y_norm = y.norm();
    const double tol = eps >= 0.0 ? eps : 1e-6 * y_norm;
    constexpr double span_tol = 1e-10;

    RecoveryResult result;
    result.support = BlockSupport(bs);
    result.estimate = DenseTensor({dictionary.cols()});
    Vector residual = y;
    result.residual_norms.push_back(residual.norm());
    std::vector<bool> picked(s_blocks, false);
    std::vector<Index> cols_selected;

    while (result.iterations < k && result.residual_norms.back() > tol) {
        Matrix q;  // orthonormal basis of the selected span
        if (!cols_selected.empty()) {
            Matrix sub(dictionary.rows(), static_cast<Index>(cols_selected.size()));
            for (std::size_t j = 0; j < cols_selected.size(); ++j)
                sub.col(static_cast<Index>(j)) = dictionary.col(cols_selected[j]);
            Eigen::HouseholderQR<Matrix> qr(sub);
            q = qr.householderQ() * Matrix::Identity(sub.rows(), sub.cols());
        }

        Index best = -1;
        double best_score = -1.0;
        for (Index b = 0; b < s_blocks; ++b) {
            if (picked[b]) continue;
            double score = 0.0;
            bool outside_span = false;
            for (Index c = 0; c < d; ++c) {
                Vector col = dictionary.col(b * d + c);
                Vector w = col;
                if (q.size() > 0) w -= q * (q.transpose() * col);
                const double pc = w.norm();
                if (pc <= span_tol) continue;  // column already in span
                outside_span = true;
                const double num = col.dot(residual);
                score += (num / pc) * (num / pc);
            }
            if (!outside_span) continue;  // candidate fully inside the span
            if (score > best_score + 0.0) {
                best_score = score;
                best = b;
            }
        }
        if (best < 0) break;

        picked[best] = true;
        result.support.insert({best});
        for (Index c = 0; c < d; ++c) cols_selected.push_back(best * d + c);

        Matrix sub(dictionary.rows(), static_cast<Index>(cols_selected.size()));
        for (std::size_t j = 0; j < cols_selected.size(); ++j)
            sub.col(static_cast<Index>(j)) = dictionary.col(cols_selected[j]);
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sub);
        const Vector coeffs = cod.solve(y);
        result.rank_deficient = result.rank_deficient || cod.rank() < sub.cols();
        residual = y - sub * coeffs;

        Vector full = Vector::Zero(dictionary.cols());
        for (std::size_t j = 0; j < cols_selected.size(); ++j)
            full[cols_selected[j]] = coeffs[static_cast<Index>(j)];
        result.estimate = DenseTensor({dictionary.cols()}, full);

        if (y_norm > 0.0)
            result.orthogonality_defect = std::max(
                result.orthogonality_defect, (sub.transpose() * residual).norm() / y_norm);
        result.residual_norms.push_back(residual.norm());
        ++result.iterations;
    }
    return result;
}

enum class Variant { omp, bomp, bols, t_omp, t_bomp, t_gomp, t_gbomp, cosamp_style };

inline Variant variant_from_name(const std::string& name) {
    if (name == "omp") return Variant::omp;
    if (name == "bomp") return Variant::bomp;
    if (name == "bols") return Variant::bols;
    if (name == "t-omp") return Variant::t_omp;
    if (name == "t-bomp") return Variant::t_bomp;
    if (name == "t-gomp") return Variant::t_gomp;
    if (name == "t-gbomp") return Variant::t_gbomp;
    if (name == "cosamp-style") return Variant::cosamp_style;
    throw std::invalid_argument("unknown algorithm variant: " + name);
}

/// Rebuilds the ensemble with every mode unblocked (d_i = 1).
inline MeasurementEnsemble scalarized(const MeasurementEnsemble& e) {
    BlockStructure bs = e.structure();
    for (int t = 0; t < bs.modes(); ++t) {
        bs.s[t] = bs.signal_dim(t);
        bs.d[t] = 1;
    }
    return MeasurementEnsemble(e.matrices(), bs);
}

/// The block dictionary used by the flattened 1-mode baselines: one
/// contiguous column block per tensor block tuple, tuple ids first mode
/// fastest, so block j of the dictionary matches block id j of the tensor.
inline Matrix grouped_dictionary(const MeasurementEnsemble& e) {
    const BlockStructure& bs = e.structure();
    BlockSupport all(bs);
    for (Index id = 0; id < bs.block_count(); ++id) all.insert(decode_block_id(id, bs));
    return build_cascading(e, all).matrix();
}

/// Flat signal-tensor indices covered by a support (tuples expanded over
/// their blocks). The support's grammar must share the signal shape.
inline std::set<Index> scalar_support(const BlockSupport& support) {
    const BlockStructure& bs = support.structure();
    const int n = bs.modes();
    std::vector<Index> strides(n);
    Index stride = 1;
    for (int t = 0; t < n; ++t) {
        strides[t] = stride;
        stride *= bs.signal_dim(t);
    }
    std::set<Index> out;
    for (const auto& tuple : support.tuples()) {
        std::vector<Index> odo(n, 0);
        for (Index c = 0; c < bs.block_volume(); ++c) {
            Index flat = 0;
            for (int t = 0; t < n; ++t) flat += (tuple[t] * bs.d[t] + odo[t]) * strides[t];
            out.insert(flat);
            for (int t = 0; t < n; ++t) {
                if (++odo[t] < bs.d[t]) break;
                odo[t] = 0;
            }
        }
    }
    return out;
}

/// A variant run mapped back onto the original signal grammar: the estimate
/// reshaped to the signal tensor and the selected support as flat scalar
/// indices, so metrics compare algorithms with different granularities.
struct VariantOutcome {
    RecoveryResult raw;
    DenseTensor estimate;             // original signal shape
    std::set<Index> selected_scalars; // flat signal-tensor indices
};

/// Dispatches a named degeneration of the matched-selection algorithm with
/// the parameter collapse that defines it.
inline VariantOutcome run_variant(Variant variant, const DenseTensor& y,
                                  const MeasurementEnsemble& e, Index k, Index s,
                                  double eps = -1.0) {
    const BlockStructure& orig = e.structure();
    const Index volume = orig.block_volume();
    const Index total_sparsity = k * volume;

    auto tensor_outcome = [&](RecoveryResult r) {
        VariantOutcome out;
        out.estimate = r.estimate;
        out.selected_scalars = scalar_support(r.support);
        out.raw = std::move(r);
        return out;
    };
    auto config = [&](Index budget, Index pick) {
        RecoveryConfig cfg;
        cfg.k = budget;
        cfg.s = pick;
        cfg.eps = eps;
        return cfg;
    };

    switch (variant) {
        case Variant::t_gbomp:
            return tensor_outcome(tgbomp(y, e, config(k, s)));
        case Variant::t_bomp:
            return tensor_outcome(tgbomp(y, e, config(k, 1)));
        case Variant::t_gomp: {
            MeasurementEnsemble flat = scalarized(e);
            return tensor_outcome(tgbomp(y, flat, config(total_sparsity, s)));
        }
        case Variant::t_omp: {
            MeasurementEnsemble flat = scalarized(e);
            return tensor_outcome(tgbomp(y, flat, config(total_sparsity, 1)));
        }
        case Variant::cosamp_style: {
            MeasurementEnsemble flat = scalarized(e);
            return tensor_outcome(
                tgbomp(y, flat, config(total_sparsity, total_sparsity)));
        }
        case Variant::omp: {
            // Fully vectorized problem; column order matches vec(X).
            const Matrix dict = kron_chain(e.matrices());
            const BlockStructure bs({1}, {dict.cols()});
            MeasurementEnsemble one({dict}, bs);
            DenseTensor y1({vectorize(y).size()}, vectorize(y));
            RecoveryResult r = tgbomp(y1, one, config(total_sparsity, 1));
            VariantOutcome out;
            out.estimate = devectorize(orig.signal_shape(), r.estimate.values());
            for (const auto& tuple : r.support.tuples()) out.selected_scalars.insert(tuple[0]);
            out.raw = std::move(r);
            return out;
        }
        case Variant::bomp:
        case Variant::bols: {
            // Flattened problem with one contiguous dictionary block per
            // tensor block; block sparsity is exploited, tensor structure
            // is not.
            const Matrix dict = grouped_dictionary(e);
            const BlockStructure bs({volume}, {orig.block_count()});
            RecoveryResult r;
            if (variant == Variant::bomp) {
                MeasurementEnsemble one({dict}, bs);
                DenseTensor y1({vectorize(y).size()}, vectorize(y));
                r = tgbomp(y1, one, config(k, 1));
            } else {
                r = bols_1mode(vectorize(y), dict, volume, k, eps);
            }
            VariantOutcome out;
            BlockSupport mapped(orig);
            for (const auto& tuple : r.support.tuples())
                mapped.insert(decode_block_id(tuple[0], orig));
            out.selected_scalars = scalar_support(mapped);
            Vector grouped = r.estimate.values();
            BlockSupport all(orig);
            for (Index id = 0; id < orig.block_count(); ++id)
                all.insert(decode_block_id(id, orig));
            out.estimate = scatter_coefficients(grouped, all);
            out.raw = std::move(r);
            return out;
        }
    }
    throw std::invalid_argument("unknown variant");
}

}  // namespace bst
