#pragma once

#include "bst/tensor.hpp"

namespace bst {

inline Matrix kronecker(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Dn (x) D(n-1) (x) ... (x) D1 for a per-mode matrix list, matching the
/// mode-1-fastest vectorization convention.
inline Matrix kron_chain(const std::vector<Matrix>& ms) {
    if (ms.empty()) throw std::invalid_argument("empty matrix list");
    Matrix out = ms.back();
    for (int t = static_cast<int>(ms.size()) - 2; t >= 0; --t) out = kronecker(out, ms[t]);
    return out;
}

/// The measurement matrix set: one M_i x (s_i d_i) matrix per mode, all
/// columns unit-norm.
class MeasurementEnsemble {
public:
    static constexpr double kUnitNormTol = 1e-10;

    MeasurementEnsemble(std::vector<Matrix> matrices, BlockStructure structure)
        : matrices_(std::move(matrices)), structure_(std::move(structure)) {
        if (matrices_.empty()) throw std::invalid_argument("ensemble needs at least one matrix");
        if (static_cast<int>(matrices_.size()) != structure_.modes())
            throw std::invalid_argument("one matrix per mode required");
        for (int i = 0; i < modes(); ++i) {
            if (matrices_[i].cols() != structure_.signal_dim(i))
                throw std::invalid_argument("matrix width does not match block structure");
            for (Index c = 0; c < matrices_[i].cols(); ++c)
                if (std::abs(matrices_[i].col(c).norm() - 1.0) > kUnitNormTol)
                    throw std::invalid_argument("ensemble columns must have unit norm");
        }
    }

    /// Column-normalizes raw matrices before construction.
    static MeasurementEnsemble renormalized(std::vector<Matrix> matrices, BlockStructure structure) {
        for (auto& m : matrices)
            for (Index c = 0; c < m.cols(); ++c) {
                const double norm = m.col(c).norm();
                if (norm == 0.0) throw std::invalid_argument("cannot normalize a zero column");
                m.col(c) /= norm;
            }
        return MeasurementEnsemble(std::move(matrices), std::move(structure));
    }

    int modes() const { return static_cast<int>(matrices_.size()); }
    const std::vector<Matrix>& matrices() const { return matrices_; }
    const Matrix& matrix(int mode) const { return matrices_.at(mode); }
    const BlockStructure& structure() const { return structure_; }

    Index measurement_dim(int mode) const { return matrices_[mode].rows(); }

    std::vector<Index> measurement_shape() const {
        std::vector<Index> m(modes());
        for (int i = 0; i < modes(); ++i) m[i] = matrices_[i].rows();
        return m;
    }

    /// The j-th column-block submatrix of mode `mode` (width d_mode).
    Eigen::Block<const Matrix> block(int mode, Index j) const {
        const Index d = structure_.d[mode];
        return matrices_[mode].block(0, j * d, matrices_[mode].rows(), d);
    }

    DenseTensor measure(const DenseTensor& x) const { return multi_mode_product(x, matrices_); }

    /// Back-projection R x1 D1^T x2 ... xn Dn^T; tuple block norms of the
    /// result are the selection scores.
    DenseTensor correlate(const DenseTensor& r) const {
        DenseTensor out = r;
        for (int t = 0; t < modes(); ++t) out = mode_product(out, matrices_[t].transpose(), t);
        return out;
    }

private:
    std::vector<Matrix> matrices_;
    BlockStructure structure_;
};

/// Horizontal concatenation of D_{n,[i_n]} (x) ... (x) D_{1,[i_1]} over the
/// support tuples, in tuple order. The effective dictionary on a support.
class CascadingOperator {
public:
    CascadingOperator(const MeasurementEnsemble& ensemble, const BlockSupport& support)
        : tuples_(support.tuples()), block_width_(ensemble.structure().block_volume()) {
        Index rows = 1;
        for (int i = 0; i < ensemble.modes(); ++i) rows *= ensemble.measurement_dim(i);
        matrix_.resize(rows, static_cast<Index>(tuples_.size()) * block_width_);
        for (std::size_t j = 0; j < tuples_.size(); ++j) {
            std::vector<Matrix> blocks(ensemble.modes());
            for (int t = 0; t < ensemble.modes(); ++t) blocks[t] = ensemble.block(t, tuples_[j][t]);
            matrix_.middleCols(static_cast<Index>(j) * block_width_, block_width_) = kron_chain(blocks);
        }
    }

    const Matrix& matrix() const { return matrix_; }
    const std::vector<BlockIndexTuple>& tuples() const { return tuples_; }
    Index block_width() const { return block_width_; }
    Index block_count() const { return static_cast<Index>(tuples_.size()); }

    Eigen::Block<const Matrix> block(Index j) const {
        return matrix_.block(0, j * block_width_, matrix_.rows(), block_width_);
    }

private:
    std::vector<BlockIndexTuple> tuples_;
    Index block_width_;
    Matrix matrix_;
};

inline CascadingOperator build_cascading(const MeasurementEnsemble& ensemble,
                                         const BlockSupport& support) {
    return CascadingOperator(ensemble, support);
}

/// Frobenius norm of the residual back-projected onto one block tuple,
/// || R x1 D_{1,[i_1]}^T x2 ... xn D_{n,[i_n]}^T ||_F.
inline double block_correlation(const DenseTensor& r, const MeasurementEnsemble& ensemble,
                                const BlockIndexTuple& tuple) {
    if (static_cast<int>(tuple.size()) != ensemble.modes())
        throw std::invalid_argument("tuple rank mismatch");
    DenseTensor out = r;
    for (int t = 0; t < ensemble.modes(); ++t) {
        if (tuple[t] < 0 || tuple[t] >= ensemble.structure().s[t])
            throw std::out_of_range("block index out of range");
        out = mode_product(out, ensemble.block(t, tuple[t]).transpose(), t);
    }
    return out.frobenius_norm();
}

}  // namespace bst
