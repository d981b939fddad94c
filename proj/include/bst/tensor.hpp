#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace bst {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense n-mode real tensor. Values are stored mode-1-fastest (the first
/// index varies fastest), so vectorize() is a reinterpretation of the
/// buffer and vec(X x1 D1 ... xn Dn) = (Dn (x) ... (x) D1) vec(X).
class DenseTensor {
public:
    DenseTensor() = default;

    explicit DenseTensor(std::vector<Index> shape)
        : shape_(std::move(shape)), values_(Vector::Zero(count(shape_))) {}

    DenseTensor(std::vector<Index> shape, Vector values)
        : shape_(std::move(shape)), values_(std::move(values)) {
        if (values_.size() != count(shape_))
            throw std::invalid_argument("tensor value count does not match shape");
    }

    static Index count(const std::vector<Index>& shape) {
        Index total = 1;
        for (Index n : shape) {
            if (n <= 0) throw std::invalid_argument("tensor mode sizes must be positive");
            total *= n;
        }
        return total;
    }

    int modes() const { return static_cast<int>(shape_.size()); }
    const std::vector<Index>& shape() const { return shape_; }
    Index dim(int mode) const { return shape_.at(mode); }
    Index size() const { return values_.size(); }

    const Vector& values() const { return values_; }
    Vector& values() { return values_; }

    double& operator[](Index flat) { return values_[flat]; }
    double operator[](Index flat) const { return values_[flat]; }

    /// Flat offset of a multi-index (first index fastest).
    Index offset(const std::vector<Index>& idx) const {
        Index flat = 0, stride = 1;
        for (int t = 0; t < modes(); ++t) {
            flat += idx[t] * stride;
            stride *= shape_[t];
        }
        return flat;
    }

    double frobenius_norm() const { return values_.norm(); }

    bool same_shape(const DenseTensor& other) const { return shape_ == other.shape_; }

    DenseTensor operator-(const DenseTensor& other) const {
        if (!same_shape(other)) throw std::invalid_argument("tensor shape mismatch");
        return DenseTensor(shape_, values_ - other.values_);
    }

    DenseTensor operator+(const DenseTensor& other) const {
        if (!same_shape(other)) throw std::invalid_argument("tensor shape mismatch");
        return DenseTensor(shape_, values_ + other.values_);
    }

private:
    std::vector<Index> shape_;
    Vector values_;
};

/// Per-mode block grammar: mode i splits into s[i] blocks of length d[i].
struct BlockStructure {
    std::vector<Index> d;  // block lengths
    std::vector<Index> s;  // block counts

    BlockStructure() = default;
    BlockStructure(std::vector<Index> d_, std::vector<Index> s_)
        : d(std::move(d_)), s(std::move(s_)) {
        if (d.size() != s.size()) throw std::invalid_argument("block structure rank mismatch");
        for (std::size_t i = 0; i < d.size(); ++i)
            if (d[i] < 1 || s[i] < 1)
                throw std::invalid_argument("block lengths and counts must be >= 1");
    }

    int modes() const { return static_cast<int>(d.size()); }

    Index signal_dim(int mode) const { return d[mode] * s[mode]; }

    std::vector<Index> signal_shape() const {
        std::vector<Index> n(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) n[i] = d[i] * s[i];
        return n;
    }

    Index block_volume() const {
        return std::accumulate(d.begin(), d.end(), Index{1}, std::multiplies<>());
    }

    Index block_count() const {
        return std::accumulate(s.begin(), s.end(), Index{1}, std::multiplies<>());
    }

    bool conforms(const std::vector<Index>& shape) const {
        if (static_cast<int>(shape.size()) != modes()) return false;
        for (int i = 0; i < modes(); ++i)
            if (shape[i] != signal_dim(i)) return false;
        return true;
    }
};

/// One block index per mode, 0-based, each in [0, s_t).
using BlockIndexTuple = std::vector<Index>;

/// Ordered set of distinct block-index tuples over a fixed structure.
class BlockSupport {
public:
    BlockSupport() = default;
    explicit BlockSupport(BlockStructure structure) : structure_(std::move(structure)) {}

    BlockSupport(BlockStructure structure, std::vector<BlockIndexTuple> tuples)
        : structure_(std::move(structure)) {
        for (auto& t : tuples) insert(t);
    }

    const BlockStructure& structure() const { return structure_; }
    const std::vector<BlockIndexTuple>& tuples() const { return tuples_; }
    Index cardinality() const { return static_cast<Index>(tuples_.size()); }
    bool empty() const { return tuples_.empty(); }

    bool insert(const BlockIndexTuple& tuple) {
        validate(tuple);
        if (contains(tuple)) return false;
        tuples_.push_back(tuple);
        seen_.insert(tuple);
        return true;
    }

    bool contains(const BlockIndexTuple& tuple) const { return seen_.count(tuple) > 0; }

    /// Per-mode count of distinct block indices appearing in the support.
    std::vector<Index> shadow_sparsity() const {
        if (tuples_.empty()) throw std::invalid_argument("shadow sparsity of empty support");
        std::vector<Index> k(structure_.modes());
        for (int t = 0; t < structure_.modes(); ++t) {
            std::set<Index> distinct;
            for (const auto& tuple : tuples_) distinct.insert(tuple[t]);
            k[t] = static_cast<Index>(distinct.size());
        }
        return k;
    }

    Index shadow_product() const {
        auto k = shadow_sparsity();
        return std::accumulate(k.begin(), k.end(), Index{1}, std::multiplies<>());
    }

private:
    void validate(const BlockIndexTuple& tuple) const {
        if (static_cast<int>(tuple.size()) != structure_.modes())
            throw std::out_of_range("tuple rank does not match structure");
        for (int t = 0; t < structure_.modes(); ++t)
            if (tuple[t] < 0 || tuple[t] >= structure_.s[t])
                throw std::out_of_range("block index out of range in mode " + std::to_string(t));
    }

    BlockStructure structure_;
    std::vector<BlockIndexTuple> tuples_;
    std::set<BlockIndexTuple> seen_;
};

/// Multiplies every mode-`mode` fiber of x by m (m is M_t x N_t, with
/// N_t = x.dim(mode)); the result replaces that mode size by M_t.
inline DenseTensor mode_product(const DenseTensor& x, const Matrix& m, int mode) {
    if (mode < 0 || mode >= x.modes()) throw std::invalid_argument("mode out of range");
    if (m.cols() != x.dim(mode))
        throw std::invalid_argument("mode product dimension mismatch");

    Index prefix = 1, suffix = 1;
    for (int t = 0; t < mode; ++t) prefix *= x.dim(t);
    for (int t = mode + 1; t < x.modes(); ++t) suffix *= x.dim(t);
    const Index n_in = x.dim(mode), n_out = m.rows();

    std::vector<Index> out_shape = x.shape();
    out_shape[mode] = n_out;
    DenseTensor out(out_shape);

    for (Index slab = 0; slab < suffix; ++slab) {
        Eigen::Map<const Matrix> in(x.values().data() + slab * prefix * n_in, prefix, n_in);
        Eigen::Map<Matrix> dst(out.values().data() + slab * prefix * n_out, prefix, n_out);
        dst.noalias() = in * m.transpose();
    }
    return out;
}

/// Applies one matrix per mode in sequence: x x1 m[0] x2 m[1] ... xn m[n-1].
inline DenseTensor multi_mode_product(const DenseTensor& x, const std::vector<Matrix>& ms) {
    if (static_cast<int>(ms.size()) != x.modes())
        throw std::invalid_argument("one matrix per mode required");
    DenseTensor out = x;
    for (int t = 0; t < x.modes(); ++t) out = mode_product(out, ms[t], t);
    return out;
}

inline const Vector& vectorize(const DenseTensor& x) { return x.values(); }

inline DenseTensor devectorize(const std::vector<Index>& shape, Vector v) {
    return DenseTensor(shape, std::move(v));
}

/// Keeps only the block slices whose index appears in the support, per mode,
/// order preserving; result is a k_1 d_1 x ... x k_n d_n tensor.
inline DenseTensor shadow_extract(const DenseTensor& x, const BlockSupport& support) {
    const BlockStructure& bs = support.structure();
    if (!bs.conforms(x.shape())) throw std::invalid_argument("tensor does not conform to structure");
    const int n = bs.modes();

    std::vector<std::vector<Index>> kept(n);
    for (int t = 0; t < n; ++t) {
        std::set<Index> distinct;
        for (const auto& tuple : support.tuples()) distinct.insert(tuple[t]);
        kept[t].assign(distinct.begin(), distinct.end());
    }

    std::vector<Index> out_shape(n);
    for (int t = 0; t < n; ++t) out_shape[t] = static_cast<Index>(kept[t].size()) * bs.d[t];
    DenseTensor out(out_shape);

    std::vector<Index> odo(n, 0);  // multi-index over the output tensor
    for (Index flat = 0; flat < out.size(); ++flat) {
        std::vector<Index> src(n);
        for (int t = 0; t < n; ++t) {
            const Index block = odo[t] / bs.d[t];
            const Index within = odo[t] % bs.d[t];
            src[t] = kept[t][block] * bs.d[t] + within;
        }
        out[flat] = x[x.offset(src)];
        for (int t = 0; t < n; ++t) {
            if (++odo[t] < out_shape[t]) break;
            odo[t] = 0;
        }
    }
    return out;
}

}  // namespace bst
