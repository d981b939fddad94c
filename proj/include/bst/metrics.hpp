#pragma once

#include "bst/recovery.hpp"

namespace bst {

/// Exact reconstruction: selected scalar indices match and the coefficient
/// error is below a relative threshold.
inline bool exact_match(const DenseTensor& x_hat, const DenseTensor& x_true,
                        const std::set<Index>& selected, const std::set<Index>& truth,
                        double rel_tol = 1e-5) {
    if (!x_hat.same_shape(x_true)) throw std::invalid_argument("estimate shape mismatch");
    if (selected != truth) return false;
    return (x_hat - x_true).frobenius_norm() <= rel_tol * x_true.frobenius_norm();
}

inline bool exact_match(const DenseTensor& x_hat, const DenseTensor& x_true,
                        const BlockSupport& support_hat, const BlockSupport& support_true,
                        double rel_tol = 1e-5) {
    return exact_match(x_hat, x_true, scalar_support(support_hat), scalar_support(support_true),
                       rel_tol);
}

/// |selected \ truth| / |truth| at the scalar index level; equals the
/// miss-detection ratio because the cardinalities agree.
inline double false_alarm_ratio(const std::set<Index>& selected, const std::set<Index>& truth) {
    if (selected.size() != truth.size())
        throw std::invalid_argument("selected and true supports must have equal size");
    if (truth.empty()) throw std::invalid_argument("empty true support");
    std::size_t wrong = 0;
    for (Index i : selected)
        if (!truth.count(i)) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

inline double false_alarm_ratio(const BlockSupport& support_hat, const BlockSupport& support_true) {
    return false_alarm_ratio(scalar_support(support_hat), scalar_support(support_true));
}

inline double nmse(const DenseTensor& x_hat, const DenseTensor& x_true) {
    const double truth = x_true.values().squaredNorm();
    if (truth == 0.0) throw std::invalid_argument("true signal is zero");
    return (x_hat - x_true).values().squaredNorm() / truth;
}

}  // namespace bst
