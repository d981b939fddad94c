#include "bst/recovery.hpp"

#include "bst/metrics.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

namespace bst {
namespace {

using testing::near_orthonormal_ensemble;
using testing::random_ensemble;
using testing::random_tensor;
using testing::random_unit_columns;

/// Reference scalar greedy pursuit, written directly against the matrix:
/// argmax |<column, residual>|, grow support, least squares, update.
struct OmpTrace {
    std::vector<Index> picks;
    std::vector<double> residual_norms;
};

OmpTrace reference_omp(const Matrix& d, const Vector& y, Index k, double eps) {
    OmpTrace trace;
    Vector r = y;
    trace.residual_norms.push_back(r.norm());
    std::vector<Index> support;
    while (static_cast<Index>(support.size()) < k && r.norm() > eps) {
        Index best = -1;
        double best_score = -1.0;
        for (Index c = 0; c < d.cols(); ++c) {
            if (std::find(support.begin(), support.end(), c) != support.end()) continue;
            const double score = std::abs(d.col(c).dot(r));
            if (score > best_score) {
                best_score = score;
                best = c;
            }
        }
        support.push_back(best);
        trace.picks.push_back(best);
        Matrix sub(d.rows(), static_cast<Index>(support.size()));
        for (std::size_t j = 0; j < support.size(); ++j) sub.col(j) = d.col(support[j]);
        const Vector coeffs = sub.colPivHouseholderQr().solve(y);
        r = y - sub * coeffs;
        trace.residual_norms.push_back(r.norm());
    }
    return trace;
}

TEST(Tgbomp, SingleBlockNoiselessIsExactAfterOneIteration) {
    const BlockStructure bs({2, 2}, {3, 3});
    const MeasurementEnsemble e = near_orthonormal_ensemble({7, 7}, bs, 0.1);
    BlockSupport truth(bs);
    truth.insert({2, 1});
    DenseTensor x(bs.signal_shape());
    for (Index a = 0; a < 2; ++a)
        for (Index b = 0; b < 2; ++b) x[x.offset({4 + a, 2 + b})] = testing::randn();
    const DenseTensor y = e.measure(x);

    // Exhaustive confirmation that the true block is the unique argmax.
    double best = -1.0;
    BlockIndexTuple best_tuple;
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j) {
            const double score = block_correlation(y, e, {i, j});
            if (score > best) {
                best = score;
                best_tuple = {i, j};
            }
        }
    ASSERT_EQ(best_tuple, (BlockIndexTuple{2, 1}));

    RecoveryConfig cfg;
    cfg.k = 1;
    const RecoveryResult r = tgbomp(y, e, cfg);
    EXPECT_EQ(r.iterations, 1);
    ASSERT_EQ(r.support.cardinality(), 1);
    EXPECT_EQ(r.support.tuples()[0], (BlockIndexTuple{2, 1}));
    EXPECT_LT((r.estimate - x).frobenius_norm(), 1e-8 * x.frobenius_norm());
}

TEST(Tgbomp, ScalarSettingMatchesReferenceOmpTrace) {
    const BlockStructure bs({1}, {12});
    const MeasurementEnsemble e = random_ensemble({8}, bs);
    const Vector truth_coeffs = Vector::Zero(12);
    DenseTensor x({12});
    x[2] = 1.3;
    x[7] = -0.4;
    x[9] = 2.1;
    const DenseTensor y = e.measure(x);
    const double eps = 1e-6 * y.frobenius_norm();

    RecoveryConfig cfg;
    cfg.k = 3;
    const RecoveryResult mine = tgbomp(y, e, cfg);
    const OmpTrace ref = reference_omp(e.matrix(0), vectorize(y), 3, eps);

    ASSERT_EQ(mine.support.cardinality(), static_cast<Index>(ref.picks.size()));
    for (std::size_t j = 0; j < ref.picks.size(); ++j)
        EXPECT_EQ(mine.support.tuples()[j][0], ref.picks[j]) << "pick " << j;
    ASSERT_EQ(mine.residual_norms.size(), ref.residual_norms.size());
    for (std::size_t j = 0; j < ref.residual_norms.size(); ++j)
        EXPECT_NEAR(mine.residual_norms[j], ref.residual_norms[j], 1e-10);
}

TEST(Tgbomp, ZeroMeasurementStopsImmediately) {
    const BlockStructure bs({2}, {4});
    const MeasurementEnsemble e = random_ensemble({6}, bs);
    RecoveryConfig cfg;
    cfg.k = 2;
    const RecoveryResult r = tgbomp(DenseTensor({6}), e, cfg);
    EXPECT_EQ(r.iterations, 0);
    EXPECT_TRUE(r.support.empty());
    EXPECT_EQ(r.estimate.frobenius_norm(), 0.0);
}

TEST(Tgbomp, MatchesExhaustiveBestSubsetOnTinyInstances) {
    int tested = 0;
    for (int rep = 0; rep < 60 && tested < 20; ++rep) {
        const BlockStructure bs({1, 2}, {3, 3});  // 9 block tuples
        const MeasurementEnsemble e = near_orthonormal_ensemble({4, 7}, bs, 0.05);
        const CoherenceProfile p = coherence_profile(e);
        if (gram_eigenvalue_bounds(p, 4.0).lower <= 0.0) continue;

        SignalSpec spec{bs, 2, SignalFamily::gaussian, static_cast<std::uint64_t>(rep)};
        const auto [x, truth] = gen_signal(spec);
        const DenseTensor y = e.measure(x);

        RecoveryConfig cfg;
        cfg.k = 2;
        cfg.s = 1;
        const RecoveryResult mine = tgbomp(y, e, cfg);

        // Exhaustive best-2-subset least squares.
        double best_residual = std::numeric_limits<double>::infinity();
        std::set<BlockIndexTuple> best_support;
        for (Index a = 0; a < 9; ++a)
            for (Index b = a + 1; b < 9; ++b) {
                BlockSupport s2(bs);
                s2.insert(decode_block_id(a, bs));
                s2.insert(decode_block_id(b, bs));
                const LeastSquaresFit fit = least_squares_on_support(y, e, s2);
                if (fit.residual.norm() < best_residual) {
                    best_residual = fit.residual.norm();
                    best_support = {s2.tuples().begin(), s2.tuples().end()};
                }
            }
        const std::set<BlockIndexTuple> got(mine.support.tuples().begin(),
                                            mine.support.tuples().end());
        EXPECT_EQ(got, best_support);
        ++tested;
    }
    EXPECT_GE(tested, 10);
}

TEST(LeastSquares, ConsistentSystemIsExact) {
    const BlockStructure bs({2, 1}, {2, 4});
    const MeasurementEnsemble e = random_ensemble({6, 6}, bs);
    SignalSpec spec{bs, 2, SignalFamily::gaussian, 77};
    const auto [x, truth] = gen_signal(spec);
    const DenseTensor y = e.measure(x);
    const LeastSquaresFit fit = least_squares_on_support(y, e, truth);
    EXPECT_LT(fit.residual.norm(), 1e-10 * y.frobenius_norm());
    const DenseTensor back = scatter_coefficients(fit.coefficients, truth);
    EXPECT_LT((back - x).frobenius_norm(), 1e-9 * x.frobenius_norm());
}

TEST(LeastSquares, SingleUnitColumnIsInnerProduct) {
    const BlockStructure bs({1}, {5});
    const MeasurementEnsemble e = random_ensemble({6}, bs);
    const DenseTensor y = random_tensor({6});
    BlockSupport support(bs);
    support.insert({2});
    const LeastSquaresFit fit = least_squares_on_support(y, e, support);
    EXPECT_NEAR(fit.coefficients[0], e.matrix(0).col(2).dot(vectorize(y)), 1e-12);
}

TEST(LeastSquares, ResidualOrthogonalToSupportSpan) {
    const BlockStructure bs({2, 2}, {3, 2});
    const MeasurementEnsemble e = random_ensemble({8, 6}, bs);
    const DenseTensor y = random_tensor({8, 6});
    BlockSupport support(bs);
    support.insert({0, 1});
    support.insert({2, 0});
    const LeastSquaresFit fit = least_squares_on_support(y, e, support);
    const CascadingOperator op = build_cascading(e, support);
    EXPECT_LE((op.matrix().transpose() * fit.residual).norm(), 1e-8 * y.frobenius_norm());
}

TEST(Bols, FirstIterationMatchesMatchedSelection) {
    const Matrix dict = random_unit_columns(8, 10);
    const Vector y = testing::random_matrix(8, 1);

    // With an empty span the normalization factors are 1, so the first
    // pick must agree with plain block correlation.
    Index best = -1;
    double best_score = -1.0;
    for (Index b = 0; b < 5; ++b) {
        const double score = (dict.middleCols(2 * b, 2).transpose() * y).norm();
        if (score > best_score) {
            best_score = score;
            best = b;
        }
    }
    const RecoveryResult r = bols_1mode(y, dict, 2, 1);
    ASSERT_EQ(r.support.cardinality(), 1);
    EXPECT_EQ(r.support.tuples()[0][0], best);
}

TEST(Bols, OrthonormalDictionaryTracksMatchedSelectionThroughout) {
    Eigen::HouseholderQR<Matrix> qr(testing::random_matrix(10, 10));
    const Matrix dict = qr.householderQ() * Matrix::Identity(10, 10);
    Vector x = Vector::Zero(10);
    x[1] = 0.9;
    x[4] = -1.7;
    x[8] = 0.6;
    const Vector y = dict * x;

    const RecoveryResult ols = bols_1mode(y, dict, 2, 3);
    const BlockStructure bs({2}, {5});
    MeasurementEnsemble e({dict}, bs);
    RecoveryConfig cfg;
    cfg.k = 3;
    const RecoveryResult match = tgbomp(DenseTensor({10}, y), e, cfg);

    ASSERT_EQ(ols.support.cardinality(), match.support.cardinality());
    for (Index j = 0; j < ols.support.cardinality(); ++j)
        EXPECT_EQ(ols.support.tuples()[j], match.support.tuples()[j]);
    ASSERT_EQ(ols.residual_norms.size(), match.residual_norms.size());
    for (std::size_t j = 0; j < ols.residual_norms.size(); ++j)
        EXPECT_NEAR(ols.residual_norms[j], match.residual_norms[j], 1e-9);
}

TEST(Bols, MatchesLiteralNormalizedRuleOnCoherentDictionary) {
    const Matrix dict = random_unit_columns(6, 8);
    const Vector y = testing::random_matrix(6, 1);
    const Index d = 2, k = 2;

    const RecoveryResult mine = bols_1mode(y, dict, d, k);

    // Literal rule, recomputed step by step.
    std::vector<Index> selected_cols;
    Vector r = y;
    std::vector<Index> picks;
    for (Index it = 0; it < k; ++it) {
        Matrix q;
        if (!selected_cols.empty()) {
            Matrix sub(6, static_cast<Index>(selected_cols.size()));
            for (std::size_t j = 0; j < selected_cols.size(); ++j)
                sub.col(j) = dict.col(selected_cols[j]);
            Eigen::HouseholderQR<Matrix> qr(sub);
            q = qr.householderQ() * Matrix::Identity(6, sub.cols());
        }
        Index best = -1;
        double best_score = -1.0;
        for (Index b = 0; b < 4; ++b) {
            if (std::find(picks.begin(), picks.end(), b) != picks.end()) continue;
            double score = 0.0;
            for (Index c = 0; c < d; ++c) {
                Vector col = dict.col(b * d + c);
                Vector w = col;
                if (q.size() > 0) w -= q * (q.transpose() * col);
                if (w.norm() <= 1e-10) continue;
                const double num = col.dot(r);
                score += (num / w.norm()) * (num / w.norm());
            }
            if (score > best_score) {
                best_score = score;
                best = b;
            }
        }
        picks.push_back(best);
        for (Index c = 0; c < d; ++c) selected_cols.push_back(best * d + c);
        Matrix sub(6, static_cast<Index>(selected_cols.size()));
        for (std::size_t j = 0; j < selected_cols.size(); ++j)
            sub.col(j) = dict.col(selected_cols[j]);
        r = y - sub * sub.colPivHouseholderQr().solve(y);
    }
    ASSERT_EQ(mine.support.cardinality(), static_cast<Index>(picks.size()));
    for (std::size_t j = 0; j < picks.size(); ++j)
        EXPECT_EQ(mine.support.tuples()[j][0], picks[j]);
}

TEST(Variants, TensorBlockSelectionOnOneModeDataEqualsFlattenedBlockSelection) {
    const BlockStructure bs({2}, {5});
    const MeasurementEnsemble e = random_ensemble({7}, bs);
    SignalSpec spec{bs, 2, SignalFamily::gaussian, 5};
    const auto [x, truth] = gen_signal(spec);
    const DenseTensor y = e.measure(x);
    const VariantOutcome a = run_variant(Variant::t_bomp, y, e, 2, 1);
    const VariantOutcome b = run_variant(Variant::bomp, y, e, 2, 1);
    EXPECT_EQ(a.selected_scalars, b.selected_scalars);
    EXPECT_LT((a.estimate - b.estimate).frobenius_norm(), 1e-10);
}

TEST(Variants, FullSelectionWithUnitBudgetEqualsSingleGreedyPick) {
    const BlockStructure bs({1}, {8});
    const MeasurementEnsemble e = random_ensemble({6}, bs);
    DenseTensor x({8});
    x[5] = 2.0;
    const DenseTensor y = e.measure(x);
    const VariantOutcome a = run_variant(Variant::cosamp_style, y, e, 1, 1);
    const VariantOutcome b = run_variant(Variant::omp, y, e, 1, 1);
    EXPECT_EQ(a.selected_scalars, b.selected_scalars);
    EXPECT_EQ(a.raw.iterations, 1);
}

TEST(Variants, AllRecoverExactlyOnOrthonormalDictionary) {
    const BlockStructure bs({2, 1}, {2, 4});
    std::vector<Matrix> mats;
    for (int i = 0; i < 2; ++i) {
        Eigen::HouseholderQR<Matrix> qr(testing::random_matrix(4, 4));
        mats.push_back(qr.householderQ() * Matrix::Identity(4, 4));
        (void)i;
    }
    const MeasurementEnsemble e(std::move(mats), bs);
    SignalSpec spec{bs, 2, SignalFamily::gaussian, 13};
    const auto [x, truth] = gen_signal(spec);
    const DenseTensor y = e.measure(x);
    const std::set<Index> want = scalar_support(truth);

    for (Variant v : {Variant::omp, Variant::bomp, Variant::bols, Variant::t_omp,
                      Variant::t_bomp, Variant::t_gomp, Variant::t_gbomp,
                      Variant::cosamp_style}) {
        const VariantOutcome out = run_variant(v, y, e, 2, 2);
        EXPECT_TRUE(exact_match(out.estimate, x, out.selected_scalars, want))
            << "variant " << static_cast<int>(v);
    }
}

TEST(Invariants, ResidualsAreMonotoneAndOrthogonal) {
    for (int rep = 0; rep < 25; ++rep) {
        const BlockStructure bs({2, 1}, {3, 4});
        const MeasurementEnsemble e = random_ensemble({7, 6}, bs);
        SignalSpec spec{bs, 3, SignalFamily::gaussian, static_cast<std::uint64_t>(rep)};
        const auto [x, truth] = gen_signal(spec);
        const auto [y, noise] = add_noise(e.measure(x), 15.0, rep);

        RecoveryConfig cfg;
        cfg.k = 3;
        cfg.s = 2;
        cfg.eps = 0.0;
        const RecoveryResult r = tgbomp(y, e, cfg);
        for (std::size_t j = 1; j < r.residual_norms.size(); ++j)
            EXPECT_LE(r.residual_norms[j], r.residual_norms[j - 1] + 1e-12);
        EXPECT_LE(r.orthogonality_defect, 1e-8);
    }
}

TEST(Invariants, DecayEnvelopeHoldsOnAdmissibleEnsembles) {
    int admissible = 0;
    for (int rep = 0; rep < 60 && admissible < 15; ++rep) {
        const BlockStructure bs({1, 1}, {3, 3});
        const MeasurementEnsemble e = near_orthonormal_ensemble({5, 5}, bs, 0.02);
        const CoherenceProfile p = coherence_profile(e);

        SignalSpec spec{bs, 2, SignalFamily::gaussian, static_cast<std::uint64_t>(rep)};
        const auto [x, truth] = gen_signal(spec);
        const double shadow = static_cast<double>(truth.shadow_product());
        const Index k = 2, s = 1;
        if (!residual_decay_factor(p, k, s, shadow, k).ok()) continue;
        ++admissible;

        const DenseTensor y = e.measure(x);
        RecoveryConfig cfg;
        cfg.k = k;
        cfg.s = s;
        cfg.eps = 0.0;
        const RecoveryResult r = tgbomp(y, e, cfg);
        const double y2 = y.values().squaredNorm();
        for (Index l = 0; l + 1 < static_cast<Index>(r.residual_norms.size()); ++l) {
            const BoundValue f = residual_decay_factor(p, k, s, shadow, l);
            ASSERT_TRUE(f.ok());
            const double lhs = r.residual_norms[l + 1] * r.residual_norms[l + 1];
            EXPECT_LE(lhs, std::pow(f.value, l + 1) * y2 + 1e-12 * y2);
        }
    }
    EXPECT_GE(admissible, 10);
}

TEST(Invariants, PositiveErcMarginsImplyCorrectSelection) {
    int traced = 0;
    for (int rep = 0; rep < 40 && traced < 10; ++rep) {
        const BlockStructure bs({1, 1}, {4, 4});
        const MeasurementEnsemble e = near_orthonormal_ensemble({6, 6}, bs, 0.05);
        SignalSpec spec{bs, 2, SignalFamily::gaussian, static_cast<std::uint64_t>(100 + rep)};
        const auto [x, truth] = gen_signal(spec);
        const DenseTensor y = e.measure(x);

        RecoveryConfig cfg;
        cfg.k = 2;
        cfg.s = 1;
        cfg.erc_reference = truth;
        const RecoveryResult r = tgbomp(y, e, cfg);
        bool all_positive = !r.erc_margins.empty();
        for (double m : r.erc_margins)
            if (!(m > 0.0)) all_positive = false;
        if (!all_positive) continue;
        ++traced;
        for (const auto& tuple : r.support.tuples()) EXPECT_TRUE(truth.contains(tuple));
    }
    EXPECT_GE(traced, 5);
}

TEST(Invariants, RelabelingBlocksPermutesTheSupport) {
    const BlockStructure bs({2, 1}, {3, 4});
    const MeasurementEnsemble e = random_ensemble({7, 6}, bs);
    SignalSpec spec{bs, 2, SignalFamily::gaussian, 31};
    const auto [x, truth] = gen_signal(spec);
    const DenseTensor y = e.measure(x);

    // Permute mode-0 blocks by pi and mode-1 blocks by rho.
    const std::vector<Index> pi{2, 0, 1};
    const std::vector<Index> rho{1, 3, 0, 2};
    std::vector<Matrix> mats(2);
    mats[0] = Matrix(e.matrix(0).rows(), e.matrix(0).cols());
    for (Index b = 0; b < 3; ++b) mats[0].middleCols(2 * b, 2) = e.matrix(0).middleCols(2 * pi[b], 2);
    mats[1] = Matrix(e.matrix(1).rows(), e.matrix(1).cols());
    for (Index b = 0; b < 4; ++b) mats[1].col(b) = e.matrix(1).col(rho[b]);
    const MeasurementEnsemble relabeled(std::move(mats), bs);

    RecoveryConfig cfg;
    cfg.k = 2;
    cfg.s = 2;
    const RecoveryResult base = tgbomp(y, e, cfg);
    const RecoveryResult perm = tgbomp(y, relabeled, cfg);

    ASSERT_EQ(base.residual_norms.size(), perm.residual_norms.size());
    for (std::size_t j = 0; j < base.residual_norms.size(); ++j)
        EXPECT_NEAR(base.residual_norms[j], perm.residual_norms[j], 1e-12);

    std::set<BlockIndexTuple> mapped;
    std::vector<Index> pi_inv(3), rho_inv(4);
    for (Index b = 0; b < 3; ++b) pi_inv[pi[b]] = b;
    for (Index b = 0; b < 4; ++b) rho_inv[rho[b]] = b;
    for (const auto& tuple : base.support.tuples())
        mapped.insert({pi_inv[tuple[0]], rho_inv[tuple[1]]});
    const std::set<BlockIndexTuple> got(perm.support.tuples().begin(),
                                        perm.support.tuples().end());
    EXPECT_EQ(mapped, got);
}

TEST(Invariants, NoisyTrialsAreDominatedByStoppingAndResidualBounds) {
    int stopped = 0, xi_valid = 0;
    for (int rep = 0; rep < 80 && (stopped < 8 || xi_valid < 8); ++rep) {
        const BlockStructure bs({1, 1}, {3, 3});
        const MeasurementEnsemble e = near_orthonormal_ensemble({6, 6}, bs, 0.015);
        const CoherenceProfile p = coherence_profile(e);
        SignalSpec spec{bs, 2, SignalFamily::gaussian, static_cast<std::uint64_t>(500 + rep)};
        const auto [x, truth] = gen_signal(spec);
        const auto [y, noise] = add_noise(e.measure(x), 25.0, 500 + rep);
        const double noise_norm = noise.frobenius_norm();
        const double shadow = static_cast<double>(truth.shadow_product());
        const Index k = 2, s = 2;

        RecoveryConfig cfg;
        cfg.k = k;
        cfg.s = s;
        cfg.eps = noise_norm;
        const RecoveryResult r = tgbomp(y, e, cfg);

        if (r.residual_norms.back() <= noise_norm) {
            const BoundValue cap = stopping_error_bound(p, k, s, r.iterations, shadow,
                                                        noise_norm, noise_norm);
            if (cap.ok()) {
                ++stopped;
                EXPECT_LE((r.estimate - x).frobenius_norm(), cap.value + 1e-9);
            }
        }

        // Self-contained residual factor with an explicit stage count and
        // small gamma; valid in this low-coherence regime.
        const ResidualNoiseFactors f = residual_noise_factors(p, k, s, 0, k, 1.0, 0.05, 3);
        if (f.self_contained.ok()) {
            ++xi_valid;
            RecoveryConfig full;
            full.k = k;
            full.s = s;
            full.eps = 0.0;
            const RecoveryResult rr = tgbomp(y, e, full);
            EXPECT_LE(rr.residual_norms.back(), f.self_contained.value * noise_norm + 1e-9);

            const BoundValue cap = residual_based_error_bound(p, k, s, shadow, noise_norm,
                                                              f.self_contained.value);
            if (cap.ok()) {
                EXPECT_LE((rr.estimate - x).frobenius_norm(), cap.value + 1e-9);
            }
        }
    }
    EXPECT_GE(stopped, 5);
    EXPECT_GE(xi_valid, 5);
}

TEST(Invariants, RecoveryErrorBoundDominatesUnderHighSnr) {
    int admissible = 0;
    for (int rep = 0; rep < 60 && admissible < 10; ++rep) {
        const BlockStructure bs({1, 1}, {3, 3});
        const MeasurementEnsemble e = near_orthonormal_ensemble({6, 6}, bs, 0.015);
        const CoherenceProfile p = coherence_profile(e);
        SignalSpec spec{bs, 2, SignalFamily::two_pam, static_cast<std::uint64_t>(900 + rep)};
        const auto [x, truth] = gen_signal(spec);
        const auto [y, noise] = add_noise(e.measure(x), 30.0, 900 + rep);
        const Index k = 2, s = 2;
        const double shadow = static_cast<double>(truth.shadow_product());

        const SnrThreshold threshold = snr_threshold(p, k, s, shadow, 1.0);
        if (!threshold.exact_db.ok() || 30.0 <= threshold.exact_db.value) continue;
        const BoundValue cap = recovery_error_bound(p, k, s, shadow, noise.frobenius_norm());
        if (!cap.ok()) continue;
        ++admissible;

        RecoveryConfig cfg;
        cfg.k = k;
        cfg.s = s;
        cfg.eps = 0.0;
        const RecoveryResult r = tgbomp(y, e, cfg);
        EXPECT_LE((r.estimate - x).frobenius_norm(), cap.value + 1e-9);
    }
    EXPECT_GE(admissible, 3);
}

}  // namespace
}  // namespace bst
