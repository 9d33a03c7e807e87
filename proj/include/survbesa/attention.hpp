#pragma once

// Self-attention over the component survival functions of an ensemble.
//
// Each component SF acts as query, key and value. For one query instance the
// per-learner SFs S^(1..M) live on the ensemble's global grid; the weight of
// key k for query l is a softmax over k != l of -D_KS(S^(l), S^(k)) / theta_lk.
// Adjusted SFs are the weighted sums of the other components, and the ensemble
// prediction is their mean. Expected times are linear in the SF, so the score
// that ranks instances is 1' * beta * That, with That the vector of component
// expected times (normalized by the training horizon).

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "survbesa/core.hpp"
#include "survbesa/ensemble.hpp"
#include "survbesa/metrics.hpp"
#include "survbesa/parallel.hpp"

namespace survbesa {

inline constexpr double kThetaFloor = 1e-3;

template <class Scalar>
Scalar softplus(Scalar w) {
    using std::exp;
    using std::log1p;
    return w > Scalar(0) ? w + log1p(exp(-w)) : log1p(exp(w));
}

template <class Scalar>
Scalar sigmoid(Scalar z) {
    using std::exp;
    if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
    const Scalar e = exp(z);
    return e / (Scalar(1) + e);
}

/// Attention temperatures theta = softplus(raw) + 1e-3, one per (query, key) pair.
/// The diagonal is carried along but never used.
template <class Scalar>
class AttentionParams {
public:
    AttentionParams() = default;
    explicit AttentionParams(Matrix<Scalar> raw) : raw_(std::move(raw)) {
        if (raw_.rows() != raw_.cols()) throw Error(ErrorCode::DimensionMismatch, "attention parameters must be square");
    }

    /// raw = 0: every temperature equals softplus(0) + 1e-3.
    static AttentionParams neutral(Index learners) { return AttentionParams(Matrix<Scalar>::Zero(learners, learners)); }

    static AttentionParams from_theta(const Matrix<Scalar>& theta) {
        Matrix<Scalar> raw = Matrix<Scalar>::Zero(theta.rows(), theta.cols());
        for (Index l = 0; l < theta.rows(); ++l)
            for (Index k = 0; k < theta.cols(); ++k) {
                if (l == k) continue;
                const Scalar y = theta(l, k) - Scalar(kThetaFloor);
                if (!(y > Scalar(0))) throw Error(ErrorCode::InvalidValue, "temperature must exceed 1e-3");
                raw(l, k) = y > Scalar(30) ? y : std::log(std::expm1(y));
            }
        return AttentionParams(std::move(raw));
    }

    Index size() const noexcept { return raw_.rows(); }
    const Matrix<Scalar>& raw() const noexcept { return raw_; }
    Matrix<Scalar>& raw() noexcept { return raw_; }

    Matrix<Scalar> theta() const {
        return raw_.unaryExpr([](Scalar w) { return softplus(w) + Scalar(kThetaFloor); });
    }

private:
    Matrix<Scalar> raw_;
};

/// Per-instance quantities that do not depend on the attention parameters.
template <class Scalar>
struct AttentionContext {
    Vector<Scalar> grid;      ///< global grid of the ensemble
    Matrix<Scalar> sfs;       ///< M x G component survival values
    Matrix<Scalar> dist;      ///< M x M Kolmogorov-Smirnov distances
    Vector<Scalar> expected;  ///< component expected times divided by the horizon
    Scalar horizon{1};
    std::uint64_t model_id = 0;

    Index learners() const noexcept { return sfs.rows(); }
};

/// Pairwise sup-distances of rows that share one grid (S = 1 before the first point).
template <class Scalar>
Matrix<Scalar> ks_distance_matrix(const Matrix<Scalar>& sfs) {
    const Index m = sfs.rows();
    Matrix<Scalar> d = Matrix<Scalar>::Zero(m, m);
    for (Index l = 0; l < m; ++l)
        for (Index k = l + 1; k < m; ++k) {
            const Scalar v = sfs.cols() == 0 ? Scalar(0) : (sfs.row(l) - sfs.row(k)).cwiseAbs().maxCoeff();
            d(l, k) = v;
            d(k, l) = v;
        }
    return d;
}

/// Expected time of every row on a common grid, integrated to the last grid point.
template <class Scalar>
Vector<Scalar> expected_times(const Vector<Scalar>& grid, const Matrix<Scalar>& sfs) {
    Vector<Scalar> out(sfs.rows());
    for (Index k = 0; k < sfs.rows(); ++k) {
        Scalar area = grid[0];
        for (Index l = 1; l < grid.size(); ++l) area += sfs(k, l - 1) * (grid[l] - grid[l - 1]);
        out[k] = area;
    }
    return out;
}

template <class Scalar, class Derived>
AttentionContext<Scalar> build_context(const EnsembleModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
    AttentionContext<Scalar> ctx;
    ctx.grid = model.global_grid();
    ctx.sfs = component_matrix(model, x);
    ctx.dist = ks_distance_matrix(ctx.sfs);
    ctx.horizon = model.horizon();
    ctx.expected = expected_times(ctx.grid, ctx.sfs) / ctx.horizon;
    ctx.model_id = model.id();
    return ctx;
}

/// One context per record of `data`, built in parallel.
template <class Scalar>
std::vector<AttentionContext<Scalar>> build_contexts(const EnsembleModel<Scalar>& model,
                                                     const SurvivalDataset<Scalar>& data) {
    std::vector<AttentionContext<Scalar>> out(static_cast<std::size_t>(data.size()));
    parallel_for(out.size(), [&](std::size_t i) { out[i] = build_context(model, data.x(static_cast<Index>(i))); });
    return out;
}

/// Row-stochastic weights from a distance matrix and temperatures; zero diagonal.
template <class Scalar>
Matrix<Scalar> softmax_attention(const Matrix<Scalar>& dist, const Matrix<Scalar>& theta) {
    const Index m = dist.rows();
    if (m < 2) throw Error(ErrorCode::SingleLearner, "attention needs at least two learners");
    if (theta.rows() != m || theta.cols() != m)
        throw Error(ErrorCode::DimensionMismatch, "temperature matrix does not match the ensemble size");
    Matrix<Scalar> beta = Matrix<Scalar>::Zero(m, m);
    for (Index l = 0; l < m; ++l) {
        Scalar best = -std::numeric_limits<Scalar>::infinity();
        for (Index k = 0; k < m; ++k)
            if (k != l) {
                beta(l, k) = -dist(l, k) / theta(l, k);
                best = std::max(best, beta(l, k));
            }
        Scalar total = Scalar(0);
        for (Index k = 0; k < m; ++k)
            if (k != l) {
                beta(l, k) = std::exp(beta(l, k) - best);
                total += beta(l, k);
            }
        beta.row(l) /= total;
    }
    return beta;
}

template <class Scalar>
Matrix<Scalar> attention_matrix(const AttentionContext<Scalar>& ctx, const AttentionParams<Scalar>& params) {
    if (params.size() != ctx.learners())
        throw Error(ErrorCode::ModelMismatch, "parameters were built for a different ensemble size");
    return softmax_attention(ctx.dist, params.theta());
}

/// Row j is sum_{k != j} beta_jk S^(k), accumulated in k order so every grid
/// column sees the same rounding and monotonicity survives.
template <class Scalar>
Matrix<Scalar> adjusted_matrix(const Matrix<Scalar>& sfs, const Matrix<Scalar>& beta) {
    Matrix<Scalar> out = Matrix<Scalar>::Zero(sfs.rows(), sfs.cols());
    for (Index j = 0; j < sfs.rows(); ++j)
        for (Index k = 0; k < sfs.rows(); ++k)
            if (k != j && beta(j, k) != Scalar(0)) out.row(j) += beta(j, k) * sfs.row(k);
    return out.cwiseMin(Scalar(1));
}

template <class Scalar>
std::vector<StepSurvivalFunction<Scalar>> adjust_sfs(const AttentionContext<Scalar>& ctx, const Matrix<Scalar>& beta) {
    const Matrix<Scalar> adj = adjusted_matrix(ctx.sfs, beta);
    std::vector<StepSurvivalFunction<Scalar>> out;
    out.reserve(static_cast<std::size_t>(adj.rows()));
    for (Index j = 0; j < adj.rows(); ++j) out.emplace_back(ctx.grid, adj.row(j).transpose());
    return out;
}

template <class Scalar>
StepSurvivalFunction<Scalar> aggregate_sf(std::span<const StepSurvivalFunction<Scalar>> adjusted) {
    return mean_sf(adjusted);
}

/// 1' * beta * That, the ranking score whose differences form R_ij.
template <class Scalar>
Scalar attention_score(const AttentionContext<Scalar>& ctx, const Matrix<Scalar>& beta) {
    return (beta * ctx.expected).sum();
}

/// Expected time of the aggregated attention SF, in original time units.
template <class Scalar>
Scalar attention_expected_time(const AttentionContext<Scalar>& ctx, const Matrix<Scalar>& beta) {
    return attention_score(ctx, beta) * ctx.horizon / static_cast<Scalar>(ctx.learners());
}

/// R_ij = sum_l sum_{k != l} (beta_j^(l,k) That_j^(k) - beta_i^(l,k) That_i^(k)).
template <class Scalar>
Scalar r_ij(const AttentionContext<Scalar>& ctx_i, const AttentionContext<Scalar>& ctx_j,
            const AttentionParams<Scalar>& params) {
    if (ctx_i.model_id != ctx_j.model_id || ctx_i.learners() != ctx_j.learners())
        throw Error(ErrorCode::ModelMismatch, "contexts come from different ensembles");
    return attention_score(ctx_j, attention_matrix(ctx_j, params)) -
           attention_score(ctx_i, attention_matrix(ctx_i, params));
}

template <class Scalar>
struct SurrogateValue {
    Scalar value{};
    Matrix<Scalar> gradient;  ///< d value / d raw parameters
};

namespace detail {
inline constexpr std::size_t kReductionChunks = 16;

template <class Scalar>
void check_contexts(std::span<const AttentionContext<Scalar>> contexts, Index learners) {
    for (const auto& c : contexts)
        if (c.model_id != contexts.front().model_id || c.learners() != learners)
            throw Error(ErrorCode::ModelMismatch, "contexts come from different ensembles");
}
}  // namespace detail

/// sum over J of sigmoid(slope * R_ij) and its analytic gradient in the raw parameters.
template <class Scalar>
SurrogateValue<Scalar> surrogate_objective(const PairSet& pairs, std::span<const AttentionContext<Scalar>> contexts,
                                           const AttentionParams<Scalar>& params, Scalar slope = Scalar(1)) {
    if (pairs.empty()) throw Error(ErrorCode::EmptyPairSet, "surrogate needs at least one comparable pair");
    const Index m = params.size();
    detail::check_contexts(contexts, m);
    const Matrix<Scalar> theta = params.theta();
    const std::size_t n = contexts.size();

    std::vector<Matrix<Scalar>> betas(n);
    Vector<Scalar> scores(static_cast<Index>(n));
    parallel_for(n, [&](std::size_t i) {
        betas[i] = softmax_attention(contexts[i].dist, theta);
        scores[static_cast<Index>(i)] = attention_score(contexts[i], betas[i]);
    });

    SurrogateValue<Scalar> out;
    out.value = Scalar(0);
    Vector<Scalar> dscore = Vector<Scalar>::Zero(static_cast<Index>(n));
    for (const auto& [i, j] : pairs) {
        const Scalar s = sigmoid(slope * (scores[j] - scores[i]));
        out.value += s;
        const Scalar w = slope * s * (Scalar(1) - s);
        dscore[j] += w;
        dscore[i] -= w;
    }

    // d score / d theta_lk = beta_lk (That_k - sum_k' beta_lk' That_k') d_lk / theta_lk^2
    const std::size_t chunks = std::min(detail::kReductionChunks, std::max<std::size_t>(n, 1));
    std::vector<Matrix<Scalar>> partial(chunks, Matrix<Scalar>::Zero(m, m));
    parallel_for(chunks, [&](std::size_t c) {
        for (std::size_t i = c; i < n; i += chunks) {
            const Scalar g = dscore[static_cast<Index>(i)];
            if (g == Scalar(0)) continue;
            const auto& ctx = contexts[i];
            const Matrix<Scalar>& beta = betas[i];
            const Vector<Scalar> mean_t = beta * ctx.expected;
            for (Index l = 0; l < m; ++l)
                for (Index k = 0; k < m; ++k)
                    if (k != l)
                        partial[c](l, k) += g * beta(l, k) * (ctx.expected[k] - mean_t[l]) * ctx.dist(l, k) /
                                            (theta(l, k) * theta(l, k));
        }
    });
    Matrix<Scalar> grad = Matrix<Scalar>::Zero(m, m);
    for (const auto& p : partial) grad += p;
    out.gradient = grad.cwiseProduct(params.raw().unaryExpr([](Scalar w) { return sigmoid(w); }));
    out.gradient.diagonal().setZero();
    return out;
}

/// Aggregated attention prediction for one query.
template <class Scalar, class Derived>
StepSurvivalFunction<Scalar> predict_survbesa(const EnsembleModel<Scalar>& model, const AttentionParams<Scalar>& params,
                                              const Eigen::MatrixBase<Derived>& x) {
    const auto ctx = build_context(model, x);
    const auto adjusted = adjust_sfs(ctx, attention_matrix(ctx, params));
    return aggregate_sf(std::span<const StepSurvivalFunction<Scalar>>(adjusted));
}

}  // namespace survbesa
