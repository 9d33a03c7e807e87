#pragma once

// Epsilon-contaminated attention: beta = (1 - eps) * softmax(-D / phi) + eps * theta,
// with each theta row on the simplex over keys k != l. R_ij is affine in theta,
// so training reduces to a hinge-loss ridge problem over row simplices.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "survbesa/attention.hpp"
#include "survbesa/core.hpp"
#include "survbesa/metrics.hpp"

namespace survbesa {

template <class Scalar>
struct ContaminationParams {
    Scalar epsilon{};
    Scalar phi{1};
    Matrix<Scalar> theta;  ///< M x M, zero diagonal, rows on the simplex

    /// Uniform rows 1 / (M - 1).
    static Matrix<Scalar> uniform_theta(Index m) {
        Matrix<Scalar> t = Matrix<Scalar>::Constant(m, m, m > 1 ? Scalar(1) / Scalar(m - 1) : Scalar(0));
        t.diagonal().setZero();
        return t;
    }
};

namespace detail {
template <class Scalar>
void check_contamination_hyper(Scalar epsilon, Scalar phi) {
    if (!(epsilon >= Scalar(0) && epsilon <= Scalar(1)))
        throw Error(ErrorCode::InvalidEpsilon, "epsilon must lie in [0, 1]");
    if (!(phi > Scalar(0)) || !std::isfinite(static_cast<double>(phi)))
        throw Error(ErrorCode::InvalidPhi, "phi must be positive and finite");
}
}  // namespace detail

/// Contaminated weights for one query over its M - 1 keys.
template <class Scalar>
Vector<Scalar> contaminated_weights(const Vector<Scalar>& dist_row, const Vector<Scalar>& theta_row, Scalar epsilon,
                                    Scalar phi) {
    detail::check_contamination_hyper(epsilon, phi);
    if (dist_row.size() != theta_row.size() || dist_row.size() == 0)
        throw Error(ErrorCode::DimensionMismatch, "distance and theta rows differ in length");
    const Vector<Scalar> logits = -dist_row / phi;
    const Vector<Scalar> e = (logits.array() - logits.maxCoeff()).exp();
    return (Scalar(1) - epsilon) * (e / e.sum()) + epsilon * theta_row;
}

/// Full M x M contaminated attention (zero diagonal) for one instance.
template <class Scalar>
Matrix<Scalar> contaminated_attention(const Matrix<Scalar>& dist, const ContaminationParams<Scalar>& p) {
    detail::check_contamination_hyper(p.epsilon, p.phi);
    const Index m = dist.rows();
    const Matrix<Scalar> soft = softmax_attention<Scalar>(dist, Matrix<Scalar>::Constant(m, m, p.phi));
    return (Scalar(1) - p.epsilon) * soft + p.epsilon * p.theta;
}

/// Precomputed pieces making R_ij(theta) = sum_{l,k != l} (Q^(k,l) + theta_lk G^(k)).
template <class Scalar>
struct ContaminationProblem {
    std::vector<Matrix<Scalar>> q;  ///< per pair, Q(k, l)
    std::vector<Vector<Scalar>> g;  ///< per pair, G(k)
    std::vector<Scalar> q_total;    ///< per pair, sum of Q over k != l
    Scalar lambda{};
    Index learners = 0;

    std::size_t pairs() const noexcept { return q.size(); }

    Scalar r(std::size_t p, const Matrix<Scalar>& theta) const {
        // sum_l theta_lk is the only way theta enters; the diagonal is zero.
        return q_total[p] + g[p].dot(theta.colwise().sum().transpose());
    }
};

template <class Scalar>
ContaminationProblem<Scalar> precompute_qg(std::span<const AttentionContext<Scalar>> contexts, const PairSet& pairs,
                                           Scalar epsilon, Scalar phi, Scalar lambda = Scalar(0)) {
    detail::check_contamination_hyper(epsilon, phi);
    if (contexts.empty()) throw Error(ErrorCode::EmptyDataset, "no contexts");
    const Index m = contexts.front().learners();
    detail::check_contexts(contexts, m);
    std::vector<Matrix<Scalar>> soft(contexts.size());
    parallel_for(contexts.size(), [&](std::size_t i) {
        soft[i] = softmax_attention<Scalar>(contexts[i].dist, Matrix<Scalar>::Constant(m, m, phi));
    });

    ContaminationProblem<Scalar> prob;
    prob.lambda = lambda;
    prob.learners = m;
    prob.q.resize(pairs.size());
    prob.g.resize(pairs.size());
    prob.q_total.resize(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        const auto& ti = contexts[static_cast<std::size_t>(i)].expected;
        const auto& tj = contexts[static_cast<std::size_t>(j)].expected;
        const auto& si = soft[static_cast<std::size_t>(i)];
        const auto& sj = soft[static_cast<std::size_t>(j)];
        Matrix<Scalar> q = Matrix<Scalar>::Zero(m, m);
        for (Index k = 0; k < m; ++k)
            for (Index l = 0; l < m; ++l)
                if (k != l) q(k, l) = (Scalar(1) - epsilon) * (sj(l, k) * tj[k] - si(l, k) * ti[k]);
        prob.q_total[p] = q.sum();
        prob.q[p] = std::move(q);
        prob.g[p] = epsilon * (tj - ti);
    });
    return prob;
}

enum class HingeSign {
    Misranking,  ///< max(0, -R): penalizes pairs ranked the wrong way
    Literal,     ///< max(0, R) as written in the original formulation
};

template <class Scalar>
struct HingeValue {
    Scalar value{};
    Matrix<Scalar> subgradient;
};

template <class Scalar>
HingeValue<Scalar> hinge_objective(const ContaminationProblem<Scalar>& prob, const Matrix<Scalar>& theta,
                                   HingeSign sign = HingeSign::Misranking) {
    const Index m = prob.learners;
    const Vector<Scalar> cols = theta.colwise().sum().transpose();
    Vector<Scalar> gsum = Vector<Scalar>::Zero(m);
    Scalar loss = Scalar(0);
    const Scalar dir = sign == HingeSign::Misranking ? Scalar(-1) : Scalar(1);
    for (std::size_t p = 0; p < prob.pairs(); ++p) {
        const Scalar margin = dir * (prob.q_total[p] + prob.g[p].dot(cols));
        if (margin > Scalar(0)) {
            loss += margin;
            gsum += dir * prob.g[p];
        }
    }
    HingeValue<Scalar> out;
    out.value = loss + prob.lambda * theta.squaredNorm();
    // d R / d theta_lk = G_k for every l != k
    out.subgradient = gsum.transpose().replicate(m, 1) + Scalar(2) * prob.lambda * theta;
    out.subgradient.diagonal().setZero();
    return out;
}

/// Euclidean projection onto {w >= 0, sum w = 1} by sort and threshold.
template <class Scalar>
Vector<Scalar> project_row_simplex(const Vector<Scalar>& v) {
    const Index n = v.size();
    if (n == 0) return v;
    std::vector<Scalar> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<Scalar>());
    Scalar cumulative = Scalar(0);
    Scalar shift = Scalar(0);
    for (Index r = 0; r < n; ++r) {
        cumulative += u[static_cast<std::size_t>(r)];
        const Scalar candidate = (cumulative - Scalar(1)) / static_cast<Scalar>(r + 1);
        if (u[static_cast<std::size_t>(r)] - candidate > Scalar(0)) shift = candidate;
    }
    return (v.array() - shift).cwiseMax(Scalar(0)).matrix();
}

/// Projects every row onto the simplex over its off-diagonal entries.
template <class Scalar>
Matrix<Scalar> project_theta(const Matrix<Scalar>& theta) {
    const Index m = theta.rows();
    Matrix<Scalar> out = Matrix<Scalar>::Zero(m, m);
    Vector<Scalar> row(m - 1);
    for (Index l = 0; l < m; ++l) {
        for (Index k = 0, c = 0; k < m; ++k)
            if (k != l) row[c++] = theta(l, k);
        const Vector<Scalar> proj = project_row_simplex(row);
        for (Index k = 0, c = 0; k < m; ++k)
            if (k != l) out(l, k) = proj[c++];
    }
    return out;
}

template <class Scalar>
struct ContaminationSolution {
    Matrix<Scalar> theta;
    Scalar objective{};
    std::vector<Scalar> best_history;  ///< best objective after each iteration
};

/// Projected subgradient with step step_size / sqrt(t), returning the best iterate.
template <class Scalar>
ContaminationSolution<Scalar> solve_contamination(const ContaminationProblem<Scalar>& prob, int steps, Scalar step_size,
                                                  HingeSign sign = HingeSign::Misranking) {
    if (steps < 1) throw Error(ErrorCode::InvalidConfig, "solver needs at least one step");
    if (!(step_size > Scalar(0))) throw Error(ErrorCode::InvalidConfig, "step size must be positive");
    const Index m = prob.learners;
    Matrix<Scalar> theta = ContaminationParams<Scalar>::uniform_theta(m);
    auto current = hinge_objective(prob, theta, sign);
    if (!std::isfinite(static_cast<double>(current.value)))
        throw Error(ErrorCode::NonFiniteObjective, "objective is not finite at the initial point");
    ContaminationSolution<Scalar> best{theta, current.value, {}};
    best.best_history.reserve(static_cast<std::size_t>(steps));
    for (int t = 1; t <= steps; ++t) {
        const Scalar eta = step_size / std::sqrt(static_cast<Scalar>(t));
        theta = project_theta<Scalar>(theta - eta * current.subgradient);
        current = hinge_objective(prob, theta, sign);
        if (!std::isfinite(static_cast<double>(current.value)))
            throw Error(ErrorCode::NonFiniteObjective, "objective diverged at iteration " + std::to_string(t));
        if (current.value < best.objective) {
            best.objective = current.value;
            best.theta = theta;
        }
        best.best_history.push_back(best.objective);
    }
    return best;
}

}  // namespace survbesa
