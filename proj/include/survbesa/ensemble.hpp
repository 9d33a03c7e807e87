#pragma once

// Bagged Beran estimators over random subsets drawn without replacement.

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "survbesa/beran.hpp"
#include "survbesa/core.hpp"
#include "survbesa/random.hpp"

namespace survbesa {

inline constexpr int kMaxSubsetRedraws = 100;

namespace detail {
inline std::uint64_t next_model_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}
}  // namespace detail

template <class Scalar>
class EnsembleModel {
public:
    EnsembleModel() = default;

    /// Builds learners from explicit subsets of `data` (indices into data's row order).
    EnsembleModel(const SurvivalDataset<Scalar>& data, std::vector<std::vector<Index>> subsets,
                  std::vector<Scalar> taus, double fraction)
        : subsets_(std::move(subsets)), fraction_(fraction), id_(detail::next_model_id()) {
        if (subsets_.empty()) throw Error(ErrorCode::InvalidConfig, "ensemble needs at least one learner");
        if (taus.size() == 1) taus.assign(subsets_.size(), taus.front());
        if (taus.size() != subsets_.size())
            throw Error(ErrorCode::InvalidConfig, "need one temperature or one per learner");
        learners_.reserve(subsets_.size());
        for (std::size_t k = 0; k < subsets_.size(); ++k) {
            for (Index i : subsets_[k])
                if (i < 0 || i >= data.size()) throw Error(ErrorCode::InvalidValue, "subset index out of range");
            learners_.emplace_back(data.subset(subsets_[k]), taus[k]);
        }
        global_grid_ = data.event_grid();
        dim_ = data.dim();
    }

    Index size() const noexcept { return static_cast<Index>(learners_.size()); }
    Index dim() const noexcept { return dim_; }
    const std::vector<BeranModel<Scalar>>& learners() const noexcept { return learners_; }
    const std::vector<std::vector<Index>>& subsets() const noexcept { return subsets_; }
    const Vector<Scalar>& global_grid() const noexcept { return global_grid_; }
    double fraction() const noexcept { return fraction_; }

    /// Last point of the global grid; expected times never exceed it.
    Scalar horizon() const { return global_grid_[global_grid_.size() - 1]; }

    /// Identity shared by copies; used to reject mixing contexts from different models.
    std::uint64_t id() const noexcept { return id_; }

private:
    std::vector<BeranModel<Scalar>> learners_;
    std::vector<std::vector<Index>> subsets_;
    Vector<Scalar> global_grid_;
    double fraction_ = 1.0;
    Index dim_ = 0;
    std::uint64_t id_ = 0;
};

/// Subset size m = round(fraction * n).
inline Index subset_size(Index n, double fraction) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw Error(ErrorCode::InvalidFraction, "fraction must lie in (0, 1]");
    const auto m = static_cast<Index>(std::lround(fraction * static_cast<double>(n)));
    if (m < 2) throw Error(ErrorCode::InvalidFraction, "subset would hold fewer than 2 records");
    return m;
}

template <class Scalar>
EnsembleModel<Scalar> fit_ensemble(const SurvivalDataset<Scalar>& data, Index learners, double fraction,
                                   const std::vector<Scalar>& taus, std::uint64_t seed) {
    if (learners < 1) throw Error(ErrorCode::InvalidConfig, "ensemble needs at least one learner");
    const Index n = data.size();
    const Index m = subset_size(n, fraction);
    std::vector<std::vector<Index>> subsets;
    subsets.reserve(static_cast<std::size_t>(learners));
    for (Index k = 0; k < learners; ++k) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        bool ok = false;
        for (int attempt = 0; attempt < kMaxSubsetRedraws && !ok; ++attempt) {
            auto idx = sample_without_replacement(n, m, rng);
            Index uncensored = 0;
            for (Index i : idx) uncensored += data.event(i);
            if (uncensored >= 2) {
                subsets.push_back(std::move(idx));
                ok = true;
            }
        }
        if (!ok)
            throw Error(ErrorCode::DegenerateSubsets,
                        "learner " + std::to_string(k) + ": no subset with >= 2 uncensored records after " +
                            std::to_string(kMaxSubsetRedraws) + " draws");
    }
    return EnsembleModel<Scalar>(data, std::move(subsets), taus, fraction);
}

template <class Scalar>
EnsembleModel<Scalar> fit_ensemble(const SurvivalDataset<Scalar>& data, Index learners, double fraction, Scalar tau,
                                   std::uint64_t seed) {
    return fit_ensemble(data, learners, fraction, std::vector<Scalar>{tau}, seed);
}

/// Component survival values on the global grid, one row per learner.
template <class Scalar, class Derived>
Matrix<Scalar> component_matrix(const EnsembleModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
    if (x.size() != model.dim()) throw Error(ErrorCode::DimensionMismatch, "query dimension differs from model");
    const auto& grid = model.global_grid();
    Matrix<Scalar> out(model.size(), grid.size());
    for (Index k = 0; k < model.size(); ++k)
        out.row(k) = rebase_to_grid(beran_predict(model.learners()[static_cast<std::size_t>(k)], x), grid)
                         .values()
                         .transpose();
    return out;
}

template <class Scalar, class Derived>
std::vector<StepSurvivalFunction<Scalar>> predict_component_sfs(const EnsembleModel<Scalar>& model,
                                                                 const Eigen::MatrixBase<Derived>& x) {
    const Matrix<Scalar> values = component_matrix(model, x);
    std::vector<StepSurvivalFunction<Scalar>> out;
    out.reserve(static_cast<std::size_t>(model.size()));
    for (Index k = 0; k < values.rows(); ++k) out.emplace_back(model.global_grid(), values.row(k).transpose());
    return out;
}

/// Row average accumulated in row order, so every column sums identically and
/// monotone rows give a monotone mean with no rounding inversions.
template <class Scalar>
Vector<Scalar> row_mean(const Matrix<Scalar>& rows) {
    Vector<Scalar> acc = rows.row(0).transpose();
    for (Index k = 1; k < rows.rows(); ++k) acc += rows.row(k).transpose();
    return acc / static_cast<Scalar>(rows.rows());
}

/// Simple average of the component predictions (the plain bagging ensemble).
template <class Scalar, class Derived>
StepSurvivalFunction<Scalar> predict_bagging(const EnsembleModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
    const Matrix<Scalar> values = component_matrix(model, x);
    return StepSurvivalFunction<Scalar>(model.global_grid(), row_mean(values));
}

}  // namespace survbesa
