#pragma once

// Censored survival data and right-continuous step survival functions.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "survbesa/error.hpp"

namespace survbesa {

using Index = Eigen::Index;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
struct SurvivalRecord {
    Vector<Scalar> features;
    Scalar time{};
    int event = 0;
};

/// Censored observations (x_i, delta_i, T_i) stored column-major by feature.
/// Row order is the caller's order; sorted_order() gives ascending time with
/// uncensored records before censored ones at equal times.
template <class Scalar>
class SurvivalDataset {
public:
    SurvivalDataset() = default;

    SurvivalDataset(Matrix<Scalar> features, Vector<Scalar> times, Eigen::VectorXi events)
        : features_(std::move(features)), times_(std::move(times)), events_(std::move(events)) {
        const Index n = features_.rows();
        if (n == 0) throw Error(ErrorCode::EmptyDataset, "dataset has no records");
        if (times_.size() != n || events_.size() != n)
            throw Error(ErrorCode::DimensionMismatch, "times/events length differs from feature rows");
        for (Index i = 0; i < n; ++i) {
            if (!(times_[i] > Scalar(0)) || !std::isfinite(static_cast<double>(times_[i])))
                throw Error(ErrorCode::InvalidValue, "time at index " + std::to_string(i) + " must be positive");
            if (events_[i] != 0 && events_[i] != 1)
                throw Error(ErrorCode::InvalidValue, "event at index " + std::to_string(i) + " must be 0 or 1");
            for (Index j = 0; j < features_.cols(); ++j) {
                if (!std::isfinite(static_cast<double>(features_(i, j))))
                    throw Error(ErrorCode::InvalidValue, "feature " + std::to_string(j) + " at index " +
                                                             std::to_string(i) + " is not finite");
            }
        }
        order_.resize(static_cast<std::size_t>(n));
        std::iota(order_.begin(), order_.end(), Index{0});
        std::stable_sort(order_.begin(), order_.end(), [this](Index a, Index b) {
            if (times_[a] != times_[b]) return times_[a] < times_[b];
            return events_[a] > events_[b];
        });
    }

    Index size() const noexcept { return features_.rows(); }
    Index dim() const noexcept { return features_.cols(); }

    const Matrix<Scalar>& features() const noexcept { return features_; }
    const Vector<Scalar>& times() const noexcept { return times_; }
    const Eigen::VectorXi& events() const noexcept { return events_; }
    const std::vector<Index>& sorted_order() const noexcept { return order_; }

    auto x(Index i) const { return features_.row(i).transpose(); }
    Scalar time(Index i) const { return times_[i]; }
    int event(Index i) const { return events_[i]; }

    Index uncensored_count() const { return events_.sum(); }

    /// Records at the given indices, in the given order.
    SurvivalDataset subset(std::span<const Index> idx) const {
        Matrix<Scalar> f(static_cast<Index>(idx.size()), dim());
        Vector<Scalar> t(static_cast<Index>(idx.size()));
        Eigen::VectorXi e(static_cast<Index>(idx.size()));
        for (std::size_t r = 0; r < idx.size(); ++r) {
            f.row(static_cast<Index>(r)) = features_.row(idx[r]);
            t[static_cast<Index>(r)] = times_[idx[r]];
            e[static_cast<Index>(r)] = events_[idx[r]];
        }
        return SurvivalDataset(std::move(f), std::move(t), std::move(e));
    }

    SurvivalDataset with_features(Matrix<Scalar> f) const {
        return SurvivalDataset(std::move(f), times_, events_);
    }

    /// Strictly increasing distinct uncensored event times.
    Vector<Scalar> event_grid() const {
        std::vector<Scalar> g;
        for (Index i : order_)
            if (events_[i] == 1 && (g.empty() || g.back() != times_[i])) g.push_back(times_[i]);
        return Eigen::Map<const Vector<Scalar>>(g.data(), static_cast<Index>(g.size()));
    }

private:
    Matrix<Scalar> features_;
    Vector<Scalar> times_;
    Eigen::VectorXi events_;
    std::vector<Index> order_;
};

template <class Scalar>
SurvivalDataset<Scalar> validate_dataset(std::span<const SurvivalRecord<Scalar>> records) {
    if (records.empty()) throw Error(ErrorCode::EmptyDataset, "no records");
    const Index d = records.front().features.size();
    Matrix<Scalar> f(static_cast<Index>(records.size()), d);
    Vector<Scalar> t(static_cast<Index>(records.size()));
    Eigen::VectorXi e(static_cast<Index>(records.size()));
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.features.size() != d)
            throw Error(ErrorCode::DimensionMismatch,
                        "record " + std::to_string(i) + " has " + std::to_string(r.features.size()) +
                            " features, expected " + std::to_string(d));
        f.row(static_cast<Index>(i)) = r.features.transpose();
        t[static_cast<Index>(i)] = r.time;
        e[static_cast<Index>(i)] = r.event;
    }
    return SurvivalDataset<Scalar>(std::move(f), std::move(t), std::move(e));
}

/// S(t) on a grid t_1 < ... < t_m with S(t) = 1 for t < t_1 and S(t) = S_l on [t_l, t_{l+1}).
template <class Scalar>
class StepSurvivalFunction {
public:
    StepSurvivalFunction() = default;

    StepSurvivalFunction(Vector<Scalar> grid, Vector<Scalar> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (grid_.size() != values_.size())
            throw Error(ErrorCode::DimensionMismatch, "grid and values differ in length");
        Scalar prev_t = Scalar(0);
        Scalar prev_s = Scalar(1);
        for (Index l = 0; l < grid_.size(); ++l) {
            if (!(grid_[l] > prev_t))
                throw Error(ErrorCode::InvalidValue, "grid must be positive and strictly increasing");
            if (!(values_[l] <= prev_s) || !(values_[l] >= Scalar(0)))
                throw Error(ErrorCode::InvalidValue,
                            "survival values must be non-increasing within [0, 1] (index " + std::to_string(l) + ")");
            prev_t = grid_[l];
            prev_s = values_[l];
        }
    }

    const Vector<Scalar>& grid() const noexcept { return grid_; }
    const Vector<Scalar>& values() const noexcept { return values_; }
    Index size() const noexcept { return grid_.size(); }
    bool empty() const noexcept { return grid_.size() == 0; }

    friend bool operator==(const StepSurvivalFunction& a, const StepSurvivalFunction& b) {
        return a.grid_.size() == b.grid_.size() && a.grid_ == b.grid_ && a.values_ == b.values_;
    }

private:
    Vector<Scalar> grid_;
    Vector<Scalar> values_;
};

template <class Scalar>
Scalar sf_eval(const StepSurvivalFunction<Scalar>& sf, Scalar t) {
    const auto& g = sf.grid();
    const auto* first = g.data();
    const auto pos = std::upper_bound(first, first + g.size(), t) - first;
    return pos == 0 ? Scalar(1) : sf.values()[pos - 1];
}

/// Carries each step forward onto `target`, which must contain every point of sf.grid().
template <class Scalar>
StepSurvivalFunction<Scalar> rebase_to_grid(const StepSurvivalFunction<Scalar>& sf, const Vector<Scalar>& target) {
    Vector<Scalar> out(target.size());
    Index src = 0;
    Scalar current = Scalar(1);
    for (Index l = 0; l < target.size(); ++l) {
        if (l > 0 && !(target[l] > target[l - 1]))
            throw Error(ErrorCode::InvalidValue, "target grid must be strictly increasing");
        if (src < sf.size() && sf.grid()[src] < target[l])
            throw Error(ErrorCode::GridNotSuperset, "target grid is missing a breakpoint of the source");
        if (src < sf.size() && sf.grid()[src] == target[l]) current = sf.values()[src++];
        out[l] = current;
    }
    if (src != sf.size()) throw Error(ErrorCode::GridNotSuperset, "source extends beyond the target grid");
    return StepSurvivalFunction<Scalar>(target, std::move(out));
}

/// Area under the step function up to its last grid point.
template <class Scalar>
Scalar expected_time(const StepSurvivalFunction<Scalar>& sf) {
    if (sf.empty()) throw Error(ErrorCode::EmptyGrid, "expected time of an empty survival function");
    const auto& g = sf.grid();
    const auto& s = sf.values();
    Scalar area = g[0];
    for (Index l = 1; l < g.size(); ++l) area += s[l - 1] * (g[l] - g[l - 1]);
    return area;
}

/// Exact sup_t |a(t) - b(t)|, attained on the union of breakpoints.
template <class Scalar>
Scalar ks_distance(const StepSurvivalFunction<Scalar>& a, const StepSurvivalFunction<Scalar>& b) {
    Scalar best = Scalar(0);
    Index ia = 0;
    Index ib = 0;
    Scalar sa = Scalar(1);
    Scalar sb = Scalar(1);
    while (ia < a.size() || ib < b.size()) {
        const Scalar ta = ia < a.size() ? a.grid()[ia] : std::numeric_limits<Scalar>::infinity();
        const Scalar tb = ib < b.size() ? b.grid()[ib] : std::numeric_limits<Scalar>::infinity();
        const Scalar t = std::min(ta, tb);
        if (ta == t) sa = a.values()[ia++];
        if (tb == t) sb = b.values()[ib++];
        best = std::max(best, std::abs(sa - sb));
    }
    return best;
}

/// Pointwise mean of survival functions sharing one grid.
template <class Scalar>
StepSurvivalFunction<Scalar> mean_sf(std::span<const StepSurvivalFunction<Scalar>> sfs) {
    if (sfs.empty()) throw Error(ErrorCode::EmptyGrid, "mean of no survival functions");
    const auto& grid = sfs.front().grid();
    Vector<Scalar> acc = Vector<Scalar>::Zero(grid.size());
    for (const auto& sf : sfs) {
        if (sf.size() != grid.size() || sf.grid() != grid)
            throw Error(ErrorCode::GridMismatch, "survival functions are on different grids");
        acc += sf.values();
    }
    acc /= static_cast<Scalar>(sfs.size());
    return StepSurvivalFunction<Scalar>(grid, std::move(acc));
}

using Dataset = SurvivalDataset<double>;
using StepSF = StepSurvivalFunction<double>;

}  // namespace survbesa
