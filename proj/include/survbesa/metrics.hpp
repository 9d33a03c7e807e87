#pragma once

// Concordance on censored data and the paired t-test used to compare models.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "survbesa/core.hpp"

namespace survbesa {

/// Pairs (i, j) with delta_i = 1 and T_i < T_j, ordered by i then j.
using PairSet = std::vector<std::pair<Index, Index>>;

template <class Scalar>
PairSet comparable_pairs(const SurvivalDataset<Scalar>& data) {
    PairSet pairs;
    const Index n = data.size();
    for (Index i = 0; i < n; ++i) {
        if (data.event(i) != 1) continue;
        for (Index j = 0; j < n; ++j)
            if (data.time(i) < data.time(j)) pairs.emplace_back(i, j);
    }
    return pairs;
}

enum class TieRule {
    Strict,  ///< tied predictions score 0
    Half,    ///< tied predictions score 1/2
};

namespace detail {
class Fenwick {
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
    void add(std::size_t pos) {
        for (++pos; pos < tree_.size(); pos += pos & (~pos + 1)) ++tree_[pos];
    }
    /// Count of inserted positions < pos.
    std::int64_t prefix(std::size_t pos) const {
        std::int64_t s = 0;
        for (; pos > 0; pos -= pos & (~pos + 1)) s += tree_[pos];
        return s;
    }

private:
    std::vector<std::int64_t> tree_;
};
}  // namespace detail

/// Counts concordant comparable pairs. `concordant` counts predicted T_i < T_j,
/// `tied` counts equal predictions; `total` is the number of comparable pairs.
struct Concordance {
    std::int64_t concordant = 0;
    std::int64_t tied = 0;
    std::int64_t total = 0;
};

/// O(n log n): sweep times in decreasing order, keeping predictions of records
/// with strictly larger time in a Fenwick tree over prediction ranks.
template <class Scalar, class Derived>
Concordance concordance_counts(const Eigen::MatrixBase<Derived>& predicted, const SurvivalDataset<Scalar>& data) {
    const Index n = data.size();
    if (predicted.size() != n) throw Error(ErrorCode::DimensionMismatch, "one prediction per record is required");
    std::vector<double> ranks(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) ranks[static_cast<std::size_t>(i)] = static_cast<double>(predicted[i]);
    std::vector<double> levels = ranks;
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    auto level_of = [&](double v) {
        return static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), v) - levels.begin());
    };

    std::vector<Index> by_time(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) by_time[static_cast<std::size_t>(i)] = i;
    std::sort(by_time.begin(), by_time.end(), [&](Index a, Index b) { return data.time(a) > data.time(b); });

    detail::Fenwick tree(levels.size());
    std::int64_t inserted = 0;
    Concordance c;
    std::size_t g = 0;
    while (g < by_time.size()) {
        std::size_t end = g;
        while (end < by_time.size() && data.time(by_time[end]) == data.time(by_time[g])) ++end;
        for (std::size_t r = g; r < end; ++r) {
            const Index i = by_time[r];
            if (data.event(i) != 1) continue;
            const std::size_t lv = level_of(ranks[static_cast<std::size_t>(i)]);
            const std::int64_t below_or_equal = tree.prefix(lv + 1);
            const std::int64_t below = tree.prefix(lv);
            c.total += inserted;
            c.concordant += inserted - below_or_equal;
            c.tied += below_or_equal - below;
        }
        for (std::size_t r = g; r < end; ++r) {
            tree.add(level_of(ranks[static_cast<std::size_t>(by_time[r])]));
            ++inserted;
        }
        g = end;
    }
    return c;
}

/// Fraction of comparable pairs whose predicted times are ordered like the observed ones.
template <class Scalar, class Derived>
double c_index(const Eigen::MatrixBase<Derived>& predicted, const SurvivalDataset<Scalar>& data,
               TieRule ties = TieRule::Strict) {
    const Concordance c = concordance_counts(predicted, data);
    if (c.total == 0) throw Error(ErrorCode::NoComparablePairs, "no comparable pairs");
    const double hits = static_cast<double>(c.concordant) + (ties == TieRule::Half ? 0.5 * static_cast<double>(c.tied) : 0.0);
    return hits / static_cast<double>(c.total);
}

struct TTestResult {
    double t = 0.0;
    double p = 1.0;  ///< two-sided
    double dof = 0.0;
};

/// One-sample t-test on a - b against zero mean (n - 1 degrees of freedom).
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace survbesa
