#pragma once

// Beran conditional survival estimator with Gaussian-kernel (softmax) weights.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "survbesa/core.hpp"

namespace survbesa {

/// Denominator floor for 1 - sum_{j<i} alpha_j; the last event drives it to zero.
inline constexpr double kBeranDenominatorFloor = 1e-12;

/// A fitted Beran estimator. Training records are kept in the dataset's sorted order.
template <class Scalar>
class BeranModel {
public:
    BeranModel() = default;

    BeranModel(const SurvivalDataset<Scalar>& data, Scalar tau) : tau_(tau) {
        if (!(tau > Scalar(0)) || !std::isfinite(static_cast<double>(tau)))
            throw Error(ErrorCode::InvalidTau, "temperature must be positive and finite");
        if (data.uncensored_count() == 0)
            throw Error(ErrorCode::NoUncensoredEvents, "Beran estimator needs at least one uncensored record");
        const auto& order = data.sorted_order();
        const Index n = data.size();
        features_.resize(n, data.dim());
        times_.resize(n);
        events_.resize(n);
        for (Index r = 0; r < n; ++r) {
            const Index i = order[static_cast<std::size_t>(r)];
            features_.row(r) = data.features().row(i);
            times_[r] = data.time(i);
            events_[r] = data.event(i);
        }
        grid_ = data.event_grid();
    }

    Scalar tau() const noexcept { return tau_; }
    Index size() const noexcept { return features_.rows(); }
    Index dim() const noexcept { return features_.cols(); }

    /// Sorted training features, times and indicators.
    const Matrix<Scalar>& features() const noexcept { return features_; }
    const Vector<Scalar>& times() const noexcept { return times_; }
    const Eigen::VectorXi& events() const noexcept { return events_; }

    /// Distinct uncensored event times of the training subset.
    const Vector<Scalar>& grid() const noexcept { return grid_; }

private:
    Matrix<Scalar> features_;
    Vector<Scalar> times_;
    Eigen::VectorXi events_;
    Vector<Scalar> grid_;
    Scalar tau_{1};
};

template <class Scalar>
BeranModel<Scalar> beran_fit(const SurvivalDataset<Scalar>& data, Scalar tau) {
    return BeranModel<Scalar>(data, tau);
}

/// softmax(-||x - x_i||^2 / tau) over the training records, in sorted order.
template <class Scalar, class Derived>
Vector<Scalar> kernel_weights(const Eigen::MatrixBase<Derived>& x, const BeranModel<Scalar>& model) {
    if (x.size() != model.dim())
        throw Error(ErrorCode::DimensionMismatch,
                    "query has " + std::to_string(x.size()) + " features, model has " + std::to_string(model.dim()));
    const Vector<Scalar> logits =
        -(model.features().rowwise() - x.derived().transpose().template cast<Scalar>()).rowwise().squaredNorm() /
        model.tau();
    const Vector<Scalar> e = (logits.array() - logits.maxCoeff()).exp();
    return e / e.sum();
}

/// Evaluates the Beran product for arbitrary weights given in the model's sorted order.
/// Uniform weights 1/n give the Kaplan-Meier curve.
template <class Scalar>
StepSurvivalFunction<Scalar> beran_from_weights(const BeranModel<Scalar>& model, const Vector<Scalar>& alpha) {
    if (alpha.size() != model.size())
        throw Error(ErrorCode::DimensionMismatch, "weight vector length differs from training size");
    const auto& times = model.times();
    const auto& events = model.events();
    Vector<Scalar> values(model.grid().size());
    Index step = 0;
    Scalar cumulative = Scalar(0);
    Scalar survival = Scalar(1);
    bool event_at_time = false;
    for (Index i = 0; i < model.size(); ++i) {
        if (events[i] == 1) {
            const Scalar denom = std::max(Scalar(1) - cumulative, Scalar(kBeranDenominatorFloor));
            const Scalar factor = std::clamp(Scalar(1) - alpha[i] / denom, Scalar(0), Scalar(1));
            survival *= factor;
            event_at_time = true;
        }
        cumulative += alpha[i];
        const bool last_at_time = i + 1 == model.size() || times[i + 1] != times[i];
        if (last_at_time && event_at_time) {
            values[step++] = survival;
            event_at_time = false;
        }
    }
    return StepSurvivalFunction<Scalar>(model.grid(), std::move(values));
}

template <class Scalar, class Derived>
StepSurvivalFunction<Scalar> beran_predict(const BeranModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
    return beran_from_weights(model, kernel_weights(x, model));
}

}  // namespace survbesa
