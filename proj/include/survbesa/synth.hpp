#pragma once

// Synthetic censored data: uniform features on a box, Bernoulli(p) event labels,
// Weibull(k) times whose mean sin(c * sum x) + c oscillates with the features.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "survbesa/core.hpp"
#include "survbesa/random.hpp"

namespace survbesa {

enum class CensoringMode {
    LabelOnly,       ///< flip delta, keep the generated time
    UniformFraction  ///< censored records observe a time uniform on (0, T)
};

struct SynthConfig {
    Index n = 200;
    Index dim = 5;
    std::vector<double> lower = std::vector<double>(5, -2.0);
    std::vector<double> upper = std::vector<double>(5, 5.0);
    double p = 0.2;  ///< probability of an uncensored record
    double c = 3.0;
    double k = 6.0;
    std::uint64_t seed = 0;
    CensoringMode censoring = CensoringMode::LabelOnly;

    void validate() const;
};

/// T = (sin(c * sum x) + c) / Gamma(1 + 1/k) * (-ln u)^(1/k).
template <class Derived>
double gen_event_time(const Eigen::MatrixBase<Derived>& x, double c, double k, double u) {
    if (!(u > 0.0 && u < 1.0)) throw Error(ErrorCode::InvalidValue, "u must lie in (0, 1)");
    const double scale = std::sin(c * x.sum()) + c;
    if (!(scale > 0.0)) throw Error(ErrorCode::NonPositiveScale, "sin(c * sum x) + c must be positive");
    return scale / std::tgamma(1.0 + 1.0 / k) * std::pow(-std::log(u), 1.0 / k);
}

/// Lowest value of sin over [lo, hi].
inline double min_sin_on(double lo, double hi) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    // sin reaches -1 at 3pi/2 + 2 pi n
    const double first = std::ceil((lo - 1.5 * std::numbers::pi) / two_pi);
    if (1.5 * std::numbers::pi + two_pi * first <= hi) return -1.0;
    return std::min(std::sin(lo), std::sin(hi));
}

inline void SynthConfig::validate() const {
    if (n < 1) throw Error(ErrorCode::InvalidConfig, "n must be positive");
    if (static_cast<Index>(lower.size()) != dim || static_cast<Index>(upper.size()) != dim)
        throw Error(ErrorCode::InvalidConfig, "bounds must match the dimension");
    double lo = 0.0, hi = 0.0;
    for (Index j = 0; j < dim; ++j) {
        if (!(lower[static_cast<std::size_t>(j)] < upper[static_cast<std::size_t>(j)]))
            throw Error(ErrorCode::InvalidConfig, "lower bound must be below upper bound");
        lo += lower[static_cast<std::size_t>(j)];
        hi += upper[static_cast<std::size_t>(j)];
    }
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidConfig, "p must lie in [0, 1]");
    if (!(c > 0.0)) throw Error(ErrorCode::InvalidConfig, "c must be positive");
    if (!(k >= 1.0)) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
    if (!(min_sin_on(c * lo, c * hi) + c > 0.0))
        throw Error(ErrorCode::NonPositiveScale, "c = " + std::to_string(c) +
                                                     " allows a non-positive Weibull scale on this feature box");
}

inline Dataset gen_dataset(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::bernoulli_distribution observed(cfg.p);
    Matrix<double> f(cfg.n, cfg.dim);
    Vector<double> t(cfg.n);
    Eigen::VectorXi e(cfg.n);
    for (Index i = 0; i < cfg.n; ++i) {
        for (Index j = 0; j < cfg.dim; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            f(i, j) = cfg.lower[jj] + (cfg.upper[jj] - cfg.lower[jj]) * unit(rng);
        }
        e[i] = observed(rng) ? 1 : 0;
        double u = unit(rng);
        while (!(u > 0.0)) u = unit(rng);
        double time = gen_event_time(f.row(i), cfg.c, cfg.k, u);
        if (cfg.censoring == CensoringMode::UniformFraction && e[i] == 0) {
            double v = unit(rng);
            while (!(v > 0.0)) v = unit(rng);
            time *= v;
        }
        t[i] = time;
    }
    return Dataset(std::move(f), std::move(t), std::move(e));
}

}  // namespace survbesa
