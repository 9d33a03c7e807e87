#pragma once

// Gradient training of attention temperatures, the four model pipelines and
// seeded hyperparameter search.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "survbesa/attention.hpp"
#include "survbesa/contamination.hpp"
#include "survbesa/ensemble.hpp"
#include "survbesa/metrics.hpp"
#include "survbesa/random.hpp"

namespace survbesa {

struct TrainConfig {
    int epochs = 100;
    double step_size = 0.1;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double sigmoid_slope = 1.0;
    bool record_history = true;
};

/// Adam on a dense parameter matrix. ascend() moves along +gradient.
template <class Scalar>
class Adam {
public:
    Adam(Index rows, Index cols, const TrainConfig& cfg)
        : m_(Matrix<Scalar>::Zero(rows, cols)), v_(Matrix<Scalar>::Zero(rows, cols)), cfg_(cfg) {}

    void ascend(Matrix<Scalar>& params, const Matrix<Scalar>& grad, Scalar lr) {
        ++t_;
        const auto b1 = static_cast<Scalar>(cfg_.adam_beta1);
        const auto b2 = static_cast<Scalar>(cfg_.adam_beta2);
        m_ = b1 * m_ + (Scalar(1) - b1) * grad;
        v_ = b2 * v_ + (Scalar(1) - b2) * grad.cwiseAbs2();
        const Scalar c1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(t_));
        const Scalar c2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(t_));
        params.array() += lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + static_cast<Scalar>(cfg_.adam_eps));
    }

    int steps() const noexcept { return t_; }

private:
    Matrix<Scalar> m_;
    Matrix<Scalar> v_;
    TrainConfig cfg_;
    int t_ = 0;
};

struct EpochRecord {
    int epoch = 0;
    double surrogate = 0.0;
    double train_c_index = 0.0;
    double monitor_c_index = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
    AttentionParams<double> params;
    std::vector<EpochRecord> history;  ///< epochs + 1 entries, the first at the initial point
};

/// Expected times of the attention-aggregated SFs.
inline Vector<double> attention_predictions(std::span<const AttentionContext<double>> contexts,
                                            const AttentionParams<double>& params) {
    Vector<double> out(static_cast<Index>(contexts.size()));
    parallel_for(contexts.size(), [&](std::size_t i) {
        out[static_cast<Index>(i)] = attention_expected_time(contexts[i], attention_matrix(contexts[i], params));
    });
    return out;
}

/// Full-batch Adam ascent on sum over J of sigmoid(R_ij), starting from raw = 0.
/// `monitor` (optional) is scored every epoch, e.g. a held-out test set.
inline TrainResult train_general(const EnsembleModel<double>& ensemble, const Dataset& data, const TrainConfig& cfg,
                                 const Dataset* monitor = nullptr) {
    if (cfg.epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
    if (!(cfg.step_size > 0.0)) throw Error(ErrorCode::InvalidConfig, "step size must be positive");
    const PairSet pairs = comparable_pairs(data);
    if (pairs.empty()) throw Error(ErrorCode::EmptyPairSet, "training data has no comparable pairs");
    const auto contexts = build_contexts(ensemble, data);
    std::vector<AttentionContext<double>> monitor_contexts;
    if (monitor != nullptr) monitor_contexts = build_contexts(ensemble, *monitor);

    TrainResult result{AttentionParams<double>::neutral(ensemble.size()), {}};
    Adam<double> adam(ensemble.size(), ensemble.size(), cfg);
    auto record = [&](int epoch, double surrogate) {
        if (!cfg.record_history) return;
        EpochRecord r;
        r.epoch = epoch;
        r.surrogate = surrogate;
        r.train_c_index = c_index(attention_predictions(contexts, result.params), data);
        if (monitor != nullptr) r.monitor_c_index = c_index(attention_predictions(monitor_contexts, result.params), *monitor);
        result.history.push_back(r);
    };

    auto current = surrogate_objective<double>(pairs, contexts, result.params, cfg.sigmoid_slope);
    record(0, current.value);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        adam.ascend(result.params.raw(), current.gradient, cfg.step_size);
        current = surrogate_objective<double>(pairs, contexts, result.params, cfg.sigmoid_slope);
        if (!std::isfinite(current.value))
            throw Error(ErrorCode::NonFiniteObjective, "surrogate diverged at epoch " + std::to_string(epoch));
        record(epoch, current.value);
    }
    return result;
}

enum class ModelKind { SurvBESA, SurvBESAContam, Bagging, SingleBeran };

inline std::string_view to_string(ModelKind k) noexcept {
    switch (k) {
        case ModelKind::SurvBESA: return "survbesa";
        case ModelKind::SurvBESAContam: return "survbesa-contam";
        case ModelKind::Bagging: return "bagging";
        case ModelKind::SingleBeran: return "single-beran";
    }
    return "unknown";
}

inline ModelKind parse_model_kind(std::string_view s) {
    for (auto k : {ModelKind::SurvBESA, ModelKind::SurvBESAContam, ModelKind::Bagging, ModelKind::SingleBeran})
        if (s == to_string(k)) return k;
    throw Error(ErrorCode::InvalidConfig, "unknown model '" + std::string(s) + "'");
}

struct Hyperparameters {
    double tau = 1.0;
    Index learners = 10;
    double fraction = 0.5;
    double step_size = 0.1;
    double epsilon = 0.5;
    double phi = 0.1;
    double lambda = 1.0;
    int epochs = 100;
    int solver_steps = 300;
};

struct FittedModel {
    ModelKind kind = ModelKind::Bagging;
    Hyperparameters hyper;
    std::uint64_t seed = 0;
    EnsembleModel<double> ensemble;
    AttentionParams<double> attention;
    ContaminationParams<double> contamination;
    std::vector<EpochRecord> history;

    bool uses_attention() const noexcept {
        return (kind == ModelKind::SurvBESA || kind == ModelKind::SurvBESAContam) && ensemble.size() > 1;
    }
};

/// Solves the contamination problem on mean-scaled pairs so one step size works across data sizes.
inline ContaminationParams<double> train_contamination(const EnsembleModel<double>& ensemble, const Dataset& data,
                                                       const Hyperparameters& h) {
    const PairSet pairs = comparable_pairs(data);
    if (pairs.empty()) throw Error(ErrorCode::EmptyPairSet, "training data has no comparable pairs");
    const auto contexts = build_contexts(ensemble, data);
    auto prob = precompute_qg<double>(contexts, pairs, h.epsilon, h.phi, h.lambda);
    const double scale = 1.0 / static_cast<double>(pairs.size());
    for (std::size_t p = 0; p < prob.pairs(); ++p) {
        prob.q[p] *= scale;
        prob.g[p] *= scale;
        prob.q_total[p] *= scale;
    }
    prob.lambda *= scale;
    const auto sol = solve_contamination(prob, h.solver_steps, h.step_size);
    return ContaminationParams<double>{h.epsilon, h.phi, sol.theta};
}

/// Fits one model kind. SingleBeran ignores learners/fraction (one learner on all data).
inline FittedModel fit_model(ModelKind kind, const Dataset& train, const Hyperparameters& h, std::uint64_t seed,
                             const TrainConfig& base = {}, const Dataset* monitor = nullptr) {
    FittedModel fm;
    fm.kind = kind;
    fm.hyper = h;
    fm.seed = seed;
    if (kind == ModelKind::SingleBeran) {
        fm.hyper.learners = 1;
        fm.hyper.fraction = 1.0;
    }
    fm.ensemble = fit_ensemble(train, fm.hyper.learners, fm.hyper.fraction, fm.hyper.tau, seed);
    if (!fm.uses_attention()) return fm;
    if (kind == ModelKind::SurvBESA) {
        TrainConfig cfg = base;
        cfg.epochs = h.epochs;
        cfg.step_size = h.step_size;
        auto res = train_general(fm.ensemble, train, cfg, monitor);
        fm.attention = std::move(res.params);
        fm.history = std::move(res.history);
    } else {
        fm.contamination = train_contamination(fm.ensemble, train, h);
    }
    return fm;
}

/// Attention weights the model applies to one context (empty for non-attention models).
inline Matrix<double> model_attention(const FittedModel& fm, const AttentionContext<double>& ctx) {
    if (fm.kind == ModelKind::SurvBESA) return attention_matrix(ctx, fm.attention);
    return contaminated_attention(ctx.dist, fm.contamination);
}

/// Predicted survival function of a fitted model for one query.
template <class Derived>
StepSF predict_sf(const FittedModel& fm, const Eigen::MatrixBase<Derived>& x) {
    if (!fm.uses_attention()) return predict_bagging(fm.ensemble, x);
    const auto ctx = build_context(fm.ensemble, x);
    const auto adjusted = adjust_sfs(ctx, model_attention(fm, ctx));
    return aggregate_sf(std::span<const StepSF>(adjusted));
}

/// Expected times of the model's predicted SFs for every record of `data`.
inline Vector<double> predict_expected_times(const FittedModel& fm, const Dataset& data) {
    Vector<double> out(data.size());
    parallel_for(static_cast<std::size_t>(data.size()), [&](std::size_t i) {
        const auto r = static_cast<Index>(i);
        if (!fm.uses_attention()) {
            out[r] = expected_time(predict_bagging(fm.ensemble, data.x(r)));
        } else {
            const auto ctx = build_context(fm.ensemble, data.x(r));
            out[r] = attention_expected_time(ctx, model_attention(fm, ctx));
        }
    });
    return out;
}

/// Candidate values per hyperparameter. Continuous ranges are [lo, hi]; lo == hi fixes the value.
struct SearchSpace {
    std::vector<double> tau{1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3};
    double fraction_lo = 0.1, fraction_hi = 0.7;
    Index learners_lo = 5, learners_hi = 50;
    std::vector<double> step_size{1e-3, 1e-2, 1e-1};
    double epsilon_lo = 0.0, epsilon_hi = 1.0;
    std::vector<double> phi{1e-2, 1e-1, 1e0, 1e1};
    std::vector<double> lambda{1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3};
    int epochs = 100;
    int solver_steps = 300;

    void validate() const {
        if (tau.empty() || step_size.empty() || phi.empty() || lambda.empty())
            throw Error(ErrorCode::InvalidConfig, "search grids must be non-empty");
        if (fraction_lo > fraction_hi || learners_lo > learners_hi || epsilon_lo > epsilon_hi || learners_lo < 1)
            throw Error(ErrorCode::InvalidConfig, "search ranges must satisfy lo <= hi");
    }
};

struct TrialRecord {
    int trial = 0;
    Hyperparameters hyper;
    std::uint64_t seed = 0;
    double validation_c_index = std::numeric_limits<double>::quiet_NaN();
    std::string failure;  ///< empty when the trial completed
};

struct TuneResult {
    Hyperparameters best;
    std::uint64_t best_seed = 0;
    double best_c_index = std::numeric_limits<double>::quiet_NaN();
    std::vector<TrialRecord> trials;
};

/// Draws every hyperparameter in a fixed order whatever the model kind, so trial t
/// of different kinds share tau, ensemble size, fraction and ensemble seed.
inline Hyperparameters sample_hyperparameters(const SearchSpace& s, Rng& rng) {
    auto pick = [&](const std::vector<double>& v) {
        return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
    };
    auto uniform = [&](double lo, double hi) {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        return lo + (hi - lo) * u;
    };
    Hyperparameters h;
    h.tau = pick(s.tau);
    h.learners = std::uniform_int_distribution<Index>(s.learners_lo, s.learners_hi)(rng);
    h.fraction = std::round(uniform(s.fraction_lo, s.fraction_hi) * 100.0) / 100.0;
    h.step_size = pick(s.step_size);
    h.epsilon = std::round(uniform(s.epsilon_lo, s.epsilon_hi) * 100.0) / 100.0;
    h.phi = pick(s.phi);
    h.lambda = pick(s.lambda);
    h.epochs = s.epochs;
    h.solver_steps = s.solver_steps;
    return h;
}

/// Seeded random search; a single-Beran search whose tau grid fits in the budget
/// enumerates the grid instead. Ties keep the first trial seen.
inline TuneResult tune(ModelKind kind, const Dataset& train, const Dataset& validation, const SearchSpace& space,
                       int budget, std::uint64_t seed, const TrainConfig& base = {}) {
    if (budget < 1) throw Error(ErrorCode::InvalidConfig, "budget must be >= 1");
    space.validate();
    std::vector<TrialRecord> trials;
    const bool enumerate = kind == ModelKind::SingleBeran && static_cast<std::size_t>(budget) >= space.tau.size();
    const int count = enumerate ? static_cast<int>(space.tau.size()) : budget;
    for (int t = 0; t < count; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        TrialRecord rec;
        rec.trial = t;
        rec.hyper = sample_hyperparameters(space, rng);
        if (enumerate) rec.hyper.tau = space.tau[static_cast<std::size_t>(t)];
        rec.seed = derive_seed(seed, 1'000'000ULL + static_cast<std::uint64_t>(t));
        trials.push_back(rec);
    }
    TrainConfig cfg = base;
    cfg.record_history = false;
    parallel_for(trials.size(), [&](std::size_t t) {
        auto& rec = trials[t];
        try {
            const FittedModel fm = fit_model(kind, train, rec.hyper, rec.seed, cfg);
            rec.validation_c_index = c_index(predict_expected_times(fm, validation), validation);
        } catch (const Error& e) {
            rec.failure = e.what();
        }
    });
    TuneResult res;
    for (const auto& rec : trials) {
        if (!rec.failure.empty()) continue;
        if (std::isnan(res.best_c_index) || rec.validation_c_index > res.best_c_index) {
            res.best_c_index = rec.validation_c_index;
            res.best = rec.hyper;
            res.best_seed = rec.seed;
        }
    }
    res.trials = std::move(trials);
    if (std::isnan(res.best_c_index)) throw Error(ErrorCode::NonFiniteObjective, "every tuning trial failed");
    if (kind == ModelKind::SingleBeran) {
        res.best.learners = 1;
        res.best.fraction = 1.0;
    }
    return res;
}

}  // namespace survbesa
