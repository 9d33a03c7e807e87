#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "survbesa/synth.hpp"
#include "survbesa/train.hpp"

using namespace survbesa;

namespace {

Dataset small_synth(std::uint64_t seed, Index n = 60) {
    SynthConfig cfg;
    cfg.n = n;
    cfg.p = 0.6;
    cfg.seed = seed;
    return gen_dataset(cfg);
}

}  // namespace

TEST_CASE("Adam ascends a concave quadratic") {
    TrainConfig cfg;
    Adam<double> adam(1, 2, cfg);
    Matrix<double> x = Matrix<double>::Zero(1, 2);
    const Matrix<double> target = (Matrix<double>(1, 2) << 3, -1).finished();
    for (int t = 0; t < 2000; ++t) adam.ascend(x, -2.0 * (x - target), 0.05);
    CHECK((x - target).cwiseAbs().maxCoeff() < 1e-3);
    CHECK(adam.steps() == 2000);
}

TEST_CASE("train_general loop contract") {
    const auto data = small_synth(1);
    const auto ens = fit_ensemble(data, 5, 0.5, 1.0, 3);
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(train_general(ens, data, cfg), Error);

    cfg.epochs = 1;
    const auto one = train_general(ens, data, cfg);
    CHECK(one.history.size() == 2u);
    // The first Adam step moves each coordinate with a nonzero gradient by about the learning rate.
    const Matrix<double> off = one.params.raw();
    for (Index l = 0; l < 5; ++l)
        for (Index k = 0; k < 5; ++k)
            if (l != k && off(l, k) != 0.0) CHECK(std::abs(off(l, k)) == doctest::Approx(cfg.step_size).epsilon(1e-6));

    cfg.epochs = 7;
    const auto seven = train_general(ens, data, cfg, &data);
    CHECK(seven.history.size() == 8u);
    for (std::size_t e = 0; e < seven.history.size(); ++e) {
        CHECK(seven.history[e].epoch == static_cast<int>(e));
        CHECK(seven.history[e].monitor_c_index == seven.history[e].train_c_index);
    }

    cfg.step_size = 1e-12;
    const auto frozen = train_general(ens, data, cfg);
    CHECK(frozen.params.raw().cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("identical components are a stationary point") {
    const auto data = small_synth(2);
    const auto ens = fit_ensemble(data, 4, 1.0, 1.0, 3);
    TrainConfig cfg;
    cfg.epochs = 5;
    const auto r = train_general(ens, data, cfg);
    CHECK(r.params.raw().cwiseAbs().maxCoeff() == 0.0);
    for (const auto& h : r.history) {
        CHECK(h.surrogate == r.history.front().surrogate);
        CHECK(h.train_c_index == r.history.front().train_c_index);
    }
}

TEST_CASE("training raises the surrogate") {
    const auto data = small_synth(3, 80);
    const auto ens = fit_ensemble(data, 8, 0.4, 0.5, 4);
    TrainConfig cfg;
    cfg.epochs = 50;
    const auto r = train_general(ens, data, cfg);
    CHECK(r.history.back().surrogate > r.history.front().surrogate);
}

TEST_CASE("fit_model kinds") {
    const auto data = small_synth(4);
    Hyperparameters h;
    h.learners = 6;
    h.fraction = 0.5;
    h.epochs = 10;
    h.solver_steps = 50;

    const auto single = fit_model(ModelKind::SingleBeran, data, h, 9);
    CHECK(single.ensemble.size() == 1);
    Hyperparameters one = h;
    one.learners = 1;
    one.fraction = 1.0;
    const auto besa1 = fit_model(ModelKind::SurvBESA, data, one, 9);
    CHECK_FALSE(besa1.uses_attention());
    CHECK(predict_expected_times(single, data) == predict_expected_times(besa1, data));

    const auto bag = fit_model(ModelKind::Bagging, data, h, 9);
    const auto besa = fit_model(ModelKind::SurvBESA, data, h, 9);
    CHECK(bag.ensemble.subsets() == besa.ensemble.subsets());
    CHECK(besa.history.size() == 11u);

    const auto contam = fit_model(ModelKind::SurvBESAContam, data, h, 9);
    const Matrix<double>& theta = contam.contamination.theta;
    REQUIRE(theta.rows() == 6);
    for (Index l = 0; l < 6; ++l) CHECK(theta.row(l).sum() == doctest::Approx(1.0).epsilon(1e-9));

    for (const auto* fm : {&single, &bag, &besa, &contam}) {
        const Vector<double> t = predict_expected_times(*fm, data);
        CHECK(t.allFinite());
        for (Index i = 0; i < 5; ++i)
            CHECK(expected_time(predict_sf(*fm, data.x(i))) == doctest::Approx(t[i]).epsilon(1e-12));
    }
    CHECK(parse_model_kind("survbesa-contam") == ModelKind::SurvBESAContam);
    CHECK_THROWS_AS(parse_model_kind("forest"), Error);
}

TEST_CASE("tune contract") {
    const auto train = small_synth(5);
    const auto val = small_synth(6, 40);
    SearchSpace space;
    space.epochs = 5;
    space.solver_steps = 20;
    space.learners_hi = 8;

    const auto one = tune(ModelKind::Bagging, train, val, space, 1, 11);
    REQUIRE(one.trials.size() == 1u);
    CHECK(one.best_c_index == one.trials[0].validation_c_index);
    CHECK(one.best.tau == one.trials[0].hyper.tau);

    const auto a = tune(ModelKind::SurvBESA, train, val, space, 6, 12);
    const auto b = tune(ModelKind::SurvBESA, train, val, space, 6, 12);
    REQUIRE(a.trials.size() == b.trials.size());
    for (std::size_t t = 0; t < a.trials.size(); ++t) {
        CHECK(a.trials[t].hyper.tau == b.trials[t].hyper.tau);
        CHECK(a.trials[t].hyper.learners == b.trials[t].hyper.learners);
        CHECK(a.trials[t].validation_c_index == b.trials[t].validation_c_index);
    }
    CHECK(a.best_seed == b.best_seed);
    double best = -1;
    std::size_t first = 0;
    for (std::size_t t = 0; t < a.trials.size(); ++t)
        if (a.trials[t].failure.empty() && a.trials[t].validation_c_index > best) {
            best = a.trials[t].validation_c_index;
            first = t;
        }
    CHECK(a.best_c_index == best);
    CHECK(a.best_seed == a.trials[first].seed);

    // Trial t draws the same configuration and ensemble seed for every model kind.
    const auto bag = tune(ModelKind::Bagging, train, val, space, 6, 12);
    for (std::size_t t = 0; t < bag.trials.size(); ++t) {
        CHECK(bag.trials[t].hyper.fraction == a.trials[t].hyper.fraction);
        CHECK(bag.trials[t].seed == a.trials[t].seed);
    }

    const auto single = tune(ModelKind::SingleBeran, train, val, space, 10, 13);
    REQUIRE(single.trials.size() == space.tau.size());
    for (std::size_t t = 0; t < space.tau.size(); ++t) CHECK(single.trials[t].hyper.tau == space.tau[t]);
    CHECK(single.best.learners == 1);

    CHECK_THROWS_AS(tune(ModelKind::Bagging, train, val, space, 0, 1), Error);
    for (const auto& t : a.trials) {
        CHECK(t.hyper.fraction >= space.fraction_lo);
        CHECK(t.hyper.fraction <= space.fraction_hi);
        CHECK(t.hyper.learners >= space.learners_lo);
        CHECK(t.hyper.learners <= space.learners_hi);
    }
}
