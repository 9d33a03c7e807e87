#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "survbesa/experiment.hpp"

using namespace survbesa;

TEST_CASE("read_csv examples") {
    std::istringstream ok("f0,f1,time,event\n0.5,1,2.5,1\n-1,3e-1,4,0\n");
    const auto d = read_csv(ok);
    CHECK(d.size() == 2);
    CHECK(d.dim() == 2);
    CHECK(d.features()(1, 1) == 0.3);
    CHECK(d.event(1) == 0);

    std::istringstream missing("f0,time\n1,2\n");
    try {
        read_csv(missing);
        FAIL("expected MissingColumn");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingColumn);
    }
    std::istringstream bad_event("f0,time,event\n1,2,1\n1,2,2\n");
    try {
        read_csv(bad_event);
        FAIL("expected InvalidValue");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidValue);
        CHECK(std::string(e.what()).find("index 1") != std::string::npos);
    }
    std::istringstream bad_number("f0,time,event\n1,2,1\nx,2,1\n");
    try {
        read_csv(bad_number);
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(std::string(e.what()).find("row 1") != std::string::npos);
        CHECK(std::string(e.what()).find("f0") != std::string::npos);
    }
    std::istringstream ragged("f0,time,event\n1,2\n");
    CHECK_THROWS_AS(read_csv(ragged), Error);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_csv(empty), Error);
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), Error);
    CHECK(exit_code_for(ErrorCode::ParseError) == 2);
    CHECK(exit_code_for(ErrorCode::NonFiniteObjective) == 3);
    CHECK(exit_code_for(ErrorCode::InvalidConfig) == 1);
}

TEST_CASE("write_csv round-trips exactly") {
    std::mt19937_64 rng(81);
    const auto d = oracle::random_dataset(rng, 25, 3, 0.3);
    std::stringstream buf;
    write_csv(buf, d);
    const auto back = read_csv(buf);
    CHECK(back.features() == d.features());
    CHECK(back.times() == d.times());
    CHECK(back.events() == d.events());
}

TEST_CASE("split sizes and standardization") {
    const auto s = split_sizes(100, {0.6, 0.2, 0.2});
    CHECK(s == std::array<Index, 3>{60, 20, 20});
    CHECK(split_sizes(137, {0.6, 0.2, 0.2}) == std::array<Index, 3>{83, 27, 27});
    CHECK(split_sizes(7, {0.6, 0.2, 0.2}) == std::array<Index, 3>{5, 1, 1});
    CHECK_THROWS_AS(split_sizes(10, {0.5, 0.2, 0.2}), Error);

    std::mt19937_64 rng(82);
    auto d = oracle::random_dataset(rng, 100, 3, 0.3);
    Matrix<double> f = d.features();
    f.col(2).setConstant(4.0);
    d = d.with_features(f);
    const auto a = split_standardize(d, {0.6, 0.2, 0.2}, 5);
    const auto b = split_standardize(d, {0.6, 0.2, 0.2}, 5);
    CHECK(a.train.size() == 60);
    CHECK(a.validation.size() == 20);
    CHECK(a.test.size() == 20);
    CHECK(a.train.features() == b.train.features());
    CHECK(a.test.times() == b.test.times());
    for (Index j = 0; j < 2; ++j) {
        const auto col = a.train.features().col(j).array();
        CHECK(std::abs(col.mean()) < 1e-9);
        CHECK(std::abs((col - col.mean()).square().mean() - 1.0) < 1e-9);
    }
    CHECK((a.train.features().col(2).array() == 4.0).all());
    CHECK_THROWS_AS(split_standardize(d.subset(std::vector<Index>{0, 1}), {0.6, 0.2, 0.2}, 1), Error);
}

TEST_CASE("experiment config json round-trip") {
    ExperimentConfig c;
    c.repetitions = 3;
    c.budget = 4;
    c.seed = 99;
    c.synth.k = 9;
    c.models = {ModelKind::SurvBESAContam};
    c.space.tau = {0.5, 5};
    const auto back = ExperimentConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    CHECK(back.synth.k == 9);
    CHECK(back.models.size() == 1u);
    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json{{"models", {"forest"}}}), Error);
}

TEST_CASE("model file round-trip") {
    SynthConfig sc;
    sc.n = 50;
    sc.p = 0.6;
    sc.seed = 3;
    const Dataset raw = gen_dataset(sc);
    const Standardizer st = Standardizer::fit(raw);
    const Dataset train = st.apply(raw);
    Hyperparameters h;
    h.learners = 4;
    h.epochs = 5;
    h.solver_steps = 20;
    for (ModelKind kind : {ModelKind::SurvBESA, ModelKind::SurvBESAContam, ModelKind::Bagging, ModelKind::SingleBeran}) {
        const FittedModel fm = fit_model(kind, train, h, 17);
        const auto j = model_to_json(fm, train, st);
        Standardizer st2;
        const FittedModel back = model_from_json(nlohmann::json::parse(j.dump()), st2);
        CHECK(back.kind == kind);
        CHECK(st2.mean == st.mean);
        CHECK(predict_expected_times(back, train) == predict_expected_times(fm, train));
    }
    Standardizer dummy;
    CHECK_THROWS_AS(model_from_json(nlohmann::json{{"kind", "bagging"}}, dummy), Error);
}

TEST_CASE("benchmark rows, summary and determinism") {
    ExperimentConfig c;
    c.synth.n = 60;
    c.synth.p = 0.5;
    c.synth_validation = 30;
    c.synth_test = 30;
    c.repetitions = 3;
    c.budget = 2;
    c.seed = 5;
    c.space.epochs = 3;
    c.space.learners_hi = 6;
    const auto a = run_benchmark(c);
    const auto b = run_benchmark(c);
    REQUIRE(a.rows.size() == 9u);
    std::ostringstream sa, sb;
    write_benchmark_csv(sa, a);
    write_benchmark_csv(sb, b);
    CHECK(sa.str() == sb.str());
    for (ModelKind kind : c.models) {
        double sum = 0;
        for (const auto& r : a.rows)
            if (r.model == kind) sum += r.test_c_index;
        CHECK(a.summary.at(std::string(to_string(kind))).mean == doctest::Approx(sum / 3).epsilon(1e-14));
        CHECK(a.summary.at(std::string(to_string(kind))).runs == 3);
    }
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        CHECK(a.rows[r].repetition == static_cast<int>(r / 3));
        CHECK(std::isfinite(a.rows[r].test_c_index));
    }
    CHECK(default_sweep_values("k").size() == 10u);
    CHECK(default_sweep_values("p").size() == 10u);
    CHECK_THROWS_AS(default_sweep_values("zeta"), Error);
}

TEST_CASE("sfdump stages") {
    SynthConfig sc;
    sc.n = 60;
    sc.p = 0.5;
    sc.seed = 8;
    const Dataset d = gen_two_cluster_dataset(sc);
    for (Index i = 0; i < d.size(); ++i) {
        const bool upper = i % 2 == 1;
        CHECK((upper ? d.features().row(i).minCoeff() >= 5.0 - 7.0 / 3 : d.features().row(i).maxCoeff() <= -2.0 + 7.0 / 3));
    }
    Hyperparameters h;
    h.learners = 6;
    h.fraction = 0.3;
    h.epochs = 5;
    const auto dump = run_sfdump(d, d, 0, h, 1);
    CHECK(dump.max_pairwise_ks.size() == 3u);
    CHECK(dump.rows.size() == 3u * 6u * static_cast<std::size_t>(d.event_grid().size()));
    CHECK_THROWS_AS(run_sfdump(d, d, 500, h, 1), Error);
}
