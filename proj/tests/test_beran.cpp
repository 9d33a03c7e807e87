#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "survbesa/beran.hpp"

using namespace survbesa;

namespace {

Dataset line_data(std::initializer_list<double> times, std::initializer_list<int> events) {
    const Index n = static_cast<Index>(times.size());
    Matrix<double> f(n, 1);
    for (Index i = 0; i < n; ++i) f(i, 0) = static_cast<double>(i);
    Vector<double> t = Eigen::Map<const Vector<double>>(times.begin(), n);
    Eigen::VectorXi e = Eigen::Map<const Eigen::VectorXi>(events.begin(), n);
    return Dataset(f, t, e);
}

void check_km(const BeranModel<double>& model, const StepSF& s, const Dataset& d, double tol) {
    std::vector<double> t(d.times().data(), d.times().data() + d.size());
    std::vector<int> e(d.events().data(), d.events().data() + d.size());
    const auto km = oracle::kaplan_meier(t, e);
    REQUIRE(static_cast<std::size_t>(s.size()) == km.size());
    Index l = 0;
    for (const auto& [time, value] : km) {
        CHECK(s.grid()[l] == time);
        CHECK(std::abs(s.values()[l] - value) <= tol);
        ++l;
    }
    (void)model;
}

}  // namespace

TEST_CASE("kernel_weights examples") {
    Matrix<double> f(4, 2);
    f << 1, 0, -1, 0, 0, 1, 0, -1;
    const Dataset d(f, Vector<double>::LinSpaced(4, 1, 4), Eigen::VectorXi::Ones(4));
    const auto m = beran_fit(d, 1.0);
    const Vector<double> origin = Vector<double>::Zero(2);
    const auto w = kernel_weights(origin, m);
    for (Index i = 0; i < 4; ++i) CHECK(w[i] == doctest::Approx(0.25).epsilon(1e-15));

    const Dataset one(Matrix<double>::Constant(1, 2, 3.0), Vector<double>::Ones(1), Eigen::VectorXi::Ones(1));
    CHECK(kernel_weights(origin, beran_fit(one, 1.0))[0] == 1.0);

    Matrix<double> g(2, 1);
    g << 0, std::sqrt(10.0);
    const Dataset two(g, (Vector<double>(2) << 1, 2).finished(), Eigen::VectorXi::Ones(2));
    const auto w2 = kernel_weights(Vector<double>::Zero(1), beran_fit(two, 1.0));
    CHECK(w2[0] == doctest::Approx(1.0 / (1.0 + std::exp(-10.0))).epsilon(1e-14));
    CHECK(w2[1] == doctest::Approx(std::exp(-10.0) / (1.0 + std::exp(-10.0))).epsilon(1e-12));
    CHECK(w2[0] == doctest::Approx(0.99995).epsilon(1e-5));

    CHECK_THROWS_AS(kernel_weights(Vector<double>::Zero(3), m), Error);
}

TEST_CASE("beran_fit errors") {
    const auto censored = line_data({1, 2, 3}, {0, 0, 0});
    try {
        beran_fit(censored, 1.0);
        FAIL("expected NoUncensoredEvents");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoUncensoredEvents);
    }
    const auto ok = line_data({1, 2, 3}, {1, 0, 1});
    CHECK_THROWS_AS(beran_fit(ok, 0.0), Error);
    CHECK_THROWS_AS(beran_fit(ok, -1.0), Error);
    const auto m = beran_fit(ok, 1.0);
    CHECK(m.size() == 3);
    CHECK(m.tau() == 1.0);
    CHECK(m.grid() == (Vector<double>(2) << 1, 3).finished());
}

TEST_CASE("beran_predict examples") {
    Matrix<double> f(3, 2);
    f << 1, 0, -0.5, std::sqrt(0.75), -0.5, -std::sqrt(0.75);
    const Dataset d(f, (Vector<double>(3) << 1, 2, 3).finished(), Eigen::VectorXi::Ones(3));
    const auto s = beran_predict(beran_fit(d, 1.0), Vector<double>::Zero(2));
    CHECK(s.values()[0] == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(s.values()[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(s.values()[2] == doctest::Approx(0.0));

    const auto one_hot = beran_predict(beran_fit(d, 1e-6), d.x(1));
    CHECK(sf_eval(one_hot, 1.999) == 1.0);
    CHECK(sf_eval(one_hot, 2.0) == 0.0);
    CHECK_THROWS_AS(beran_predict(beran_fit(d, 1.0), Vector<double>::Zero(1)), Error);
}

TEST_CASE("uniform weights reproduce Kaplan-Meier with ties and censoring") {
    const auto d = line_data({2, 2, 3, 3, 3, 5, 7, 7}, {1, 0, 1, 1, 0, 0, 1, 1});
    const auto m = beran_fit(d, 1.0);
    const auto s = beran_from_weights<double>(m, Vector<double>::Constant(8, 1.0 / 8));
    check_km(m, s, d, 1e-14);
    // 1 - 1/8, then 1 - 2/6, then (at 7) all remaining die
    CHECK(s.values()[0] == doctest::Approx(7.0 / 8));
    CHECK(s.values()[1] == doctest::Approx(7.0 / 8 * 4.0 / 6));
    CHECK(s.values()[2] == doctest::Approx(0.0));
}

TEST_CASE("property: KM reduction on random datasets") {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 50; ++rep) {
        const auto d = oracle::random_dataset(rng, 5 + rep % 26, 3, 0.4, 10);
        const auto m = beran_fit(d, 1.0);
        const auto s = beran_from_weights<double>(m, Vector<double>::Constant(d.size(), 1.0 / static_cast<double>(d.size())));
        check_km(m, s, d, 1e-12);
    }
}

TEST_CASE("property: locality limits of the temperature") {
    std::mt19937_64 rng(22);
    for (int rep = 0; rep < 20; ++rep) {
        const auto d = oracle::random_dataset(rng, 12, 2, 0.4);
        const Index q = rep % d.size();
        const auto near = beran_predict(beran_fit(d, 1e-8), d.x(q));
        for (Index l = 0; l < near.size(); ++l) {
            const double expected = d.event(q) == 1 && near.grid()[l] >= d.time(q) ? 0.0 : 1.0;
            CHECK(near.values()[l] == doctest::Approx(expected).epsilon(1e-12));
        }
        const auto m = beran_fit(d, 1e8);
        check_km(m, beran_predict(m, d.x(q)), d, 1e-6);
    }
}

TEST_CASE("property: predictions are monotone and within [0,1]") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int rep = 0; rep < 100; ++rep) {
        const auto d = oracle::random_dataset(rng, 30, 3, 0.5);
        const double tau = std::pow(10.0, u(rng) * 2);
        const Vector<double> x = Vector<double>::NullaryExpr(3, [&] { return u(rng); });
        const auto s = beran_predict(beran_fit(d, tau), x);  // the constructor validates monotonicity
        CHECK(s.size() == d.event_grid().size());
        CHECK(s.values().minCoeff() >= 0.0);
    }
}
