#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "survbesa/metrics.hpp"

using namespace survbesa;

namespace {

Dataset times_events(std::vector<double> t, std::vector<int> e) {
    const Index n = static_cast<Index>(t.size());
    return Dataset(Matrix<double>::Zero(n, 1), Eigen::Map<Vector<double>>(t.data(), n),
                   Eigen::Map<Eigen::VectorXi>(e.data(), n));
}

}  // namespace

TEST_CASE("comparable_pairs examples") {
    CHECK(comparable_pairs(times_events({1, 2, 3}, {1, 1, 1})) == PairSet{{0, 1}, {0, 2}, {1, 2}});
    CHECK(comparable_pairs(times_events({1, 2, 3}, {0, 0, 0})).empty());
    CHECK(comparable_pairs(times_events({1, 1}, {1, 1})).empty());
}

TEST_CASE("c_index examples") {
    const auto d = times_events({1, 2, 3}, {1, 1, 1});
    const Vector<double> t = d.times();
    CHECK(c_index(t, d) == 1.0);
    CHECK(c_index(Vector<double>(-t), d) == 0.0);
    CHECK(c_index((Vector<double>(3) << 2, 1, 3).finished(), d) == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(c_index(Vector<double>::Ones(3), d) == 0.0);
    CHECK(c_index(Vector<double>::Ones(3), d, TieRule::Half) == 0.5);
    try {
        c_index(t, times_events({1, 2, 3}, {0, 0, 0}));
        FAIL("expected NoComparablePairs");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoComparablePairs);
    }
    CHECK_THROWS_AS(c_index(Vector<double>::Ones(2), d), Error);
}

TEST_CASE("property: c_index equals the naive enumeration") {
    std::mt19937_64 rng(61);
    std::uniform_int_distribution<int> pick(0, 6);
    for (int rep = 0; rep < 300; ++rep) {
        const Index n = 2 + rep % 49;
        const auto d = oracle::random_dataset(rng, n, 1, 0.4, 1 + rep % 12);
        Vector<double> pred(n);
        for (Index i = 0; i < n; ++i) pred[i] = static_cast<double>(pick(rng));  // many ties
        if (comparable_pairs(d).empty()) continue;
        CHECK(c_index(pred, d) == oracle::naive_c_index(pred, d));
        CHECK(c_index(pred, d, TieRule::Half) == oracle::naive_c_index(pred, d, true));
    }
}

TEST_CASE("property: monotone invariance, range and reversal") {
    std::mt19937_64 rng(62);
    std::normal_distribution<double> z(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const auto d = oracle::random_dataset(rng, 30, 1, 0.3);
        const Vector<double> pred = Vector<double>::NullaryExpr(30, [&] { return z(rng); });
        const double c = c_index(pred, d);
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
        CHECK(c_index(Vector<double>(pred.array().exp()), d) == c);
        CHECK(c_index(Vector<double>(3.0 * pred.array() + 7.0), d) == c);
        CHECK(c + c_index(Vector<double>(-pred), d) == doctest::Approx(1.0).epsilon(1e-14));
        Vector<double> tied = pred;
        tied[1] = tied[0];
        tied[2] = tied[0];
        CHECK(c_index(tied, d) + c_index(Vector<double>(-tied), d) <= 1.0 + 1e-14);
    }
}

TEST_CASE("paired_t_test") {
    CHECK_THROWS_AS(paired_t_test({1, 2, 3}, {1, 2, 3}), Error);
    try {
        paired_t_test({0.5, 0.5}, {0.5, 0.5});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateVariance);
    }
    const auto zero = paired_t_test({1, -1}, {0, 0});
    CHECK(zero.t == 0.0);
    CHECK(zero.p == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(paired_t_test({1}, {0}), Error);
    CHECK_THROWS_AS(paired_t_test({1, 2}, {0}), Error);

    const std::vector<double> d{1.2, 0.4, 2.0, 1.1, 0.3};
    const auto r = paired_t_test(d, std::vector<double>(5, 0.0));
    double mean = 0, ss = 0;
    for (double x : d) mean += x / 5;
    for (double x : d) ss += (x - mean) * (x - mean);
    CHECK(r.t == doctest::Approx(mean / std::sqrt(ss / 4 / 5)).epsilon(1e-14));
    CHECK(r.dof == 4.0);
    // One degree of freedom is the Cauchy distribution: p = 1 - 2 atan(|t|) / pi.
    const auto crit = paired_t_test({2.132 + 1, 2.132 - 1}, {0, 0});
    CHECK(crit.p == doctest::Approx(2 * (0.5 - std::atan(2.132) / M_PI)).epsilon(1e-12));
    // Two degrees of freedom: p = 1 - |t| / sqrt(2 + t^2).
    const auto two = paired_t_test({1.0, 2.5, 0.2}, {0, 0, 0});
    CHECK(two.p == doctest::Approx(1 - std::abs(two.t) / std::sqrt(2 + two.t * two.t)).epsilon(1e-12));
}
