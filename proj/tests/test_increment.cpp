#include "gmf/increment.hpp"
#include "oracles.hpp"

#include <doctest.h>
#include <random>

using namespace gmf;

TEST_CASE("expansion of a first difference")
{
    const IncrementPolynomial p = expand_increment_operator({{1}, {1}, {2}, 1});
    CHECK(p.coeffs == std::vector<std::int64_t>{1, -2, 1});
}

TEST_CASE("expansion of a seasonal difference")
{
    const IncrementPolynomial p = expand_increment_operator({{1}, {4}, {1}, 1});
    CHECK(p.coeffs == std::vector<std::int64_t>{1, 0, 0, 0, -1});
}

TEST_CASE("expansion matches the nested sum for random specs")
{
    std::mt19937 rng(1);
    std::uniform_int_distribution<int> r_dist(1, 3), v(1, 4);
    for (int trial = 0; trial < 300; ++trial) {
        IncrementSpec spec;
        const int r = r_dist(rng);
        for (int i = 0; i < r; ++i) {
            spec.mu.push_back(v(rng));
            spec.s.push_back(v(rng));
            spec.d.push_back(v(rng));
        }
        const IncrementPolynomial p = expand_increment_operator(spec);
        const auto ref = oracle::nested_expansion(spec);
        REQUIRE(p.degree() == spec.n_gamma());
        for (int k = 0; k <= p.degree(); ++k) {
            auto it = ref.find(k);
            CHECK(p[k] == (it == ref.end() ? 0 : it->second));
        }
    }
}

TEST_CASE("coefficients sum to zero and the operator annihilates low-degree polynomials")
{
    std::mt19937 rng(2);
    std::uniform_int_distribution<int> v(1, 3);
    for (int trial = 0; trial < 50; ++trial) {
        IncrementSpec spec{{v(rng), v(rng)}, {v(rng), v(rng)}, {v(rng), v(rng)}, 1};
        const IncrementPolynomial p = expand_increment_operator(spec);
        std::int64_t sum = 0;
        for (auto c : p.coeffs) sum += c;
        CHECK(sum == 0);
        TimeSeries<double> x;
        x.first = -3;
        const int deg = spec.total_order() - 1;
        for (int m = 0; m < p.degree() + 20; ++m) {
            const double t = m + x.first;
            x.values.push_back(Eigen::VectorXd::Constant(1, std::pow(t, deg) - 2.0 * t + 1.0));
        }
        const TimeSeries<double> y = apply_increment(x, p);
        for (const auto& val : y.values) CHECK(std::abs(val(0)) <= 1e-6 * std::pow(static_cast<double>(p.degree() + 20), deg));
    }
}

TEST_CASE("a seasonal difference removes a periodic pattern")
{
    const IncrementSpec spec{{2}, {3}, {1}, 1};
    TimeSeries<double> x;
    for (int m = 0; m < 40; ++m) x.values.push_back(Eigen::VectorXd::Constant(1, std::sin(m * 2.0 * 3.14159265358979 / 6.0) + (m % 6 == 2)));
    const TimeSeries<double> y = apply_increment(x, spec);
    CHECK(y.first == 6);
    for (const auto& val : y.values) CHECK(std::abs(val(0)) < 1e-12);
}

TEST_CASE("apply_increment reports the first computable index")
{
    TimeSeries<double> x;
    x.values.assign(2, Eigen::VectorXd::Zero(1));
    CHECK_THROWS_AS(apply_increment(x, IncrementSpec{{1}, {2}, {1}, 1}), std::invalid_argument);
}

TEST_CASE("invalid specs are rejected")
{
    CHECK_THROWS(expand_increment_operator({{}, {}, {}, 1}));
    CHECK_THROWS(expand_increment_operator({{1}, {0}, {1}, 1}));
    CHECK_THROWS(expand_increment_operator({{1, 2}, {1}, {1}, 1}));
    CHECK_THROWS_AS(expand_increment_operator({{1}, {1}, {80}, 1}), std::overflow_error);
}

TEST_CASE("blocking round trip")
{
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    for (int T : {1, 2, 3, 5}) {
        TimeSeries<double> x;
        x.first = 0;
        for (int m = 0; m < 7 * T; ++m) x.values.push_back(Eigen::VectorXd::Constant(1, nd(rng)));
        const TimeSeries<double> b = block_sequence(x, T);
        CHECK(b.values.size() == 7u);
        CHECK(b.at(2)(T - 1) == x.at(2 * T + T - 1)(0));
        const TimeSeries<double> back = unblock_sequence(b, T);
        REQUIRE(back.values.size() == x.values.size());
        for (std::size_t i = 0; i < x.values.size(); ++i) CHECK(back.values[i](0) == x.values[i](0));
    }
}

TEST_CASE("blocking drops incomplete blocks")
{
    TimeSeries<double> x;
    x.first = -1;
    for (int m = 0; m < 8; ++m) x.values.push_back(Eigen::VectorXd::Constant(1, m));
    const TimeSeries<double> b = block_sequence(x, 3);
    CHECK(b.first == 0);
    CHECK(b.values.size() == 2u);
    CHECK(b.at(0)(0) == 1.0);
}

TEST_CASE("lift_functional places weights by period")
{
    const auto a = lift_functional(std::vector<double>{1, 2, 3, 4, 5}, 2);
    REQUIRE(a.size() == 3u);
    CHECK(a[0](0) == 1);
    CHECK(a[0](1) == 2);
    CHECK(a[2](0) == 5);
    CHECK(a[2](1) == 0);
}
