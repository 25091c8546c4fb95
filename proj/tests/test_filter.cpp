#include "fixtures.hpp"

#include <doctest.h>
#include <cmath>

using namespace gmf;

namespace {

CausalSeries random_series(std::mt19937& rng, int T, int len)
{
    CausalSeries s;
    for (int k = 0; k < len; ++k) {
        Eigen::MatrixXcd m = fx::random_matrix(rng, T, 1.0) + cd(0, 1) * fx::random_matrix(rng, T, 1.0);
        s.coeffs.push_back(m);
    }
    return s;
}

std::vector<Eigen::VectorXcd> random_vectors(std::mt19937& rng, int T, int len)
{
    std::normal_distribution<double> nd;
    std::vector<Eigen::VectorXcd> out;
    for (int k = 0; k < len; ++k) {
        Eigen::VectorXcd v(T);
        for (int i = 0; i < T; ++i) v(i) = cd(nd(rng), nd(rng));
        out.push_back(v);
    }
    return out;
}

double max_diff(const std::vector<Eigen::VectorXcd>& a, const std::vector<Eigen::VectorXcd>& b)
{
    REQUIRE(a.size() == b.size());
    return fx::sup_diff(a, b);
}

} // namespace

TEST_CASE("a_minus follows its defining sum")
{
    const IncrementSpec spec{{1, 1}, {1, 2}, {1, 1}, 1};
    const IncrementPolynomial e = expand_increment_operator(spec);
    const FunctionalCoefficients a = fx::scalar_functional({1.0, -2.0, 0.5, 3.0});
    const IndexedVectors am = derive_a_minus(a, e);
    CHECK(am.first == -e.degree());
    CHECK(am.last() == a.N());
    for (int m = -e.degree(); m <= a.N(); ++m) {
        cd ref = 0.0;
        for (int l = 0; l <= a.N(); ++l) ref += static_cast<double>(e.at(l - m)) * a.a[l](0);
        CHECK(std::abs(am.at(m)(0) - ref) < 1e-14);
    }
    const auto b = b_minus(am, e.degree());
    CHECK(std::abs(b[0](0)) == 0.0);
    for (int k = 1; k <= e.degree(); ++k) CHECK(b[k](0) == am.at(-k)(0));
    const auto amu = a_mu(am, e.degree());
    for (int k = 0; k <= a.N() + e.degree(); ++k) CHECK(amu[k](0) == am.at(k - e.degree())(0));
}

TEST_CASE("operator products agree with direct convolution against the factor covariances")
{
    std::mt19937 rng(41);
    for (int T : {1, 2, 3}) {
        const CausalSeries phi = random_series(rng, T, 6);
        const auto cov = covariances_from_factor(phi);
        const auto a = random_vectors(rng, T, 4);
        const auto b = random_vectors(rng, T, 3);
        const int len = 12;
        std::vector<Eigen::VectorXcd> cm(len, Eigen::VectorXcd::Zero(T)), cp = cm;
        for (int m = 0; m < len; ++m) {
            for (int k = 0; k < 4; ++k) cm[m] += cov.at(m - k).conjugate() * a[k];
            for (int k = 0; k < 3; ++k) cp[m] += cov.at(m + k).conjugate() * b[k];
        }
        CHECK(max_diff(c_minus(phi, a, len), cm) < 1e-12);
        CHECK(max_diff(c_plus(phi, b, len), cp) < 1e-12);

        const CausalSeries psi = random_series(rng, T, 5);
        const auto c = random_vectors(rng, T, 9);
        std::vector<Eigen::VectorXcd> pc(4, Eigen::VectorXcd::Zero(T));
        for (int m = 0; m < 4; ++m)
            for (int k = 0; k < 5 && k + m < 9; ++k) pc[m] += psi[k].conjugate() * c[k + m];
        CHECK(max_diff(apply_psi_bar(psi, c, 4), pc) < 1e-12);
    }
}

TEST_CASE("adjoint operator is the adjoint")
{
    std::mt19937 rng(43);
    const CausalSeries phi = random_series(rng, 2, 5);
    const auto x = random_vectors(rng, 2, 7);
    const auto y = random_vectors(rng, 2, 7);
    const auto px = apply_phi_tilde(phi, x, 7);
    const auto pty = apply_phi_tilde_adjoint(phi, y, 7);
    cd lhs = 0.0, rhs = 0.0;
    for (int k = 0; k < 7; ++k) {
        lhs += px[k].dot(y[k]);
        rhs += x[k].dot(pty[k]);
    }
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(lhs));
}

TEST_CASE("error of the returned characteristic equals the factorization error")
{
    for (const fx::Model& m : fx::cross_suite(1024)) {
        CAPTURE(m.name);
        const FilterFactors fac = prepare_factors(m.f, m.g, m.spec, {{.L = 256}});
        const FilterSolution sol = filter(fac, m.a);
        const double direct = delta_of_characteristic(sol.h, m.a, m.f, m.g, fac.transfer);
        CHECK(std::abs(direct - sol.delta) <= 1e-8 * sol.delta);
    }
}

TEST_CASE("returned characteristic is optimal among admissible ones")
{
    std::mt19937 rng(8);
    for (const fx::Model& m : {fx::smooth(4, 1, 2, 3, 1024), fx::smooth(5, 2, 1, 2, 1024)}) {
        const FilterFactors fac = prepare_factors(m.f, m.g, m.spec, {{.L = 256}});
        const FilterSolution sol = filter(fac, m.a);
        const double base = delta_of_characteristic(sol.h, m.a, m.f, m.g, fac.transfer);
        const auto dir = random_vectors(rng, m.spec.T, 6);
        std::vector<double> quot;
        for (double eps : {1e-1, 1e-2}) {
            auto v = sol.correction;
            for (int k = 0; k < 6; ++k) v[k] += eps * dir[k];
            const auto h = spectral_characteristic(fac.psi_grid, v, fac.transfer);
            const double d = delta_of_characteristic(h, m.a, m.f, m.g, fac.transfer);
            CHECK(d > base);
            quot.push_back((d - base) / (eps * eps));
        }
        // no first-order term
        CHECK(quot[0] == doctest::Approx(quot[1]).epsilon(1e-5));
    }
}

TEST_CASE("zero noise or zero functional gives zero error")
{
    for (const fx::Model& m : fx::cross_suite(1024)) {
        CAPTURE(m.name);
        const FilterSolution s0 = filter(m.f, m.g.scaled(0.0), m.spec, m.a, {{.L = 256}});
        CHECK(std::abs(s0.delta) <= 1e-12);
        CHECK(fx::sup_norm(s0.h) <= 1e-12);
        FunctionalCoefficients z = m.a;
        for (auto& v : z.a) v.setZero();
        CHECK(std::abs(filter(m.f, m.g, m.spec, z, {{.L = 256}}).delta) <= 1e-12);
    }
}

TEST_CASE("error is homogeneous in the densities and the characteristic scale free")
{
    for (const fx::Model& m : fx::cross_suite(1024)) {
        CAPTURE(m.name);
        const FilterSolution base = filter(m.f, m.g, m.spec, m.a, {{.L = 256}});
        for (double c : {0.1, 3.0, 10.0}) {
            const FilterSolution s = filter(m.f.scaled(c), m.g.scaled(c), m.spec, m.a, {{.L = 256}});
            CHECK(std::abs(s.delta - c * base.delta) <= 1e-9 * c * base.delta);
            CHECK(fx::sup_diff(s.h, base.h) <= 1e-9 * fx::sup_norm(base.h));
        }
    }
}

TEST_CASE("single value formulas agree with the general pipeline")
{
    for (const fx::Model& m : fx::cross_suite(1024)) {
        CAPTURE(m.name);
        const FilterFactors fac = prepare_factors(m.f, m.g, m.spec, {{.L = 256}});
        for (int p = 0; p < m.spec.T; ++p) {
            for (int N = fac.poly.degree(); N <= fac.poly.degree() + 3; ++N) {
                const FilterSolution s = filter_single_value(fac, N, p);
                const FilterSolution g = filter(fac, FunctionalCoefficients::single_value(N, p, m.spec.T));
                CHECK(std::abs(s.delta - g.delta) <= 1e-9 * g.delta);
                CHECK(fx::sup_diff(s.h, g.h) <= 1e-9 * fx::sup_norm(g.h));
            }
        }
    }
}

TEST_CASE("periodic wrapper with unit period is the vector path")
{
    const fx::Model m = fx::smooth(21, 1, 2, 5, 1024);
    const FilterFactors fac = prepare_factors(m.f, m.g, m.spec, {{.L = 256}});
    std::vector<double> w;
    for (const auto& v : m.a.a) w.push_back(v(0).real());
    const FilterSolution a = filter_periodic(fac, w);
    const FilterSolution b = filter(fac, m.a);
    CHECK(a.delta == b.delta);
    CHECK(fx::sup_diff(a.h, b.h) == 0.0);
}

TEST_CASE("periodic wrapper lifts scalar weights into blocks")
{
    const fx::Model m = fx::smooth(22, 2, 1, 0, 1024);
    const FilterFactors fac = prepare_factors(m.f, m.g, m.spec, {{.L = 256}});
    const std::vector<double> w{0.5, -1.0, 2.0, 0.25, 1.5};
    FunctionalCoefficients lifted;
    for (int N = 0; N <= 2; ++N) lifted.a.push_back(Eigen::VectorXcd::Zero(2));
    for (int M = 0; M < 5; ++M) {
        const auto [N, p] = periodic_index(M, 2);
        lifted.a[N](p) = w[M];
    }
    CHECK(filter_periodic(fac, w).delta == filter(fac, lifted).delta);
    CHECK(periodic_index(7, 3) == std::pair<int, int>{2, 1});
}

TEST_CASE("finite functional drops weights past N")
{
    const fx::Model m = fx::smooth(23, 2, 2, 6, 1024);
    const FilterFactors fac = prepare_factors(m.f, m.g, m.spec, {{.L = 256}});
    FunctionalCoefficients cut;
    for (int k = 0; k <= 3; ++k) cut.a.push_back(m.a.a[k]);
    CHECK(filter_finite(fac, m.a, 3).delta == filter(fac, cut).delta);
    const FilterSolution longer = filter_finite(fac, m.a, 9);
    CHECK(std::abs(longer.delta - filter(fac, m.a).delta) < 1e-12 * longer.delta);
}

TEST_CASE("error grows with the number of estimated values")
{
    const fx::Model m = fx::benchmark(2048);
    const FilterFactors fac = prepare_factors(m.f, m.g, m.spec, {{.L = 512}});
    double prev = 0.0;
    for (int N = 0; N < 6; ++N) {
        const double d = filter(fac, fx::scalar_functional(std::vector<double>(N + 1, 1.0))).delta;
        CHECK(d > prev);
        prev = d;
    }
}

TEST_CASE("invalid functionals are rejected")
{
    const fx::Model m = fx::smooth(24, 2, 1, 2, 256);
    const FilterFactors fac = prepare_factors(m.f, m.g, m.spec, {{.L = 64}});
    CHECK_THROWS(filter(fac, fx::scalar_functional({1.0})));
    CHECK_THROWS(filter(fac, FunctionalCoefficients{}));
    CHECK_THROWS(FunctionalCoefficients::single_value(2, 2, 2));
    CHECK_THROWS(prepare_factors(m.f, fx::benchmark(256).g, m.spec));
}
