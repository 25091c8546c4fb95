#include "fixtures.hpp"

#include <doctest.h>
#include <cmath>

using namespace gmf;

TEST_CASE("factorization and Fourier formulations agree")
{
    for (const fx::Model& m : fx::cross_suite()) {
        CAPTURE(m.name);
        const fx::CrossResult r = fx::cross_check(m);
        CHECK(r.rel_delta <= 1e-6);
        CHECK(r.rel_h <= 1e-6);
    }
}

TEST_CASE("Fourier generators have Hermitian symbols")
{
    const fx::Model m = fx::smooth(31, 2, 1, 2, 512);
    const FourierOperatorSet set = fourier_coefficients(m.f, m.g, m.spec, 20);
    for (int k = 0; k <= 20; ++k) {
        CHECK((set.P_at(-k) - set.P_at(k).adjoint()).norm() < 1e-12);
        CHECK((set.Q_at(-k) - set.Q_at(k).adjoint()).norm() < 1e-12);
    }
    CHECK(set.p_symbol_min > 0.0);
    CHECK_THROWS(set.P_at(21));
    const Eigen::MatrixXcd P = assemble_P(set, 8);
    CHECK((P - P.adjoint()).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(P);
    CHECK(es.eigenvalues().minCoeff() >= set.p_symbol_min * (1 - 1e-9));
    CHECK(es.eigenvalues().maxCoeff() <= set.p_symbol_max * (1 + 1e-9));
}

TEST_CASE("projection error decreases towards the filtering error")
{
    std::vector<fx::Model> models{fx::benchmark(4096), fx::periodic_example()};
    for (const fx::Model& m : models) {
        CAPTURE(m.name);
        const double delta = filter(m.f, m.g, m.spec, m.a, {{.L = 1024}}).delta;
        const ProjectionResult pr = projection_oracle(m.f, m.g, m.spec, m.a, {8, 16, 32, 64, 128, 256});
        for (std::size_t i = 1; i < pr.mse.size(); ++i) CHECK(pr.mse[i] <= pr.mse[i - 1] * (1 + 1e-12));
        CHECK(pr.mse.back() >= delta * (1 - 1e-6));
        CHECK(std::abs(pr.mse.back() - delta) <= 1e-3 * delta);
        CHECK(pr.variance >= pr.mse.front());
    }
}

TEST_CASE("projection with no observations returns the variance")
{
    const fx::Model m = fx::benchmark(2048);
    const ProjectionResult pr = projection_oracle(m.f, m.g, m.spec, m.a, {0, 4});
    CHECK(pr.mse[0] == doctest::Approx(pr.variance).epsilon(1e-12));
    CHECK(pr.mse[1] < pr.mse[0]);
}

TEST_CASE("windowed inverse residual shrinks as the window grows")
{
    for (const fx::Model& m : {fx::smooth(33, 1, 1, 0, 4096), fx::smooth(34, 1, 2, 0, 4096), fx::benchmark(4096)}) {
        CAPTURE(m.name);
        const FilterFactors fac = prepare_factors(m.f, m.g, m.spec, {{.L = 1024}});
        const FourierOperatorSet set = fourier_coefficients(m.f, m.g, m.spec, 256);
        double prev = INFINITY;
        for (int W : {16, 32, 64, 128}) {
            const WindowResidual r = inverse_window_residual(set, fac.theta.series, W);
            // residuals already at roundoff need not decrease
            CHECK((r.leading < prev || r.leading < 1e-13));
            prev = r.leading;
        }
        CHECK(prev <= 1e-4);
    }
}

TEST_CASE("factor window residual is small for smooth densities")
{
    const fx::Model m = fx::smooth(35, 2, 1, 0, 2048);
    const FilterFactors fac = prepare_factors(m.f, m.g, m.spec, {{.L = 512}});
    const FourierOperatorSet set = fourier_coefficients(m.f, m.g, m.spec, 128);
    CHECK(factor_window_residual(set, fac.psi, 32).full < 1e-8);
}

TEST_CASE("identity chain links the two formulations")
{
    for (const fx::Model& m : {fx::smooth(36, 1, 2, 4, 2048), fx::smooth(37, 2, 2, 3, 2048)}) {
        CAPTURE(m.name);
        const FilterFactors fac = prepare_factors(m.f, m.g, m.spec, {{.L = 256}});
        const int W = default_window(m.a, m.spec);
        const FourierOperatorSet set = fourier_coefficients(m.f, m.g, m.spec, W + 64);
        const IdentityChain ch = identity_chain(set, fac, m.a, 8, W);
        CHECK(ch.from_factors.size() == 8);
        CHECK(ch.max_abs_diff < 1e-8 * fx::sup_norm(ch.from_factors));
    }
}
