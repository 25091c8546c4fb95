#include "fixtures.hpp"

#include "gmf/errors.hpp"
#include "gmf/spectral_transform.hpp"

#include <doctest.h>
#include <cmath>

using namespace gmf;

TEST_CASE("every density of the suite factors to high accuracy")
{
    const FrequencyGrid grid(2048);
    const auto suite = fx::factor_suite(grid);
    REQUIRE(suite.size() == 20);
    for (const auto& d : suite) {
        CAPTURE(d.label);
        CAPTURE(d.dim());
        const SpectralFactor fac = factorize(d, {.L = 512});
        CHECK(fac.diag.residual <= 1e-8);
        CHECK(fac.diag.residual_truncated <= 1e-8);
        CHECK(inverse_identity_residual(invert_factor(fac.series), fac.series) <= 1e-10);
        const Eigen::MatrixXcd& lead = fac.series[0];
        for (Eigen::Index i = 0; i < lead.rows(); ++i) {
            CHECK(lead(i, i).real() > 0.0);
            CHECK(std::abs(lead(i, i).imag()) == 0.0);
            for (Eigen::Index j = i + 1; j < lead.cols(); ++j) CHECK(std::abs(lead(i, j)) == 0.0);
        }
    }
}

TEST_CASE("moving average factor is the invertible polynomial")
{
    const FrequencyGrid grid(1024);
    // |2 + e^{-i lambda}|^2 = |1 + 2 e^{-i lambda}|^2; only the first is minimum phase
    const MatrixDensityGrid d = rational_density(
        grid, {Eigen::MatrixXcd::Constant(1, 1, 1.0), Eigen::MatrixXcd::Constant(1, 1, 2.0)}, {1.0});
    const SpectralFactor fac = factorize(d, {.L = 64});
    CHECK(std::abs(fac.series[0](0, 0) - 2.0) < 1e-12);
    CHECK(std::abs(fac.series[1](0, 0) - 1.0) < 1e-12);
    for (int k = 2; k < 64; ++k) CHECK(std::abs(fac.series[k](0, 0)) < 1e-12);
}

TEST_CASE("autoregressive factor has geometric coefficients")
{
    const FrequencyGrid grid(1024);
    const MatrixDensityGrid d = rational_density(grid, {Eigen::MatrixXcd::Ones(1, 1)}, {1.0, -0.5}, 1.5);
    const SpectralFactor fac = factorize(d, {.L = 64});
    for (int k = 0; k < 40; ++k) CHECK(std::abs(fac.series[k](0, 0) - std::sqrt(1.5) * std::pow(0.5, k)) < 1e-12);
}

TEST_CASE("covariances of the factor agree with grid quadrature of the density")
{
    const FrequencyGrid grid(2048);
    const auto suite = fx::factor_suite(grid);
    for (std::size_t i : {0u, 7u, 13u, 19u}) {
        const SpectralFactor fac = factorize(suite[i], {.L = 512});
        const auto cov = covariances_from_factor(fac.series);
        const auto ref = grid_fourier(grid, suite[i].values, -6, 6);
        for (int k = -6; k <= 6; ++k) {
            const double scale = ref[6].norm();
            CHECK((cov.at(k) - ref[static_cast<std::size_t>(k + 6)]).norm() < 1e-8 * scale);
        }
    }
}

TEST_CASE("inverse series solves the convolution identity")
{
    std::mt19937 rng(5);
    CausalSeries theta;
    theta.coeffs.push_back(Eigen::MatrixXcd::Identity(3, 3) + fx::random_matrix(rng, 3, 0.1));
    for (int k = 1; k < 30; ++k) theta.coeffs.push_back(fx::random_matrix(rng, 3, std::pow(0.5, k)));
    const CausalSeries psi = invert_factor(theta);
    CHECK(inverse_identity_residual(psi, theta) < 1e-12);
    CausalSeries singular;
    singular.coeffs.push_back(Eigen::MatrixXcd::Zero(2, 2));
    CHECK_THROWS_AS(invert_factor(singular), std::invalid_argument);
}

TEST_CASE("factor is invariant under the choice of square root of the density")
{
    // the same density written with two different numerators B and B U (U unitary) factors identically
    const FrequencyGrid grid(512);
    std::mt19937 rng(17);
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(2, 2);
    std::vector<Eigen::MatrixXcd> num{I + fx::random_matrix(rng, 2, 0.2), fx::random_matrix(rng, 2, 0.2)};
    const double c = std::cos(0.7), s = std::sin(0.7);
    Eigen::MatrixXcd u(2, 2);
    u << c, -s, s, c;
    std::vector<Eigen::MatrixXcd> rotated;
    for (const auto& b : num) rotated.push_back(b * u);
    const SpectralFactor a = factorize(rational_density(grid, num, {1.0}), {.L = 64});
    const SpectralFactor b = factorize(rational_density(grid, rotated, {1.0}), {.L = 64});
    for (int k = 0; k < 64; ++k) CHECK((a.series[k] - b.series[k]).norm() < 1e-10);
}

TEST_CASE("zero density yields the zero factor")
{
    const FrequencyGrid grid(64);
    const SpectralFactor fac = factorize(constant_density(grid, Eigen::MatrixXcd::Zero(2, 2)), {.L = 8});
    CHECK(fac.diag.method == "zero");
    for (const auto& c : fac.series.coeffs) CHECK(c.norm() == 0.0);
}

TEST_CASE("factorization rejects bad input")
{
    const FrequencyGrid grid(64);
    const MatrixDensityGrid ok = constant_density(grid, Eigen::MatrixXcd::Identity(2, 2));
    CHECK_THROWS_AS(factorize(ok, {.L = 0}), std::invalid_argument);
    CHECK_THROWS_AS(factorize(ok, {.L = 33}), std::invalid_argument);

    MatrixDensityGrid singular = ok;
    singular.values[5](1, 1) = 0.0;
    CHECK_THROWS_AS(factorize(singular, {.L = 8}), NumericalError);

    MatrixDensityGrid skew = ok;
    skew.values[3](0, 1) = 0.5;
    CHECK_THROWS_AS(factorize(skew, {.L = 8}), NumericalError);
}

TEST_CASE("weighted observed factor reproduces the observed increment density")
{
    const fx::Model m = fx::smooth(3, 2, 2, 4, 1024);
    const SpectralFactor fac = weighted_observed_factor(m.f, m.g, m.spec, {.L = 256});
    const TransferGrid tg = transfer_grid(m.spec, m.f.grid);
    const MatrixDensityGrid p = weighted(observed_density(m.f, m.g, m.spec), tg.increment_weight());
    CHECK(reconstruction_residual(p, fac.on_grid) < 1e-8);
}
