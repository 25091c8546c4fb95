#include "fixtures.hpp"
#include "oracles.hpp"

#include "gmf/errors.hpp"
#include "gmf/spectral_transform.hpp"

#include <doctest.h>
#include <cmath>
#include <functional>
#include <numbers>

using namespace gmf;
using cd = std::complex<double>;

TEST_CASE("grid nodes are offset midpoints")
{
    const FrequencyGrid grid(8);
    CHECK(grid.node(0) == doctest::Approx(-std::numbers::pi + std::numbers::pi / 8));
    CHECK(grid.node(7) == doctest::Approx(std::numbers::pi - std::numbers::pi / 8));
    CHECK_THROWS(FrequencyGrid(12));
}

TEST_CASE("chi from the product form equals the expanded polynomial")
{
    const FrequencyGrid grid(256);
    for (const IncrementSpec& spec : {IncrementSpec{{1}, {1}, {2}, 1}, IncrementSpec{{1, 2}, {1, 3}, {1, 2}, 1},
                                      IncrementSpec{{3}, {4}, {1}, 2}}) {
        const Eigen::VectorXcd a = eval_chi(spec, grid);
        const Eigen::VectorXcd b = eval_chi_polynomial(expand_increment_operator(spec), grid);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("beta vanishes where chi does and the ratio stays bounded")
{
    const IncrementSpec spec{{1, 1}, {1, 4}, {1, 2}, 1};
    for (int n : {256, 1024, 4096}) {
        const TransferGrid t = transfer_grid(spec, FrequencyGrid(n));
        CHECK(t.ratio.cwiseAbs().maxCoeff() < 10.0);
        CHECK(t.ratio.cwiseAbs().minCoeff() > 1e-6);
    }
}

TEST_CASE("grid Fourier coefficients invert synthesis")
{
    const FrequencyGrid grid(64);
    Eigen::VectorXcd c(5);
    c << cd(1, 0), cd(0.5, -0.2), cd(0, 0.3), cd(-0.1, 0), cd(0.05, 0.05);
    const Eigen::VectorXcd vals = grid_synthesis(grid, c, -2);
    const Eigen::VectorXcd back = grid_fourier(grid, vals, -2, 2);
        // hat F(k) is the coefficient of e^{-i lambda (-k)}
    for (int k = 0; k < 5; ++k) CHECK(std::abs(back(k) - c(4 - k)) < 1e-14);
    for (int j = 0; j < 64; ++j) {
        cd direct = 0;
        for (int k = -2; k <= 2; ++k) direct += c(k + 2) * std::polar(1.0, -grid.node(j) * k);
        CHECK(std::abs(direct - vals(j)) < 1e-13);
    }
}

TEST_CASE("structural covariance of an AR(1) increment density")
{
    // f = |1 - 0.5 e^{-i lambda}|^{-2} / w, so the increments are AR(1) with variance 4/3
    const IncrementSpec spec{{1}, {2}, {1}, 1};
    const FrequencyGrid grid(2048);
    const MatrixDensityGrid f = from_increment_density(
        rational_density(grid, {Eigen::MatrixXcd::Ones(1, 1)}, {1.0, -0.5}, 1.0, "ar"), spec);
    for (int m : {0, 1, 3, -2}) {
        const cd r = structural_covariance(f, spec, m, spec.mu, spec.mu)(0, 0);
        CHECK(std::abs(r - std::pow(0.5, std::abs(m)) / 0.75) < 1e-12);
    }
}

TEST_CASE("structural covariance across different steps matches adaptive quadrature")
{
    const IncrementSpec spec{{1}, {1}, {1}, 1};
    const FrequencyGrid grid(4096);
    const MatrixDensityGrid f = from_increment_density(
        rational_density(grid, {Eigen::MatrixXcd::Ones(1, 1), 0.4 * Eigen::MatrixXcd::Ones(1, 1)}, {1.0}, 1.0), spec);
    for (int m : {0, 2, -1}) {
        const cd got = structural_covariance(f, spec, m, {2}, {1})(0, 0);
        auto integrand = [m](double lam, bool imag) {
            const cd b = 1.0 + 0.4 * std::polar(1.0, -lam);
            const cd chi1 = 1.0 - std::polar(1.0, -2.0 * lam);
            const cd chi_mu = 1.0 - std::polar(1.0, -lam);
            // |beta|^2 cancels: f = |b|^2 |beta|^2 / |chi_mu|^2
            const cd ratio = std::abs(lam) < 1e-9 ? cd(2.0) : chi1 * std::conj(chi_mu) / std::norm(chi_mu);
            const cd v = std::polar(1.0, lam * m) * ratio * std::norm(b);
            return imag ? v.imag() : v.real();
        };
        const double re = oracle::integrate([&](double l) { return integrand(l, false); });
        const double im = oracle::integrate([&](double l) { return integrand(l, true); });
        CHECK(std::abs(got - cd(re, im)) < 1e-10);
    }
}

TEST_CASE("minimality integral of the benchmark matches adaptive quadrature")
{
    const fx::Model m = fx::benchmark(4096);
    const double got = minimality_integral(m.f, m.g, m.spec);
    const double ref = oracle::integrate([](double l) {
        if (std::abs(l) < 1e-9) return 1.0;
        const double s = 2.0 * std::sin(0.5 * l);
        return l * l / (s * s * (1.0 + l * l));
    });
    CHECK(got == doctest::Approx(ref).epsilon(1e-7));
}

TEST_CASE("minimality flags an integral that grows under refinement")
{
    // f vanishing to second order at the origin with g = 0 breaks minimality
    const IncrementSpec spec{{1}, {1}, {1}, 1};
    auto f = [&](const FrequencyGrid& gr) {
        MatrixDensityGrid d = constant_density(gr, Eigen::MatrixXcd::Ones(1, 1));
        for (int j = 0; j < gr.size(); ++j) d.values[j](0, 0) = std::pow(gr.node(j), 4);
        return d;
    };
    auto g = [&](const FrequencyGrid& gr) { return constant_density(gr, Eigen::MatrixXcd::Zero(1, 1)); };
    using Fn = std::function<MatrixDensityGrid(const FrequencyGrid&)>;
    const MinimalityReport rep = minimality_value(Fn(f), Fn(g), spec, {256, 1024, 4096});
    CHECK(rep.suspect);
}

TEST_CASE("tabulated densities are validated")
{
    const FrequencyGrid grid(4);
    std::vector<Eigen::MatrixXcd> vals(4, Eigen::MatrixXcd::Identity(2, 2));
    vals[1](0, 1) = 1.0;
    CHECK_THROWS(tabulated_density(grid, vals));
    vals[1](0, 1) = 0.0;
    vals[2] *= -1.0;
    CHECK_THROWS(tabulated_density(grid, vals));
}
