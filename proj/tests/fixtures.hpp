#pragma once

#include "gmf/filter.hpp"
#include "gmf/minimax.hpp"
#include "gmf/oracle.hpp"

#include <random>
#include <string>
#include <vector>

namespace fx {

using gmf::cd;

struct Model {
    std::string name;
    gmf::IncrementSpec spec;
    gmf::MatrixDensityGrid f, g;
    gmf::FunctionalCoefficients a;
};

inline gmf::FunctionalCoefficients scalar_functional(std::vector<double> w)
{
    gmf::FunctionalCoefficients a;
    for (double x : w) a.a.push_back(Eigen::VectorXcd::Constant(1, x));
    return a;
}

/// spec (1,[1],[1],[1]), f = g = 1, a = [1]
inline Model benchmark(int Ng = 4096)
{
    gmf::FrequencyGrid grid(Ng);
    Model m;
    m.name = "benchmark";
    m.spec = {{1}, {1}, {1}, 1};
    m.f = gmf::constant_density(grid, Eigen::MatrixXcd::Identity(1, 1), "f");
    m.g = m.f;
    m.g.label = "g";
    m.a = scalar_functional({1.0});
    return m;
}

inline Eigen::MatrixXcd random_matrix(std::mt19937& rng, int T, double s)
{
    std::normal_distribution<double> nd;
    Eigen::MatrixXcd m(T, T);
    for (int i = 0; i < T; ++i)
        for (int j = 0; j < T; ++j) m(i, j) = s * nd(rng);
    return m;
}

/// Rational increment density for f (so that f itself has the 1/w singularity of a GM sequence),
/// rational noise density, random real functional of length N + 1.
inline Model smooth(unsigned seed, int T, int r, int N, int Ng = 2048)
{
    gmf::FrequencyGrid grid(Ng);
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    Model m;
    m.name = "smooth T=" + std::to_string(T) + " r=" + std::to_string(r) + " N=" + std::to_string(N) + " seed="
             + std::to_string(seed);
    m.spec = r == 1 ? gmf::IncrementSpec{{1}, {1}, {1}, T} : gmf::IncrementSpec{{1, 1}, {1, 2}, {1, 1}, T};
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(T, T);
    std::vector<Eigen::MatrixXcd> nf{I + random_matrix(rng, T, 0.2), random_matrix(rng, T, 0.3)};
    std::vector<Eigen::MatrixXcd> ng{0.7 * I + random_matrix(rng, T, 0.1), random_matrix(rng, T, 0.2),
                                     random_matrix(rng, T, 0.1)};
    m.f = gmf::from_increment_density(gmf::rational_density(grid, nf, {1.0, -0.5}, 1.0, "f"), m.spec);
    m.f.label = "f";
    m.g = gmf::rational_density(grid, ng, {1.0, 0.3}, 1.0, "g");
    for (int k = 0; k <= N; ++k) {
        Eigen::VectorXcd v(T);
        for (int i = 0; i < T; ++i) v(i) = nd(rng);
        m.a.a.push_back(v);
    }
    return m;
}

/// The ten cross-check fixtures: T in {1,2}, r in {1,2}, N <= 8.
inline std::vector<Model> cross_suite(int Ng = 2048)
{
    std::vector<Model> out;
    const int cases[10][4] = {{1, 1, 0, 11}, {1, 1, 4, 12}, {1, 2, 2, 13}, {1, 2, 8, 14}, {2, 1, 0, 15},
                              {2, 1, 3, 16}, {2, 1, 8, 17}, {2, 2, 1, 18}, {2, 2, 5, 19}, {2, 2, 8, 20}};
    for (const auto& c : cases) out.push_back(smooth(static_cast<unsigned>(c[3]), c[0], c[1], c[2], Ng));
    return out;
}

/// Densities for the factorization suite: scalar MA and AR up to order 3, 2x2 and 3x3 rational.
inline std::vector<gmf::MatrixDensityGrid> factor_suite(const gmf::FrequencyGrid& grid)
{
    std::vector<gmf::MatrixDensityGrid> out;
    auto s = [](double v) { return Eigen::MatrixXcd::Constant(1, 1, v); };
    const std::vector<std::vector<double>> ma = {{1.0, 0.5}, {1.0, -0.9}, {2.0, 0.3, 0.2}, {1.0, 0.4, -0.3, 0.1},
                                                 {1.0, -0.6, 0.2}, {0.5, 0.45, 0.1, 0.05}};
    for (const auto& c : ma) {
        std::vector<Eigen::MatrixXcd> num;
        for (double x : c) num.push_back(s(x));
        out.push_back(gmf::rational_density(grid, num, {1.0}, 1.0, "ma"));
    }
    const std::vector<std::vector<cd>> ar = {{1.0, -0.5}, {1.0, 0.8}, {1.0, -0.3, 0.2}, {1.0, 0.5, 0.1, 0.05},
                                             {1.0, -1.2, 0.5}, {1.0, 0.1, -0.2, 0.3}};
    for (const auto& d : ar) out.push_back(gmf::rational_density(grid, {s(1.0)}, d, 1.5, "ar"));
    std::mt19937 rng(99);
    for (int t : {2, 2, 2, 2, 3, 3, 3, 3}) {
        const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(t, t);
        std::vector<Eigen::MatrixXcd> num{I + random_matrix(rng, t, 0.25), random_matrix(rng, t, 0.3),
                                          random_matrix(rng, t, 0.15)};
        const std::vector<cd> den = out.size() % 2 ? std::vector<cd>{1.0, -0.4} : std::vector<cd>{1.0, 0.2, 0.1};
        gmf::MatrixDensityGrid d = gmf::rational_density(grid, num, den, 1.0, "rational");
        // full rank everywhere
        for (auto& v : d.values) v += 0.05 * I;
        out.push_back(d);
    }
    return out;
}

inline double sup_diff(const std::vector<Eigen::VectorXcd>& a, const std::vector<Eigen::VectorXcd>& b)
{
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, (a[j] - b[j]).norm());
    return d;
}

inline double sup_norm(const std::vector<Eigen::VectorXcd>& a)
{
    double d = 0.0;
    for (const auto& v : a) d = std::max(d, v.norm());
    return d;
}

struct CrossResult {
    double delta_fact = 0.0;
    double delta_fourier = 0.0;
    double rel_delta = 0.0;
    double rel_h = 0.0;
};

/// Factorization pipeline against the Fourier formulation on the default window.
inline CrossResult cross_check(const Model& m, int L = 256)
{
    const gmf::FilterFactors fac = gmf::prepare_factors(m.f, m.g, m.spec, {{.L = L}});
    const gmf::FilterSolution sol = gmf::filter(fac, m.a);
    const int W = gmf::default_window(m.a, m.spec);
    const int K = std::min(m.f.grid.size() / 2 - 1, W + m.a.N() + 2 * m.spec.n_gamma() + 16);
    const gmf::FourierOperatorSet set = gmf::fourier_coefficients(m.f, m.g, m.spec, K);
    const gmf::FourierSolution fs = gmf::delta_fourier(set, m.a, fac.poly, W);
    const auto hf = gmf::h_fourier(fs, m.a, m.f, m.g, m.spec);
    CrossResult r;
    r.delta_fact = sol.delta;
    r.delta_fourier = fs.delta;
    r.rel_delta = std::abs(sol.delta - fs.delta) / std::max(sol.delta, 1e-12);
    const double hs = sup_norm(sol.h);
    r.rel_h = hs > 0.0 ? sup_diff(hf, sol.h) / hs : sup_diff(hf, sol.h);
    return r;
}

/// Two-seasonal T = 2 example with a rational increment density and constant correlated noise.
inline Model periodic_example(int Ng = 2048)
{
    gmf::FrequencyGrid grid(Ng);
    Model m;
    m.name = "periodic T=2";
    m.spec = {{1, 1}, {1, 2}, {1, 1}, 2};
    Eigen::MatrixXcd b0(2, 2), b1(2, 2), g(2, 2);
    b0 << 1.0, 0.2, 0.2, 0.8;
    b1 << 0.3, 0.0, 0.1, 0.2;
    g << 0.5, 0.1, 0.1, 0.4;
    m.f = gmf::from_increment_density(gmf::rational_density(grid, {b0, b1}, {1.0, -0.4}, 1.0), m.spec);
    m.f.label = "f";
    m.g = gmf::constant_density(grid, g, "g");
    for (const auto& v : gmf::lift_functional(std::vector<double>{1.0, 0.5, 0.25, 0.125, 0.0625}, 2))
        m.a.a.push_back(v.cast<cd>());
    return m;
}

/// Scalar least favorable problem: benchmark spec, a = [1], f in D0_2 with p = 1, g in D1d_2 around g1 = 1.
struct ScalarMinimax {
    gmf::IncrementSpec spec{{1}, {1}, {1}, 1};
    gmf::FunctionalCoefficients a = scalar_functional({1.0});
    gmf::MatrixDensityGrid one;
    gmf::DensityClassSpec fc, gc;
    gmf::MinimaxOptions opts;

    explicit ScalarMinimax(double delta, int Ng = 1024)
    {
        one = gmf::constant_density(gmf::FrequencyGrid(Ng), Eigen::MatrixXcd::Identity(1, 1), "one");
        fc.family = gmf::ClassFamily::D0_2;
        fc.p = 1.0;
        gc.family = gmf::ClassFamily::D1d_2;
        gc.anchor = one;
        gc.delta = delta;
        opts.filter.fact.L = std::min(256, Ng / 2);
    }
    gmf::MinimaxSolution solve(const gmf::MinimaxSolution* warm = nullptr) const
    {
        return gmf::solve_least_favorable(fc, gc, a, spec, one, one, opts, warm);
    }
};

/// Semi-uncertain scalar problem: f in De_2 around an AR(1) increment density, g a known MA(1) density.
struct SemiMinimax {
    gmf::IncrementSpec spec{{1}, {1}, {1}, 1};
    gmf::FunctionalCoefficients a = scalar_functional({1.0});
    gmf::MatrixDensityGrid f1, g;
    gmf::DensityClassSpec fc;
    gmf::MinimaxOptions opts;

    explicit SemiMinimax(double eps = 0.3, double p_factor = 1.2, int Ng = 1024)
    {
        const gmf::FrequencyGrid grid(Ng);
        f1 = gmf::from_increment_density(
            gmf::rational_density(grid, {Eigen::MatrixXcd::Ones(1, 1)}, {1.0, -0.5}, 1.0, "f1"), spec);
        f1.label = "f1";
        g = gmf::rational_density(grid, {Eigen::MatrixXcd::Ones(1, 1), 0.3 * Eigen::MatrixXcd::Ones(1, 1)}, {1.0},
                                  1.0, "g");
        const Eigen::VectorXd w = gmf::transfer_grid(spec, grid).increment_weight();
        double m1 = 0.0;
        for (int j = 0; j < Ng; ++j) m1 += w(j) * f1.values[j](0, 0).real();
        fc.family = gmf::ClassFamily::De_2;
        fc.eps = eps;
        fc.anchor = f1;
        fc.p = p_factor * m1 / Ng;
        opts.filter.fact.L = std::min(256, Ng / 2);
    }
    gmf::MinimaxSolution solve() const { return gmf::solve_semi_uncertain(fc, g, a, spec, f1, opts); }
};

inline double residual(const gmf::SubgradientReport& rep, const std::string& name)
{
    for (const auto& [n, v] : rep.residuals)
        if (n == name) return v;
    return NAN;
}

} // namespace fx
