#include "gmf/grid.hpp"

#include "gmf/errors.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

namespace gmf {

FrequencyGrid::FrequencyGrid(int size) : size_(size)
{
    if (size < 2 || (size & (size - 1)) != 0)
        throw std::invalid_argument("FrequencyGrid: size must be a power of two >= 2, got " + std::to_string(size));
}

double FrequencyGrid::step() const { return 2.0 * std::numbers::pi / size_; }

double FrequencyGrid::node(int j) const { return -std::numbers::pi + (j + 0.5) * step(); }

Eigen::VectorXd FrequencyGrid::nodes() const
{
    Eigen::VectorXd out(size_);
    for (int j = 0; j < size_; ++j) out(j) = node(j);
    return out;
}

double MatrixDensityGrid::sup_norm() const
{
    double s = 0.0;
    for (const auto& v : values) s = std::max(s, v.norm());
    return s;
}

double MatrixDensityGrid::hermitian_defect() const
{
    double s = 0.0;
    for (const auto& v : values) s = std::max(s, (v - v.adjoint()).norm());
    return s;
}

double MatrixDensityGrid::min_eigenvalue() const
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& v : values) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (v + v.adjoint()), Eigen::EigenvaluesOnly);
        m = std::min(m, es.eigenvalues().minCoeff());
    }
    return m;
}

double MatrixDensityGrid::reflection_defect() const
{
    const int n = static_cast<int>(values.size());
    double s = 0.0;
    for (int j = 0; j < n; ++j) s = std::max(s, (values[n - 1 - j] - values[j].conjugate()).norm());
    return s;
}

void MatrixDensityGrid::check_valid(double herm_tol, double psd_tol) const
{
    if (static_cast<int>(values.size()) != grid.size())
        throw std::invalid_argument("MatrixDensityGrid " + label + ": value count differs from grid size");
    const int t = dim();
    for (const auto& v : values)
        if (v.rows() != t || v.cols() != t)
            throw std::invalid_argument("MatrixDensityGrid " + label + ": node values must be square of equal size");
    const double scale = std::max(1.0, sup_norm());
    if (hermitian_defect() > herm_tol * scale)
        throw std::invalid_argument("MatrixDensityGrid " + label + ": values are not Hermitian");
    if (min_eigenvalue() < psd_tol * scale)
        throw std::invalid_argument("MatrixDensityGrid " + label + ": values are not positive semidefinite");
}

MatrixDensityGrid MatrixDensityGrid::scaled(double c) const
{
    MatrixDensityGrid out = *this;
    for (auto& v : out.values) v *= c;
    return out;
}

MatrixDensityGrid constant_density(const FrequencyGrid& grid, const Eigen::MatrixXcd& value, std::string label)
{
    MatrixDensityGrid out{grid, std::vector<Eigen::MatrixXcd>(static_cast<std::size_t>(grid.size()), value),
                          std::move(label)};
    return out;
}

MatrixDensityGrid rational_density(const FrequencyGrid& grid, const std::vector<Eigen::MatrixXcd>& numerator,
                                   const std::vector<cd>& denominator, double scale, std::string label)
{
    if (numerator.empty()) throw std::invalid_argument("rational_density: empty numerator");
    if (denominator.empty()) throw std::invalid_argument("rational_density: empty denominator");
    const auto rows = numerator.front().rows();
    const auto cols = numerator.front().cols();
    MatrixDensityGrid out{grid, {}, std::move(label)};
    out.values.reserve(static_cast<std::size_t>(grid.size()));
    for (int j = 0; j < grid.size(); ++j) {
        const double lam = grid.node(j);
        Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(rows, cols);
        for (std::size_t k = 0; k < numerator.size(); ++k)
            b += numerator[k] * std::polar(1.0, -lam * static_cast<double>(k));
        cd a = 0.0;
        for (std::size_t k = 0; k < denominator.size(); ++k)
            a += denominator[k] * std::polar(1.0, -lam * static_cast<double>(k));
        if (std::abs(a) < 1e-300) throw NumericalError("rational_density: denominator vanishes at node " + std::to_string(j));
        Eigen::MatrixXcd v = scale * (b * b.adjoint()) / std::norm(a);
        out.values.push_back(0.5 * (v + v.adjoint()));
    }
    return out;
}

MatrixDensityGrid tabulated_density(const FrequencyGrid& grid, std::vector<Eigen::MatrixXcd> values, std::string label)
{
    MatrixDensityGrid out{grid, std::move(values), std::move(label)};
    out.check_valid();
    return out;
}

Eigen::VectorXcd eval_chi(const std::vector<int>& mu, const IncrementSpec& spec, const FrequencyGrid& grid)
{
    if (mu.size() != spec.s.size()) throw std::invalid_argument("eval_chi: step vector length differs from r");
    Eigen::VectorXcd out(grid.size());
    for (int j = 0; j < grid.size(); ++j) {
        const double lam = grid.node(j);
        cd v = 1.0;
        for (std::size_t i = 0; i < mu.size(); ++i)
            v *= std::pow(cd(1.0) - std::polar(1.0, -lam * mu[i] * spec.s[i]), spec.d[i]);
        out(j) = v;
    }
    return out;
}

Eigen::VectorXcd eval_chi(const IncrementSpec& spec, const FrequencyGrid& grid) { return eval_chi(spec.mu, spec, grid); }

Eigen::VectorXcd eval_chi_polynomial(const IncrementPolynomial& poly, const FrequencyGrid& grid)
{
    Eigen::VectorXcd out(grid.size());
    for (int j = 0; j < grid.size(); ++j) {
        const double lam = grid.node(j);
        cd v = 0.0;
        for (int k = 0; k <= poly.degree(); ++k)
            if (poly[k] != 0) v += static_cast<double>(poly[k]) * std::polar(1.0, -lam * k);
        out(j) = v;
    }
    return out;
}

Eigen::VectorXcd eval_beta(const IncrementSpec& spec, const FrequencyGrid& grid)
{
    Eigen::VectorXcd out(grid.size());
    for (int j = 0; j < grid.size(); ++j) {
        const double lam = grid.node(j);
        cd v = 1.0;
        for (int i = 0; i < spec.r(); ++i) {
            const int half = spec.s[i] / 2;
            for (int k = -half; k <= half; ++k) {
                const cd factor(0.0, lam - 2.0 * std::numbers::pi * k / spec.s[i]);
                v *= std::pow(factor, spec.d[i]);
            }
        }
        out(j) = v;
    }
    return out;
}

Eigen::VectorXd TransferGrid::increment_weight() const
{
    return (chi.array().abs2() / beta.array().abs2()).matrix();
}

TransferGrid transfer_grid(const IncrementSpec& spec, const FrequencyGrid& grid)
{
    TransferGrid t{grid, eval_chi(spec, grid), eval_beta(spec, grid), {}};
    t.ratio = (t.chi.array() / t.beta.array()).matrix();
    return t;
}

MatrixDensityGrid observed_density(const MatrixDensityGrid& f, const MatrixDensityGrid& g, const IncrementSpec& spec)
{
    if (!(f.grid == g.grid)) throw std::invalid_argument("observed_density: f and g live on different grids");
    if (f.dim() != g.dim()) throw std::invalid_argument("observed_density: f and g differ in dimension");
    const Eigen::VectorXcd beta = eval_beta(spec, f.grid);
    MatrixDensityGrid p{f.grid, {}, "p"};
    p.values.reserve(f.values.size());
    for (int j = 0; j < f.grid.size(); ++j) p.values.push_back(f.values[j] + std::norm(beta(j)) * g.values[j]);
    return p;
}

MatrixDensityGrid weighted(const MatrixDensityGrid& density, const Eigen::VectorXd& weight, std::string label)
{
    MatrixDensityGrid out{density.grid, {}, label.empty() ? density.label : std::move(label)};
    out.values.reserve(density.values.size());
    for (int j = 0; j < density.grid.size(); ++j) out.values.push_back(weight(j) * density.values[j]);
    return out;
}

MatrixDensityGrid from_increment_density(const MatrixDensityGrid& increment_density, const IncrementSpec& spec)
{
    const TransferGrid t = transfer_grid(spec, increment_density.grid);
    return weighted(increment_density, t.increment_weight().cwiseInverse());
}

double minimality_integral(const MatrixDensityGrid& f, const MatrixDensityGrid& g, const IncrementSpec& spec)
{
    const MatrixDensityGrid p = observed_density(f, g, spec);
    const TransferGrid t = transfer_grid(spec, f.grid);
    const Eigen::VectorXd w = t.increment_weight();
    double acc = 0.0;
    for (int j = 0; j < f.grid.size(); ++j) {
        Eigen::LDLT<Eigen::MatrixXcd> ldlt(p.values[j]);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().real().minCoeff() <= 0.0)
            throw NumericalError("minimality_value: observed density is singular at node " + std::to_string(j)
                                 + " (lambda = " + std::to_string(f.grid.node(j)) + ")");
        const Eigen::MatrixXcd inv = ldlt.solve(Eigen::MatrixXcd::Identity(p.dim(), p.dim()));
        acc += inv.trace().real() / w(j);
    }
    return acc / f.grid.size();
}

Eigen::MatrixXcd structural_covariance(const MatrixDensityGrid& density, const IncrementSpec& spec, int m,
                                       const std::vector<int>& mu1, const std::vector<int>& mu2)
{
    const Eigen::VectorXcd c1 = eval_chi(mu1, spec, density.grid);
    const Eigen::VectorXcd c2 = eval_chi(mu2, spec, density.grid);
    const Eigen::VectorXcd beta = eval_beta(spec, density.grid);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(density.dim(), density.dim());
    for (int j = 0; j < density.grid.size(); ++j) {
        const double lam = density.grid.node(j);
        const cd factor = std::polar(1.0, lam * m) * c1(j) * std::conj(c2(j)) / std::norm(beta(j));
        acc += factor * density.values[j];
    }
    return acc / static_cast<double>(density.grid.size());
}

Eigen::MatrixXcd grid_mean(const std::vector<Eigen::MatrixXcd>& values)
{
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(values.front().rows(), values.front().cols());
    for (const auto& v : values) acc += v;
    return acc / static_cast<double>(values.size());
}

} // namespace gmf
