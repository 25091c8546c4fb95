#include "gmf/filter.hpp"

#include "gmf/errors.hpp"
#include "gmf/spectral_transform.hpp"

#include <cmath>
#include <sstream>

namespace gmf {

namespace {

Eigen::VectorXcd zero_vec(Eigen::Index n) { return Eigen::VectorXcd::Zero(n); }

double squared_norm(const std::vector<Eigen::VectorXcd>& v)
{
    double s = 0.0;
    for (const auto& x : v) s += x.squaredNorm();
    return s;
}

Eigen::VectorXcd at_or_zero(const std::vector<Eigen::VectorXcd>& v, int k, Eigen::Index dim)
{
    if (k < 0 || k >= static_cast<int>(v.size())) return zero_vec(dim);
    return v[static_cast<std::size_t>(k)];
}

} // namespace

double FunctionalCoefficients::squared_norm() const { return gmf::squared_norm(a); }

void FunctionalCoefficients::validate() const
{
    if (a.empty()) throw ConfigError("functional: at least one coefficient a(0) is required");
    const auto T = a.front().size();
    if (T < 1) throw ConfigError("functional: coefficient dimension must be positive");
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].size() != T) throw ConfigError("functional: coefficient a(" + std::to_string(k) + ") has wrong dimension");
        if (!a[k].allFinite()) throw ConfigError("functional: coefficient a(" + std::to_string(k) + ") is not finite");
    }
}

FunctionalCoefficients FunctionalCoefficients::single_value(int N, int p, int T)
{
    if (N < 0) throw ConfigError("single value: N must be nonnegative");
    if (p < 0 || p >= T)
        throw ConfigError("single value: component p = " + std::to_string(p) + " outside 0.." + std::to_string(T - 1));
    FunctionalCoefficients out;
    out.a.assign(static_cast<std::size_t>(N + 1), Eigen::VectorXcd::Zero(T));
    out.a.back()(p) = 1.0;
    return out;
}

FunctionalCoefficients FunctionalCoefficients::from_real(const std::vector<Eigen::VectorXd>& a)
{
    FunctionalCoefficients out;
    for (const auto& v : a) out.a.push_back(v.cast<cd>());
    return out;
}

IndexedVectors derive_a_minus(const FunctionalCoefficients& a, const IncrementPolynomial& e)
{
    a.validate();
    const int n = e.degree();
    const int N = a.N();
    IndexedVectors out;
    out.first = -n;
    out.dim = a.dim();
    for (int m = -n; m <= N; ++m) {
        Eigen::VectorXcd acc = zero_vec(out.dim);
        for (int l = std::max(m, 0); l <= std::min(m + n, N); ++l)
            if (e.at(l - m) != 0) acc += static_cast<double>(e.at(l - m)) * a.a[static_cast<std::size_t>(l)];
        out.values.push_back(std::move(acc));
    }
    return out;
}

std::vector<Eigen::VectorXcd> a_minus_nonnegative(const IndexedVectors& a_minus)
{
    std::vector<Eigen::VectorXcd> out;
    for (int m = 0; m <= a_minus.last(); ++m) out.push_back(a_minus.at(m));
    return out;
}

std::vector<Eigen::VectorXcd> b_minus(const IndexedVectors& a_minus, int n_gamma)
{
    std::vector<Eigen::VectorXcd> out(static_cast<std::size_t>(n_gamma + 1), zero_vec(a_minus.dim));
    for (int k = 1; k <= n_gamma; ++k) out[static_cast<std::size_t>(k)] = a_minus.at(-k);
    return out;
}

std::vector<Eigen::VectorXcd> a_mu(const IndexedVectors& a_minus, int n_gamma)
{
    std::vector<Eigen::VectorXcd> out;
    for (int k = 0; k - n_gamma <= a_minus.last(); ++k) out.push_back(a_minus.at(k - n_gamma));
    return out;
}

std::vector<Eigen::VectorXcd> apply_phi_tilde(const CausalSeries& phi, const std::vector<Eigen::VectorXcd>& x, int len)
{
    const Eigen::Index dim = phi.cols();
    std::vector<Eigen::VectorXcd> out(static_cast<std::size_t>(len), zero_vec(dim));
    for (int k = 0; k < len; ++k) {
        Eigen::VectorXcd& acc = out[static_cast<std::size_t>(k)];
        for (int j = std::max(0, k - phi.length() + 1); j <= k && j < static_cast<int>(x.size()); ++j)
            acc.noalias() += phi[k - j].transpose() * x[static_cast<std::size_t>(j)];
    }
    return out;
}

std::vector<Eigen::VectorXcd> apply_phi_tilde_adjoint(const CausalSeries& phi, const std::vector<Eigen::VectorXcd>& y,
                                                      int len)
{
    const Eigen::Index dim = phi.rows();
    std::vector<Eigen::VectorXcd> out(static_cast<std::size_t>(len), zero_vec(dim));
    for (int m = 0; m < len; ++m) {
        Eigen::VectorXcd& acc = out[static_cast<std::size_t>(m)];
        for (int l = 0; l < phi.length() && l + m < static_cast<int>(y.size()); ++l)
            acc.noalias() += phi[l].conjugate() * y[static_cast<std::size_t>(l + m)];
    }
    return out;
}

std::vector<Eigen::VectorXcd> apply_phi_tilde_plus(const CausalSeries& phi, const std::vector<Eigen::VectorXcd>& x,
                                                   int len)
{
    const Eigen::Index dim = phi.cols();
    std::vector<Eigen::VectorXcd> out(static_cast<std::size_t>(len), zero_vec(dim));
    for (int l = 0; l < len; ++l) {
        Eigen::VectorXcd& acc = out[static_cast<std::size_t>(l)];
        for (int k = 0; k < static_cast<int>(x.size()) && l + k < phi.length(); ++k)
            acc.noalias() += phi[l + k].transpose() * x[static_cast<std::size_t>(k)];
    }
    return out;
}

std::vector<Eigen::VectorXcd> c_minus(const CausalSeries& phi, const std::vector<Eigen::VectorXcd>& a_minus_nonneg,
                                      int len)
{
    const int ylen = static_cast<int>(a_minus_nonneg.size()) + phi.length() + len;
    return apply_phi_tilde_adjoint(phi, apply_phi_tilde(phi, a_minus_nonneg, ylen), len);
}

std::vector<Eigen::VectorXcd> c_plus(const CausalSeries& phi, const std::vector<Eigen::VectorXcd>& b, int len)
{
    return apply_phi_tilde_adjoint(phi, apply_phi_tilde_plus(phi, b, phi.length()), len);
}

std::vector<Eigen::VectorXcd> apply_psi_bar(const CausalSeries& psi, const std::vector<Eigen::VectorXcd>& c, int len)
{
    const Eigen::Index dim = psi.rows();
    std::vector<Eigen::VectorXcd> out(static_cast<std::size_t>(len), zero_vec(dim));
    for (int m = 0; m < len; ++m) {
        Eigen::VectorXcd& acc = out[static_cast<std::size_t>(m)];
        for (int k = 0; k < psi.length() && k + m < static_cast<int>(c.size()); ++k)
            acc.noalias() += psi[k].conjugate() * c[static_cast<std::size_t>(k + m)];
    }
    return out;
}

FilterFactors prepare_factors(const MatrixDensityGrid& f, const MatrixDensityGrid& g, const IncrementSpec& spec,
                              const FilterOptions& opts)
{
    spec.validate();
    if (!(f.grid == g.grid)) throw ConfigError("densities f and g live on different grids");
    if (f.dim() != spec.T || g.dim() != spec.T)
        throw ConfigError("density dimension differs from the period T = " + std::to_string(spec.T));
    FilterFactors out;
    out.spec = spec;
    out.poly = expand_increment_operator(spec);
    out.grid = f.grid;
    out.transfer = transfer_grid(spec, f.grid);
    out.f = f;
    out.g = g;
    out.theta = weighted_observed_factor(f, g, spec, opts.fact);
    if (out.theta.diag.method == "zero")
        throw NumericalError("observed density f + |beta|^2 g vanishes identically; the minimality condition fails");
    out.psi = invert_factor(out.theta.series);
    out.psi_grid = invert_on_grid(out.theta.on_grid);
    out.phi = factorize(g, opts.fact);
    for (const auto& w : out.theta.diag.warnings) out.warnings.push_back("theta: " + w);
    for (const auto& w : out.phi.diag.warnings) out.warnings.push_back("phi: " + w);
    return out;
}

std::vector<Eigen::VectorXcd> correction_coefficients(const CausalSeries& phi, const CausalSeries& psi,
                                                      const FunctionalCoefficients& a, const IncrementPolynomial& e)
{
    const int n = e.degree();
    const IndexedVectors am = derive_a_minus(a, e);
    const int len = psi.length();
    const int clen = len + psi.length();
    std::vector<Eigen::VectorXcd> c = c_minus(phi, a_minus_nonnegative(am), clen);
    const std::vector<Eigen::VectorXcd> cp = c_plus(phi, b_minus(am, n), clen);
    for (int m = 0; m < clen; ++m) c[static_cast<std::size_t>(m)] += cp[static_cast<std::size_t>(m)];
    return apply_psi_bar(psi, c, len);
}

std::vector<Eigen::VectorXcd> spectral_characteristic(const std::vector<Eigen::MatrixXcd>& psi_grid,
                                                      const std::vector<Eigen::VectorXcd>& correction,
                                                      const TransferGrid& transfer)
{
    const FrequencyGrid& grid = transfer.grid;
    if (static_cast<int>(psi_grid.size()) != grid.size())
        throw ConfigError("spectral characteristic: factor values and transfer functions use different grids");
    const std::vector<Eigen::VectorXcd> v = synthesize_vectors(grid, correction);
    std::vector<Eigen::VectorXcd> h(static_cast<std::size_t>(grid.size()));
    for (int j = 0; j < grid.size(); ++j) {
        const auto& psi = psi_grid[static_cast<std::size_t>(j)];
        if (psi.rows() != v[static_cast<std::size_t>(j)].size())
            throw ConfigError("spectral characteristic: dimension mismatch between factor and coefficients");
        h[static_cast<std::size_t>(j)] = transfer.ratio(j) * (psi.transpose() * v[static_cast<std::size_t>(j)]);
    }
    return h;
}

double mean_square_error(const CausalSeries& phi, const CausalSeries& psi, const FunctionalCoefficients& a,
                         const IncrementPolynomial& e, double* term_signal, double* term_correction,
                         std::vector<std::string>* warnings)
{
    const int ylen = a.N() + 1 + phi.length();
    const double t0 = squared_norm(apply_phi_tilde(phi, a.a, ylen));
    const double t1 = squared_norm(correction_coefficients(phi, psi, a, e));
    if (term_signal) *term_signal = t0;
    if (term_correction) *term_correction = t1;
    const double d = t0 - t1;
    if (d >= 0.0) return d;
    if (d >= -1e-9 * t0) {
        if (warnings) {
            std::ostringstream os;
            os << "mean-square error " << d << " below zero within 1e-9 relative; clamped to 0";
            warnings->push_back(os.str());
        }
        return 0.0;
    }
    std::ostringstream os;
    os << "mean-square error is negative (" << d << ", terms " << t0 << " and " << t1
       << "); the truncation length is too short";
    throw NumericalError(os.str());
}

FilterSolution filter(const FilterFactors& factors, const FunctionalCoefficients& a)
{
    a.validate();
    if (a.dim() != factors.spec.T)
        throw ConfigError("functional dimension " + std::to_string(a.dim()) + " differs from T = "
                          + std::to_string(factors.spec.T));
    const CausalSeries& phi = factors.phi.series;
    FilterSolution sol;
    sol.L = phi.length();
    sol.warnings = factors.warnings;
    sol.delta = mean_square_error(phi, factors.psi, a, factors.poly, &sol.term_signal, &sol.term_correction,
                                  &sol.warnings);
    sol.correction = correction_coefficients(phi, factors.psi, a, factors.poly);
    sol.h = spectral_characteristic(factors.psi_grid, sol.correction, factors.transfer);

    const IndexedVectors am = derive_a_minus(a, factors.poly);
    const std::vector<Eigen::VectorXcd> c = c_minus(phi, a_minus_nonnegative(am), 2 * sol.L);
    sol.truncation_estimate = phi.tail_energy() * a.squared_norm() + factors.psi.tail_energy() * squared_norm(c);
    return sol;
}

FilterSolution filter(const MatrixDensityGrid& f, const MatrixDensityGrid& g, const IncrementSpec& spec,
                      const FunctionalCoefficients& a, const FilterOptions& opts)
{
    return filter(prepare_factors(f, g, spec, opts), a);
}

FilterSolution filter_finite(const FilterFactors& factors, const FunctionalCoefficients& a, int N)
{
    if (N < 0) throw ConfigError("finite functional: N must be nonnegative");
    a.validate();
    FunctionalCoefficients cut;
    for (int k = 0; k <= N; ++k) cut.a.push_back(at_or_zero(a.a, k, a.dim()));
    return filter(factors, cut);
}

FilterSolution filter_single_value(const FilterFactors& factors, int N, int p)
{
    const int T = factors.spec.T;
    const FunctionalCoefficients a = FunctionalCoefficients::single_value(N, p, T);
    const int n = factors.poly.degree();
    if (N < n) return filter(factors, a);

    const CausalSeries& phi = factors.phi.series;
    FilterSolution sol;
    sol.L = phi.length();
    sol.warnings = factors.warnings;
    const IndexedVectors am = derive_a_minus(a, factors.poly);
    const int len = factors.psi.length();
    const std::vector<Eigen::VectorXcd> c = c_minus(phi, a_minus_nonnegative(am), 2 * len);
    sol.correction = apply_psi_bar(factors.psi, c, len);
    double g0 = 0.0;
    for (int l = 0; l < phi.length(); ++l) g0 += phi[l].row(p).squaredNorm();
    sol.term_signal = g0;
    sol.term_correction = squared_norm(sol.correction);
    const double d = g0 - sol.term_correction;
    if (d >= 0.0) {
        sol.delta = d;
    } else if (d >= -1e-9 * g0) {
        sol.delta = 0.0;
        sol.warnings.push_back("single-value mean-square error slightly negative; clamped to 0");
    } else {
        throw NumericalError("single-value mean-square error is negative; the truncation length is too short");
    }
    sol.h = spectral_characteristic(factors.psi_grid, sol.correction, factors.transfer);
    sol.truncation_estimate = phi.tail_energy() + factors.psi.tail_energy() * squared_norm(c);
    return sol;
}

std::pair<int, int> periodic_index(int M, int T)
{
    if (M < 0 || T < 1) throw ConfigError("periodic index: need M >= 0 and T >= 1");
    const int N = M / T;
    return {N, M - N * T};
}

FilterSolution filter_periodic(const FilterFactors& factors, const std::vector<double>& scalar_weights)
{
    const auto lifted = lift_functional(scalar_weights, factors.spec.T);
    FunctionalCoefficients a;
    for (const auto& v : lifted) a.a.push_back(v.cast<cd>());
    return filter(factors, a);
}

std::vector<Eigen::VectorXcd> functional_transform(const FrequencyGrid& grid, const FunctionalCoefficients& a)
{
    return synthesize_vectors(grid, a.a);
}

double delta_of_characteristic(const std::vector<Eigen::VectorXcd>& h, const FunctionalCoefficients& a,
                               const MatrixDensityGrid& f, const MatrixDensityGrid& g, const TransferGrid& transfer)
{
    const FrequencyGrid& grid = transfer.grid;
    if (static_cast<int>(h.size()) != grid.size() || !(f.grid == grid) || !(g.grid == grid))
        throw ConfigError("characteristic and densities use different grids");
    const std::vector<Eigen::VectorXcd> A = functional_transform(grid, a);
    double acc = 0.0;
    for (int j = 0; j < grid.size(); ++j) {
        const auto sj = static_cast<std::size_t>(j);
        const Eigen::VectorXcd r = A[sj] - transfer.beta(j) * h[sj];
        acc += (r.transpose() * g.values[sj] * r.conjugate()).value().real();
        acc += (h[sj].transpose() * f.values[sj] * h[sj].conjugate()).value().real();
    }
    return acc / grid.size();
}

} // namespace gmf
