#pragma once

#include "gmf/grid.hpp"

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gmf {

/// One-sided matrix coefficient sequence c(0..L-1) of sum_k c(k) e^{-i lambda k}.
template <typename Scalar>
struct CausalMatrixSeries {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    std::vector<Matrix> coeffs;

    int length() const { return static_cast<int>(coeffs.size()); }
    Eigen::Index rows() const { return coeffs.empty() ? 0 : coeffs.front().rows(); }
    Eigen::Index cols() const { return coeffs.empty() ? 0 : coeffs.front().cols(); }
    const Matrix& operator[](int k) const { return coeffs[static_cast<std::size_t>(k)]; }
    Matrix at(int k) const { return (k < 0 || k >= length()) ? Matrix::Zero(rows(), cols()) : coeffs[static_cast<std::size_t>(k)]; }

    double energy() const
    {
        double e = 0.0;
        for (const auto& c : coeffs) e += c.squaredNorm();
        return e;
    }
    /// sum_{k >= L - L/8} ||c(k)||^2.
    double tail_energy() const
    {
        double e = 0.0;
        for (int k = length() - length() / 8; k < length(); ++k) e += coeffs[static_cast<std::size_t>(k)].squaredNorm();
        return e;
    }
};

using CausalSeries = CausalMatrixSeries<cd>;

/// Two-sided sequence g(-L+1..L-1).
template <typename Scalar>
struct CovarianceSeries {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    int L = 0;
    std::vector<Matrix> values;

    Matrix at(int k) const
    {
        if (k <= -L || k >= L) return Matrix::Zero(values.front().rows(), values.front().cols());
        return values[static_cast<std::size_t>(k + L - 1)];
    }
};

struct FactorizationOptions {
    int L = 256;
    double rel_tol = 1e-8;
    int max_iter = 200;
    double pd_eps = 1e-10;
    double tail_rel = 1e-10;
};

struct FactorDiagnostics {
    std::string method;
    int iterations = 0;
    std::vector<double> residual_history;
    double residual = 0.0;           ///< relative sup-node residual of the grid factor
    double residual_truncated = 0.0; ///< same for the L-term series
    double tail_energy = 0.0;        ///< relative tail energy of the L-term series
    std::vector<std::string> warnings;
};

/// Canonical factor: the L-term series plus its untruncated values on the grid.
struct SpectralFactor {
    CausalSeries series;
    std::vector<Eigen::MatrixXcd> on_grid;
    FactorDiagnostics diag;
};

/// density = Phi Phi^*, Phi causal, minimum phase, Phi(0) lower triangular with positive diagonal.
/// A density that vanishes identically yields the zero factor.
SpectralFactor factorize(const MatrixDensityGrid& density, const FactorizationOptions& opts = {});

/// Factor of |chi|^2 / |beta|^2 (f + |beta|^2 g), the spectral density of the observed increments.
SpectralFactor weighted_observed_factor(const MatrixDensityGrid& f, const MatrixDensityGrid& g,
                                        const IncrementSpec& spec, const FactorizationOptions& opts = {});

/// sup_j ||density_j - F_j F_j^*||_F / sup_j ||density_j||_F.
double reconstruction_residual(const MatrixDensityGrid& density, const std::vector<Eigen::MatrixXcd>& factor_values);

/// Node values of sum_k c(k) e^{-i lambda_j k}.
std::vector<Eigen::MatrixXcd> evaluate_series(const FrequencyGrid& grid, const CausalSeries& series);

/// Node-wise inverse of factor values.
std::vector<Eigen::MatrixXcd> invert_on_grid(const std::vector<Eigen::MatrixXcd>& values);

/// psi(0) = theta(0)^{-1}, psi(k) = -theta(0)^{-1} sum_{j=1}^k theta(j) psi(k-j).
template <typename Scalar>
CausalMatrixSeries<Scalar> invert_factor(const CausalMatrixSeries<Scalar>& theta)
{
    using Matrix = typename CausalMatrixSeries<Scalar>::Matrix;
    if (theta.length() == 0) throw std::invalid_argument("invert_factor: empty series");
    if (theta.rows() != theta.cols()) throw std::invalid_argument("invert_factor: theta(0) must be square");
    Eigen::FullPivLU<Matrix> lu(theta[0]);
    if (!lu.isInvertible()) throw std::invalid_argument("invert_factor: theta(0) is singular");
    const Matrix t0inv = lu.inverse();
    CausalMatrixSeries<Scalar> psi;
    psi.coeffs.reserve(theta.coeffs.size());
    psi.coeffs.push_back(t0inv);
    for (int k = 1; k < theta.length(); ++k) {
        Matrix acc = Matrix::Zero(theta.rows(), theta.cols());
        for (int j = 1; j <= k; ++j) acc.noalias() += theta[j] * psi[k - j];
        psi.coeffs.push_back(-t0inv * acc);
    }
    return psi;
}

/// g(k) = sum_{m >= max(0,-k)} phi(m) phi^*(k+m) for |k| < L.
template <typename Scalar>
CovarianceSeries<Scalar> covariances_from_factor(const CausalMatrixSeries<Scalar>& phi)
{
    using Matrix = typename CausalMatrixSeries<Scalar>::Matrix;
    CovarianceSeries<Scalar> out;
    out.L = phi.length();
    out.values.assign(static_cast<std::size_t>(2 * out.L - 1), Matrix::Zero(phi.rows(), phi.rows()));
    for (int k = 0; k < out.L; ++k) {
        Matrix acc = Matrix::Zero(phi.rows(), phi.rows());
        for (int m = 0; m + k < out.L; ++m) acc.noalias() += phi[m] * phi[k + m].adjoint();
        out.values[static_cast<std::size_t>(k + out.L - 1)] = acc;
        out.values[static_cast<std::size_t>(-k + out.L - 1)] = acc.adjoint();
    }
    return out;
}

/// (psi * theta)(k) - delta_{k0} I, maximal Frobenius norm over k < L.
double inverse_identity_residual(const CausalSeries& psi, const CausalSeries& theta);

} // namespace gmf
