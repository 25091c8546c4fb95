#pragma once

#include "gmf/factorization.hpp"
#include "gmf/filter.hpp"
#include "gmf/grid.hpp"

#include <Eigen/Dense>
#include <vector>

namespace gmf {

/// Generators S(k), P(k), Q(k) for |k| <= K of the Toeplitz-type operators of the Fourier formulation.
struct FourierOperatorSet {
    int K = 0;
    int n_gamma = 0;
    std::vector<Eigen::MatrixXcd> S, P, Q; ///< index k + K
    double p_symbol_min = 0.0;             ///< extreme eigenvalues of the P symbol on the grid
    double p_symbol_max = 0.0;

    Eigen::MatrixXcd S_at(int k) const { return pick(S, k); }
    Eigen::MatrixXcd P_at(int k) const { return pick(P, k); }
    Eigen::MatrixXcd Q_at(int k) const { return pick(Q, k); }

private:
    Eigen::MatrixXcd pick(const std::vector<Eigen::MatrixXcd>& v, int k) const;
};

/// S(k) = (1/2pi) int e^{-i lambda k} |beta|^2/|chi|^2 [g p^{-1}]^T, P(k) likewise with [p^{-1}]^T,
/// Q(k) = (1/2pi) int e^{-i lambda k} [f p^{-1} g]^T, all by grid quadrature.
FourierOperatorSet fourier_coefficients(const MatrixDensityGrid& f, const MatrixDensityGrid& g,
                                        const IncrementSpec& spec, int K);

/// Default window 2 * (support of a_mu) + 64.
int default_window(const FunctionalCoefficients& a, const IncrementSpec& spec);

/// Block matrices of the generators on a window l, k = 0..W-1 (S needs the a_mu support `cols`).
Eigen::MatrixXcd assemble_P(const FourierOperatorSet& set, int W);
Eigen::MatrixXcd assemble_S(const FourierOperatorSet& set, int W, int cols);

struct FourierSolution {
    double delta = 0.0;
    double quad_S = 0.0; ///< <S a_mu, P^{-1} S a_mu>
    double quad_Q = 0.0; ///< <Q a, a>
    int W = 0;
    double condition_bound = 0.0;
    std::vector<Eigen::VectorXcd> c; ///< (P^{-1} S a_mu)_k, k = 0..W-1
};

/// <S a_mu, P^{-1} S a_mu> + <Q a, a> on a window of size W (0 selects the default).
FourierSolution delta_fourier(const FourierOperatorSet& set, const FunctionalCoefficients& a,
                              const IncrementPolynomial& e, int W = 0);

/// h^T = [chi(e^{i lambda}) A^T(e^{-i lambda}) g - C^T(e^{i lambda})] p^{-1} conj(beta) / chi(e^{i lambda}),
/// C(e^{i lambda}) = sum_k c(k) e^{i lambda (k+1)}.
std::vector<Eigen::VectorXcd> h_fourier(const FourierSolution& sol, const FunctionalCoefficients& a,
                                        const MatrixDensityGrid& f, const MatrixDensityGrid& g,
                                        const IncrementSpec& spec);

struct ProjectionResult {
    std::vector<int> W_obs;
    std::vector<double> mse;
    double variance = 0.0; ///< Var(A eta)
};

/// Finite-window least-squares estimate of A eta from the observed increments chi(B) zeta(m), m = 0..-(W_obs-1).
ProjectionResult projection_oracle(const MatrixDensityGrid& f, const MatrixDensityGrid& g, const IncrementSpec& spec,
                                   const FunctionalCoefficients& a, const std::vector<int>& W_obs);

struct WindowResidual {
    int W = 0;
    double leading = 0.0; ///< Frobenius norm on the leading (W/2) x (W/2) blocks
    double full = 0.0;    ///< Frobenius norm on the whole window
};

/// || P_W (conj(Theta) Theta^T)_W - I ||.
WindowResidual inverse_window_residual(const FourierOperatorSet& set, const CausalSeries& theta, int W);

/// || P_W - (Psi^T conj(Psi))_W ||, the infinite inner sum truncated at the series length.
WindowResidual factor_window_residual(const FourierOperatorSet& set, const CausalSeries& psi, int W);

/// Sequences compared by the identity e(m) = sum_j Z(m+j+1) a_{-mu}(j) = (Theta^T S a_mu)_m, m = 0..count-1.
struct IdentityChain {
    std::vector<Eigen::VectorXcd> from_factors;
    std::vector<Eigen::VectorXcd> from_fourier;
    double max_abs_diff = 0.0;
};

IdentityChain identity_chain(const FourierOperatorSet& set, const FilterFactors& factors,
                             const FunctionalCoefficients& a, int count, int W);

} // namespace gmf
