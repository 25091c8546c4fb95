#pragma once

#include "gmf/factorization.hpp"
#include "gmf/grid.hpp"
#include "gmf/increment.hpp"

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gmf {

/// Target weights a(0..N) of the functional sum_k a(k)^T xi(-k).
struct FunctionalCoefficients {
    std::vector<Eigen::VectorXcd> a;

    int dim() const { return a.empty() ? 0 : static_cast<int>(a.front().size()); }
    int N() const { return static_cast<int>(a.size()) - 1; }
    double squared_norm() const;
    void validate() const;

    /// a(N) = unit vector e_p (zero-based p), a(k) = 0 otherwise.
    static FunctionalCoefficients single_value(int N, int p, int T);
    static FunctionalCoefficients from_real(const std::vector<Eigen::VectorXd>& a);
};

/// Sequence indexed from `first`: values[i] sits at index first + i; zero outside.
struct IndexedVectors {
    int first = 0;
    std::vector<Eigen::VectorXcd> values;
    Eigen::Index dim = 0;

    int last() const { return first + static_cast<int>(values.size()) - 1; }
    Eigen::VectorXcd at(int m) const
    {
        if (m < first || m > last()) return Eigen::VectorXcd::Zero(dim);
        return values[static_cast<std::size_t>(m - first)];
    }
};

/// a_{-mu}(m) = sum_{l=max(m,0)}^{min(m+n, N)} e(l-m) a(l), m = -n..N.
IndexedVectors derive_a_minus(const FunctionalCoefficients& a, const IncrementPolynomial& e);
/// a_{-mu}(m) for m = 0..N.
std::vector<Eigen::VectorXcd> a_minus_nonnegative(const IndexedVectors& a_minus);
/// b(0) = 0, b(k) = a_{-mu}(-k) for 1 <= k <= n.
std::vector<Eigen::VectorXcd> b_minus(const IndexedVectors& a_minus, int n_gamma);
/// a_mu(k) = a_{-mu}(k - n), k = 0..N+n.
std::vector<Eigen::VectorXcd> a_mu(const IndexedVectors& a_minus, int n_gamma);

/// (Phi~ x)_k = sum_{j<=k} phi^T(k-j) x(j), k = 0..len-1.
std::vector<Eigen::VectorXcd> apply_phi_tilde(const CausalSeries& phi, const std::vector<Eigen::VectorXcd>& x, int len);
/// (Phi~^* y)_m = sum_{l>=0} conj(phi(l)) y(l+m), m = 0..len-1.
std::vector<Eigen::VectorXcd> apply_phi_tilde_adjoint(const CausalSeries& phi, const std::vector<Eigen::VectorXcd>& y,
                                                      int len);
/// (Phi~^+ x)_l = sum_k phi^T(l+k) x(k), l = 0..len-1.
std::vector<Eigen::VectorXcd> apply_phi_tilde_plus(const CausalSeries& phi, const std::vector<Eigen::VectorXcd>& x,
                                                   int len);

/// c^-(m) = sum_{k>=0} conj(g)(m-k) a_{-mu}(k), evaluated as Phi~^* Phi~ a, m = 0..len-1.
std::vector<Eigen::VectorXcd> c_minus(const CausalSeries& phi, const std::vector<Eigen::VectorXcd>& a_minus_nonneg,
                                      int len);
/// c^+(m) = sum_k conj(g)(m+k) b(k), evaluated as Phi~^* Phi~^+ b, m = 0..len-1.
std::vector<Eigen::VectorXcd> c_plus(const CausalSeries& phi, const std::vector<Eigen::VectorXcd>& b, int len);
/// (conj(psi) C)_m = sum_k conj(psi(k)) c(k+m), m = 0..len-1.
std::vector<Eigen::VectorXcd> apply_psi_bar(const CausalSeries& psi, const std::vector<Eigen::VectorXcd>& c, int len);

struct FilterOptions {
    FactorizationOptions fact;
};

/// Factorizations shared by every functional filtered against the same (f, g, spec).
struct FilterFactors {
    IncrementSpec spec;
    IncrementPolynomial poly;
    FrequencyGrid grid;
    TransferGrid transfer;
    SpectralFactor theta;
    CausalSeries psi;
    std::vector<Eigen::MatrixXcd> psi_grid;
    SpectralFactor phi;
    MatrixDensityGrid f;
    MatrixDensityGrid g;
    std::vector<std::string> warnings;
};

FilterFactors prepare_factors(const MatrixDensityGrid& f, const MatrixDensityGrid& g, const IncrementSpec& spec,
                              const FilterOptions& opts = {});

struct FilterSolution {
    std::vector<Eigen::VectorXcd> h; ///< per grid node
    double delta = 0.0;
    double term_signal = 0.0;     ///< ||Phi~ a||^2
    double term_correction = 0.0; ///< ||conj(psi)(C^- + C^+)||^2
    double truncation_estimate = 0.0;
    int L = 0;
    std::vector<Eigen::VectorXcd> correction; ///< (conj(psi)(C^- + C^+))_m, m = 0..L-1
    std::vector<std::string> warnings;
};

/// (conj(psi)(C^- + C^+))_m for m = 0..L-1.
std::vector<Eigen::VectorXcd> correction_coefficients(const CausalSeries& phi, const CausalSeries& psi,
                                                      const FunctionalCoefficients& a, const IncrementPolynomial& e);

/// h(lambda) = chi/beta * Psi^T(e^{-i lambda}) sum_m (conj(psi) C)_m e^{-i lambda m}, with Psi taken on the grid.
std::vector<Eigen::VectorXcd> spectral_characteristic(const std::vector<Eigen::MatrixXcd>& psi_grid,
                                                      const std::vector<Eigen::VectorXcd>& correction,
                                                      const TransferGrid& transfer);

/// ||Phi~ a||^2 - ||conj(psi)(C^- + C^+)||^2, clamped at zero within -1e-9 * ||Phi~ a||^2.
double mean_square_error(const CausalSeries& phi, const CausalSeries& psi, const FunctionalCoefficients& a,
                         const IncrementPolynomial& e, double* term_signal = nullptr,
                         double* term_correction = nullptr, std::vector<std::string>* warnings = nullptr);

FilterSolution filter(const FilterFactors& factors, const FunctionalCoefficients& a);
FilterSolution filter(const MatrixDensityGrid& f, const MatrixDensityGrid& g, const IncrementSpec& spec,
                      const FunctionalCoefficients& a, const FilterOptions& opts = {});

/// Functional restricted to the support 0..N (weights beyond N dropped).
FilterSolution filter_finite(const FilterFactors& factors, const FunctionalCoefficients& a, int N);

/// Estimate of coordinate p (zero-based) of xi(-N); for N >= n(gamma) the reduced formulas are used.
FilterSolution filter_single_value(const FilterFactors& factors, int N, int p);

/// Scalar weights a(0..M) lifted to T-vectors (a_p(m) = a(mT + p)) and filtered with the vector pipeline.
FilterSolution filter_periodic(const FilterFactors& factors, const std::vector<double>& scalar_weights);

/// (N, p) with M = N T + p, p zero-based.
std::pair<int, int> periodic_index(int M, int T);

/// Error of an arbitrary spectral characteristic:
/// (1/2pi) int (A - beta h)^T g conj(A - beta h) + h^T f conj(h) d lambda.
double delta_of_characteristic(const std::vector<Eigen::VectorXcd>& h, const FunctionalCoefficients& a,
                               const MatrixDensityGrid& f, const MatrixDensityGrid& g, const TransferGrid& transfer);

/// A(e^{-i lambda_j}) = sum_k a(k) e^{-i lambda_j k}.
std::vector<Eigen::VectorXcd> functional_transform(const FrequencyGrid& grid, const FunctionalCoefficients& a);

} // namespace gmf
