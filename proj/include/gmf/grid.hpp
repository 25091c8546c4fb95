#pragma once

#include "gmf/increment.hpp"

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace gmf {

using cd = std::complex<double>;

/// Offset uniform grid lambda_j = -pi + (j + 1/2) 2 pi / N on [-pi, pi).
class FrequencyGrid {
public:
    FrequencyGrid() = default;
    explicit FrequencyGrid(int size);

    int size() const { return size_; }
    double step() const;
    double node(int j) const;
    Eigen::VectorXd nodes() const;
    bool operator==(const FrequencyGrid& other) const { return size_ == other.size_; }

private:
    int size_ = 0;
};

/// Hermitian T x T spectral density sampled on a grid.
struct MatrixDensityGrid {
    FrequencyGrid grid;
    std::vector<Eigen::MatrixXcd> values;
    std::string label;

    int dim() const { return values.empty() ? 0 : static_cast<int>(values.front().rows()); }
    double sup_norm() const;
    bool is_zero() const { return sup_norm() == 0.0; }
    /// Largest Hermitian defect max_j ||v_j - v_j^*||_F.
    double hermitian_defect() const;
    /// Smallest eigenvalue over all nodes.
    double min_eigenvalue() const;
    /// max_j ||v(-lambda_j) - conj(v(lambda_j))||_F: zero for densities of real-valued sequences.
    double reflection_defect() const;
    void check_valid(double herm_tol = 1e-12, double psd_tol = -1e-10) const;

    MatrixDensityGrid scaled(double c) const;
};

MatrixDensityGrid constant_density(const FrequencyGrid& grid, const Eigen::MatrixXcd& value, std::string label = "");

/// scale * B(e^{-i lambda}) B(e^{-i lambda})^* / |a(e^{-i lambda})|^2 with matrix coefficients B(k)
/// and scalar denominator coefficients a(k).
MatrixDensityGrid rational_density(const FrequencyGrid& grid, const std::vector<Eigen::MatrixXcd>& numerator,
                                   const std::vector<cd>& denominator, double scale = 1.0, std::string label = "");

MatrixDensityGrid tabulated_density(const FrequencyGrid& grid, std::vector<Eigen::MatrixXcd> values,
                                    std::string label = "");

/// Per-node chi(e^{-i lambda}) = prod_j (1 - e^{-i lambda mu_j s_j})^{d_j}.
Eigen::VectorXcd eval_chi(const IncrementSpec& spec, const FrequencyGrid& grid);
/// Same product with the steps mu replaced (structural function with distinct steps).
Eigen::VectorXcd eval_chi(const std::vector<int>& mu, const IncrementSpec& spec, const FrequencyGrid& grid);
/// Per-node sum_k e(k) e^{-i lambda k}.
Eigen::VectorXcd eval_chi_polynomial(const IncrementPolynomial& poly, const FrequencyGrid& grid);
/// Per-node beta(i lambda) = prod_j prod_{k=-[s_j/2]}^{[s_j/2]} (i lambda - 2 pi i k / s_j)^{d_j}.
Eigen::VectorXcd eval_beta(const IncrementSpec& spec, const FrequencyGrid& grid);

struct TransferGrid {
    FrequencyGrid grid;
    Eigen::VectorXcd chi;
    Eigen::VectorXcd beta;
    Eigen::VectorXcd ratio;

    /// |chi|^2 / |beta|^2 per node.
    Eigen::VectorXd increment_weight() const;
};

TransferGrid transfer_grid(const IncrementSpec& spec, const FrequencyGrid& grid);

/// p = f + |beta|^2 g.
MatrixDensityGrid observed_density(const MatrixDensityGrid& f, const MatrixDensityGrid& g, const IncrementSpec& spec);

/// Node-wise density * weight(lambda_j).
MatrixDensityGrid weighted(const MatrixDensityGrid& density, const Eigen::VectorXd& weight, std::string label = "");

/// Density of xi whose GM increment has spectral density `increment_density`:
/// f = |beta|^2 / |chi|^2 * increment_density.
MatrixDensityGrid from_increment_density(const MatrixDensityGrid& increment_density, const IncrementSpec& spec);

struct MinimalityReport {
    std::vector<int> grid_sizes;
    std::vector<double> values;
    bool suspect = false;
};

/// (1/2pi) int Tr[|beta|^2/|chi|^2 p^{-1}] on the given grid.
double minimality_integral(const MatrixDensityGrid& f, const MatrixDensityGrid& g, const IncrementSpec& spec);

/// Densities given as callables of lambda so that they can be resampled on refined grids.
template <typename DensityFn>
MinimalityReport minimality_value(DensityFn f, DensityFn g, const IncrementSpec& spec,
                                  const std::vector<int>& grid_sizes)
{
    MinimalityReport rep;
    for (int n : grid_sizes) {
        FrequencyGrid grid(n);
        rep.grid_sizes.push_back(n);
        rep.values.push_back(minimality_integral(f(grid), g(grid), spec));
    }
    for (std::size_t i = 1; i < rep.values.size(); ++i)
        if (rep.values[i] > 2.0 * rep.values[i - 1]) rep.suspect = true;
    return rep;
}

/// (1/2pi) int e^{i lambda m} chi_{mu1}(e^{-i lambda}) chi_{mu2}(e^{i lambda}) |beta|^{-2} density d lambda.
Eigen::MatrixXcd structural_covariance(const MatrixDensityGrid& density, const IncrementSpec& spec, int m,
                                       const std::vector<int>& mu1, const std::vector<int>& mu2);

/// (1/N) sum_j values_j, the grid rule for (1/2pi) int.
Eigen::MatrixXcd grid_mean(const std::vector<Eigen::MatrixXcd>& values);

} // namespace gmf
