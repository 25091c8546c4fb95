#pragma once

#include "gmf/grid.hpp"

#include <Eigen/Dense>
#include <vector>

namespace gmf {

/// hat F(k) = (1/N) sum_j F(lambda_j) e^{-i lambda_j k} for k = kmin..kmax (at most N values).
Eigen::VectorXcd grid_fourier(const FrequencyGrid& grid, const Eigen::VectorXcd& values, int kmin, int kmax);

/// F(lambda_j) = sum_k c(k) e^{-i lambda_j k}, c(k) = coeffs[k - kmin], at most N coefficients.
Eigen::VectorXcd grid_synthesis(const FrequencyGrid& grid, const Eigen::VectorXcd& coeffs, int kmin);

std::vector<Eigen::MatrixXcd> grid_fourier(const FrequencyGrid& grid, const std::vector<Eigen::MatrixXcd>& values,
                                           int kmin, int kmax);

std::vector<Eigen::MatrixXcd> grid_synthesis(const FrequencyGrid& grid, const std::vector<Eigen::MatrixXcd>& coeffs,
                                             int kmin);

/// Coefficients of e^{-i lambda k}, k = 0..count-1 (i.e. hat F(-k)).
std::vector<Eigen::MatrixXcd> causal_coefficients(const FrequencyGrid& grid,
                                                  const std::vector<Eigen::MatrixXcd>& values, int count);

/// Vector-valued series sum_k v(k) e^{-i lambda k}, k = 0..size-1.
std::vector<Eigen::VectorXcd> synthesize_vectors(const FrequencyGrid& grid, const std::vector<Eigen::VectorXcd>& v);

} // namespace gmf
