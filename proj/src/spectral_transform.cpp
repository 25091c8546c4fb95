#include "gmf/spectral_transform.hpp"

#include <unsupported/Eigen/FFT>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gmf {

namespace {

Eigen::FFT<double>& fft_engine()
{
    thread_local Eigen::FFT<double> engine;
    return engine;
}

// e^{i pi k} e^{-i pi k / N}, reduced so that large |k| keeps full accuracy.
cd offset_phase(long k, int n)
{
    const long two_n = 2L * n;
    long r = ((k * (n - 1)) % two_n + two_n) % two_n;
    return std::polar(1.0, std::numbers::pi * static_cast<double>(r) / n);
}

long wrap(long k, int n) { return ((k % n) + n) % n; }

} // namespace

Eigen::VectorXcd grid_fourier(const FrequencyGrid& grid, const Eigen::VectorXcd& values, int kmin, int kmax)
{
    const int n = grid.size();
    if (values.size() != n) throw std::invalid_argument("grid_fourier: value count differs from grid size");
    if (kmax - kmin + 1 > n || kmax < kmin) throw std::invalid_argument("grid_fourier: index span exceeds grid size");
    std::vector<cd> in(values.data(), values.data() + n), out;
    fft_engine().fwd(out, in);
    Eigen::VectorXcd res(kmax - kmin + 1);
    for (long k = kmin; k <= kmax; ++k) res(k - kmin) = offset_phase(k, n) * out[static_cast<std::size_t>(wrap(k, n))] / static_cast<double>(n);
    return res;
}

Eigen::VectorXcd grid_synthesis(const FrequencyGrid& grid, const Eigen::VectorXcd& coeffs, int kmin)
{
    const int n = grid.size();
    if (coeffs.size() > n) throw std::invalid_argument("grid_synthesis: more coefficients than grid nodes");
    std::vector<cd> in(static_cast<std::size_t>(n), cd(0.0)), out;
    for (long i = 0; i < coeffs.size(); ++i) {
        const long k = kmin + i;
        in[static_cast<std::size_t>(wrap(k, n))] += coeffs(i) * offset_phase(k, n);
    }
    fft_engine().fwd(out, in);
    return Eigen::Map<Eigen::VectorXcd>(out.data(), n);
}

std::vector<Eigen::MatrixXcd> grid_fourier(const FrequencyGrid& grid, const std::vector<Eigen::MatrixXcd>& values,
                                           int kmin, int kmax)
{
    const auto rows = values.front().rows();
    const auto cols = values.front().cols();
    std::vector<Eigen::MatrixXcd> out(static_cast<std::size_t>(kmax - kmin + 1), Eigen::MatrixXcd(rows, cols));
    Eigen::VectorXcd entry(grid.size());
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            for (int j = 0; j < grid.size(); ++j) entry(j) = values[j](r, c);
            const Eigen::VectorXcd f = grid_fourier(grid, entry, kmin, kmax);
            for (int k = 0; k < f.size(); ++k) out[k](r, c) = f(k);
        }
    return out;
}

std::vector<Eigen::MatrixXcd> grid_synthesis(const FrequencyGrid& grid, const std::vector<Eigen::MatrixXcd>& coeffs,
                                             int kmin)
{
    const auto rows = coeffs.front().rows();
    const auto cols = coeffs.front().cols();
    std::vector<Eigen::MatrixXcd> out(static_cast<std::size_t>(grid.size()), Eigen::MatrixXcd(rows, cols));
    Eigen::VectorXcd entry(static_cast<Eigen::Index>(coeffs.size()));
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            for (std::size_t k = 0; k < coeffs.size(); ++k) entry(static_cast<Eigen::Index>(k)) = coeffs[k](r, c);
            const Eigen::VectorXcd f = grid_synthesis(grid, entry, kmin);
            for (int j = 0; j < grid.size(); ++j) out[j](r, c) = f(j);
        }
    return out;
}

std::vector<Eigen::MatrixXcd> causal_coefficients(const FrequencyGrid& grid,
                                                  const std::vector<Eigen::MatrixXcd>& values, int count)
{
    std::vector<Eigen::MatrixXcd> hat = grid_fourier(grid, values, -(count - 1), 0);
    std::vector<Eigen::MatrixXcd> out(hat.rbegin(), hat.rend());
    return out;
}

std::vector<Eigen::VectorXcd> synthesize_vectors(const FrequencyGrid& grid, const std::vector<Eigen::VectorXcd>& v)
{
    if (v.empty()) return std::vector<Eigen::VectorXcd>(static_cast<std::size_t>(grid.size()));
    const Eigen::Index t = v.front().size();
    std::vector<Eigen::VectorXcd> out(static_cast<std::size_t>(grid.size()), Eigen::VectorXcd(t));
    Eigen::VectorXcd entry(static_cast<Eigen::Index>(v.size()));
    for (Eigen::Index r = 0; r < t; ++r) {
        for (std::size_t k = 0; k < v.size(); ++k) entry(static_cast<Eigen::Index>(k)) = v[k](r);
        const Eigen::VectorXcd f = grid_synthesis(grid, entry, 0);
        for (int j = 0; j < grid.size(); ++j) out[j](r) = f(j);
    }
    return out;
}

} // namespace gmf
