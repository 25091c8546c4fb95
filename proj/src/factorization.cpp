#include "gmf/factorization.hpp"

#include "gmf/errors.hpp"
#include "gmf/spectral_transform.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace gmf {

namespace {

// Causal projection of a Hermitian matrix function on the grid: coefficients k = 1..N/2-1 kept,
// the k = N/2 term halved, and the k = 0 term replaced by its strictly lower part plus half its diagonal.
std::vector<Eigen::MatrixXcd> plus_operator(const FrequencyGrid& grid, const std::vector<Eigen::MatrixXcd>& values)
{
    const int n = grid.size();
    const int half = n / 2;
    // hat(k) for k = -N/2 .. N/2 - 1; coefficient of e^{-i lambda k} is hat(-k)
    const std::vector<Eigen::MatrixXcd> hat = grid_fourier(grid, values, -half, half - 1);
    auto coeff = [&](int k) -> const Eigen::MatrixXcd& { return hat[static_cast<std::size_t>(-k + half)]; };
    std::vector<Eigen::MatrixXcd> plus(static_cast<std::size_t>(half + 1));
    Eigen::MatrixXcd c0 = coeff(0);
    Eigen::MatrixXcd z = c0.triangularView<Eigen::StrictlyLower>();
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, i) = 0.5 * c0(i, i).real();
    plus[0] = z;
    for (int k = 1; k < half; ++k) plus[static_cast<std::size_t>(k)] = coeff(k);
    plus[static_cast<std::size_t>(half)] = 0.5 * coeff(half);
    return grid_synthesis(grid, plus, 0);
}

void normalize_factor(SpectralFactor& fac)
{
    const Eigen::MatrixXcd c0 = fac.series.coeffs.front();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(c0.adjoint());
    const Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    Eigen::VectorXcd phase(r.rows());
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        const double a = std::abs(r(i, i));
        phase(i) = a > 0.0 ? r(i, i) / a : cd(1.0);
    }
    const Eigen::MatrixXcd u = q * phase.asDiagonal();
    for (auto& c : fac.series.coeffs) c = c * u;
    for (auto& v : fac.on_grid) v = v * u;
    Eigen::MatrixXcd& lead = fac.series.coeffs.front();
    lead.triangularView<Eigen::StrictlyUpper>().setZero();
    for (Eigen::Index i = 0; i < lead.rows(); ++i) lead(i, i) = lead(i, i).real();
}

std::vector<Eigen::MatrixXcd> cepstral_factor(const MatrixDensityGrid& density)
{
    const FrequencyGrid& grid = density.grid;
    const int n = grid.size();
    const int half = n / 2;
    Eigen::VectorXcd logs(n);
    for (int j = 0; j < n; ++j) logs(j) = std::log(density.values[j](0, 0).real());
    const Eigen::VectorXcd hat = grid_fourier(grid, logs, -half, half - 1);
    Eigen::VectorXcd plus = Eigen::VectorXcd::Zero(half + 1);
    plus(0) = 0.5 * hat(half);
    for (int k = 1; k < half; ++k) plus(k) = hat(half - k);
    plus(half) = 0.5 * hat(0);
    const Eigen::VectorXcd expo = grid_synthesis(grid, plus, 0);
    std::vector<Eigen::MatrixXcd> out(static_cast<std::size_t>(n), Eigen::MatrixXcd(1, 1));
    for (int j = 0; j < n; ++j) out[j](0, 0) = std::exp(expo(j));
    return out;
}

} // namespace

double reconstruction_residual(const MatrixDensityGrid& density, const std::vector<Eigen::MatrixXcd>& factor_values)
{
    const double scale = density.sup_norm();
    double worst = 0.0;
    for (int j = 0; j < density.grid.size(); ++j)
        worst = std::max(worst, (density.values[j] - factor_values[j] * factor_values[j].adjoint()).norm());
    return scale > 0.0 ? worst / scale : worst;
}

std::vector<Eigen::MatrixXcd> evaluate_series(const FrequencyGrid& grid, const CausalSeries& series)
{
    if (series.length() > grid.size()) throw std::invalid_argument("evaluate_series: series longer than grid");
    return grid_synthesis(grid, series.coeffs, 0);
}

std::vector<Eigen::MatrixXcd> invert_on_grid(const std::vector<Eigen::MatrixXcd>& values)
{
    std::vector<Eigen::MatrixXcd> out;
    out.reserve(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) {
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(values[j]);
        out.push_back(lu.inverse());
    }
    return out;
}

SpectralFactor factorize(const MatrixDensityGrid& density, const FactorizationOptions& opts)
{
    const FrequencyGrid& grid = density.grid;
    const int n = grid.size();
    const int t = density.dim();
    if (opts.L < 1 || opts.L > n / 2)
        throw std::invalid_argument("factorize: truncation L must lie in 1..N_g/2 (L = " + std::to_string(opts.L)
                                    + ", N_g = " + std::to_string(n) + ")");
    SpectralFactor fac;
    const double scale = density.sup_norm();
    if (scale == 0.0) {
        fac.series.coeffs.assign(static_cast<std::size_t>(opts.L), Eigen::MatrixXcd::Zero(t, t));
        fac.on_grid.assign(static_cast<std::size_t>(n), Eigen::MatrixXcd::Zero(t, t));
        fac.diag.method = "zero";
        return fac;
    }
    if (density.hermitian_defect() > 1e-12 * std::max(1.0, scale))
        throw NumericalError("factorize: density " + density.label + " is not Hermitian");
    for (int j = 0; j < n; ++j) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (density.values[j] + density.values[j].adjoint()),
                                                           Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        if (lo < opts.pd_eps * scale) {
            std::ostringstream os;
            os << "factorize: density " << density.label << " is not strictly positive definite at node " << j
               << " (lambda = " << grid.node(j) << ", min eigenvalue " << lo << ", threshold "
               << opts.pd_eps * scale << ")";
            throw NumericalError(os.str());
        }
    }

    if (t == 1) {
        fac.diag.method = "cepstral";
        fac.on_grid = cepstral_factor(density);
        fac.diag.iterations = 1;
        fac.diag.residual = reconstruction_residual(density, fac.on_grid);
        fac.diag.residual_history.push_back(fac.diag.residual);
    } else {
        fac.diag.method = "wilson";
        const Eigen::MatrixXcd mean = grid_mean(density.values);
        Eigen::LLT<Eigen::MatrixXcd> llt(0.5 * (mean + mean.adjoint()));
        fac.on_grid.assign(static_cast<std::size_t>(n), llt.matrixL());
        double prev = reconstruction_residual(density, fac.on_grid);
        fac.diag.residual_history.push_back(prev);
        const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(t, t);
        std::vector<Eigen::MatrixXcd> work(static_cast<std::size_t>(n));
        for (int it = 1; it <= opts.max_iter; ++it) {
            for (int j = 0; j < n; ++j) {
                Eigen::PartialPivLU<Eigen::MatrixXcd> lu(fac.on_grid[j]);
                const Eigen::MatrixXcd left = lu.solve(density.values[j]);
                Eigen::MatrixXcd gj = lu.solve(left.adjoint()).adjoint() + eye;
                work[j] = 0.5 * (gj + gj.adjoint());
            }
            const std::vector<Eigen::MatrixXcd> plus = plus_operator(grid, work);
            for (int j = 0; j < n; ++j) fac.on_grid[j] = fac.on_grid[j] * plus[j];
            const double res = reconstruction_residual(density, fac.on_grid);
            fac.diag.residual_history.push_back(res);
            fac.diag.iterations = it;
            if (!std::isfinite(res)) break;
            if (res < 1e-14 || (res <= opts.rel_tol && res > 0.5 * prev)) break;
            prev = res;
        }
        fac.diag.residual = fac.diag.residual_history.back();
    }
    if (!(fac.diag.residual <= opts.rel_tol)) {
        std::ostringstream os;
        os << "factorize: no convergence for density " << density.label << " after " << fac.diag.iterations
           << " iterations; residual history:";
        for (double r : fac.diag.residual_history) os << ' ' << r;
        throw NumericalError(os.str());
    }

    fac.series.coeffs = causal_coefficients(grid, fac.on_grid, opts.L);
    normalize_factor(fac);
    const double total = fac.series.energy();
    fac.diag.tail_energy = total > 0.0 ? fac.series.tail_energy() / total : 0.0;
    fac.diag.residual_truncated = reconstruction_residual(density, evaluate_series(grid, fac.series));
    if (fac.diag.tail_energy > opts.tail_rel) {
        std::ostringstream os;
        os << "factor of " << density.label << ": relative tail energy " << fac.diag.tail_energy
           << " exceeds " << opts.tail_rel << " at L = " << opts.L;
        fac.diag.warnings.push_back(os.str());
    }
    return fac;
}

SpectralFactor weighted_observed_factor(const MatrixDensityGrid& f, const MatrixDensityGrid& g,
                                        const IncrementSpec& spec, const FactorizationOptions& opts)
{
    const TransferGrid tg = transfer_grid(spec, f.grid);
    for (int j = 0; j < f.grid.size(); ++j)
        if (std::abs(tg.chi(j)) < 1e-13)
            throw NumericalError("weighted_observed_factor: |chi| below 1e-13 at node " + std::to_string(j));
    MatrixDensityGrid w = weighted(observed_density(f, g, spec), tg.increment_weight(), "weighted observed density");
    return factorize(w, opts);
}

double inverse_identity_residual(const CausalSeries& psi, const CausalSeries& theta)
{
    const int len = std::min(psi.length(), theta.length());
    double worst = 0.0;
    for (int k = 0; k < len; ++k) {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(psi.rows(), theta.cols());
        for (int j = 0; j <= k; ++j) acc.noalias() += psi[j] * theta[k - j];
        if (k == 0) acc -= Eigen::MatrixXcd::Identity(acc.rows(), acc.cols());
        worst = std::max(worst, acc.norm());
    }
    return worst;
}

} // namespace gmf
