#include "gmf/oracle.hpp"

#include "gmf/errors.hpp"
#include "gmf/spectral_transform.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace gmf {

Eigen::MatrixXcd FourierOperatorSet::pick(const std::vector<Eigen::MatrixXcd>& v, int k) const
{
    if (k < -K || k > K) {
        std::ostringstream os;
        os << "Fourier coefficient index " << k << " outside the computed range |k| <= " << K
           << "; increase K or the grid size";
        throw NumericalError(os.str());
    }
    return v[static_cast<std::size_t>(k + K)];
}

FourierOperatorSet fourier_coefficients(const MatrixDensityGrid& f, const MatrixDensityGrid& g,
                                        const IncrementSpec& spec, int K)
{
    if (!(f.grid == g.grid)) throw ConfigError("densities f and g live on different grids");
    const FrequencyGrid& grid = f.grid;
    if (K < 0 || 2 * K + 1 > grid.size())
        throw ConfigError("Fourier range K = " + std::to_string(K) + " needs a grid of at least 2K+1 nodes");
    const MatrixDensityGrid p = observed_density(f, g, spec);
    const Eigen::VectorXd w = transfer_grid(spec, grid).increment_weight();
    const int T = f.dim();
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(T, T);
    std::vector<Eigen::MatrixXcd> s(grid.size()), pp(grid.size()), q(grid.size());
    FourierOperatorSet out;
    out.K = K;
    out.n_gamma = spec.n_gamma();
    out.p_symbol_min = std::numeric_limits<double>::infinity();
    out.p_symbol_max = 0.0;
    for (int j = 0; j < grid.size(); ++j) {
        Eigen::LLT<Eigen::MatrixXcd> llt(p.values[j]);
        if (llt.info() != Eigen::Success)
            throw NumericalError("Fourier coefficients: observed density is singular at node " + std::to_string(j));
        const Eigen::MatrixXcd pinv = llt.solve(I);
        const Eigen::MatrixXcd sym = (pinv / w(j)).transpose();
        pp[j] = sym;
        s[j] = (g.values[j] * pinv / w(j)).transpose();
        q[j] = (f.values[j] * pinv * g.values[j]).transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (sym + sym.adjoint()), Eigen::EigenvaluesOnly);
        out.p_symbol_min = std::min(out.p_symbol_min, es.eigenvalues().minCoeff());
        out.p_symbol_max = std::max(out.p_symbol_max, es.eigenvalues().maxCoeff());
    }
    out.S = grid_fourier(grid, s, -K, K);
    out.P = grid_fourier(grid, pp, -K, K);
    out.Q = grid_fourier(grid, q, -K, K);
    return out;
}

int default_window(const FunctionalCoefficients& a, const IncrementSpec& spec)
{
    return 2 * (a.N() + 1 + spec.n_gamma()) + 64;
}

Eigen::MatrixXcd assemble_P(const FourierOperatorSet& set, int W)
{
    const Eigen::Index T = set.P.front().rows();
    Eigen::MatrixXcd out(W * T, W * T);
    for (int l = 0; l < W; ++l)
        for (int k = 0; k < W; ++k) out.block(l * T, k * T, T, T) = set.P_at(l - k);
    return out;
}

Eigen::MatrixXcd assemble_S(const FourierOperatorSet& set, int W, int cols)
{
    const Eigen::Index T = set.S.front().rows();
    Eigen::MatrixXcd out(W * T, cols * T);
    for (int l = 0; l < W; ++l)
        for (int k = 0; k < cols; ++k) out.block(l * T, k * T, T, T) = set.S_at(l + 1 + k - set.n_gamma);
    return out;
}

namespace {

Eigen::VectorXcd stack(const std::vector<Eigen::VectorXcd>& v)
{
    const Eigen::Index T = v.front().size();
    Eigen::VectorXcd out(static_cast<Eigen::Index>(v.size()) * T);
    for (std::size_t k = 0; k < v.size(); ++k) out.segment(static_cast<Eigen::Index>(k) * T, T) = v[k];
    return out;
}

} // namespace

FourierSolution delta_fourier(const FourierOperatorSet& set, const FunctionalCoefficients& a,
                              const IncrementPolynomial& e, int W)
{
    a.validate();
    FourierSolution sol;
    const int n = e.degree();
    const std::vector<Eigen::VectorXcd> amu = a_mu(derive_a_minus(a, e), n);
    sol.W = W > 0 ? W : 2 * static_cast<int>(amu.size()) + 64;
    sol.condition_bound = set.p_symbol_max / set.p_symbol_min;
    if (!(sol.condition_bound <= 1e12)) {
        std::ostringstream os;
        os << "P window is ill-conditioned (symbol condition bound " << sol.condition_bound
           << " > 1e12); refine the grid or enlarge the truncation";
        throw NumericalError(os.str());
    }
    const Eigen::Index T = a.dim();
    const Eigen::VectorXcd s = assemble_S(set, sol.W, static_cast<int>(amu.size())) * stack(amu);
    Eigen::LLT<Eigen::MatrixXcd> llt(assemble_P(set, sol.W));
    if (llt.info() != Eigen::Success) throw NumericalError("P window is not positive definite");
    const Eigen::VectorXcd c = llt.solve(s);
    sol.quad_S = s.dot(c).real();
    double qa = 0.0;
    for (int k = 0; k <= a.N(); ++k)
        for (int l = 0; l <= a.N(); ++l)
            qa += (a.a[static_cast<std::size_t>(k)].adjoint() * set.Q_at(l - k) * a.a[static_cast<std::size_t>(l)])
                      .value()
                      .real();
    sol.quad_Q = qa;
    sol.delta = sol.quad_S + sol.quad_Q;
    for (int k = 0; k < sol.W; ++k) sol.c.push_back(c.segment(k * T, T));
    return sol;
}

std::vector<Eigen::VectorXcd> h_fourier(const FourierSolution& sol, const FunctionalCoefficients& a,
                                        const MatrixDensityGrid& f, const MatrixDensityGrid& g,
                                        const IncrementSpec& spec)
{
    const FrequencyGrid& grid = f.grid;
    const TransferGrid tr = transfer_grid(spec, grid);
    const MatrixDensityGrid p = observed_density(f, g, spec);
    const std::vector<Eigen::VectorXcd> A = functional_transform(grid, a);
    // sum_k c(k) e^{-i lambda (k+1)}, conjugated below to obtain C(e^{i lambda}) for the reflected node
    std::vector<Eigen::VectorXcd> shifted;
    shifted.push_back(Eigen::VectorXcd::Zero(a.dim()));
    for (const auto& c : sol.c) shifted.push_back(c.conjugate());
    const std::vector<Eigen::VectorXcd> cbar = synthesize_vectors(grid, shifted);
    std::vector<Eigen::VectorXcd> h(static_cast<std::size_t>(grid.size()));
    for (int j = 0; j < grid.size(); ++j) {
        const auto sj = static_cast<std::size_t>(j);
        const cd chi_plus = std::conj(tr.chi(j));
        const Eigen::VectorXcd C = cbar[sj].conjugate();
        const Eigen::VectorXcd row = chi_plus * (g.values[sj].transpose() * A[sj]) - C;
        const Eigen::MatrixXcd pinv = p.values[sj].llt().solve(Eigen::MatrixXcd::Identity(a.dim(), a.dim()));
        h[sj] = pinv.transpose() * row * (std::conj(tr.beta(j)) / chi_plus);
    }
    return h;
}

ProjectionResult projection_oracle(const MatrixDensityGrid& f, const MatrixDensityGrid& g, const IncrementSpec& spec,
                                   const FunctionalCoefficients& a, const std::vector<int>& W_obs)
{
    a.validate();
    const FrequencyGrid& grid = f.grid;
    const int T = a.dim();
    const MatrixDensityGrid p = observed_density(f, g, spec);
    const TransferGrid tr = transfer_grid(spec, grid);
    const std::vector<Eigen::VectorXcd> A = functional_transform(grid, a);

    ProjectionResult out;
    double var = 0.0;
    for (int j = 0; j < grid.size(); ++j) {
        const auto sj = static_cast<std::size_t>(j);
        var += (A[sj].transpose() * g.values[sj] * A[sj].conjugate()).value().real();
    }
    out.variance = var / grid.size();

    int wmax = 0;
    for (int w : W_obs) {
        if (w < 0) throw ConfigError("projection oracle: window lengths must be nonnegative");
        wmax = std::max(wmax, w);
    }
    // R(k) = E x(m+k) x(m)^*, r(i) = E x(-i) conj(A eta)
    std::vector<Eigen::MatrixXcd> R;
    for (int k = -(wmax - 1); k <= wmax - 1; ++k) R.push_back(structural_covariance(p, spec, k, spec.mu, spec.mu));
    std::vector<Eigen::VectorXcd> r(static_cast<std::size_t>(wmax), Eigen::VectorXcd::Zero(T));
    for (int j = 0; j < grid.size(); ++j) {
        const auto sj = static_cast<std::size_t>(j);
        const Eigen::VectorXcd base = tr.chi(j) * (g.values[sj] * A[sj].conjugate());
        const double lam = grid.node(j);
        for (int i = 0; i < wmax; ++i) r[static_cast<std::size_t>(i)] += std::polar(1.0, -lam * i) * base;
    }
    for (auto& v : r) v /= static_cast<double>(grid.size());

    for (int w : W_obs) {
        out.W_obs.push_back(w);
        if (w == 0) {
            out.mse.push_back(out.variance);
            continue;
        }
        Eigen::MatrixXcd G(w * T, w * T);
        for (int i = 0; i < w; ++i)
            for (int k = 0; k < w; ++k) G.block(i * T, k * T, T, T) = R[static_cast<std::size_t>(k - i + wmax - 1)];
        G = 0.5 * (G + G.adjoint()).eval();
        G.diagonal().array() += 1e-12 * G.trace().real() / static_cast<double>(G.rows());
        Eigen::VectorXcd rv(w * T);
        for (int i = 0; i < w; ++i) rv.segment(i * T, T) = r[static_cast<std::size_t>(i)];
        Eigen::LLT<Eigen::MatrixXcd> llt(G);
        if (llt.info() != Eigen::Success)
            throw NumericalError("projection oracle: Gram matrix indefinite beyond the ridge at window "
                                 + std::to_string(w));
        out.mse.push_back(out.variance - rv.dot(llt.solve(rv)).real());
    }
    return out;
}

namespace {

WindowResidual residual_of(const Eigen::MatrixXcd& M, int W, Eigen::Index T)
{
    WindowResidual out;
    out.W = W;
    out.full = M.norm();
    const Eigen::Index lead = (W / 2) * T;
    out.leading = M.topLeftCorner(lead, lead).norm();
    return out;
}

} // namespace

WindowResidual inverse_window_residual(const FourierOperatorSet& set, const CausalSeries& theta, int W)
{
    const Eigen::Index T = theta.rows();
    Eigen::MatrixXcd lower = Eigen::MatrixXcd::Zero(W * T, W * T);
    for (int l = 0; l < W; ++l)
        for (int j = 0; j <= l; ++j) lower.block(l * T, j * T, T, T) = theta.at(l - j).conjugate();
    // (Theta^T)_{j,k} = theta^T(k - j); as a block matrix this is the transpose of the conjugate-free lower part
    const Eigen::MatrixXcd upper = lower.conjugate().transpose();
    const Eigen::MatrixXcd M = assemble_P(set, W) * (lower * upper) - Eigen::MatrixXcd::Identity(W * T, W * T);
    return residual_of(M, W, T);
}

WindowResidual factor_window_residual(const FourierOperatorSet& set, const CausalSeries& psi, int W)
{
    const Eigen::Index T = psi.rows();
    const int L = psi.length();
    Eigen::MatrixXcd prod = Eigen::MatrixXcd::Zero(W * T, W * T);
    for (int l = 0; l < W; ++l)
        for (int k = 0; k < W; ++k) {
            Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(T, T);
            for (int j = std::max(l, k); j - std::max(l, k) < L; ++j)
                acc.noalias() += psi.at(j - l).transpose() * psi.at(j - k).conjugate();
            prod.block(l * T, k * T, T, T) = acc;
        }
    return residual_of(assemble_P(set, W) - prod, W, T);
}

IdentityChain identity_chain(const FourierOperatorSet& set, const FilterFactors& factors,
                             const FunctionalCoefficients& a, int count, int W)
{
    const int n = factors.poly.degree();
    const IndexedVectors am = derive_a_minus(a, factors.poly);
    const std::vector<Eigen::VectorXcd> amu = a_mu(am, n);
    const CovarianceSeries<cd> gcov = covariances_from_factor(factors.phi.series);
    const CausalSeries& psi = factors.psi;
    const CausalSeries& theta = factors.theta.series;
    const Eigen::Index T = a.dim();

    auto Z = [&](int j) {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(T, T);
        for (int l = 0; l < psi.length(); ++l) acc.noalias() += psi[l].conjugate() * gcov.at(l - j).conjugate();
        return acc;
    };

    const Eigen::VectorXcd s = assemble_S(set, W, static_cast<int>(amu.size())) * stack(amu);
    IdentityChain out;
    for (int m = 0; m < count; ++m) {
        Eigen::VectorXcd lhs = Eigen::VectorXcd::Zero(T);
        for (int j = am.first; j <= am.last(); ++j) lhs += Z(m + j + 1) * am.at(j);
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(T);
        for (int l = m; l < W && l - m < theta.length(); ++l) rhs += theta[l - m].transpose() * s.segment(l * T, T);
        out.max_abs_diff = std::max(out.max_abs_diff, (lhs - rhs).cwiseAbs().maxCoeff());
        out.from_factors.push_back(std::move(lhs));
        out.from_fourier.push_back(std::move(rhs));
    }
    return out;
}

} // namespace gmf
