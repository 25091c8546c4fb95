#include "gmf/minimax.hpp"

#include "gmf/errors.hpp"
#include "gmf/spectral_transform.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace gmf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::pair<ClassFamily, const char*>>& family_names()
{
    static const std::vector<std::pair<ClassFamily, const char*>> names = {
        {ClassFamily::D0_1, "D0_1"},   {ClassFamily::D0_2, "D0_2"},   {ClassFamily::D0_3, "D0_3"},
        {ClassFamily::D0_4, "D0_4"},   {ClassFamily::D1d_1, "D1d_1"}, {ClassFamily::D1d_2, "D1d_2"},
        {ClassFamily::D1d_3, "D1d_3"}, {ClassFamily::D1d_4, "D1d_4"}, {ClassFamily::De_1, "De_1"},
        {ClassFamily::De_2, "De_2"},   {ClassFamily::De_3, "De_3"},   {ClassFamily::De_4, "De_4"},
    };
    return names;
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

Eigen::MatrixXd sym(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(m));
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal()
           * es.eigenvectors().transpose();
}

Eigen::MatrixXd inv_sqrt_pd(const Eigen::MatrixXd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(m));
    if (es.eigenvalues().minCoeff() <= 0.0) throw NumericalError("matrix is not positive definite");
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal()
           * es.eigenvectors().transpose();
}

double min_eig(const Eigen::MatrixXcd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double max_eig(const Eigen::MatrixXcd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

Eigen::MatrixXcd psd_part(const Eigen::MatrixXcd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()));
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() * es.eigenvectors().adjoint();
}

/// (1/2pi) int |chi|^2/|beta|^2 density.
Eigen::MatrixXcd weighted_moment(const MatrixDensityGrid& density, const IncrementSpec& spec)
{
    const Eigen::VectorXd w = transfer_grid(spec, density.grid).increment_weight();
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(density.dim(), density.dim());
    for (int j = 0; j < density.grid.size(); ++j) acc += w(j) * density.values[static_cast<std::size_t>(j)];
    return acc / static_cast<double>(density.grid.size());
}

double inner(const Eigen::MatrixXd& B, const Eigen::MatrixXcd& m) { return (B.cast<cd>() * m).trace().real(); }

/// Scalar summary used by the trace / diagonal / weighted families.
double class_functional(ClassFamily fam, const Eigen::MatrixXd& B, const Eigen::MatrixXcd& m)
{
    switch (family_index(fam)) {
    case 2: return m.trace().real();
    case 4: return inner(B, m);
    default: return m.trace().real();
    }
}

void project_simplex(std::vector<double>& v, double total)
{
    if (total <= 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        return;
    }
    std::vector<double> u(v);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cum += u[k];
        const double t = (cum - total) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) theta = t;
    }
    for (auto& x : v) x = std::max(x - theta, 0.0);
}

void project_capped(std::vector<double>& v, double cap)
{
    double s = 0.0;
    for (auto& x : v) {
        x = std::max(x, 0.0);
        s += x;
    }
    if (s > cap) project_simplex(v, cap);
}

void project_l1_ball(std::vector<double>& v, double radius)
{
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    if (s <= radius) return;
    std::vector<double> mag(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) mag[i] = std::abs(v[i]);
    project_simplex(mag, radius);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = v[i] >= 0.0 ? mag[i] : -mag[i];
}

double dot(const std::vector<Eigen::MatrixXd>& A, const std::vector<Eigen::MatrixXd>& B)
{
    double s = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) s += (A[i].array() * B[i].array()).sum();
    return s;
}

} // namespace

std::string to_string(ClassFamily family)
{
    for (const auto& [f, name] : family_names())
        if (f == family) return name;
    return "unknown";
}

ClassFamily parse_family(const std::string& name)
{
    for (const auto& [f, n] : family_names())
        if (name == n) return f;
    throw ConfigError("unknown density class family '" + name + "'");
}

int family_index(ClassFamily family) { return static_cast<int>(family) % 4 + 1; }

bool is_moment_class(ClassFamily family) { return static_cast<int>(family) < 4; }
bool is_noise_class(ClassFamily family) { return static_cast<int>(family) >= 4 && static_cast<int>(family) < 8; }
bool is_contaminated_class(ClassFamily family) { return static_cast<int>(family) >= 8; }

std::string to_string(Membership m)
{
    switch (m) {
    case Membership::inside: return "inside";
    case Membership::boundary: return "boundary";
    case Membership::outside: return "outside";
    }
    return "unknown";
}

void DensityClassSpec::validate(int T) const
{
    const std::string name = to_string(family);
    auto need_pd = [&](const Eigen::MatrixXd& m, const char* what) {
        if (m.rows() != T || m.cols() != T)
            throw ConfigError(name + ": " + what + " must be " + std::to_string(T) + "x" + std::to_string(T));
        if ((m - m.transpose()).norm() > 1e-12 * std::max(1.0, m.norm()))
            throw ConfigError(name + ": " + what + " must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() <= 0.0) throw ConfigError(name + ": " + what + " must be positive definite");
    };
    const int k = family_index(family);
    if (is_noise_class(family)) {
        if (!anchor) throw ConfigError(name + ": anchor density g1 is required");
        switch (k) {
        case 1:
            if (delta_ij.rows() != T || delta_ij.cols() != T || delta_ij.minCoeff() < 0.0)
                throw ConfigError(name + ": delta_ij must be a nonnegative " + std::to_string(T) + "x"
                                  + std::to_string(T) + " matrix");
            break;
        case 3:
            if (delta_k.size() != T || delta_k.minCoeff() < 0.0)
                throw ConfigError(name + ": delta_k must hold " + std::to_string(T) + " nonnegative radii");
            break;
        default:
            if (delta < 0.0) throw ConfigError(name + ": delta must be nonnegative");
        }
        if (k == 4) need_pd(B, "B");
    } else {
        switch (k) {
        case 1: need_pd(P, "P"); break;
        case 3:
            if (p_k.size() != T || p_k.minCoeff() <= 0.0)
                throw ConfigError(name + ": p_k must hold " + std::to_string(T) + " positive moments");
            break;
        default:
            if (!(p > 0.0)) throw ConfigError(name + ": moment p must be positive");
        }
        if (k == 4) need_pd(B, "B");
        if (is_contaminated_class(family)) {
            if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError(name + ": eps must lie in [0, 1)");
            if (!anchor) throw ConfigError(name + ": anchor density f1 is required");
        }
    }
    if (anchor && anchor->dim() != T) throw ConfigError(name + ": anchor dimension differs from T");
}

// ---------------------------------------------------------------------------------------------
// membership and projection

MembershipReport class_membership(const MatrixDensityGrid& density, const DensityClassSpec& cls,
                                  const IncrementSpec& spec, double tol)
{
    const int T = density.dim();
    cls.validate(T);
    MembershipReport rep;
    bool active = false;
    auto mark = [&](const std::string& what, double rel) {
        rep.violation = std::max(rep.violation, rel);
        if (rel > tol) {
            rep.status = Membership::outside;
            rep.details.push_back(what + " violated by " + fmt(rel) + " (relative)");
        }
    };
    auto equality = [&](const std::string& what, double value, double target) {
        active = true;
        mark(what, std::abs(value - target) / std::max(std::abs(target), 1e-300));
    };
    auto bound = [&](const std::string& what, double value, double cap, double ref) {
        const double denom = std::max(cap, ref);
        mark(what, std::max(0.0, value - cap) / denom);
        if (value >= cap - tol * denom) active = true;
    };

    const double sup = std::max(density.sup_norm(), 1e-300);
    const double psd = density.min_eigenvalue();
    if (psd < -1e-10 * sup) {
        rep.status = Membership::outside;
        rep.violation = std::max(rep.violation, -psd / sup);
        rep.details.push_back("density is not positive semidefinite (min eigenvalue " + fmt(psd) + ")");
    }
    const int k = family_index(cls.family);
    const int N = density.grid.size();

    if (is_noise_class(cls.family)) {
        const MatrixDensityGrid& g1 = *cls.anchor;
        const double ref = 1e-12 * std::max(g1.sup_norm(), 1e-300);
        std::vector<Eigen::MatrixXcd> dev(static_cast<std::size_t>(N));
        for (int j = 0; j < N; ++j) dev[j] = density.values[j] - g1.values[j];
        switch (k) {
        case 1:
            for (int r = 0; r < T; ++r)
                for (int c = 0; c < T; ++c) {
                    double s = 0.0;
                    for (const auto& d : dev) s += std::abs(d(r, c));
                    bound("deviation of entry (" + std::to_string(r) + "," + std::to_string(c) + ")", s / N,
                          cls.delta_ij(r, c), ref);
                }
            break;
        case 2: {
            double s = 0.0;
            for (const auto& d : dev) s += std::abs(d.trace().real());
            bound("trace deviation", s / N, cls.delta, ref);
            break;
        }
        case 3:
            for (int r = 0; r < T; ++r) {
                double s = 0.0;
                for (const auto& d : dev) s += std::abs(d(r, r).real());
                bound("deviation of diagonal entry " + std::to_string(r), s / N, cls.delta_k(r), ref);
            }
            break;
        case 4: {
            double s = 0.0;
            for (const auto& d : dev) s += std::abs(inner(cls.B, d));
            bound("weighted deviation", s / N, cls.delta, ref);
            break;
        }
        }
    } else {
        const Eigen::MatrixXcd M = weighted_moment(density, spec);
        switch (k) {
        case 1:
            active = true;
            mark("moment matrix", (M - cls.P.cast<cd>()).norm() / cls.P.norm());
            break;
        case 2: equality("trace moment", M.trace().real(), cls.p); break;
        case 3:
            for (int r = 0; r < T; ++r) equality("moment of coordinate " + std::to_string(r), M(r, r).real(), cls.p_k(r));
            break;
        case 4: equality("weighted moment", inner(cls.B, M), cls.p); break;
        }
        if (is_contaminated_class(cls.family)) {
            const MatrixDensityGrid& f1 = *cls.anchor;
            double worst = 0.0;
            for (int j = 0; j < N; ++j) {
                const Eigen::MatrixXcd free = density.values[j] - (1.0 - cls.eps) * f1.values[j];
                double v = 0.0;
                switch (k) {
                case 1: v = min_eig(free); break;
                case 2: v = free.trace().real(); break;
                case 3: v = free.diagonal().real().minCoeff(); break;
                case 4: v = inner(cls.B, free); break;
                }
                worst = std::min(worst, v);
            }
            if (worst < 0.0) mark("lower bound (1 - eps) f1", -worst / sup);
        }
    }
    if (rep.status != Membership::outside) rep.status = active ? Membership::boundary : Membership::inside;
    return rep;
}

MatrixDensityGrid project_onto_class(const MatrixDensityGrid& density, const DensityClassSpec& cls,
                                     const IncrementSpec& spec)
{
    const int T = density.dim();
    cls.validate(T);
    const int k = family_index(cls.family);
    const int N = density.grid.size();
    MatrixDensityGrid out = density;
    for (auto& v : out.values) v = psd_part(v);

    if (is_noise_class(cls.family)) {
        const MatrixDensityGrid& g1 = *cls.anchor;
        double t = 1.0;
        auto shrink = [&](double dev, double cap) {
            if (dev > cap) t = std::min(t, cap / dev);
        };
        switch (k) {
        case 1:
            for (int r = 0; r < T; ++r)
                for (int c = 0; c < T; ++c) {
                    double s = 0.0;
                    for (int j = 0; j < N; ++j) s += std::abs(out.values[j](r, c) - g1.values[j](r, c));
                    shrink(s / N, cls.delta_ij(r, c));
                }
            break;
        case 2: {
            double s = 0.0;
            for (int j = 0; j < N; ++j) s += std::abs((out.values[j] - g1.values[j]).trace().real());
            shrink(s / N, cls.delta);
            break;
        }
        case 3:
            for (int r = 0; r < T; ++r) {
                double s = 0.0;
                for (int j = 0; j < N; ++j) s += std::abs((out.values[j] - g1.values[j])(r, r).real());
                shrink(s / N, cls.delta_k(r));
            }
            break;
        case 4: {
            double s = 0.0;
            for (int j = 0; j < N; ++j) s += std::abs(inner(cls.B, out.values[j] - g1.values[j]));
            shrink(s / N, cls.delta);
            break;
        }
        }
        if (t < 1.0)
            for (int j = 0; j < N; ++j) out.values[j] = g1.values[j] + t * (out.values[j] - g1.values[j]);
        return out;
    }

    const Eigen::VectorXd w = transfer_grid(spec, density.grid).increment_weight();
    MatrixDensityGrid base = density;
    for (auto& v : base.values) v.setZero();
    if (is_contaminated_class(cls.family))
        for (int j = 0; j < N; ++j) base.values[j] = (1.0 - cls.eps) * cls.anchor->values[j];
    MatrixDensityGrid free = out;
    for (int j = 0; j < N; ++j) free.values[j] = psd_part(out.values[j] - base.values[j]);
    const Eigen::MatrixXd Mb = weighted_moment(base, spec).real();
    const Eigen::MatrixXd Mf = weighted_moment(free, spec).real();
    const std::string name = to_string(cls.family);

    // free part rescaled so that base + free meets the moment constraint
    Eigen::MatrixXd C = Eigen::MatrixXd::Identity(T, T);
    bool empty = false;
    Eigen::MatrixXd fallback = Eigen::MatrixXd::Zero(T, T);
    switch (k) {
    case 1: {
        const Eigen::MatrixXd target = sym(cls.P - Mb);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(target, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-12 * cls.P.norm())
            throw InfeasibleClassError(name + ": the moment of (1 - eps) f1 already exceeds P");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ef(sym(Mf), Eigen::EigenvaluesOnly);
        if (ef.eigenvalues().minCoeff() <= 1e-14 * std::max(1.0, Mf.norm())) {
            empty = true;
            fallback = target;
        } else {
            C = sqrt_psd(target) * inv_sqrt_pd(Mf);
        }
        break;
    }
    case 3: {
        const Eigen::VectorXd target = cls.p_k - Mb.diagonal();
        if (target.minCoeff() < -1e-12 * cls.p_k.maxCoeff())
            throw InfeasibleClassError(name + ": the moment of (1 - eps) f1 already exceeds p_k");
        if (Mf.diagonal().minCoeff() <= 0.0) {
            empty = true;
            fallback = target.cwiseMax(0.0).asDiagonal();
        } else {
            C = (target.cwiseMax(0.0).array() / Mf.diagonal().array()).sqrt().matrix().asDiagonal();
        }
        break;
    }
    default: {
        const double target = cls.p - class_functional(cls.family, cls.B, Mb.cast<cd>());
        if (target < -1e-12 * cls.p) throw InfeasibleClassError(name + ": the moment of (1 - eps) f1 already exceeds p");
        const double have = class_functional(cls.family, cls.B, Mf.cast<cd>());
        if (have <= 0.0) {
            empty = true;
            fallback = (k == 4 ? Eigen::MatrixXd(cls.B.inverse()) : Eigen::MatrixXd::Identity(T, T))
                       * (std::max(target, 0.0) / T);
        } else {
            C = Eigen::MatrixXd::Identity(T, T) * std::sqrt(std::max(target, 0.0) / have);
        }
    }
    }
    const Eigen::MatrixXcd Cc = C.cast<cd>();
    for (int j = 0; j < N; ++j) {
        const Eigen::MatrixXcd f = empty ? Eigen::MatrixXcd(fallback.cast<cd>() / w(j))
                                         : Eigen::MatrixXcd(Cc * free.values[j] * Cc.adjoint());
        out.values[j] = base.values[j] + f;
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// search family

BumpBasis::BumpBasis(const FrequencyGrid& g, int n) : grid(g), size(n)
{
    if (n < 2 || n % 2 != 0) throw ConfigError("bump basis size must be a positive even number");
    if (n > grid.size()) throw ConfigError("bump basis size exceeds the grid size");
    const int order = n / 2;
    std::vector<Eigen::VectorXd> bumps(static_cast<std::size_t>(n), Eigen::VectorXd(grid.size()));
    for (int i = 0; i < n; ++i) {
        const double c = -std::numbers::pi + (i + 0.5) * 2.0 * std::numbers::pi / n;
        Eigen::VectorXd& b = bumps[static_cast<std::size_t>(i)];
        for (int j = 0; j < grid.size(); ++j) {
            const double x = 0.5 * (grid.node(j) - c);
            const double s = std::sin(x);
            const double r = std::abs(s) < 1e-12 ? static_cast<double>(order) : std::sin(order * x) / s;
            b(j) = std::pow(r, 4);
        }
        b /= b.mean();
    }
    for (int i = 0; i < n / 2; ++i)
        pairs.push_back(0.5 * (bumps[static_cast<std::size_t>(i)] + bumps[static_cast<std::size_t>(n - 1 - i)]));
}

ClassParameterization::ClassParameterization(const DensityClassSpec& cls, const IncrementSpec& spec,
                                             const BumpBasis& basis)
    : basis_(&basis), T_(spec.T)
{
    cls.validate(T_);
    const FrequencyGrid& grid = basis.grid;
    const int N = grid.size();
    const int k = family_index(cls.family);
    R_ = Eigen::MatrixXd::Identity(T_, T_);
    base_ = constant_density(grid, Eigen::MatrixXcd::Zero(T_, T_), "search");
    scale_ = Eigen::VectorXd::Ones(N);
    const std::string name = to_string(cls.family);
    if (k == 4) R_ = inv_sqrt_pd(cls.B);

    if (is_noise_class(cls.family)) {
        if (!(cls.anchor->grid == grid)) throw ConfigError(name + ": anchor lives on a different grid");
        base_ = *cls.anchor;
        switch (k) {
        case 1: kind_ = Kind::LeAbs; target_matrix_ = cls.delta_ij; break;
        case 3: kind_ = Kind::LeDiag; target_vec_ = cls.delta_k; break;
        default: kind_ = Kind::LeTrace; target_ = cls.delta;
        }
    } else {
        scale_ = transfer_grid(spec, grid).increment_weight().cwiseInverse();
        if (is_contaminated_class(cls.family)) {
            if (!(cls.anchor->grid == grid)) throw ConfigError(name + ": anchor lives on a different grid");
            base_ = cls.anchor->scaled(1.0 - cls.eps);
        }
        const Eigen::MatrixXd M1 = weighted_moment(base_, spec).real();
        switch (k) {
        case 1: {
            kind_ = Kind::EqSum;
            target_matrix_ = sym(cls.P - M1);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(target_matrix_, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < -1e-12 * cls.P.norm())
                throw InfeasibleClassError(name + ": the moment of (1 - eps) f1 already exceeds P");
            break;
        }
        case 3:
            kind_ = Kind::EqDiag;
            target_vec_ = cls.p_k - M1.diagonal();
            if (target_vec_.minCoeff() < -1e-12 * cls.p_k.maxCoeff())
                throw InfeasibleClassError(name + ": the moment of (1 - eps) f1 already exceeds p_k");
            target_vec_ = target_vec_.cwiseMax(0.0);
            break;
        default:
            kind_ = Kind::EqTrace;
            target_ = cls.p - class_functional(cls.family, cls.B, M1.cast<cd>());
            if (target_ < -1e-12 * cls.p)
                throw InfeasibleClassError(name + ": the moment of (1 - eps) f1 already exceeds p (margin "
                                           + fmt(target_) + ")");
            target_ = std::max(target_, 0.0);
        }
    }
    if (T_ == 1) {
        switch (kind_) {
        case Kind::EqSum: target_ = target_matrix_(0, 0); kind_ = Kind::EqTrace; break;
        case Kind::EqDiag: target_ = target_vec_(0); kind_ = Kind::EqTrace; break;
        case Kind::LeDiag: target_ = target_vec_(0); kind_ = Kind::LeTrace; break;
        case Kind::LeAbs: target_ = target_matrix_(0, 0); kind_ = Kind::LeTrace; break;
        default: break;
        }
    }
}

bool ClassParameterization::spectral() const { return kind_ == Kind::EqTrace || kind_ == Kind::LeTrace; }

MatrixDensityGrid ClassParameterization::density(const std::vector<Eigen::MatrixXd>& Z) const
{
    MatrixDensityGrid out = base_;
    out.label = "search";
    std::vector<Eigen::MatrixXcd> X;
    for (const auto& z : Z) X.push_back((R_ * z * R_).cast<cd>());
    for (int j = 0; j < basis_->grid.size(); ++j) {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(T_, T_);
        for (int i = 0; i < count(); ++i) acc += basis_->pairs[static_cast<std::size_t>(i)](j) * X[static_cast<std::size_t>(i)];
        out.values[static_cast<std::size_t>(j)] += scale_(j) * acc;
    }
    return out;
}

std::vector<Eigen::MatrixXd> ClassParameterization::gradient(const std::vector<Eigen::MatrixXcd>& kernel) const
{
    const int N = basis_->grid.size();
    std::vector<Eigen::MatrixXd> G;
    for (int i = 0; i < count(); ++i) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(T_, T_);
        const Eigen::VectorXd& b = basis_->pairs[static_cast<std::size_t>(i)];
        for (int j = 0; j < N; ++j) acc += (scale_(j) * b(j)) * kernel[static_cast<std::size_t>(j)].real();
        G.push_back(sym(R_ * (acc / N) * R_));
    }
    return G;
}

void ClassParameterization::project_spectral(std::vector<Eigen::MatrixXd>& Z) const
{
    std::vector<Eigen::MatrixXd> vecs;
    std::vector<double> vals;
    for (auto& z : Z) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(z));
        vecs.push_back(es.eigenvectors());
        for (int i = 0; i < T_; ++i) vals.push_back(es.eigenvalues()(i));
    }
    if (kind_ == Kind::EqTrace) project_simplex(vals, target_);
    else project_capped(vals, target_);
    for (std::size_t j = 0; j < Z.size(); ++j) {
        Eigen::VectorXd d(T_);
        for (int i = 0; i < T_; ++i) d(i) = vals[j * static_cast<std::size_t>(T_) + static_cast<std::size_t>(i)];
        Z[j] = sym(vecs[j] * d.asDiagonal() * vecs[j].transpose());
    }
}

void ClassParameterization::project_linear(std::vector<Eigen::MatrixXd>& Z) const
{
    const double n = static_cast<double>(Z.size());
    switch (kind_) {
    case Kind::EqSum: {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(T_, T_);
        for (const auto& z : Z) s += z;
        const Eigen::MatrixXd d = (s - target_matrix_) / n;
        for (auto& z : Z) z -= d;
        break;
    }
    case Kind::EqDiag:
    case Kind::LeDiag:
        for (int r = 0; r < T_; ++r) {
            double s = 0.0;
            for (const auto& z : Z) s += z(r, r);
            const double excess = s - target_vec_(r);
            if (kind_ == Kind::EqDiag || excess > 0.0)
                for (auto& z : Z) z(r, r) -= excess / n;
        }
        break;
    case Kind::LeAbs:
        for (int r = 0; r < T_; ++r)
            for (int c = r; c < T_; ++c) {
                std::vector<double> v;
                for (const auto& z : Z) v.push_back(z(r, c));
                project_l1_ball(v, target_matrix_(r, c));
                for (std::size_t j = 0; j < Z.size(); ++j) Z[j](r, c) = Z[j](c, r) = v[j];
            }
        break;
    default: break;
    }
}

void ClassParameterization::project(std::vector<Eigen::MatrixXd>& Z) const
{
    if (spectral()) {
        project_spectral(Z);
        return;
    }
    // Dykstra's alternating projections between the PSD blocks and the linear constraint set
    std::vector<Eigen::MatrixXd> x = Z, p(Z.size(), Eigen::MatrixXd::Zero(T_, T_)), q = p;
    for (int it = 0; it < 5000; ++it) {
        std::vector<Eigen::MatrixXd> y(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(x[j] + p[j]));
            y[j] = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
            p[j] = x[j] + p[j] - y[j];
        }
        std::vector<Eigen::MatrixXd> xn(y.size());
        for (std::size_t j = 0; j < y.size(); ++j) xn[j] = y[j] + q[j];
        project_linear(xn);
        double change = 0.0, size = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j) {
            q[j] = y[j] + q[j] - xn[j];
            change += (xn[j] - x[j]).squaredNorm();
            size += xn[j].squaredNorm();
        }
        x = std::move(xn);
        if (change <= 1e-28 * std::max(size, 1e-300)) break;
    }
    Z = std::move(x);
}

double ClassParameterization::gap(const std::vector<Eigen::MatrixXd>& G, const std::vector<Eigen::MatrixXd>& Z) const
{
    if (!spectral()) return kNaN;
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& g : G) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(g), Eigen::EigenvaluesOnly);
        top = std::max(top, es.eigenvalues().maxCoeff());
    }
    const double best = kind_ == Kind::EqTrace ? target_ * top : target_ * std::max(top, 0.0);
    return best - dot(G, Z);
}

std::vector<Eigen::MatrixXd> ClassParameterization::fit(const MatrixDensityGrid& density) const
{
    const int N = basis_->grid.size();
    if (!(density.grid == basis_->grid) || density.dim() != T_)
        throw ConfigError("initial density does not match the grid or dimension of the class");
    const Eigen::MatrixXd Rinv = R_.inverse();
    std::vector<Eigen::MatrixXd> Z;
    for (int i = 0; i < count(); ++i) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(T_, T_);
        const Eigen::VectorXd& b = basis_->pairs[static_cast<std::size_t>(i)];
        for (int j = 0; j < N; ++j)
            acc += b(j) * ((density.values[static_cast<std::size_t>(j)] - base_.values[static_cast<std::size_t>(j)]).real()
                           / scale_(j));
        Z.push_back(sym(Rinv * (acc / N / count()) * Rinv));
    }
    project(Z);
    return Z;
}

std::vector<Eigen::MatrixXd> ClassParameterization::sample(std::mt19937_64& rng) const
{
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const bool vertex = unif(rng) < 0.25;
    std::gamma_distribution<double> gam(0.3, 1.0);
    std::vector<double> weights(static_cast<std::size_t>(count()), 0.0);
    if (vertex) {
        std::uniform_int_distribution<int> pick(0, count() - 1);
        weights[static_cast<std::size_t>(pick(rng))] = 1.0;
    } else {
        for (auto& w : weights) w = gam(rng) + 1e-12;
    }
    std::vector<Eigen::MatrixXd> Z;
    for (int i = 0; i < count(); ++i) {
        Eigen::MatrixXd A(T_, T_);
        for (int r = 0; r < T_; ++r)
            for (int c = 0; c < T_; ++c) A(r, c) = normal(rng);
        Z.push_back(weights[static_cast<std::size_t>(i)] * (A * A.transpose() / T_ + 0.05 * Eigen::MatrixXd::Identity(T_, T_)));
    }
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(T_, T_);
    for (const auto& z : Z) S += z;
    const double u = unif(rng);
    switch (kind_) {
    case Kind::EqTrace:
    case Kind::LeTrace: {
        const double c = (kind_ == Kind::EqTrace ? 1.0 : u) * target_ / S.trace();
        for (auto& z : Z) z *= c;
        break;
    }
    case Kind::EqSum: {
        const Eigen::MatrixXd C = sqrt_psd(target_matrix_) * inv_sqrt_pd(S);
        for (auto& z : Z) z = sym(C * z * C.transpose());
        break;
    }
    case Kind::EqDiag:
    case Kind::LeDiag: {
        Eigen::VectorXd d(T_);
        for (int r = 0; r < T_; ++r) d(r) = std::sqrt((kind_ == Kind::EqDiag ? 1.0 : unif(rng)) * target_vec_(r) / S(r, r));
        for (auto& z : Z) z = d.asDiagonal() * z * d.asDiagonal();
        break;
    }
    case Kind::LeAbs: {
        double c = std::numeric_limits<double>::infinity();
        for (int r = 0; r < T_; ++r)
            for (int col = 0; col < T_; ++col) {
                double s = 0.0;
                for (const auto& z : Z) s += std::abs(z(r, col));
                if (s > 0.0) c = std::min(c, target_matrix_(r, col) / s);
            }
        for (auto& z : Z) z *= u * c;
        break;
    }
    }
    return Z;
}

// ---------------------------------------------------------------------------------------------
// cross functional

CrossFunctional::CrossFunctional(const FilterFactors& factors0, const FilterSolution& sol0,
                                 const FunctionalCoefficients& a)
    : transfer_(factors0.transfer), psi_(factors0.psi_grid), theta_(factors0.theta.on_grid)
{
    const FrequencyGrid& grid = factors0.grid;
    const int N = grid.size();
    const std::vector<Eigen::VectorXcd> A = functional_transform(grid, a);
    hf_ = synthesize_vectors(grid, sol0.correction);
    hg_.resize(static_cast<std::size_t>(N));
    kf_.resize(static_cast<std::size_t>(N));
    kg_.resize(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        hg_[sj] = theta_[sj].transpose() * A[sj] - transfer_.chi(j) * hf_[sj];
        const Eigen::VectorXcd h = transfer_.ratio(j) * (psi_[sj].transpose() * hf_[sj]);
        const Eigen::VectorXcd r = psi_[sj].transpose() * hg_[sj];
        kf_[sj] = h.conjugate() * h.transpose();
        kg_[sj] = r.conjugate() * r.transpose();
    }
}

double CrossFunctional::operator()(const MatrixDensityGrid& f, const MatrixDensityGrid& g) const
{
    const int N = transfer_.grid.size();
    if (!(f.grid == transfer_.grid) || !(g.grid == transfer_.grid))
        throw ConfigError("cross functional: densities use a different grid");
    const Eigen::VectorXd w = transfer_.increment_weight();
    double acc = 0.0;
    for (int j = 0; j < N; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        const Eigen::MatrixXcd& psi = psi_[sj];
        acc += w(j) * (hf_[sj].transpose() * psi * f.values[sj] * psi.adjoint() * hf_[sj].conjugate()).value().real();
        acc += (hg_[sj].transpose() * psi * g.values[sj] * psi.adjoint() * hg_[sj].conjugate()).value().real();
    }
    return acc / N;
}

double delta_cross(const FilterFactors& factors0, const FilterSolution& sol0, const FunctionalCoefficients& a,
                   const MatrixDensityGrid& f, const MatrixDensityGrid& g)
{
    return CrossFunctional(factors0, sol0, a)(f, g);
}

// ---------------------------------------------------------------------------------------------
// ascent

namespace {

struct Point {
    std::vector<Eigen::MatrixXd> zf, zg;
};

struct Evaluation {
    bool ok = false;
    std::string error;
    double delta = 0.0;
    MatrixDensityGrid f, g;
    std::vector<Eigen::MatrixXd> gf, gg;
    double gap = kNaN;
};

Point axpy(const Point& x, double t, const Point& d)
{
    Point out = x;
    for (std::size_t i = 0; i < out.zf.size(); ++i) out.zf[i] += t * d.zf[i];
    for (std::size_t i = 0; i < out.zg.size(); ++i) out.zg[i] += t * d.zg[i];
    return out;
}

Point diff(const Point& a, const Point& b) { return axpy(a, -1.0, b); }

double pdot(const Point& a, const Point& b) { return dot(a.zf, b.zf) + dot(a.zg, b.zg); }

class Ascent {
public:
    Ascent(const ClassParameterization* pf, const ClassParameterization* pg, const MatrixDensityGrid& f_fixed,
           const MatrixDensityGrid& g_fixed, const FunctionalCoefficients& a, const IncrementSpec& spec,
           const MinimaxOptions& opts)
        : pf_(pf), pg_(pg), f_fixed_(f_fixed), g_fixed_(g_fixed), a_(a), spec_(spec), opts_(opts)
    {
    }

    Evaluation evaluate(const Point& x) const
    {
        Evaluation ev;
        ev.f = pf_ ? pf_->density(x.zf) : f_fixed_;
        ev.g = pg_ ? pg_->density(x.zg) : g_fixed_;
        try {
            const FilterFactors fac = prepare_factors(ev.f, ev.g, spec_, opts_.filter);
            const FilterSolution sol = filter(fac, a_);
            const CrossFunctional cf(fac, sol, a_);
            ev.delta = sol.delta;
            if (pf_) ev.gf = pf_->gradient(cf.kernel_f());
            if (pg_) ev.gg = pg_->gradient(cf.kernel_g());
            ev.ok = std::isfinite(ev.delta);
            double gap = 0.0;
            if (pf_) gap += pf_->gap(ev.gf, x.zf);
            if (pg_) gap += pg_->gap(ev.gg, x.zg);
            ev.gap = gap;
        } catch (const NumericalError& e) {
            ev.ok = false;
            ev.error = e.what();
        }
        return ev;
    }

    void project(Point& x) const
    {
        if (pf_) pf_->project(x.zf);
        if (pg_) pg_->project(x.zg);
    }

    Point gradient(const Evaluation& ev) const { return Point{ev.gf, ev.gg}; }

private:
    const ClassParameterization* pf_;
    const ClassParameterization* pg_;
    const MatrixDensityGrid& f_fixed_;
    const MatrixDensityGrid& g_fixed_;
    const FunctionalCoefficients& a_;
    const IncrementSpec& spec_;
    const MinimaxOptions& opts_;
};

MinimaxSolution run_ascent(const ClassParameterization* pf, const ClassParameterization* pg,
                           const MatrixDensityGrid& f_init, const MatrixDensityGrid& g_init,
                           const FunctionalCoefficients& a, const IncrementSpec& spec, const MinimaxOptions& opts,
                           const MinimaxSolution* warm)
{
    Ascent asc(pf, pg, f_init, g_init, a, spec, opts);
    MinimaxSolution out;
    Point x;
    auto usable = [](const std::vector<Eigen::MatrixXd>& z, const ClassParameterization* p) {
        return p && static_cast<int>(z.size()) == p->count() && !z.empty() && z.front().rows() == p->dim();
    };
    if (pf) x.zf = warm && usable(warm->f_params, pf) ? warm->f_params : pf->fit(f_init);
    if (pg) x.zg = warm && usable(warm->g_params, pg) ? warm->g_params : pg->fit(g_init);
    asc.project(x);

    Evaluation ex = asc.evaluate(x);
    if (!ex.ok) {
        // fall back to the flat member of the class
        if (pf) {
            std::vector<Eigen::MatrixXd> flat(static_cast<std::size_t>(pf->count()), Eigen::MatrixXd::Identity(pf->dim(), pf->dim()));
            pf->project(flat);
            x.zf = flat;
        }
        if (pg) {
            for (auto& z : x.zg) z.setZero();
            pg->project(x.zg);
        }
        ex = asc.evaluate(x);
        if (!ex.ok) throw NumericalError("minimax: filter fails at the initial densities: " + ex.error);
    }
    out.history.push_back(ex.delta);

    const Point g0 = asc.gradient(ex);
    double L = std::max(pdot(g0, g0) > 0.0 ? std::sqrt(pdot(g0, g0)) / std::max(std::sqrt(pdot(x, x)), 1e-300) : 1.0, 1e-12);
    Point y = x;
    Evaluation ey = ex;
    double t = 1.0;
    int stall = 0;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        if (std::isfinite(ex.gap) && ex.gap <= opts.gap_tol * std::max(ex.delta, 1e-300)) {
            out.converged = true;
            break;
        }
        const Point gy = asc.gradient(ey);
        Point xn;
        Evaluation en;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            xn = axpy(y, 1.0 / L, gy);
            asc.project(xn);
            en = asc.evaluate(xn);
            const Point d = diff(xn, y);
            if (en.ok && en.delta >= ey.delta + pdot(gy, d) - 0.5 * L * pdot(d, d) - 1e-15 * std::abs(ey.delta)) {
                accepted = true;
                break;
            }
            L *= 2.0;
        }
        if (!accepted) throw NumericalError("minimax: step size search failed" + (en.error.empty() ? std::string() : ": " + en.error));
        if (en.delta < ex.delta) {
            // restart the momentum from the best point
            if (y.zf.size() == x.zf.size() && pdot(diff(y, x), diff(y, x)) == 0.0) {
                if (++stall > 3) {
                    out.converged = true;
                    break;
                }
            }
            y = x;
            ey = ex;
            t = 1.0;
            continue;
        }
        const double improvement = (en.delta - ex.delta) / std::max(std::abs(ex.delta), 1e-300);
        if (improvement > 0.0) out.improving_steps++;
        stall = improvement < opts.rel_improvement ? stall + 1 : 0;
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const Point step = diff(xn, x);
        y = axpy(xn, (t - 1.0) / tn, step);
        t = tn;
        x = xn;
        ex = en;
        out.history.push_back(ex.delta);
        if (pdot(step, step) > 0.0 && (t - 1.0) > 0.0) {
            asc.project(y);
            ey = asc.evaluate(y);
            if (!ey.ok) {
                y = x;
                ey = ex;
                t = 1.0;
            }
        } else {
            y = x;
            ey = ex;
        }
        L *= 0.8;
        if (!std::isfinite(ex.gap) && stall >= 3) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged && std::isfinite(ex.gap) && ex.gap <= opts.gap_tol * std::max(ex.delta, 1e-300)) out.converged = true;
    out.iterations = it;
    out.gap = ex.gap;
    out.f0 = ex.f;
    out.g0 = ex.g;
    out.f_params = x.zf;
    out.g_params = x.zg;
    const FilterFactors fac = prepare_factors(out.f0, out.g0, spec, opts.filter);
    const FilterSolution sol = filter(fac, a);
    out.h0 = sol.h;
    out.delta0 = sol.delta;
    for (const auto& list : {fac.warnings, sol.warnings})
        for (const auto& w : list)
            if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end()) out.warnings.push_back(w);
    if (!out.converged)
        out.warnings.push_back("minimax: stopped after " + std::to_string(it) + " iterations with gap " + fmt(out.gap));
    return out;
}

} // namespace

MinimaxSolution solve_least_favorable(const DensityClassSpec& f_class, const DensityClassSpec& g_class,
                                      const FunctionalCoefficients& a, const IncrementSpec& spec,
                                      const MatrixDensityGrid& f_init, const MatrixDensityGrid& g_init,
                                      const MinimaxOptions& opts, const MinimaxSolution* warm)
{
    if (!is_moment_class(f_class.family)) throw ConfigError("least favorable pair: f class must be one of D0_k");
    if (!is_noise_class(g_class.family)) throw ConfigError("least favorable pair: g class must be one of D1d_k");
    a.validate();
    if (a.dim() != spec.T) throw ConfigError("functional dimension differs from T");
    const BumpBasis basis(f_init.grid, opts.basis_size);
    const ClassParameterization pf(f_class, spec, basis);
    const ClassParameterization pg(g_class, spec, basis);
    MinimaxSolution out = run_ascent(&pf, &pg, f_init, g_init, a, spec, opts, warm);
    out.semi_uncertain = false;
    out.subgradient = check_subgradient_equations(out, f_class, &g_class, a, spec, opts);
    return out;
}

MinimaxSolution solve_semi_uncertain(const DensityClassSpec& f_class, const MatrixDensityGrid& g,
                                     const FunctionalCoefficients& a, const IncrementSpec& spec,
                                     const MatrixDensityGrid& f_init, const MinimaxOptions& opts,
                                     const MinimaxSolution* warm)
{
    if (!is_contaminated_class(f_class.family)) throw ConfigError("semi-uncertain problem: f class must be one of De_k");
    a.validate();
    if (a.dim() != spec.T) throw ConfigError("functional dimension differs from T");
    const BumpBasis basis(f_init.grid, opts.basis_size);
    const ClassParameterization pf(f_class, spec, basis);
    MinimaxSolution out = run_ascent(&pf, nullptr, f_init, g, a, spec, opts, warm);
    out.semi_uncertain = true;
    out.subgradient = check_subgradient_equations(out, f_class, nullptr, a, spec, opts);
    return out;
}

// ---------------------------------------------------------------------------------------------
// optimality equations

namespace {

using NodeBasis = std::function<Eigen::MatrixXcd(int)>;

struct EquationFit {
    Eigen::VectorXd coef;
    double residual = 0.0;
};

/// Least squares fit of lhs(j) ~ sum_m c_m Theta^T(j) E_m(j) conj(Theta(j)) over the given nodes.
EquationFit fit_equation(const std::vector<Eigen::MatrixXcd>& lhs, const std::vector<Eigen::MatrixXcd>& theta,
                         const std::vector<int>& nodes, const std::vector<NodeBasis>& basis, bool nonneg,
                         double scale)
{
    EquationFit out;
    const int M = static_cast<int>(basis.size());
    out.coef = Eigen::VectorXd::Zero(M);
    if (nodes.empty() || M == 0) return out;
    const int T = static_cast<int>(lhs.front().rows());
    const int rows = static_cast<int>(nodes.size()) * T * T * 2;
    Eigen::MatrixXd A(rows, M);
    Eigen::VectorXd b(rows);
    std::vector<std::vector<Eigen::MatrixXcd>> images(static_cast<std::size_t>(M));
    int row = 0;
    for (int j : nodes) {
        const auto sj = static_cast<std::size_t>(j);
        for (int m = 0; m < M; ++m)
            images[static_cast<std::size_t>(m)].push_back(theta[sj].transpose() * basis[static_cast<std::size_t>(m)](j) * theta[sj].conjugate());
        for (int r = 0; r < T; ++r)
            for (int c = 0; c < T; ++c) {
                b(row) = lhs[sj](r, c).real();
                b(row + 1) = lhs[sj](r, c).imag();
                for (int m = 0; m < M; ++m) {
                    const cd v = images[static_cast<std::size_t>(m)].back()(r, c);
                    A(row, m) = v.real();
                    A(row + 1, m) = v.imag();
                }
                row += 2;
            }
    }
    out.coef = nonneg ? nnls(A, b) : Eigen::VectorXd(A.colPivHouseholderQr().solve(b));
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        Eigen::MatrixXcd fit = Eigen::MatrixXcd::Zero(T, T);
        for (int m = 0; m < M; ++m) fit += out.coef(m) * images[static_cast<std::size_t>(m)][n];
        out.residual = std::max(out.residual, (lhs[static_cast<std::size_t>(nodes[n])] - fit).norm());
    }
    out.residual /= std::max(scale, 1e-300);
    return out;
}

Eigen::MatrixXcd unit(int T, int r, int c)
{
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(T, T);
    e(r, c) = 1.0;
    return e;
}

struct OrientationResult {
    std::vector<std::pair<std::string, double>> residuals, multipliers;
    bool signs_ok = true;
    double worst = 0.0;
    double scale = 0.0;
};

} // namespace

SubgradientReport check_subgradient_equations(const MinimaxSolution& sol, const DensityClassSpec& f_class,
                                              const DensityClassSpec* g_class, const FunctionalCoefficients& a,
                                              const IncrementSpec& spec, const MinimaxOptions& opts)
{
    const FilterFactors fac = prepare_factors(sol.f0, sol.g0, spec, opts.filter);
    const FilterSolution s0 = filter(fac, a);
    const CrossFunctional cf(fac, s0, a);
    const FrequencyGrid& grid = fac.grid;
    const int N = grid.size();
    const int T = spec.T;
    const std::vector<Eigen::MatrixXcd>& theta = fac.theta.on_grid;
    const std::vector<Eigen::MatrixXcd>& psi = fac.psi_grid;
    const Eigen::VectorXd w = fac.transfer.increment_weight();
    const int kf = family_index(f_class.family);
    constexpr double kActive = 1e-3;

    // nodes where the free part of f0 carries mass
    Eigen::VectorXd free_mass(N);
    for (int j = 0; j < N; ++j) {
        Eigen::MatrixXcd fr = sol.f0.values[j];
        if (is_contaminated_class(f_class.family)) fr -= (1.0 - f_class.eps) * f_class.anchor->values[j];
        free_mass(j) = w(j) * std::max(0.0, fr.trace().real());
    }
    std::vector<int> f_active, f_floor;
    for (int j = 0; j < N; ++j) (free_mass(j) >= kActive * free_mass.maxCoeff() ? f_active : f_floor).push_back(j);

    // deviation of g0 from g1 and its sign pattern
    std::vector<Eigen::MatrixXcd> dev;
    if (g_class)
        for (int j = 0; j < N; ++j) dev.push_back(sol.g0.values[j] - g_class->anchor->values[j]);

    auto run = [&](bool plus) {
        OrientationResult res;
        std::vector<Eigen::MatrixXcd> lhs_f(static_cast<std::size_t>(N)), lhs_g(static_cast<std::size_t>(N));
        for (int j = 0; j < N; ++j) {
            const auto src = static_cast<std::size_t>(plus ? N - 1 - j : j);
            lhs_f[j] = cf.h_f()[src].conjugate() * cf.h_f()[src].transpose();
            lhs_g[j] = cf.h_g()[src].conjugate() * cf.h_g()[src].transpose();
        }
        double scale_f = 0.0;
        for (int j : f_active) scale_f = std::max(scale_f, lhs_f[j].norm());
        res.scale = scale_f;

        std::vector<NodeBasis> basis;
        std::vector<std::string> names;
        const Eigen::MatrixXcd B = f_class.B.size() ? Eigen::MatrixXcd(f_class.B.cast<cd>()) : Eigen::MatrixXcd();
        switch (kf) {
        case 1:
            for (int r = 0; r < T; ++r)
                for (int c = r; c < T; ++c) {
                    basis.push_back([=](int) { return Eigen::MatrixXcd(unit(T, r, c) + (r == c ? Eigen::MatrixXcd::Zero(T, T) : unit(T, c, r))); });
                }
            break;
        case 2:
            basis.push_back([=](int) { return Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(T, T)); });
            names.push_back("alpha^2");
            break;
        case 3:
            for (int r = 0; r < T; ++r) {
                basis.push_back([=](int) { return unit(T, r, r); });
                names.push_back("alpha_" + std::to_string(r) + "^2");
            }
            break;
        case 4:
            basis.push_back([=](int) { return B; });
            names.push_back("alpha^2");
            break;
        }
        const EquationFit ff = fit_equation(lhs_f, theta, f_active, basis, kf != 1, scale_f);
        Eigen::MatrixXcd Mhat = Eigen::MatrixXcd::Zero(T, T);
        if (kf == 1) {
            int m = 0;
            Eigen::MatrixXd S = Eigen::MatrixXd::Zero(T, T);
            for (int r = 0; r < T; ++r)
                for (int c = r; c < T; ++c, ++m) S(r, c) = S(c, r) = ff.coef(m);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
            const double top = es.eigenvalues()(T - 1);
            if (top < 0.0) res.signs_ok = false;
            const Eigen::VectorXd alpha = es.eigenvectors().col(T - 1) * std::sqrt(std::max(top, 0.0));
            for (int r = 0; r < T; ++r) res.multipliers.emplace_back("alpha_" + std::to_string(r), alpha(r));
            Mhat = (alpha * alpha.transpose()).cast<cd>();
            double worst = 0.0;
            for (int j : f_active)
                worst = std::max(worst, (lhs_f[j] - theta[j].transpose() * Mhat * theta[j].conjugate()).norm());
            res.residuals.emplace_back("f_equation", worst / std::max(scale_f, 1e-300));
        } else {
            for (std::size_t m = 0; m < names.size(); ++m) {
                res.multipliers.emplace_back(names[m], ff.coef(static_cast<Eigen::Index>(m)));
                if (ff.coef(static_cast<Eigen::Index>(m)) < 0.0) res.signs_ok = false;
            }
            for (int m = 0; m < static_cast<int>(basis.size()); ++m) Mhat += ff.coef(m) * basis[m](0);
            res.residuals.emplace_back("f_equation", ff.residual);
        }
        // outside the support the transformed left side may not exceed the multiplier matrix
        double excess = 0.0;
        for (int j : f_floor) {
            const Eigen::MatrixXcd Mj = psi[j].transpose() * lhs_f[j] * psi[j].conjugate();
            excess = std::max(excess, max_eig(Mj - Mhat));
        }
        const double mscale = std::max(Mhat.norm(), 1e-300);
        res.residuals.emplace_back(is_contaminated_class(f_class.family) ? "floor_multiplier_positive_part"
                                                                          : "off_support_excess",
                                   excess / mscale);

        if (g_class) {
            const int kg = family_index(g_class->family);
            const Eigen::MatrixXcd Bg = g_class->B.size() ? Eigen::MatrixXcd(g_class->B.cast<cd>()) : Eigen::MatrixXcd();
            auto measure = [&](const Eigen::MatrixXcd& d, int r, int c) -> cd {
                switch (kg) {
                case 1: return d(r, c);
                case 2: return d.trace().real();
                case 3: return d(r, r).real();
                default: return inner(g_class->B, d);
                }
            };
            const int comps = kg == 1 ? T * T : (kg == 3 ? T : 1);
            std::vector<NodeBasis> gb;
            std::vector<std::string> gnames;
            std::vector<int> g_active;
            std::vector<char> in_active(static_cast<std::size_t>(N), 0);
            double scale_g = 0.0;
            for (int comp = 0; comp < comps; ++comp) {
                const int r = kg == 1 ? comp / T : comp;
                const int c = kg == 1 ? comp % T : comp;
                double top = 0.0;
                for (int j = 0; j < N; ++j) top = std::max(top, std::abs(measure(dev[j], r, c)));
                if (top <= 0.0) continue;
                std::vector<cd> sign(static_cast<std::size_t>(N), 0.0);
                for (int j = 0; j < N; ++j) {
                    const cd m = measure(dev[j], r, c);
                    if (std::abs(m) >= kActive * top) {
                        sign[j] = m / std::abs(m);
                        in_active[j] = 1;
                    }
                }
                gb.push_back([=](int j) {
                    Eigen::MatrixXcd E;
                    switch (kg) {
                    case 1: E = unit(T, r, c); break;
                    case 2: E = Eigen::MatrixXcd::Identity(T, T); break;
                    case 3: E = unit(T, r, r); break;
                    default: E = Bg; break;
                    }
                    return Eigen::MatrixXcd(sign[static_cast<std::size_t>(j)] * E);
                });
                gnames.push_back(kg == 1 ? "beta_" + std::to_string(r) + std::to_string(c)
                                         : (kg == 3 ? "beta_" + std::to_string(r) + "^2" : "beta^2"));
            }
            for (int j = 0; j < N; ++j)
                if (in_active[j]) {
                    g_active.push_back(j);
                    scale_g = std::max(scale_g, lhs_g[j].norm());
                }
            if (gb.empty()) {
                res.residuals.emplace_back("g_equation", 0.0);
            } else {
                const EquationFit fg = fit_equation(lhs_g, theta, g_active, gb, true, scale_g);
                for (std::size_t m = 0; m < gnames.size(); ++m)
                    res.multipliers.emplace_back(gnames[m], fg.coef(static_cast<Eigen::Index>(m)));
                res.residuals.emplace_back("g_equation", fg.residual);
                // |gamma| <= 1 away from the support of the deviation
                double worst = 0.0;
                for (int j = 0; j < N; ++j) {
                    if (in_active[j]) continue;
                    const Eigen::MatrixXcd Mj = psi[j].transpose() * lhs_g[j] * psi[j].conjugate();
                    for (int comp = 0; comp < static_cast<int>(gb.size()); ++comp) {
                        const double beta = fg.coef(comp);
                        if (beta <= 0.0) continue;
                        const int r = kg == 1 ? comp / T : comp;
                        const int c = kg == 1 ? comp % T : comp;
                        double gamma = 0.0;
                        switch (kg) {
                        case 1: gamma = std::abs(Mj(r, c)) / beta; break;
                        case 2: gamma = Mj.trace().real() / (T * beta); break;
                        case 3: gamma = Mj(r, r).real() / beta; break;
                        default: gamma = inner(g_class->B, Mj) / (g_class->B.squaredNorm() * beta); break;
                        }
                        worst = std::max(worst, std::abs(gamma) - 1.0);
                    }
                }
                res.residuals.emplace_back("gamma_bound_excess", std::max(worst, 0.0));
            }
            // the least favorable deviation exhausts the radius
            double sat = 0.0;
            for (int comp = 0; comp < comps; ++comp) {
                const int r = kg == 1 ? comp / T : comp;
                const int c = kg == 1 ? comp % T : comp;
                double s = 0.0;
                for (int j = 0; j < N; ++j) s += std::abs(measure(dev[j], r, c));
                s /= N;
                const double radius = kg == 1 ? g_class->delta_ij(r, c) : (kg == 3 ? g_class->delta_k(r) : g_class->delta);
                if (radius > 0.0) sat = std::max(sat, std::abs(s - radius) / radius);
            }
            res.residuals.emplace_back("radius_saturation", sat);
        }
        for (const auto& [name, v] : res.residuals) res.worst = std::max(res.worst, v);
        return res;
    };

    const OrientationResult minus = run(false);
    const OrientationResult plus = run(true);
    const bool use_plus = plus.worst < minus.worst;
    const OrientationResult& best = use_plus ? plus : minus;
    const OrientationResult& other = use_plus ? minus : plus;
    SubgradientReport rep;
    rep.orientation = use_plus ? "e^{i lambda}" : "e^{-i lambda}";
    rep.residuals = best.residuals;
    rep.multipliers = best.multipliers;
    rep.alternative_residuals = other.residuals;
    rep.scale = best.scale;
    rep.signs_ok = best.signs_ok;
    if (!ClassParameterization(f_class, spec, BumpBasis(grid, opts.basis_size)).spectral())
        rep.notes.push_back("f class parameterization has no exact linear oracle; gap not certified");
    return rep;
}

// ---------------------------------------------------------------------------------------------
// saddle inequalities

SaddleReport check_saddle_point(const MinimaxSolution& sol, const DensityClassSpec& f_class,
                                const DensityClassSpec* g_class, const FunctionalCoefficients& a,
                                const IncrementSpec& spec, int samples, std::uint64_t seed,
                                const MinimaxOptions& opts)
{
    SaddleReport rep;
    rep.samples = std::max(samples, 0);
    rep.seed = seed;
    if (rep.samples == 0) return rep;
    const FilterFactors fac = prepare_factors(sol.f0, sol.g0, spec, opts.filter);
    const FilterSolution s0 = filter(fac, a);
    const CrossFunctional cf(fac, s0, a);
    const BumpBasis basis(sol.f0.grid, opts.basis_size);
    const ClassParameterization pf(f_class, spec, basis);
    std::optional<ClassParameterization> pg;
    if (g_class) pg.emplace(*g_class, spec, basis);
    const double anorm = std::sqrt(a.squared_norm() / std::max(1, a.N() + 1) / spec.T);
    rep.right_margin_min = rep.left_margin_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < rep.samples; ++i) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(i)};
        std::mt19937_64 rng(seq);
        const MatrixDensityGrid f = pf.density(pf.sample(rng));
        const MatrixDensityGrid g = pg ? pg->density(pg->sample(rng)) : sol.g0;
        const double right = s0.delta - cf(f, g);
        rep.right_margins.push_back(right);
        rep.right_margin_min = std::min(rep.right_margin_min, right);

        std::normal_distribution<double> normal;
        FunctionalCoefficients ap = a;
        for (auto& v : ap.a)
            for (Eigen::Index k = 0; k < v.size(); ++k) {
                const double re = normal(rng), im = normal(rng);
                v(k) += 0.1 * anorm * (v(k).imag() == 0.0 ? cd(re, 0.0) : cd(re, im));
            }
        const FilterSolution sp = filter(fac, ap);
        const double left = delta_of_characteristic(sp.h, a, sol.f0, sol.g0, fac.transfer) - s0.delta;
        rep.left_margins.push_back(left);
        rep.left_margin_min = std::min(rep.left_margin_min, left);
    }
    return rep;
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b)
{
    const Eigen::Index n = A.cols();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<char> passive(static_cast<std::size_t>(n), 0);
    const double tol = 10.0 * std::numeric_limits<double>::epsilon() * A.norm() * std::max<Eigen::Index>(A.rows(), n);
    auto solve_passive = [&]() {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < n; ++i)
            if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
        Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
        const Eigen::VectorXd zp = Ap.colPivHouseholderQr().solve(b);
        Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
        for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(static_cast<Eigen::Index>(k));
        return z;
    };
    for (int outer = 0; outer < 3 * static_cast<int>(n) + 10; ++outer) {
        const Eigen::VectorXd grad = A.transpose() * (b - A * x);
        Eigen::Index best = -1;
        double top = tol;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!passive[static_cast<std::size_t>(i)] && grad(i) > top) {
                top = grad(i);
                best = i;
            }
        if (best < 0) break;
        passive[static_cast<std::size_t>(best)] = 1;
        for (int inner = 0; inner < 3 * static_cast<int>(n) + 10; ++inner) {
            Eigen::VectorXd z = solve_passive();
            bool feasible = true;
            for (Eigen::Index i = 0; i < n; ++i)
                if (passive[static_cast<std::size_t>(i)] && z(i) <= 0.0) feasible = false;
            if (feasible) {
                x = z;
                break;
            }
            double alpha = 1.0;
            for (Eigen::Index i = 0; i < n; ++i)
                if (passive[static_cast<std::size_t>(i)] && z(i) <= 0.0) alpha = std::min(alpha, x(i) / (x(i) - z(i)));
            x += alpha * (z - x);
            for (Eigen::Index i = 0; i < n; ++i)
                if (passive[static_cast<std::size_t>(i)] && std::abs(x(i)) <= tol) {
                    passive[static_cast<std::size_t>(i)] = 0;
                    x(i) = 0.0;
                }
        }
    }
    return x;
}

} // namespace gmf
