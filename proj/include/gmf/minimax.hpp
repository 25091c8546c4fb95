#pragma once

#include "gmf/filter.hpp"
#include "gmf/grid.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace gmf {

enum class ClassFamily {
    D0_1, D0_2, D0_3, D0_4,
    D1d_1, D1d_2, D1d_3, D1d_4,
    De_1, De_2, De_3, De_4,
};

std::string to_string(ClassFamily family);
ClassFamily parse_family(const std::string& name);
/// 1..4 within the family group.
int family_index(ClassFamily family);
bool is_moment_class(ClassFamily family);
bool is_noise_class(ClassFamily family);
bool is_contaminated_class(ClassFamily family);

/// Admissible density set. Moment classes (D0_k) and contaminated classes (De_k) constrain f,
/// deviation balls (D1d_k) constrain g around the anchor g1.
struct DensityClassSpec {
    ClassFamily family = ClassFamily::D0_2;
    Eigen::MatrixXd P;          ///< D0_1, De_1
    double p = 0.0;             ///< D0_2, D0_4, De_2, De_4
    Eigen::VectorXd p_k;        ///< D0_3, De_3
    Eigen::MatrixXd B;          ///< weight matrix of D0_4, D1d_4, De_4
    double delta = 0.0;         ///< D1d_2, D1d_4
    Eigen::VectorXd delta_k;    ///< D1d_3
    Eigen::MatrixXd delta_ij;   ///< D1d_1
    double eps = 0.0;           ///< De_k
    std::optional<MatrixDensityGrid> anchor; ///< g1 for D1d_k, f1 for De_k

    void validate(int T) const;
};

enum class Membership { inside, boundary, outside };
std::string to_string(Membership m);

struct MembershipReport {
    Membership status = Membership::inside;
    double violation = 0.0; ///< largest relative constraint violation
    std::vector<std::string> details;
};

/// Direct quadrature check of the class constraints; equalities within `tol` relative.
MembershipReport class_membership(const MatrixDensityGrid& density, const DensityClassSpec& cls,
                                  const IncrementSpec& spec, double tol = 1e-8);

/// Feasibility restoration: congruence or scalar rescaling of the moment, shrinkage of the deviation
/// from g1, or an eigenvalue floor at (1 - eps) f1 followed by rescaling of the free part.
MatrixDensityGrid project_onto_class(const MatrixDensityGrid& density, const DensityClassSpec& cls,
                                     const IncrementSpec& spec);

/// Nonnegative trigonometric bumps (Jackson kernels) centred at `size` equispaced offset nodes,
/// combined in reflection-symmetric pairs; each pair has mean 1 and the pairs sum to size / 2.
struct BumpBasis {
    FrequencyGrid grid;
    int size = 0;
    std::vector<Eigen::VectorXd> pairs;

    BumpBasis() = default;
    BumpBasis(const FrequencyGrid& grid, int size);
    int count() const { return static_cast<int>(pairs.size()); }
};

/// Densities base + scale(lambda) sum_j b_j(lambda) R Z_j R with real symmetric PSD Z_j,
/// restricted to the class constraints.
class ClassParameterization {
public:
    enum class Kind { EqSum, EqTrace, EqDiag, LeTrace, LeDiag, LeAbs };

    ClassParameterization(const DensityClassSpec& cls, const IncrementSpec& spec, const BumpBasis& basis);

    int dim() const { return T_; }
    int count() const { return basis_->count(); }
    Kind kind() const { return kind_; }
    /// Exact Euclidean projection available (and hence the linear maximization for the gap).
    bool spectral() const;

    MatrixDensityGrid density(const std::vector<Eigen::MatrixXd>& Z) const;
    /// Partial derivatives for a density kernel K: dObjective = (1/N) sum Re Tr(K d density).
    std::vector<Eigen::MatrixXd> gradient(const std::vector<Eigen::MatrixXcd>& kernel) const;
    void project(std::vector<Eigen::MatrixXd>& Z) const;
    /// max over the feasible set of <G, Z' - Z>; NaN when no exact oracle is available.
    double gap(const std::vector<Eigen::MatrixXd>& G, const std::vector<Eigen::MatrixXd>& Z) const;
    /// Parameters approximating a given density (sampled at the bump centres, then projected).
    std::vector<Eigen::MatrixXd> fit(const MatrixDensityGrid& density) const;
    /// Random feasible parameters.
    std::vector<Eigen::MatrixXd> sample(std::mt19937_64& rng) const;

private:
    void project_spectral(std::vector<Eigen::MatrixXd>& Z) const;
    void project_linear(std::vector<Eigen::MatrixXd>& Z) const;

    const BumpBasis* basis_ = nullptr;
    int T_ = 1;
    Kind kind_ = Kind::EqTrace;
    Eigen::MatrixXd target_matrix_;
    double target_ = 0.0;
    Eigen::VectorXd target_vec_;
    Eigen::MatrixXd R_;
    MatrixDensityGrid base_;
    Eigen::VectorXd scale_;
};

struct MinimaxOptions {
    int basis_size = 64;
    int max_iter = 500;
    double rel_improvement = 1e-8;
    double gap_tol = 1e-10; ///< relative to Delta
    FilterOptions filter;
};

struct SubgradientReport {
    std::string orientation; ///< "e^{-i lambda}" or "e^{i lambda}", whichever fits better
    std::vector<std::pair<std::string, double>> residuals;   ///< sup-norm residual per equation, relative to scale
    std::vector<std::pair<std::string, double>> multipliers; ///< fitted Lagrange multipliers
    std::vector<std::pair<std::string, double>> alternative_residuals; ///< the other orientation
    double scale = 0.0;
    bool signs_ok = true;
    std::vector<std::string> notes;
};

struct SaddleReport {
    int samples = 0;
    std::uint64_t seed = 0;
    double right_margin_min = 0.0; ///< min over samples of Delta0 - Delta(h0; f, g)
    double left_margin_min = 0.0;  ///< min over samples of Delta(h; f0, g0) - Delta0
    std::vector<double> right_margins;
    std::vector<double> left_margins;
};

struct MinimaxSolution {
    MatrixDensityGrid f0, g0;
    std::vector<Eigen::VectorXcd> h0;
    double delta0 = 0.0;
    int iterations = 0;
    int improving_steps = 0;
    double gap = 0.0; ///< Frank-Wolfe gap over the search family (NaN if unavailable)
    bool converged = false;
    std::vector<double> history;
    std::vector<Eigen::MatrixXd> f_params, g_params;
    bool semi_uncertain = false;
    SubgradientReport subgradient;
    SaddleReport saddle;
    std::vector<std::string> warnings;
};

/// Least favorable pair over D_f x D_g by projected ascent of Delta(f, g). `warm` seeds the parameters.
MinimaxSolution solve_least_favorable(const DensityClassSpec& f_class, const DensityClassSpec& g_class,
                                      const FunctionalCoefficients& a, const IncrementSpec& spec,
                                      const MatrixDensityGrid& f_init, const MatrixDensityGrid& g_init,
                                      const MinimaxOptions& opts = {}, const MinimaxSolution* warm = nullptr);

/// Least favorable f over a contaminated class with g known.
MinimaxSolution solve_semi_uncertain(const DensityClassSpec& f_class, const MatrixDensityGrid& g,
                                     const FunctionalCoefficients& a, const IncrementSpec& spec,
                                     const MatrixDensityGrid& f_init, const MinimaxOptions& opts = {},
                                     const MinimaxSolution* warm = nullptr);

/// Delta(h0; f, g) for the characteristic h0 optimal at (f0, g0), as an integral linear in (f, g).
class CrossFunctional {
public:
    CrossFunctional(const FilterFactors& factors0, const FilterSolution& sol0, const FunctionalCoefficients& a);

    double operator()(const MatrixDensityGrid& f, const MatrixDensityGrid& g) const;
    /// conj(h) h^T and conj(A - beta h)(A - beta h)^T per node.
    const std::vector<Eigen::MatrixXcd>& kernel_f() const { return kf_; }
    const std::vector<Eigen::MatrixXcd>& kernel_g() const { return kg_; }
    const std::vector<Eigen::VectorXcd>& h_f() const { return hf_; }
    const std::vector<Eigen::VectorXcd>& h_g() const { return hg_; }

private:
    TransferGrid transfer_;
    std::vector<Eigen::MatrixXcd> psi_;
    std::vector<Eigen::MatrixXcd> theta_;
    std::vector<Eigen::VectorXcd> hf_, hg_;
    std::vector<Eigen::MatrixXcd> kf_, kg_;
};

double delta_cross(const FilterFactors& factors0, const FilterSolution& sol0, const FunctionalCoefficients& a,
                   const MatrixDensityGrid& f, const MatrixDensityGrid& g);

/// Fits the multipliers of the applicable equations and reports residuals; `g_class` is null for
/// the semi-uncertain problem.
SubgradientReport check_subgradient_equations(const MinimaxSolution& sol, const DensityClassSpec& f_class,
                                              const DensityClassSpec* g_class, const FunctionalCoefficients& a,
                                              const IncrementSpec& spec, const MinimaxOptions& opts = {});

/// Right inequality over `samples` feasible draws from the search family and the left inequality over
/// characteristics optimal for randomly perturbed functionals. Sample i uses a generator seeded from
/// (seed, i).
SaddleReport check_saddle_point(const MinimaxSolution& sol, const DensityClassSpec& f_class,
                                const DensityClassSpec* g_class, const FunctionalCoefficients& a,
                                const IncrementSpec& spec, int samples, std::uint64_t seed,
                                const MinimaxOptions& opts = {});

/// min ||A x - b|| subject to x >= 0 (Lawson-Hanson).
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

} // namespace gmf
