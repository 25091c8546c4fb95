#include "gmf/report.hpp"

#include "gmf/errors.hpp"
#include "gmf/oracle.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>

namespace gmf {

using nlohmann::json;

namespace {

/// Runs one stage and tags its failures with the stage name.
template <typename Fn>
auto stage(const std::string& module, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const ConfigError& e) {
        throw StageError(module, "config", e.what());
    } catch (const InfeasibleClassError& e) {
        throw StageError(module, "infeasible", e.what());
    } catch (const NumericalError& e) {
        throw StageError(module, "numerical", e.what());
    } catch (const std::invalid_argument& e) {
        throw StageError(module, "config", e.what());
    } catch (const std::exception& e) {
        throw StageError(module, "numerical", e.what());
    }
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json residual_list(const std::vector<std::pair<std::string, double>>& items)
{
    json out = json::object();
    for (const auto& [name, v] : items) out[name] = finite_or_null(v);
    return out;
}

json membership_json(const MembershipReport& m)
{
    return {{"status", to_string(m.status)}, {"violation", m.violation}, {"tolerance", 1e-8}, {"details", m.details}};
}

bool wants(const std::string& task, std::initializer_list<const char*> names)
{
    for (const char* n : names)
        if (task == n) return true;
    return false;
}

void add_warnings(json& doc, const std::vector<std::string>& list)
{
    for (const auto& w : list) {
        bool seen = false;
        for (const auto& x : doc["warnings"])
            if (x == w) seen = true;
        if (!seen) doc["warnings"].push_back(w);
    }
}

int fourier_range(const RunConfig& cfg, int W)
{
    if (cfg.K > 0) return cfg.K;
    return std::min(cfg.grid_size / 2 - 1, W + cfg.functional.N() + 2 * cfg.increment.n_gamma() + 16);
}

} // namespace

RunReport run(const RunConfig& cfg)
{
    RunReport rep;
    json& doc = rep.doc;
    doc["config_digest"] = config_digest(cfg.source);
    doc["task"] = cfg.task;
    doc["warnings"] = json::array();
    if (!wants(cfg.task, {"expand", "factorize", "filter", "oracle", "minimax", "report"}))
        throw StageError("cli", "config", "unknown task '" + cfg.task + "'");

    const IncrementPolynomial poly = stage("increment", [&] { return expand_increment_operator(cfg.increment); });
    doc["increment"] = {{"mu", cfg.increment.mu}, {"s", cfg.increment.s}, {"d", cfg.increment.d}, {"T", cfg.increment.T}};
    doc["n_gamma"] = poly.degree();
    doc["e_gamma"] = poly.coeffs;
    if (cfg.task == "expand") return rep;

    const FrequencyGrid grid = stage("grid", [&] { return FrequencyGrid(cfg.grid_size); });
    const MatrixDensityGrid f = stage("grid", [&] { return build_density(cfg.density(cfg.signal), grid, cfg.increment); });
    const MatrixDensityGrid g = stage("grid", [&] { return build_density(cfg.density(cfg.noise), grid, cfg.increment); });
    doc["grid"] = {{"size", grid.size()}};

    if (wants(cfg.task, {"report", "factorize", "filter", "oracle"})) {
        json mini;
        stage("grid", [&] {
            std::vector<int> sizes;
            for (int n : {grid.size() / 4, grid.size() / 2, grid.size()})
                if (n >= 2) sizes.push_back(n);
            const DensitySpec& fs = cfg.density(cfg.signal);
            const DensitySpec& gs = cfg.density(cfg.noise);
            if (fs.type == "tabulated" || gs.type == "tabulated") sizes = {grid.size()};
            try {
                using Fn = std::function<MatrixDensityGrid(const FrequencyGrid&)>;
                const Fn fa = [&](const FrequencyGrid& gr) { return build_density(fs, gr, cfg.increment); };
                const Fn ga = [&](const FrequencyGrid& gr) { return build_density(gs, gr, cfg.increment); };
                const MinimalityReport m = minimality_value(fa, ga, cfg.increment, sizes);
                mini = {{"grid_sizes", m.grid_sizes}, {"values", m.values}, {"minimal", !m.suspect}};
                if (m.suspect) doc["warnings"].push_back("minimality integral grows under grid refinement");
            } catch (const NumericalError& e) {
                mini = {{"minimal", false}, {"error", e.what()}};
                doc["warnings"].push_back(std::string("minimality: ") + e.what());
            }
            return 0;
        });
        doc["minimality"] = mini;
    }

    FilterOptions fopts;
    fopts.fact.L = cfg.L;
    if (wants(cfg.task, {"report", "factorize", "filter", "oracle"})) {
        const FilterFactors fac = stage("factorization", [&] { return prepare_factors(f, g, cfg.increment, fopts); });
        auto diag = [](const SpectralFactor& s) {
            return json{{"method", s.diag.method},
                        {"iterations", s.diag.iterations},
                        {"residual", s.diag.residual},
                        {"residual_truncated", s.diag.residual_truncated},
                        {"tail_energy", s.diag.tail_energy},
                        {"residual_tolerance", 1e-8}};
        };
        doc["factorization"] = {{"L", cfg.L},
                                {"theta", diag(fac.theta)},
                                {"phi", diag(fac.phi)},
                                {"inverse_identity_residual", inverse_identity_residual(fac.psi, fac.theta.series)},
                                {"inverse_identity_tolerance", 1e-10}};
        add_warnings(doc, fac.warnings);

        if (wants(cfg.task, {"report", "filter", "oracle"})) {
            if (cfg.functional.a.empty()) throw StageError("filter", "config", "missing key 'functional'");
            const FilterSolution sol = stage("filter", [&] { return filter(fac, cfg.functional); });
            doc["delta_fact"] = sol.delta;
            doc["filter"] = {{"term_signal", sol.term_signal},
                             {"term_correction", sol.term_correction},
                             {"truncation_estimate", sol.truncation_estimate},
                             {"L", sol.L}};
            add_warnings(doc, sol.warnings);
            for (int j = 0; j < grid.size(); ++j) {
                std::vector<double> row{grid.node(j)};
                for (Eigen::Index i = 0; i < sol.h[j].size(); ++i) {
                    row.push_back(sol.h[j](i).real());
                    row.push_back(sol.h[j](i).imag());
                }
                rep.h_table.push_back(std::move(row));
            }

            if (wants(cfg.task, {"report", "filter", "oracle"})) {
                stage("oracle", [&] {
                    const int W = default_window(cfg.functional, cfg.increment);
                    const FourierOperatorSet set = fourier_coefficients(f, g, cfg.increment, fourier_range(cfg, W));
                    const FourierSolution fsol = delta_fourier(set, cfg.functional, poly, W);
                    const std::vector<Eigen::VectorXcd> hf = h_fourier(fsol, cfg.functional, f, g, cfg.increment);
                    double dh = 0.0, hs = 0.0;
                    for (int j = 0; j < grid.size(); ++j) {
                        dh = std::max(dh, (hf[j] - sol.h[j]).norm());
                        hs = std::max(hs, sol.h[j].norm());
                    }
                    doc["delta_fourier"] = fsol.delta;
                    const double rel = std::abs(sol.delta - fsol.delta) / std::max(sol.delta, 1e-12);
                    doc["fourier_check"] = {{"window", fsol.W},
                                            {"K", set.K},
                                            {"condition_bound", fsol.condition_bound},
                                            {"delta_relative_difference", rel},
                                            {"h_relative_difference", hs > 0.0 ? dh / hs : dh},
                                            {"tolerance", 1e-6}};
                    if (rel > 1e-6)
                        doc["warnings"].push_back("delta_fact and delta_fourier differ by " + std::to_string(rel)
                                                  + " (relative), above 1e-6");
                    return 0;
                });
            }
            if (wants(cfg.task, {"report", "oracle"})) {
                stage("oracle", [&] {
                    const ProjectionResult pr = projection_oracle(f, g, cfg.increment, cfg.functional, cfg.W_obs);
                    json list = json::array();
                    for (std::size_t i = 0; i < pr.mse.size(); ++i) list.push_back({{"W_obs", pr.W_obs[i]}, {"mse", pr.mse[i]}});
                    doc["delta_oracle"] = list;
                    doc["oracle_variance"] = pr.variance;
                    if (!pr.mse.empty()) {
                        const double rel = std::abs(pr.mse.back() - sol.delta) / std::max(sol.delta, 1e-12);
                        doc["oracle_relative_difference"] = rel;
                        doc["oracle_tolerance"] = 1e-3;
                    }
                    return 0;
                });
            }
        }
    }

    if (wants(cfg.task, {"report", "minimax"}) && cfg.minimax) {
        stage("minimax", [&] {
            const MinimaxConfig& mc = *cfg.minimax;
            auto with_anchor = [&](const ClassConfig& c) {
                DensityClassSpec s = c.spec;
                if (!c.anchor.empty()) s.anchor = build_density(cfg.density(c.anchor), grid, cfg.increment);
                return s;
            };
            const DensityClassSpec fc = with_anchor(mc.f_class);
            const MatrixDensityGrid f_init = build_density(cfg.density(mc.f_init), grid, cfg.increment);
            MinimaxOptions mo;
            mo.basis_size = mc.basis_size;
            mo.max_iter = mc.max_iter;
            mo.filter = fopts;
            if (cfg.functional.a.empty()) throw ConfigError("missing key 'functional'");
            MinimaxSolution sol;
            std::optional<DensityClassSpec> gc;
            if (mc.g_class) {
                gc = with_anchor(*mc.g_class);
                const MatrixDensityGrid g_init = build_density(cfg.density(mc.g_init), grid, cfg.increment);
                sol = solve_least_favorable(fc, *gc, cfg.functional, cfg.increment, f_init, g_init, mo);
            } else {
                sol = solve_semi_uncertain(fc, g, cfg.functional, cfg.increment, f_init, mo);
            }
            const FilterFactors fac0 = prepare_factors(sol.f0, sol.g0, cfg.increment, fopts);
            const FilterSolution s0 = filter(fac0, cfg.functional);
            const double cross = delta_cross(fac0, s0, cfg.functional, sol.f0, sol.g0);
            sol.saddle = check_saddle_point(sol, fc, gc ? &*gc : nullptr, cfg.functional, cfg.increment, mc.samples,
                                            mc.seed, mo);
            json mm = {{"f_class", to_string(fc.family)},
                       {"g_class", gc ? json(to_string(gc->family)) : json(nullptr)},
                       {"delta0", sol.delta0},
                       {"iterations", sol.iterations},
                       {"improving_steps", sol.improving_steps},
                       {"converged", sol.converged},
                       {"gap", finite_or_null(sol.gap)},
                       {"gap_tolerance", mo.gap_tol},
                       {"self_consistency", std::abs(cross - s0.delta) / std::max(s0.delta, 1e-300)},
                       {"self_consistency_tolerance", 1e-8},
                       {"membership_f", membership_json(class_membership(sol.f0, fc, cfg.increment))},
                       {"orientation", sol.subgradient.orientation},
                       {"residuals", residual_list(sol.subgradient.residuals)},
                       {"alternative_residuals", residual_list(sol.subgradient.alternative_residuals)},
                       {"multipliers", residual_list(sol.subgradient.multipliers)},
                       {"signs_ok", sol.subgradient.signs_ok},
                       {"saddle",
                        {{"samples", sol.saddle.samples},
                         {"seed", sol.saddle.seed},
                         {"right_margin_min", sol.saddle.right_margin_min},
                         {"right_margin_tolerance", -1e-6},
                         {"left_margin_min", sol.saddle.left_margin_min},
                         {"left_check", "advisory"}}}};
            if (gc) mm["membership_g"] = membership_json(class_membership(sol.g0, *gc, cfg.increment));
            doc["minimax"] = mm;
            add_warnings(doc, sol.warnings);
            rep.h_table.clear();
            for (int j = 0; j < grid.size(); ++j) {
                std::vector<double> row{grid.node(j)};
                for (Eigen::Index i = 0; i < sol.h0[j].size(); ++i) {
                    row.push_back(sol.h0[j](i).real());
                    row.push_back(sol.h0[j](i).imag());
                }
                rep.h_table.push_back(std::move(row));
            }
            return 0;
        });
    } else if (cfg.task == "minimax") {
        throw StageError("minimax", "config", "missing key 'minimax'");
    }
    return rep;
}

std::string RunReport::to_json() const { return doc.dump(2) + "\n"; }

std::string RunReport::to_csv() const
{
    std::ostringstream os;
    os << std::setprecision(17);
    const std::size_t coords = h_table.empty() ? 0 : (h_table.front().size() - 1) / 2;
    os << "lambda";
    for (std::size_t i = 0; i < coords; ++i) os << ",re_" << i << ",im_" << i;
    os << "\n";
    for (const auto& row : h_table) {
        for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << row[k];
        os << "\n";
    }
    return os.str();
}

std::string RunReport::to_text() const
{
    std::ostringstream os;
    os << std::setprecision(12);
    os << "task " << doc.value("task", "") << "  config " << doc.value("config_digest", "") << "\n";
    if (doc.contains("n_gamma")) os << "n_gamma " << doc["n_gamma"] << "  e_gamma " << doc["e_gamma"].dump() << "\n";
    if (doc.contains("minimality")) os << "minimality " << doc["minimality"].dump() << "\n";
    if (doc.contains("factorization")) {
        const json& f = doc["factorization"];
        os << "theta " << f["theta"]["method"].get<std::string>() << " iterations " << f["theta"]["iterations"]
           << " residual " << f["theta"]["residual"].get<double>() << "\n";
    }
    for (const char* key : {"delta_fact", "delta_fourier"})
        if (doc.contains(key)) os << key << " " << doc[key].get<double>() << "\n";
    if (doc.contains("delta_oracle"))
        for (const auto& e : doc["delta_oracle"]) os << "delta_oracle W=" << e["W_obs"] << " " << e["mse"].get<double>() << "\n";
    if (doc.contains("minimax")) {
        const json& m = doc["minimax"];
        os << "minimax delta0 " << m["delta0"].get<double>() << " iterations " << m["iterations"] << " gap " << m["gap"]
           << "\n  saddle right " << m["saddle"]["right_margin_min"].get<double>() << " left "
           << m["saddle"]["left_margin_min"].get<double>() << "\n  multipliers " << m["multipliers"].dump()
           << "\n  residuals " << m["residuals"].dump() << "\n";
    }
    for (const auto& w : doc["warnings"]) os << "warning: " << w.get<std::string>() << "\n";
    return os.str();
}

DemoSample demo_sample(const RunConfig& cfg, std::uint64_t seed, int length)
{
    DemoSample out;
    out.T = cfg.increment.T;
    out.empirical_covariance = Eigen::MatrixXd::Zero(out.T, out.T);
    out.model_covariance = Eigen::MatrixXd::Zero(out.T, out.T);
    const FrequencyGrid grid(cfg.grid_size);
    const MatrixDensityGrid f = build_density(cfg.density(cfg.signal), grid, cfg.increment);
    const MatrixDensityGrid g = build_density(cfg.density(cfg.noise), grid, cfg.increment);
    FactorizationOptions fo;
    fo.L = cfg.L;
    const SpectralFactor theta = weighted_observed_factor(f, g, cfg.increment, fo);
    std::vector<Eigen::MatrixXd> coeffs;
    for (const auto& c : theta.series.coeffs) {
        if (c.imag().norm() > 1e-12 * std::max(1.0, c.norm()))
            throw ConfigError("demo: factor coefficients are complex; only real models can be sampled");
        coeffs.push_back(c.real());
        out.model_covariance += c.real() * c.real().transpose();
    }
    if (length <= 0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const int q = static_cast<int>(coeffs.size());
    std::vector<Eigen::VectorXd> noise(static_cast<std::size_t>(length + q - 1), Eigen::VectorXd(out.T));
    for (auto& e : noise)
        for (int i = 0; i < out.T; ++i) e(i) = normal(rng);
    for (int m = 0; m < length; ++m) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(out.T);
        for (int k = 0; k < q; ++k) x.noalias() += coeffs[static_cast<std::size_t>(k)] * noise[static_cast<std::size_t>(m + q - 1 - k)];
        out.empirical_covariance += x * x.transpose();
        out.values.push_back(std::move(x));
    }
    out.empirical_covariance /= length;
    return out;
}

std::string DemoSample::to_csv() const
{
    std::ostringstream os;
    os << std::setprecision(17) << "m";
    for (int i = 0; i < T; ++i) os << ",x_" << i;
    os << "\n";
    for (std::size_t m = 0; m < values.size(); ++m) {
        os << m;
        for (int i = 0; i < T; ++i) os << "," << values[m](i);
        os << "\n";
    }
    return os.str();
}

json DemoSample::to_json() const
{
    auto mat = [](const Eigen::MatrixXd& m) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(m.cols()));
            for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
            rows.push_back(row);
        }
        return rows;
    };
    json vals = json::array();
    for (const auto& v : values) vals.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    return {{"length", values.size()},
            {"empirical_covariance", mat(empirical_covariance)},
            {"model_covariance", mat(model_covariance)},
            {"values", vals}};
}

} // namespace gmf
