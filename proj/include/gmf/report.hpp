#pragma once

#include "gmf/config.hpp"

#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmf {

struct RunReport {
    nlohmann::json doc;
    /// lambda, then re/im per coordinate of h
    std::vector<std::vector<double>> h_table;

    std::string to_json() const;
    std::string to_text() const;
    std::string to_csv() const;
};

/// Failure inside one pipeline stage; `kind` is config, numerical or infeasible.
class StageError : public std::runtime_error {
public:
    StageError(std::string module, std::string kind, const std::string& message)
        : std::runtime_error(message), module(std::move(module)), kind(std::move(kind))
    {
    }
    std::string module;
    std::string kind;
    int exit_code() const { return kind == "config" ? 2 : kind == "infeasible" ? 4 : 3; }
};

RunReport run(const RunConfig& config);

struct DemoSample {
    int T = 1;
    std::vector<Eigen::VectorXd> values;
    Eigen::MatrixXd empirical_covariance;
    Eigen::MatrixXd model_covariance;

    std::string to_csv() const;
    nlohmann::json to_json() const;
};

/// Gaussian path of the observed increment process: a moving average of white noise with the
/// causal factor coefficients of the weighted observed density.
DemoSample demo_sample(const RunConfig& config, std::uint64_t seed, int length);

} // namespace gmf
