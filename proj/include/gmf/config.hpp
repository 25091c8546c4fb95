#pragma once

#include "gmf/filter.hpp"
#include "gmf/minimax.hpp"

#include <json.hpp>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gmf {

/// Density description as given in the config; materialized on a grid with `build_density`.
struct DensitySpec {
    std::string name;
    std::string type; ///< constant | rational | tabulated
    std::vector<Eigen::MatrixXcd> matrices; ///< value (constant), numerator (rational) or node values (tabulated)
    std::vector<cd> denominator;
    double scale = 1.0;
    bool increment_domain = false; ///< divide by |chi|^2/|beta|^2 after construction
};

struct ClassConfig {
    DensityClassSpec spec;
    std::string anchor; ///< density name, empty if unused
};

struct MinimaxConfig {
    ClassConfig f_class;
    std::optional<ClassConfig> g_class; ///< absent for the semi-uncertain problem
    std::string f_init = "f";
    std::string g_init = "g";
    int basis_size = 64;
    int max_iter = 500;
    int samples = 100;
    std::uint64_t seed = 7;
};

struct RunConfig {
    IncrementSpec increment;
    int grid_size = 4096;
    int L = 256;
    int K = 0; ///< Fourier coefficient range; 0 picks one from the window
    std::vector<int> W_obs{32, 64, 128, 256};
    std::map<std::string, DensitySpec> densities;
    std::string signal = "f";
    std::string noise = "g";
    FunctionalCoefficients functional;
    std::string task = "report";
    std::optional<MinimaxConfig> minimax;
    int demo_length = 1000;
    std::uint64_t seed = 1;
    std::string output_path;
    std::string output_format = "json";
    nlohmann::json source; ///< parsed document, used for the digest

    const DensitySpec& density(const std::string& name) const;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

MatrixDensityGrid build_density(const DensitySpec& spec, const FrequencyGrid& grid, const IncrementSpec& increment);

/// Stable 64-bit digest of the canonical config text (FNV-1a).
std::string config_digest(const nlohmann::json& doc);

} // namespace gmf
