#include "gmf/config.hpp"

#include "gmf/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gmf {

using nlohmann::json;

namespace {

const json& need(const json& obj, const std::string& key, const std::string& path)
{
    if (!obj.is_object() || !obj.contains(key)) throw ConfigError("missing key '" + path + key + "'");
    return obj.at(key);
}

template <typename T>
T value_of(const json& v, const std::string& where)
{
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key '" + where + "' has the wrong type (" + std::string(v.type_name()) + ")");
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, const std::string& path, T fallback)
{
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return value_of<T>(obj.at(key), path + key);
}

cd parse_complex(const json& v, const std::string& where)
{
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError("key '" + where + "' must be a number or a [re, im] pair");
}

Eigen::MatrixXcd parse_matrix(const json& v, const std::string& where)
{
    if (v.is_number()) {
        Eigen::MatrixXcd m(1, 1);
        m(0, 0) = parse_complex(v, where);
        return m;
    }
    if (!v.is_array() || v.empty() || !v[0].is_array())
        throw ConfigError("key '" + where + "' must be a number or a list of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    const auto cols = static_cast<Eigen::Index>(v[0].size());
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = v[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw ConfigError("key '" + where + "' has rows of unequal length");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = parse_complex(row[static_cast<std::size_t>(c)], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
    return m;
}

Eigen::MatrixXd parse_real_matrix(const json& v, const std::string& where)
{
    const Eigen::MatrixXcd m = parse_matrix(v, where);
    if (m.imag().cwiseAbs().maxCoeff() > 0.0) throw ConfigError("key '" + where + "' must be real");
    return m.real();
}

Eigen::VectorXd parse_real_vector(const json& v, const std::string& where)
{
    if (v.is_number()) return Eigen::VectorXd::Constant(1, v.get<double>());
    if (!v.is_array()) throw ConfigError("key '" + where + "' must be a list of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = value_of<double>(v[i], where);
    return out;
}

std::vector<int> int_list(const json& obj, const std::string& key, const std::string& path)
{
    const json& v = need(obj, key, path);
    if (v.is_number_integer()) return {v.get<int>()};
    return value_of<std::vector<int>>(v, path + key);
}

DensitySpec parse_density(const std::string& name, const json& v)
{
    const std::string path = "densities." + name + ".";
    DensitySpec d;
    d.name = name;
    d.type = value_of<std::string>(need(v, "type", path), path + "type");
    d.scale = get_or<double>(v, "scale", path, 1.0);
    d.increment_domain = get_or<bool>(v, "increment_domain", path, false);
    if (d.type == "constant") {
        d.matrices.push_back(parse_matrix(need(v, "value", path), path + "value"));
    } else if (d.type == "rational") {
        const json& num = need(v, "numerator", path);
        if (!num.is_array() || num.empty()) throw ConfigError("key '" + path + "numerator' must be a nonempty list");
        for (std::size_t k = 0; k < num.size(); ++k)
            d.matrices.push_back(parse_matrix(num[k], path + "numerator[" + std::to_string(k) + "]"));
        if (v.contains("denominator")) {
            const json& den = v.at("denominator");
            if (!den.is_array() || den.empty()) throw ConfigError("key '" + path + "denominator' must be a nonempty list");
            for (std::size_t k = 0; k < den.size(); ++k)
                d.denominator.push_back(parse_complex(den[k], path + "denominator[" + std::to_string(k) + "]"));
        } else {
            d.denominator.push_back(1.0);
        }
    } else if (d.type == "tabulated") {
        const json& vals = need(v, "values", path);
        if (!vals.is_array()) throw ConfigError("key '" + path + "values' must be a list of node values");
        for (std::size_t k = 0; k < vals.size(); ++k)
            d.matrices.push_back(parse_matrix(vals[k], path + "values[" + std::to_string(k) + "]"));
    } else {
        throw ConfigError("key '" + path + "type' must be constant, rational or tabulated (got '" + d.type + "')");
    }
    return d;
}

ClassConfig parse_class(const json& v, const std::string& path)
{
    ClassConfig c;
    c.spec.family = parse_family(value_of<std::string>(need(v, "family", path), path + "family"));
    if (v.contains("P")) c.spec.P = parse_real_matrix(v.at("P"), path + "P");
    c.spec.p = get_or<double>(v, "p", path, 0.0);
    if (v.contains("p_k")) c.spec.p_k = parse_real_vector(v.at("p_k"), path + "p_k");
    if (v.contains("B")) c.spec.B = parse_real_matrix(v.at("B"), path + "B");
    c.spec.delta = get_or<double>(v, "delta", path, 0.0);
    if (v.contains("delta_k")) c.spec.delta_k = parse_real_vector(v.at("delta_k"), path + "delta_k");
    if (v.contains("delta_ij")) c.spec.delta_ij = parse_real_matrix(v.at("delta_ij"), path + "delta_ij");
    c.spec.eps = get_or<double>(v, "eps", path, 0.0);
    c.anchor = get_or<std::string>(v, "anchor", path, "");
    if (!is_moment_class(c.spec.family) && c.anchor.empty())
        throw ConfigError("missing key '" + path + "anchor'");
    return c;
}

} // namespace

const DensitySpec& RunConfig::density(const std::string& name) const
{
    auto it = densities.find(name);
    if (it == densities.end()) throw ConfigError("missing key 'densities." + name + "'");
    return it->second;
}

RunConfig parse_config(const json& doc)
{
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig cfg;
    cfg.source = doc;

    const json& inc = need(doc, "increment", "");
    cfg.increment.mu = int_list(inc, "mu", "increment.");
    cfg.increment.s = int_list(inc, "s", "increment.");
    cfg.increment.d = int_list(inc, "d", "increment.");
    cfg.increment.T = get_or<int>(inc, "T", "increment.", 1);
    try {
        cfg.increment.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("increment: ") + e.what());
    }

    if (doc.contains("grid")) cfg.grid_size = get_or<int>(doc.at("grid"), "size", "grid.", cfg.grid_size);
    if (doc.contains("truncation")) {
        const json& tr = doc.at("truncation");
        cfg.L = get_or<int>(tr, "L", "truncation.", cfg.L);
        cfg.K = get_or<int>(tr, "K", "truncation.", cfg.K);
        if (tr.contains("W_obs")) cfg.W_obs = value_of<std::vector<int>>(tr.at("W_obs"), "truncation.W_obs");
    }
    cfg.task = get_or<std::string>(doc, "task", "", cfg.task);

    if (doc.contains("densities")) {
        const json& ds = doc.at("densities");
        if (!ds.is_object()) throw ConfigError("key 'densities' must be a map of named densities");
        for (const auto& [name, v] : ds.items()) cfg.densities[name] = parse_density(name, v);
    }
    if (doc.contains("model")) {
        cfg.signal = get_or<std::string>(doc.at("model"), "signal", "model.", cfg.signal);
        cfg.noise = get_or<std::string>(doc.at("model"), "noise", "model.", cfg.noise);
    }

    if (doc.contains("functional")) {
        const json& fn = doc.at("functional");
        if (fn.contains("weights")) {
            const std::vector<double> w = value_of<std::vector<double>>(fn.at("weights"), "functional.weights");
            if (w.empty()) throw ConfigError("key 'functional.weights' must not be empty");
            cfg.functional = FunctionalCoefficients::from_real(lift_functional(w, cfg.increment.T));
        } else if (fn.contains("vectors")) {
            const json& vs = fn.at("vectors");
            if (!vs.is_array() || vs.empty()) throw ConfigError("key 'functional.vectors' must be a nonempty list");
            for (std::size_t k = 0; k < vs.size(); ++k) {
                const std::string where = "functional.vectors[" + std::to_string(k) + "]";
                if (!vs[k].is_array() || static_cast<int>(vs[k].size()) != cfg.increment.T)
                    throw ConfigError("key '" + where + "' must hold T = " + std::to_string(cfg.increment.T) + " entries");
                Eigen::VectorXcd v(cfg.increment.T);
                for (int i = 0; i < cfg.increment.T; ++i) v(i) = parse_complex(vs[k][static_cast<std::size_t>(i)], where);
                cfg.functional.a.push_back(v);
            }
        } else {
            throw ConfigError("missing key 'functional.weights' (or 'functional.vectors')");
        }
    }

    if (doc.contains("minimax")) {
        const json& mm = doc.at("minimax");
        MinimaxConfig m;
        m.f_class = parse_class(need(mm, "f_class", "minimax."), "minimax.f_class.");
        if (mm.contains("g_class")) m.g_class = parse_class(mm.at("g_class"), "minimax.g_class.");
        m.f_init = get_or<std::string>(mm, "f_init", "minimax.", cfg.signal);
        m.g_init = get_or<std::string>(mm, "g_init", "minimax.", cfg.noise);
        m.basis_size = get_or<int>(mm, "basis_size", "minimax.", m.basis_size);
        m.max_iter = get_or<int>(mm, "max_iter", "minimax.", m.max_iter);
        m.samples = get_or<int>(mm, "samples", "minimax.", m.samples);
        m.seed = get_or<std::uint64_t>(mm, "seed", "minimax.", m.seed);
        cfg.minimax = m;
    }
    if (doc.contains("demo")) {
        cfg.demo_length = get_or<int>(doc.at("demo"), "length", "demo.", cfg.demo_length);
        cfg.seed = get_or<std::uint64_t>(doc.at("demo"), "seed", "demo.", cfg.seed);
    }
    if (doc.contains("output")) {
        cfg.output_path = get_or<std::string>(doc.at("output"), "path", "output.", "");
        cfg.output_format = get_or<std::string>(doc.at("output"), "format", "output.", cfg.output_format);
    }
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

MatrixDensityGrid build_density(const DensitySpec& spec, const FrequencyGrid& grid, const IncrementSpec& increment)
{
    MatrixDensityGrid out;
    const int T = increment.T;
    for (const auto& m : spec.matrices)
        if (m.rows() != T || m.cols() != T)
            throw ConfigError("density '" + spec.name + "' holds matrices that are not " + std::to_string(T) + "x"
                              + std::to_string(T));
    if (spec.type == "constant") {
        out = constant_density(grid, spec.scale * spec.matrices.front(), spec.name);
        out.check_valid();
    } else if (spec.type == "rational") {
        out = rational_density(grid, spec.matrices, spec.denominator, spec.scale, spec.name);
    } else {
        if (static_cast<int>(spec.matrices.size()) != grid.size())
            throw ConfigError("density '" + spec.name + "' tabulates " + std::to_string(spec.matrices.size())
                              + " nodes but the grid has " + std::to_string(grid.size()));
        std::vector<Eigen::MatrixXcd> vals;
        for (const auto& m : spec.matrices) vals.push_back(spec.scale * m);
        try {
            out = tabulated_density(grid, std::move(vals), spec.name);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (spec.increment_domain) {
        out = from_increment_density(out, increment);
        out.label = spec.name;
    }
    return out;
}

std::string config_digest(const json& doc)
{
    const std::string text = doc.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace gmf
