#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

fs::path scratch_dir()
{
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("gmf_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Result run(const std::string& args)
{
    const fs::path out = scratch_dir() / "stdout.txt", err = scratch_dir() / "stderr.txt";
    const std::string cmd = std::string(GMF_BINARY) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string write_config(const std::string& name, const json& cfg)
{
    const fs::path p = scratch_dir() / name;
    std::ofstream(p) << cfg.dump(2);
    return p.string();
}

std::string config(const std::string& name) { return std::string(CONFIG_DIR) + "/" + name; }

json benchmark_json()
{
    return json::parse(slurp(config("benchmark.json")));
}

} // namespace

TEST_CASE("expand prints the second difference")
{
    json cfg = benchmark_json();
    cfg["increment"]["d"] = {2};
    const Result r = run("expand --config " + write_config("d2.json", cfg));
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["e_gamma"] == json({1, -2, 1}));
    CHECK(doc["n_gamma"] == 2);
}

TEST_CASE("filter on the benchmark agrees with the Fourier formulation")
{
    const Result r = run("filter --config " + config("benchmark.json"));
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    const double a = doc["delta_fact"], b = doc["delta_fourier"];
    CHECK(std::abs(a - b) < 1e-6 * a);
    CHECK(doc["fourier_check"]["tolerance"] == 1e-6);
}

TEST_CASE("missing density is reported by key")
{
    json cfg = benchmark_json();
    cfg["densities"].erase("g");
    const Result r = run("report --config " + write_config("nog.json", cfg));
    CHECK(r.code == 2);
    const json err = json::parse(r.err);
    CHECK(err["error"]["kind"] == "config");
    CHECK(err["error"]["message"].get<std::string>().find("densities.g") != std::string::npos);
}

TEST_CASE("command line errors exit with the config code")
{
    CHECK(run("filter").code == 2);
    CHECK(run("filter --config /nonexistent/file.json").code == 2);
    CHECK(run("bogus --config " + config("benchmark.json")).code == 2);
}

TEST_CASE("numerical failure has its own exit code")
{
    json cfg = benchmark_json();
    cfg["densities"]["f"] = {{"type", "constant"}, {"value", 0}};
    cfg["densities"]["g"] = {{"type", "constant"}, {"value", 0}};
    const Result r = run("filter --config " + write_config("zero.json", cfg));
    CHECK(r.code == 3);
    CHECK(json::parse(r.err)["error"]["kind"] == "numerical");
}

TEST_CASE("infeasible class has its own exit code")
{
    json cfg = benchmark_json();
    cfg["grid"]["size"] = 256;
    cfg["truncation"]["L"] = 64;
    cfg["densities"]["f1"] = {{"type", "constant"}, {"value", 1}};
    cfg["minimax"] = {{"f_class", {{"family", "De_2"}, {"p", 0.1}, {"eps", 0.2}, {"anchor", "f1"}}}};
    const Result r = run("minimax --config " + write_config("infeasible.json", cfg));
    CHECK(r.code == 4);
}

TEST_CASE("demo paths are reproducible")
{
    const std::string c = config("benchmark.json");
    const Result a = run("demo --config " + c + " --length 50 --seed 3");
    const Result b = run("demo --config " + c + " --length 50 --seed 3");
    const Result d = run("demo --config " + c + " --length 50 --seed 4");
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(json::parse(a.out)["values"] != json::parse(d.out)["values"]);
    const Result empty = run("demo --config " + c + " --length 0");
    REQUIRE(empty.code == 0);
    CHECK(json::parse(empty.out)["values"].empty());
}

TEST_CASE("long demo path matches the model variance")
{
    const Result r = run("demo --config " + config("benchmark.json") + " --length 100000 --seed 1");
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    const double emp = doc["empirical_covariance"][0][0], model = doc["model_covariance"][0][0];
    CHECK(std::abs(emp - model) < 0.05 * model);
}

TEST_CASE("report formats and output file")
{
    const fs::path out = scratch_dir() / "h.csv";
    const Result r = run("filter --config " + config("benchmark.json") + " --grid-size 256 --truncation 64 --format csv --output "
                         + out.string());
    REQUIRE(r.code == 0);
    const std::string csv = slurp(out);
    CHECK(csv.rfind("lambda,re_0,im_0\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 257);
    const Result t = run("expand --config " + config("seasonal_t2.json") + " --format text");
    REQUIRE(t.code == 0);
    CHECK(t.out.find("n_gamma") != std::string::npos);
}

TEST_CASE("full report on the periodic example")
{
    const Result r = run("report --config " + config("seasonal_t2.json"));
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["n_gamma"] == 3);
    CHECK(doc["fourier_check"]["delta_relative_difference"].get<double>() <= 1e-6);
    double prev = INFINITY;
    for (const auto& e : doc["delta_oracle"]) {
        CHECK(e["mse"].get<double>() <= prev);
        prev = e["mse"];
    }
}

TEST_CASE("minimax from the command line")
{
    const Result r = run("minimax --config " + config("minimax_scalar.json") + " --grid-size 512 --truncation 128");
    REQUIRE(r.code == 0);
    const json mm = json::parse(r.out)["minimax"];
    CHECK(mm["delta0"].get<double>() > 0.0);
    CHECK(mm["self_consistency"].get<double>() <= mm["self_consistency_tolerance"].get<double>());
    CHECK(mm["saddle"]["right_margin_min"].get<double>() >= -1e-6);
    CHECK(mm["saddle"]["samples"] == 100);
}
