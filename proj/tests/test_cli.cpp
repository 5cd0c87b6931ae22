#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "grpurn/io.hpp"

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

// Runs the CLI binary, capturing stdout (stderr goes to a sidecar file the
// caller can read when needed).
RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(GRPURN_CLI_PATH) + " " + args + " 2>/tmp/grpurn_stderr";
    RunResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        result.out.append(buf.data(), n);
    }
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

// Pulls `key=value` off the CLI's stdout.
double extract(const std::string& out, const std::string& key) {
    const auto pos = out.find(key + "=");
    REQUIRE(pos != std::string::npos);
    return std::stod(out.substr(pos + key.size() + 1));
}

const std::string kFixture = std::string(GRPURN_DATA_DIR) + "/covid_table3.csv";

}  // namespace

TEST_CASE("replicate-covid passes its built-in reference checks and is deterministic") {
    const auto first = run_cli("replicate-covid");
    CHECK(first.exit_code == 0);
    CHECK(std::fabs(extract(first.out, "eta_hat") - 0.4363572) <= 1e-4);
    CHECK(std::fabs(extract(first.out, "lambda_hat") - 2.728098) <= 1e-3);
    CHECK(std::fabs(extract(first.out, "classical_chi2") - 5507.803) <= 0.05);
    CHECK(std::fabs(extract(first.out, "aggregate_p") - 0.4579297) <= 1e-3);
    CHECK(std::fabs(extract(first.out, "threshold_95") - 10.48) <= 0.01);
    CHECK(first.out.find("[MISS]") == std::string::npos);

    const auto second = run_cli("replicate-covid");
    CHECK(second.out == first.out);  // no RNG anywhere in this pipeline
}

TEST_CASE("estimate emits MleResult JSON and exit code 0 on an interior fit") {
    const auto res = run_cli("estimate --data " + kFixture + " --pstar pooled --df L-1");
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("\"case\": \"interior\"") != std::string::npos);
    CHECK(res.out.find("\"eta_hat\": 0.4363572") != std::string::npos);
    CHECK(res.out.find("\"lambda_hat_L\"") != std::string::npos);
    CHECK(res.out.find("\"lambda_hat_L_minus_1\"") != std::string::npos);
}

TEST_CASE("estimate exits 3 on a boundary bad fit") {
    // t grows faster than N: Cov(lnN, T/N) > 0
    const std::string path = "/tmp/grpurn_badfit.csv";
    std::ofstream(path) << "label,count_1,count_2\na,6,4\nb,900,100\n";
    const auto res = run_cli("estimate --data " + path + " --pstar uniform --df L");
    CHECK(res.exit_code == 3);
    CHECK(res.out.find("boundary_bad_fit") != std::string::npos);
}

TEST_CASE("estimate exits 4 with a structured error for equal cluster sizes") {
    const std::string path = "/tmp/grpurn_equal.csv";
    std::ofstream(path) << "label,count_1,count_2\na,60,40\nb,45,55\n";
    const auto res = run_cli("estimate --data " + path + " --pstar uniform --df L");
    CHECK(res.exit_code == 4);
    const std::string err = slurp("/tmp/grpurn_stderr");
    CHECK(err.find("\"error\"") != std::string::npos);
    CHECK(err.find("degenerate_clusters") != std::string::npos);
}

TEST_CASE("gof with classical parameters reports an overwhelming rejection") {
    const auto res =
        run_cli("gof --data " + kFixture + " --eta 0 --lambda 1 --pstar pooled --df L-1");
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("aggregate_stat=5507.803") != std::string::npos);
    const auto p = extract(res.out, "aggregate_p");
    CHECK(p < 1e-300);  // significant at any level
}

TEST_CASE("gof with fitted parameters accepts the null on the bundled data") {
    const auto res = run_cli("gof --data " + kFixture +
                             " --eta fit --lambda fit --pstar pooled --df L-1 "
                             "--json /tmp/grpurn_gof.json");
    CHECK(res.exit_code == 0);
    const auto p = extract(res.out, "aggregate_p");
    CHECK(std::fabs(p - 0.4579297) <= 1e-3);
    const std::string json = slurp("/tmp/grpurn_gof.json");
    CHECK(json.find("\"aggregate_p\"") != std::string::npos);
    CHECK(json.find("2020-04-20") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run_cli("frobnicate").exit_code == 2);
    CHECK(run_cli("estimate").exit_code == 2);  // missing --data
    CHECK(run_cli("gof --data " + kFixture + " --df L-2").exit_code == 2);
    CHECK(run_cli("estimate --data " + kFixture + " --pstar sideways").exit_code == 2);
    CHECK(run_cli("gof --data " + kFixture + " --eta bogus --lambda 1").exit_code == 2);
    CHECK(run_cli("simulate --schedule /tmp/grpurn_sp.json --b0 1,huh --B0 1,1 "
                  "--horizons 10 --replicas 2 --out /tmp/x")
              .exit_code == 2);
}

TEST_CASE("thinning drops clusters before estimation") {
    // 21 fixture rows thinned 3:1 leaves 7 clusters: aggregate shape L(k-1)/2 = 3.5
    const auto res =
        run_cli("gof --data " + kFixture + " --eta 0 --lambda 1 --pstar pooled --df L --thin 3");
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("Gamma shape 3.5") != std::string::npos);
}

TEST_CASE("simulate rejects an unknown schedule variant with the valid list") {
    const std::string path = "/tmp/grpurn_badvariant.json";
    std::ofstream(path) << "{\"variant\": \"mystery\", \"params\": {}}";
    const auto res = run_cli("simulate --schedule " + path +
                             " --b0 1,1 --B0 0,0 --horizons 10 --replicas 2 --out /tmp/sim_bad");
    CHECK(res.exit_code == 2);
    const std::string err = slurp("/tmp/grpurn_stderr");
    CHECK(err.find("standard_polya") != std::string::npos);  // lists the valid variants
    CHECK(err.find("example2") != std::string::npos);
}

TEST_CASE("simulate writes manifest, per-horizon CSV, and a CLT report") {
    const std::string spec_path = "/tmp/grpurn_ex1.json";
    std::ofstream(spec_path)
        << "{\"variant\": \"example1\", \"params\": {\"c\": 1, \"eps\": 0.5, "
           "\"b0_norm\": 1, \"burnin_clamp\": true}}";
    const auto res = run_cli("simulate --schedule " + spec_path +
                             " --b0 0.1666666666666667,0.3333333333333333,0.5 "
                             "--B0 0.1666666666666667,0.3333333333333333,0.5 "
                             "--horizons 100,1000 --replicas 50 --seed 7 --out /tmp/grpurn_sim");
    CHECK(res.exit_code == 0);
    const std::string manifest = slurp("/tmp/grpurn_sim/manifest.json");
    CHECK(manifest.find("\"seed\": 7") != std::string::npos);
    CHECK(manifest.find("\"lambda_theory\": 4") != std::string::npos);
    const std::string csv = slurp("/tmp/grpurn_sim/horizon_1000.csv");
    CHECK(csv.rfind("replica,component,xi_bar,psi_bar,theta_bar,standardized,remainder", 0) == 0);
    const std::string clt = slurp("/tmp/grpurn_sim/clt_1000.json");
    CHECK(clt.find("\"lambda_hat\"") != std::string::npos);

    // mismatched B0 for the example1 constraint is a usage error
    const auto bad = run_cli("simulate --schedule " + spec_path +
                             " --b0 0.1666666666666667,0.3333333333333333,0.5 --B0 0,0,0 "
                             "--horizons 100 --replicas 5 --out /tmp/grpurn_sim2");
    CHECK(bad.exit_code == 2);
}

TEST_CASE("gof with --eta fit exits 3 when the fit hits the boundary") {
    const std::string path = "/tmp/grpurn_badfit2.csv";
    std::ofstream(path) << "label,count_1,count_2\na,6,4\nb,900,100\n";
    const auto res = run_cli("gof --data " + path + " --eta fit --lambda fit --pstar uniform --df L");
    CHECK(res.exit_code == 3);
    CHECK(res.out.find("boundary_bad_fit") != std::string::npos);
}

TEST_CASE("GRP_URN_SEED supplies the default seed") {
    const std::string spec_path = "/tmp/grpurn_sp_seed.json";
    std::ofstream(spec_path) << "{\"variant\": \"standard_polya\", \"params\": {\"alpha\": 1}}";
    const std::string cmd = "GRP_URN_SEED=5 " + std::string(GRPURN_CLI_PATH) +
                            " simulate --schedule " + spec_path +
                            " --b0 1,1 --B0 1,1 --horizons 50 --replicas 3"
                            " --out /tmp/grpurn_sim_env 2>/dev/null";
    REQUIRE(std::system(cmd.c_str()) == 0);
    CHECK(slurp("/tmp/grpurn_sim_env/manifest.json").find("\"seed\": 5") != std::string::npos);
}

TEST_CASE("weights subcommand emits the profile and h*") {
    const std::string spec_path = "/tmp/grpurn_sp.json";
    std::ofstream(spec_path) << "{\"variant\": \"standard_polya\", \"params\": {\"alpha\": 2}}";
    const auto res = run_cli("weights --schedule " + spec_path + " --n 5");
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("h,f\n") != std::string::npos);
    CHECK(res.out.find("h_star=1") != std::string::npos);
    CHECK(res.out.find("5,2") != std::string::npos);
}
