// Command-line surface: simulation, estimation, goodness-of-fit testing, and
// the bundled COVID-Twitter replication pipeline.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grpurn/gof.hpp"
#include "grpurn/io.hpp"
#include "grpurn/montecarlo.hpp"
#include "grpurn/schedule.hpp"
#include "grpurn/specfun.hpp"
#include "grpurn/urn.hpp"

namespace fs = std::filesystem;
using namespace grpurn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitBadFit = 3;
constexpr int kExitNumerical = 4;

std::string fmt7(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.7g", v);
    return buf;
}

[[noreturn]] void fail_numerical(const std::string& type, const std::string& message) {
    std::cerr << "{\"error\": {\"type\": \"" << type << "\", \"message\": \"" << message
              << "\"}}\n";
    std::exit(kExitNumerical);
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("GRP_URN_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 20240801ULL;
}

int worker_threads() {
    if (const char* env = std::getenv("GRP_URN_THREADS")) {
        return static_cast<int>(std::strtol(env, nullptr, 10));
    }
    return 0;  // library picks
}

std::vector<double> parse_vector(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

std::vector<std::int64_t> parse_horizons(const std::string& text) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoll(item));
    }
    return out;
}

ScheduleSpec load_schedule_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "cannot open schedule file: " << path << "\n";
        std::exit(kExitUsage);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return schedule_spec_from_json(buf.str());
    } catch (const ParseError& e) {
        std::cerr << e.what() << "\n";
        std::exit(kExitUsage);
    }
}

DfConvention parse_df(const std::string& text) {
    if (text == "L") return DfConvention::L;
    if (text == "L-1") return DfConvention::LMinus1;
    std::cerr << "--df must be L or L-1\n";
    std::exit(kExitUsage);
}

struct PStarChoice {
    std::string mode;       // uniform | pooled | benchmark
    std::string benchmark;  // label, benchmark mode only
};

PStarChoice parse_pstar(const std::string& text) {
    if (text == "pooled" || text == "uniform") return {text, ""};
    if (text.rfind("benchmark:", 0) == 0) return {"benchmark", text.substr(10)};
    std::cerr << "--pstar must be pooled, uniform, or benchmark:<label>\n";
    std::exit(kExitUsage);
}

// Applies the requested reference probabilities; benchmark mode drops the
// benchmark cluster from the returned list.
std::vector<ClusterSample> apply_p_star(std::vector<ClusterSample> clusters,
                                        const PStarChoice& choice) {
    if (choice.mode == "uniform") {
        build_p_star_uniform(clusters);
        return clusters;
    }
    if (choice.mode == "pooled") {
        build_p_star_pooled(clusters);
        return clusters;
    }
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        if (clusters[i].label == choice.benchmark) {
            return build_p_star_benchmark(clusters, i);
        }
    }
    std::cerr << "benchmark cluster \"" << choice.benchmark << "\" not found\n";
    std::exit(kExitUsage);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_numerical("io", "cannot write " + path.string());
    out << content;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const std::string& schedule_path, const std::string& b0_text,
                 const std::string& B0_text, const std::string& horizons_text, int replicas,
                 std::optional<std::uint64_t> seed, const std::string& out_dir) {
    const ScheduleSpec spec = load_schedule_spec(schedule_path);
    const auto b0 = parse_vector(b0_text);
    const auto B0 = parse_vector(B0_text);
    const auto horizons = parse_horizons(horizons_text);
    if (b0.empty() || B0.size() != b0.size()) {
        std::cerr << "--b0 and --B0 must be comma-separated lists of equal length\n";
        return kExitUsage;
    }
    if (horizons.empty()) {
        std::cerr << "--horizons must name at least one checkpoint\n";
        return kExitUsage;
    }

    try {
        ExperimentConfig config{UrnParams::make(b0, B0), from_spec(spec), horizons, replicas,
                                seed.value_or(default_seed()), RecordFlags{true, true}};
        const auto summaries = run_experiment(config, worker_threads());

        fs::create_directories(out_dir);
        std::string manifest = "{\n  \"schedule\": " + to_json(spec) + ",\n";
        manifest += "  \"seed\": " + std::to_string(config.base_seed) + ",\n";
        manifest += "  \"replicas\": " + std::to_string(replicas) + ",\n";
        manifest += "  \"horizons\": [";
        for (std::size_t i = 0; i < horizons.size(); ++i) {
            manifest += (i ? ", " : "") + std::to_string(horizons[i]);
        }
        manifest += "],\n  \"reports\": [\n";

        for (std::size_t h = 0; h < horizons.size(); ++h) {
            CltReport report;
            if (spec.variant == ScheduleVariant::Example1) {
                report = clt_report_same_rate(summaries[h], config.params, horizons[h], spec);
            } else if (spec.variant == ScheduleVariant::Example2) {
                report = clt_report_different_rates(summaries[h], config.params, horizons[h], spec);
            } else {
                // No CLT constants for this regime; emit summaries only.
                const std::string csv_name = "horizon_" + std::to_string(horizons[h]) + ".csv";
                write_file(fs::path(out_dir) / csv_name, replica_csv(summaries[h]));
                manifest += "    {\"horizon\": " + std::to_string(horizons[h]) +
                            ", \"report\": null}";
                manifest += (h + 1 < horizons.size()) ? ",\n" : "\n";
                continue;
            }
            const std::string csv_name = "horizon_" + std::to_string(horizons[h]) + ".csv";
            write_file(fs::path(out_dir) / csv_name, replica_csv(summaries[h], report));
            write_file(fs::path(out_dir) / ("clt_" + std::to_string(horizons[h]) + ".json"),
                       clt_report_to_json(report));
            manifest += "    {\"horizon\": " + std::to_string(horizons[h]) +
                        ", \"lambda_theory\": " + fmt7(report.lambda_theory) +
                        ", \"lambda_hat\": " + fmt7(report.lambda_hat) + "}";
            manifest += (h + 1 < horizons.size()) ? ",\n" : "\n";
        }
        manifest += "  ]\n}\n";
        write_file(fs::path(out_dir) / "manifest.json", manifest);
        std::cout << "wrote " << out_dir << "\n";
        return kExitOk;
    } catch (const InvalidParams& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        fail_numerical("simulate", e.what());
    }
}

// Every-m-th-row thinning, the independence device for daily panels.
std::vector<ClusterSample> maybe_thin(std::vector<ClusterSample> clusters, std::int64_t stride,
                                      std::int64_t offset) {
    if (stride <= 1 && offset == 0) return clusters;
    return thin_clusters(clusters, std::max<std::int64_t>(stride, 1), offset);
}

// ---------------------------------------------------------------- estimate

int cmd_estimate(const std::string& data_path, const PStarChoice& pstar,
                 DfConvention convention, std::int64_t thin, std::int64_t thin_offset) {
    try {
        auto clusters =
            apply_p_star(maybe_thin(read_contingency(data_path), thin, thin_offset), pstar);
        std::vector<double> t;
        std::vector<std::int64_t> sizes;
        for (const auto& cluster : clusters) {
            t.push_back(t_statistic(cluster));
            sizes.push_back(cluster.size);
        }
        const auto result = mle_estimate(t, sizes, clusters.front().k(), convention);
        std::cout << mle_result_to_json(result);
        return result.mle_case == MleCase::BoundaryBadFit ? kExitBadFit : kExitOk;
    } catch (const ParseError& e) {
        fail_numerical("parse", e.what());
    } catch (const DegenerateClusters& e) {
        fail_numerical("degenerate_clusters", e.what());
    } catch (const Error& e) {
        fail_numerical("estimate", e.what());
    }
}

// ---------------------------------------------------------------- gof

void print_gof_table(const std::vector<ClusterSample>& clusters, double eta) {
    // Table mirror for k = 2: observed, expected, chi-squared and corrected
    // chi-squared cells per cluster.
    if (clusters.front().k() != 2) {
        std::printf("%-12s %10s %12s %12s %12s\n", "label", "N", "T", "Q", "p");
        return;
    }
    std::printf("%-12s %9s %9s %11s %11s %9s %9s %8s %8s\n", "label", "obs_1", "obs_2", "exp_1",
                "exp_2", "chi2_1", "chi2_2", "chi2c_1", "chi2c_2");
    for (const auto& c : clusters) {
        const double n = static_cast<double>(c.size);
        const double e1 = n * c.p_star[0];
        const double e2 = n * c.p_star[1];
        const double x1 = (static_cast<double>(c.counts[0]) - e1) *
                          (static_cast<double>(c.counts[0]) - e1) / e1;
        const double x2 = (static_cast<double>(c.counts[1]) - e2) *
                          (static_cast<double>(c.counts[1]) - e2) / e2;
        const double scale = std::pow(n, eta);
        std::printf("%-12s %9lld %9lld %11.2f %11.2f %9.2f %9.2f %8.2f %8.2f\n", c.label.c_str(),
                    static_cast<long long>(c.counts[0]), static_cast<long long>(c.counts[1]), e1,
                    e2, x1, x2, x1 / scale, x2 / scale);
    }
}

int cmd_gof(const std::string& data_path, const std::string& eta_text,
            const std::string& lambda_text, const PStarChoice& pstar, DfConvention convention,
            const std::string& json_out, std::int64_t thin, std::int64_t thin_offset) {
    try {
        auto clusters =
            apply_p_star(maybe_thin(read_contingency(data_path), thin, thin_offset), pstar);
        std::vector<double> t;
        std::vector<std::int64_t> sizes;
        for (const auto& cluster : clusters) {
            t.push_back(t_statistic(cluster));
            sizes.push_back(cluster.size);
        }

        double eta = 0.0, lambda = 0.0;
        bool fit_requested = (eta_text == "fit") || (lambda_text == "fit");
        std::optional<MleResult> mle;
        if (fit_requested) {
            mle = mle_estimate(t, sizes, clusters.front().k(), convention);
            if (mle->mle_case == MleCase::BoundaryBadFit) {
                std::cout << mle_result_to_json(*mle);
                std::cerr << "model misfit: eta at the boundary, test not performed\n";
                return kExitBadFit;
            }
        }
        eta = (eta_text == "fit") ? mle->eta_hat : std::stod(eta_text);
        lambda = (lambda_text == "fit") ? mle->lambda_hat : std::stod(lambda_text);

        const auto result = aggregate_test(clusters, eta, lambda, convention);
        print_gof_table(clusters, eta);
        std::printf("aggregate_stat=%s aggregate_p=%s (Gamma shape %s, lambda %s)\n",
                    fmt7(result.aggregate_stat).c_str(), fmt7(result.aggregate_p).c_str(),
                    fmt7(result.df_shape).c_str(), fmt7(lambda).c_str());
        const std::string json = gof_result_to_json(result);
        if (!json_out.empty()) {
            write_file(json_out, json);
        } else {
            std::cout << json;
        }
        return kExitOk;
    } catch (const ParseError& e) {
        fail_numerical("parse", e.what());
    } catch (const DegenerateClusters& e) {
        fail_numerical("degenerate_clusters", e.what());
    } catch (const Error& e) {
        fail_numerical("gof", e.what());
    }
}

// ---------------------------------------------------------------- weights

int cmd_weights(const std::string& schedule_path, std::int64_t n, const std::string& out_path) {
    const ScheduleSpec spec = load_schedule_spec(schedule_path);
    try {
        const auto profile = weight_profile(from_spec(spec), n);
        std::string csv = "h,f\n";
        for (std::size_t i = 0; i < profile.weights.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, profile.weights[i]);
            csv += buf;
        }
        if (!out_path.empty()) {
            write_file(out_path, csv);
        } else {
            std::cout << csv;
        }
        std::cout << "h_star=" << profile.h_star
                  << " monotone_tail=" << (profile.monotone_tail_found ? "yes" : "no") << "\n";
        return kExitOk;
    } catch (const Error& e) {
        fail_numerical("weights", e.what());
    }
}

// ------------------------------------------------------- replicate-covid

struct Check {
    std::string name;
    double got;
    double want;
    double tol;
    bool ok() const { return std::fabs(got - want) <= tol; }
};

int cmd_replicate_covid(const std::string& data_path, const std::string& out_dir) {
    try {
        auto clusters = data_path.empty() ? parse_contingency(covid_table3_csv(), "bundled")
                                          : read_contingency(data_path);
        build_p_star_pooled(clusters);
        const int k = clusters.front().k();
        const auto L = static_cast<std::int64_t>(clusters.size());

        std::vector<double> t;
        std::vector<std::int64_t> sizes;
        for (const auto& cluster : clusters) {
            t.push_back(t_statistic(cluster));
            sizes.push_back(cluster.size);
        }

        const auto classical = classical_chi2(clusters, true);
        const auto mle_lm1 = mle_estimate(t, sizes, k, DfConvention::LMinus1);
        const auto mle_l = mle_estimate(t, sizes, k, DfConvention::L);
        const auto gof =
            aggregate_test(clusters, mle_lm1.eta_hat, mle_lm1.lambda_hat, DfConvention::LMinus1);
        const double threshold =
            gamma_quantile(GammaDist(0.5 * (k - 1), 0.5 / mle_lm1.lambda_hat), 0.95);

        std::cout << "clusters=" << L << " N=" << [&] {
            std::int64_t n = 0;
            for (auto s : sizes) n += s;
            return n;
        }() << " pooled_p1=" << fmt7(clusters.front().p_star[0]) << "\n";
        std::cout << "classical_chi2=" << fmt7(classical.statistic) << " df=" << classical.df
                  << " p=" << fmt7(classical.p_value) << "\n";
        std::cout << "eta_hat=" << fmt7(mle_lm1.eta_hat) << " (df convention L-1; with L: "
                  << fmt7(mle_l.eta_hat) << ")\n";
        std::cout << "lambda_hat=" << fmt7(mle_lm1.lambda_hat) << " (df convention L-1; with L: "
                  << fmt7(mle_l.lambda_hat) << ")\n";
        std::cout << "aggregate_stat=" << fmt7(gof.aggregate_stat)
                  << " aggregate_p=" << fmt7(gof.aggregate_p) << " (Gamma shape "
                  << fmt7(gof.df_shape) << ")\n";
        std::cout << "threshold_95=" << fmt7(threshold) << "\n";

        print_gof_table(clusters, mle_lm1.eta_hat);

        std::cout << "Q_series:\n";
        std::vector<double> q_series;
        for (const auto& row : gof.per_cluster) {
            q_series.push_back(row.q);
            std::cout << "  " << row.label << " Q=" << fmt7(row.q)
                      << (row.q > threshold ? "  > threshold" : "") << "\n";
        }

        const auto bp = box_pierce(q_series, 10);
        const auto lb = ljung_box(q_series, 10);
        std::cout << "autocorrelation (Box-Pierce / Ljung-Box):\n";
        for (int h = 0; h < 10; ++h) {
            std::cout << "  lag=" << (h + 1) << " BP=" << fmt7(bp[h].statistic)
                      << " p=" << fmt7(bp[h].p_value) << "  LB=" << fmt7(lb[h].statistic)
                      << " p=" << fmt7(lb[h].p_value) << "\n";
        }

        // profile log-likelihood on a 200-point eta grid (for the curve plot)
        std::string curve = "eta,profile_loglik\n";
        {
            const double a = 0.5 * (k - 1);
            double sum_ln = 0.0;
            for (auto s : sizes) sum_ln += std::log(static_cast<double>(s));
            for (int i = 0; i < 200; ++i) {
                const double eta = static_cast<double>(i) / 199.0;
                double s = 0.0;
                for (std::size_t l = 0; l < t.size(); ++l) {
                    s += t[l] / std::pow(static_cast<double>(sizes[l]), eta);
                }
                const double ll =
                    -a * static_cast<double>(L - 1) * std::log(s) - a * eta * sum_ln;
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.6f,%.10g\n", eta, ll);
                curve += buf;
            }
        }
        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            write_file(fs::path(out_dir) / "likelihood_profile.csv", curve);
            write_file(fs::path(out_dir) / "mle.json", mle_result_to_json(mle_lm1));
            write_file(fs::path(out_dir) / "gof.json", gof_result_to_json(gof));
        } else {
            std::cout << "likelihood_profile:\n" << curve;
        }

        // Reference values for this dataset; any miss is a nonzero exit.
        std::vector<Check> checks = {
            {"classical_chi2", classical.statistic, 5507.803, 0.05},
            {"eta_hat", mle_lm1.eta_hat, 0.4363572, 1e-4},
            {"lambda_hat", mle_lm1.lambda_hat, 2.728098, 1e-3},
            {"aggregate_p", gof.aggregate_p, 0.4579297, 1e-3},
            {"threshold_95", threshold, 10.48, 0.01},
        };
        const double bp_expected[10] = {3.454, 3.624, 4.209, 4.640, 5.065,
                                        7.103, 8.660, 8.812, 10.360, 12.852};
        const double bp_p_expected[10] = {0.063, 0.163, 0.240, 0.326, 0.408,
                                          0.311, 0.278, 0.358, 0.322, 0.232};
        for (int h = 0; h < 10; ++h) {
            checks.push_back({"box_pierce_stat_lag" + std::to_string(h + 1), bp[h].statistic,
                              bp_expected[h], 0.1});
            checks.push_back({"box_pierce_p_lag" + std::to_string(h + 1), bp[h].p_value,
                              bp_p_expected[h], 0.01});
        }

        bool all_ok = true;
        for (const auto& c : checks) {
            std::cout << (c.ok() ? "[ok]   " : "[MISS] ") << c.name << " got=" << fmt7(c.got)
                      << " want=" << fmt7(c.want) << " tol=" << fmt7(c.tol) << "\n";
            all_ok = all_ok && c.ok();
        }
        return all_ok ? kExitOk : 1;
    } catch (const ParseError& e) {
        fail_numerical("parse", e.what());
    } catch (const Error& e) {
        fail_numerical("replicate-covid", e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized rescaled Polya urn: simulation and clustered chi-squared testing"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run seeded replica experiments");
    std::string sim_schedule, sim_b0, sim_B0, sim_horizons = "1000", sim_out = "experiment_out";
    int sim_replicas = 100;
    std::optional<std::uint64_t> sim_seed;
    simulate->add_option("--schedule", sim_schedule, "schedule spec JSON file")->required();
    simulate->add_option("--b0", sim_b0, "intrinsic composition, comma-separated")->required();
    simulate->add_option("--B0", sim_B0, "initial rescalable composition")->required();
    simulate->add_option("--horizons", sim_horizons, "checkpoint horizons, comma-separated");
    simulate->add_option("--replicas", sim_replicas, "number of replicas");
    simulate->add_option("--seed", sim_seed, "base seed (default GRP_URN_SEED or 20240801)");
    simulate->add_option("--out", sim_out, "output directory");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "maximum-likelihood (eta, lambda)");
    std::string est_data, est_pstar = "pooled", est_df = "L-1";
    std::int64_t est_thin = 1, est_thin_offset = 0;
    estimate->add_option("--data", est_data, "contingency CSV")->required();
    estimate->add_option("--pstar", est_pstar, "pooled | uniform | benchmark:<label>");
    estimate->add_option("--df", est_df, "likelihood cluster-count divisor: L | L-1");
    estimate->add_option("--thin", est_thin, "keep every m-th cluster");
    estimate->add_option("--thin-offset", est_thin_offset, "first kept cluster index");

    // gof
    auto* gof = app.add_subcommand("gof", "correlation-corrected chi-squared test");
    std::string gof_data, gof_eta = "fit", gof_lambda = "fit", gof_pstar = "pooled",
                gof_df = "L-1", gof_json;
    gof->add_option("--data", gof_data, "contingency CSV")->required();
    gof->add_option("--eta", gof_eta, "cluster-size exponent, or 'fit'");
    gof->add_option("--lambda", gof_lambda, "variance inflation, or 'fit'");
    gof->add_option("--pstar", gof_pstar, "pooled | uniform | benchmark:<label>");
    gof->add_option("--df", gof_df, "L | L-1");
    gof->add_option("--json", gof_json, "write GofResult JSON here instead of stdout");
    std::int64_t gof_thin = 1, gof_thin_offset = 0;
    gof->add_option("--thin", gof_thin, "keep every m-th cluster");
    gof->add_option("--thin-offset", gof_thin_offset, "first kept cluster index");

    // weights
    auto* weights = app.add_subcommand("weights", "observation weight profile f(h,n)");
    std::string w_schedule, w_out;
    std::int64_t w_n = 100;
    weights->add_option("--schedule", w_schedule, "schedule spec JSON file")->required();
    weights->add_option("--n", w_n, "profile length");
    weights->add_option("--out", w_out, "CSV output path (default stdout)");

    // replicate-covid
    auto* covid = app.add_subcommand("replicate-covid",
                                     "full pipeline on the bundled COVID-Twitter counts");
    std::string covid_data, covid_out;
    covid->add_option("--data", covid_data, "override the bundled contingency CSV");
    covid->add_option("--out", covid_out, "directory for curve/JSON outputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(sim_schedule, sim_b0, sim_B0, sim_horizons, sim_replicas,
                                sim_seed, sim_out);
        }
        if (estimate->parsed()) {
            return cmd_estimate(est_data, parse_pstar(est_pstar), parse_df(est_df), est_thin,
                                est_thin_offset);
        }
        if (gof->parsed()) {
            return cmd_gof(gof_data, gof_eta, gof_lambda, parse_pstar(gof_pstar),
                           parse_df(gof_df), gof_json, gof_thin, gof_thin_offset);
        }
        if (weights->parsed()) {
            return cmd_weights(w_schedule, w_n, w_out);
        }
        if (covid->parsed()) {
            return cmd_replicate_covid(covid_data, covid_out);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "bad numeric argument: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::out_of_range& e) {
        std::cerr << "numeric argument out of range: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
