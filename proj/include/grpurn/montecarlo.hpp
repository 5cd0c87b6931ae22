#pragma once

#include <cstdint>
#include <vector>

#include "grpurn/schedule.hpp"
#include "grpurn/urn.hpp"

namespace grpurn {

struct RecordFlags {
    // Accumulate (1/N) sum DeltaM_n per component (martingale-identity checks).
    bool delta_m_sums = false;
    // Per-component variance of psi over the last decile of each trajectory
    // (needed by random_limit_check).
    bool late_psi_variance = false;
};

struct ExperimentConfig {
    UrnParams params;
    Schedule schedule;
    std::vector<std::int64_t> horizons;  // strictly increasing checkpoints
    int replicas = 1;
    std::uint64_t base_seed = 0;
    RecordFlags record;
    // Guard against configs that would run for days; max horizon * replicas.
    std::int64_t step_budget = 8'000'000'000;
};

// Everything the experiments need from one trajectory at one horizon.
struct ReplicaSummary {
    std::vector<double> xi_bar;     // empirical mean of the draws
    std::vector<double> psi_bar;    // (1/N) sum of psi_{n-1}
    std::vector<double> theta_bar;  // psi_bar - p0
    std::vector<double> psi_final;  // psi_N
    double chi2_stat = 0.0;         // sum_i (O_i - N p0_i)^2 / (N p0_i)
    std::vector<double> dm_sum_over_n;  // present iff record.delta_m_sums
    std::vector<double> late_psi_var;   // present iff record.late_psi_variance
};

// summaries[h][r] = replica r observed at horizons[h]. Horizons are
// checkpoints within a single trajectory per replica, not restarts. Replica r
// always uses stream seed base_seed XOR splitmix64(r), so results are
// bit-identical between the serial and OpenMP paths and across runs.
std::vector<std::vector<ReplicaSummary>> run_experiment(const ExperimentConfig& config,
                                                        int threads = 0);
// Serial reference path, kept for testing the parallel kernel against.
std::vector<std::vector<ReplicaSummary>> run_experiment_serial(const ExperimentConfig& config);

struct CltReport {
    double e = 0.0;
    double lambda_theory = 0.0;
    double lambda_hat = 0.0;
    int k = 0;
    std::int64_t horizon = 0;
    // R x k, row-major: N^e (xi_bar_i - p0_i) / sqrt(lambda_hat p0_i (1-p0_i))
    std::vector<double> standardized;
    // R x k, row-major: the term that carries the Gaussian limit
    std::vector<double> dominant;
    // R x k, row-major: the decomposition remainder
    std::vector<double> remainder;
    std::vector<double> remainder_norms;  // per replica, euclidean norm
};

// Decomposition for the same-rate regime:
//   sqrt(N)(xi_bar - p0) = (c+1) sqrt(N)(xi_bar - psi_bar) - sqrt(N) D_N,
// lambda = (c+1)^2 for eps < 1 and 2c(c+1)+1 at eps = 1. Requires an
// example1 schedule descriptor (WrongRegime otherwise).
CltReport clt_report_same_rate(const std::vector<ReplicaSummary>& summaries,
                              const UrnParams& params, std::int64_t horizon,
                              const ScheduleSpec& spec);

// Different-rates regime: e = 1/2 - (eps - delta), dominant term N^e theta_bar,
// lambda = c^2 / (1 + 2(eps - delta)) with c = 1/|b0|. Requires example2.
CltReport clt_report_different_rates(const std::vector<ReplicaSummary>& summaries,
                              const UrnParams& params, std::int64_t horizon,
                              const ScheduleSpec& spec);

// N^{-(1-2e)} sum_i (O_i - N p0_i)^2 / (N p0_i)
double chi2_scaled_statistic(const ReplicaSummary& summary, const std::vector<double>& p0,
                             double e, std::int64_t horizon);

struct RandomLimitReport {
    std::vector<double> across_replica_var;  // Var over replicas of psi_final_i
    std::vector<double> within_replica_var;  // mean over replicas of late-trajectory var
    double max_ratio = 0.0;
    bool random_limit_detected = false;  // across > 10x within for some component
};

// Distinguishes a genuinely random limit psi_infinity (across-replica spread
// dominates the frozen within-trajectory jitter) from convergence to p0.
RandomLimitReport random_limit_check(const std::vector<ReplicaSummary>& final_summaries);

}  // namespace grpurn
