#include "grpurn/montecarlo.hpp"

#include <cmath>
#include <string>

#include "grpurn/rng.hpp"
#include "grpurn/stats.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace grpurn {

namespace {

void validate(const ExperimentConfig& config) {
    if (config.replicas < 1) throw InvalidParams("experiment needs replicas >= 1");
    if (config.horizons.empty()) throw MinimumHorizon("experiment needs at least one horizon");
    std::int64_t prev = 0;
    for (std::int64_t h : config.horizons) {
        if (h < 1) throw MinimumHorizon("horizons must be >= 1 (empirical mean needs N >= 1)");
        if (h <= prev && prev != 0) throw InvalidParams("horizons must be strictly increasing");
        prev = h;
    }
    const std::int64_t total = config.horizons.back() * config.replicas;
    if (total > config.step_budget) {
        throw ResourceLimit("horizons x replicas = " + std::to_string(total) +
                            " steps exceeds the budget of " + std::to_string(config.step_budget));
    }

    // The example schedules pin the initial composition; a mismatched B0 would
    // silently run a different process than the descriptor claims.
    const ScheduleSpec& spec = config.schedule.spec();
    double B0_norm = 0.0;
    for (double v : config.params.B0) B0_norm += v;
    if (spec.variant == ScheduleVariant::Example1 || spec.variant == ScheduleVariant::Example2) {
        if (std::fabs(spec.b0_norm - config.params.b0_norm) >
            1e-9 * std::max(1.0, config.params.b0_norm)) {
            throw InvalidParams("schedule was built for |b0| = " + std::to_string(spec.b0_norm) +
                                " but the urn has |b0| = " +
                                std::to_string(config.params.b0_norm));
        }
        const double required =
            spec.variant == ScheduleVariant::Example1
                ? spec.c * spec.b0_norm
                : std::pow(static_cast<double>(spec.offset), spec.eps - spec.delta) -
                      spec.b0_norm;
        if (std::fabs(B0_norm - required) > 1e-9 * std::max(1.0, required)) {
            throw InvalidParams("schedule requires |B0| = " + std::to_string(required) +
                                " but the urn has |B0| = " + std::to_string(B0_norm));
        }
    }
}

double chi2_from_counts(const std::vector<std::int64_t>& counts, const std::vector<double>& p0,
                        std::int64_t n) {
    double chi2 = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double expected = static_cast<double>(n) * p0[i];
        const double d = static_cast<double>(counts[i]) - expected;
        chi2 += d * d / expected;
    }
    return chi2;
}

void run_one_replica(const ExperimentConfig& config, int replica,
                     std::vector<std::vector<ReplicaSummary>>& out) {
    const int k = config.params.k();
    const std::int64_t max_n = config.horizons.back();
    const std::int64_t late_start = max_n - max_n / 10;  // last decile

    RandomStream stream(replica_seed(config.base_seed, static_cast<std::uint64_t>(replica)));
    UrnState state = new_state(config.params);

    std::vector<double> psi_acc(k, 0.0);
    std::vector<double> dm_acc(k, 0.0);
    std::vector<RunningMoments> late(config.record.late_psi_variance ? k : 0);

    std::size_t next_horizon = 0;
    for (std::int64_t n = 0; n < max_n; ++n) {
        for (int i = 0; i < k; ++i) {
            const double p = state.psi[i];
            psi_acc[i] += p;
            dm_acc[i] -= p;
        }
        const int color = sample_categorical(stream, state.psi);
        dm_acc[color] += 1.0;
        apply_draw(state, config.params, config.schedule, color);

        if (config.record.late_psi_variance && state.n > late_start) {
            for (int i = 0; i < k; ++i) late[static_cast<std::size_t>(i)].push(state.psi[i]);
        }

        if (state.n == config.horizons[next_horizon]) {
            ReplicaSummary s;
            const double nd = static_cast<double>(state.n);
            s.xi_bar.resize(k);
            s.psi_bar.resize(k);
            s.theta_bar.resize(k);
            for (int i = 0; i < k; ++i) {
                s.xi_bar[i] = static_cast<double>(state.counts[i]) / nd;
                s.psi_bar[i] = psi_acc[i] / nd;
                s.theta_bar[i] = s.psi_bar[i] - config.params.p0[i];
            }
            s.psi_final = state.psi;
            s.chi2_stat = chi2_from_counts(state.counts, config.params.p0, state.n);
            if (config.record.delta_m_sums) {
                s.dm_sum_over_n.resize(k);
                for (int i = 0; i < k; ++i) s.dm_sum_over_n[i] = dm_acc[i] / nd;
            }
            if (config.record.late_psi_variance) {
                s.late_psi_var.resize(k);
                for (int i = 0; i < k; ++i) {
                    s.late_psi_var[i] = late[static_cast<std::size_t>(i)].variance();
                }
            }
            out[next_horizon][static_cast<std::size_t>(replica)] = std::move(s);
            ++next_horizon;
        }
    }
}

}  // namespace

std::vector<std::vector<ReplicaSummary>> run_experiment_serial(const ExperimentConfig& config) {
    validate(config);
    std::vector<std::vector<ReplicaSummary>> out(
        config.horizons.size(), std::vector<ReplicaSummary>(config.replicas));
    for (int r = 0; r < config.replicas; ++r) run_one_replica(config, r, out);
    return out;
}

std::vector<std::vector<ReplicaSummary>> run_experiment(const ExperimentConfig& config,
                                                        int threads) {
    validate(config);
    std::vector<std::vector<ReplicaSummary>> out(
        config.horizons.size(), std::vector<ReplicaSummary>(config.replicas));
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < config.replicas; ++r) run_one_replica(config, r, out);
#else
    (void)threads;
    for (int r = 0; r < config.replicas; ++r) run_one_replica(config, r, out);
#endif
    return out;
}

namespace {

// lambda_hat = (1/k) sum_i Var_R[N^e (xi_bar_i - p0_i)] / (p0_i (1 - p0_i))
double empirical_lambda(const std::vector<ReplicaSummary>& summaries,
                        const std::vector<double>& p0, double scale) {
    const int k = static_cast<int>(p0.size());
    double acc = 0.0;
    for (int i = 0; i < k; ++i) {
        RunningMoments m;
        for (const auto& s : summaries) m.push(scale * (s.xi_bar[i] - p0[i]));
        acc += m.variance() / (p0[i] * (1.0 - p0[i]));
    }
    return acc / static_cast<double>(k);
}

void fill_standardized(CltReport& report, const std::vector<ReplicaSummary>& summaries,
                       const std::vector<double>& p0, double scale) {
    const int k = static_cast<int>(p0.size());
    report.standardized.resize(summaries.size() * static_cast<std::size_t>(k));
    for (std::size_t r = 0; r < summaries.size(); ++r) {
        for (int i = 0; i < k; ++i) {
            report.standardized[r * k + i] =
                scale * (summaries[r].xi_bar[i] - p0[i]) /
                std::sqrt(report.lambda_hat * p0[i] * (1.0 - p0[i]));
        }
    }
}

void fill_norms(CltReport& report, int k) {
    const std::size_t r_count = report.remainder.size() / static_cast<std::size_t>(k);
    report.remainder_norms.resize(r_count);
    for (std::size_t r = 0; r < r_count; ++r) {
        double s = 0.0;
        for (int i = 0; i < k; ++i) {
            const double v = report.remainder[r * k + i];
            s += v * v;
        }
        report.remainder_norms[r] = std::sqrt(s);
    }
}

}  // namespace

CltReport clt_report_same_rate(const std::vector<ReplicaSummary>& summaries,
                              const UrnParams& params, std::int64_t horizon,
                              const ScheduleSpec& spec) {
    if (spec.variant != ScheduleVariant::Example1) {
        throw WrongRegime("same-rate report requires an example1 schedule");
    }
    if (summaries.empty()) throw InvalidParams("no replica summaries");
    const double c = spec.c;
    const int k = params.k();
    const double sqrt_n = std::sqrt(static_cast<double>(horizon));

    CltReport report;
    report.e = 0.5;
    report.k = k;
    report.horizon = horizon;
    report.lambda_theory = (spec.eps < 1.0) ? (c + 1.0) * (c + 1.0)
                                            : 2.0 * c * (c + 1.0) + 1.0;
    report.lambda_hat = empirical_lambda(summaries, params.p0, sqrt_n);
    fill_standardized(report, summaries, params.p0, sqrt_n);

    report.dominant.resize(summaries.size() * static_cast<std::size_t>(k));
    report.remainder.resize(summaries.size() * static_cast<std::size_t>(k));
    for (std::size_t r = 0; r < summaries.size(); ++r) {
        const auto& s = summaries[r];
        for (int i = 0; i < k; ++i) {
            const double gap = s.xi_bar[i] - s.psi_bar[i];
            report.dominant[r * k + i] = (c + 1.0) * sqrt_n * gap;
            // D_N = c (xi_bar - psi_bar) - (psi_bar - p0)
            report.remainder[r * k + i] = sqrt_n * (c * gap - s.theta_bar[i]);
        }
    }
    fill_norms(report, k);
    return report;
}

CltReport clt_report_different_rates(const std::vector<ReplicaSummary>& summaries,
                              const UrnParams& params, std::int64_t horizon,
                              const ScheduleSpec& spec) {
    if (spec.variant != ScheduleVariant::Example2) {
        throw WrongRegime("different-rates report requires an example2 schedule");
    }
    if (summaries.empty()) throw InvalidParams("no replica summaries");
    const int k = params.k();
    const double gamma = spec.eps - spec.delta;
    const double c = 1.0 / spec.b0_norm;
    const double e = 0.5 - gamma;
    const double n_e = std::pow(static_cast<double>(horizon), e);

    CltReport report;
    report.e = e;
    report.k = k;
    report.horizon = horizon;
    report.lambda_theory = c * c / (1.0 + 2.0 * gamma);
    report.lambda_hat = empirical_lambda(summaries, params.p0, n_e);
    fill_standardized(report, summaries, params.p0, n_e);

    report.dominant.resize(summaries.size() * static_cast<std::size_t>(k));
    report.remainder.resize(summaries.size() * static_cast<std::size_t>(k));
    for (std::size_t r = 0; r < summaries.size(); ++r) {
        const auto& s = summaries[r];
        for (int i = 0; i < k; ++i) {
            report.dominant[r * k + i] = n_e * s.theta_bar[i];
            report.remainder[r * k + i] =
                n_e * (s.xi_bar[i] - params.p0[i]) - n_e * s.theta_bar[i];
        }
    }
    fill_norms(report, k);
    return report;
}

double chi2_scaled_statistic(const ReplicaSummary& summary, const std::vector<double>& p0,
                             double e, std::int64_t horizon) {
    const double nd = static_cast<double>(horizon);
    double chi2 = 0.0;
    for (std::size_t i = 0; i < p0.size(); ++i) {
        if (!(p0[i] > 0.0)) throw ZeroProbability("chi2_scaled_statistic requires p0_i > 0");
        const double o = summary.xi_bar[i] * nd;
        const double d = o - nd * p0[i];
        chi2 += d * d / (nd * p0[i]);
    }
    return chi2 / std::pow(nd, 1.0 - 2.0 * e);
}

RandomLimitReport random_limit_check(const std::vector<ReplicaSummary>& final_summaries) {
    if (final_summaries.empty()) throw InvalidParams("no replica summaries");
    if (final_summaries.front().late_psi_var.empty()) {
        throw InvalidParams("random_limit_check needs late_psi_variance recording enabled");
    }
    const auto k = final_summaries.front().psi_final.size();

    RandomLimitReport report;
    report.across_replica_var.resize(k);
    report.within_replica_var.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        RunningMoments across;
        double within = 0.0;
        for (const auto& s : final_summaries) {
            across.push(s.psi_final[i]);
            within += s.late_psi_var[i];
        }
        report.across_replica_var[i] = across.variance();
        report.within_replica_var[i] = within / static_cast<double>(final_summaries.size());
        const double ratio = report.across_replica_var[i] /
                             std::max(report.within_replica_var[i], 1e-300);
        report.max_ratio = std::max(report.max_ratio, ratio);
    }
    report.random_limit_detected = report.max_ratio > 10.0;
    return report;
}

}  // namespace grpurn
