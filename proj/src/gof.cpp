#include "grpurn/gof.hpp"

#include <algorithm>
#include <cmath>

#include "grpurn/specfun.hpp"

namespace grpurn {

ClusterSample ClusterSample::make(std::string label, std::vector<std::int64_t> counts) {
    if (counts.empty()) throw InvalidParams("cluster needs at least one category");
    std::int64_t size = 0;
    for (std::int64_t c : counts) {
        if (c < 0) throw InvalidParams("cluster counts must be non-negative");
        size += c;
    }
    if (size < 1) throw InvalidParams("cluster must contain at least one observation");
    ClusterSample s;
    s.label = std::move(label);
    s.counts = std::move(counts);
    s.size = size;
    return s;
}

double t_statistic(const ClusterSample& cluster) {
    if (cluster.p_star.size() != cluster.counts.size()) {
        throw InvalidParams("cluster has no reference probabilities");
    }
    const auto n = static_cast<double>(cluster.size);
    double t = 0.0;
    for (std::size_t i = 0; i < cluster.counts.size(); ++i) {
        const double p = cluster.p_star[i];
        if (!(p > 0.0)) throw ZeroProbability("t_statistic requires every p*_i > 0");
        const double expected = n * p;
        const double d = static_cast<double>(cluster.counts[i]) - expected;
        t += d * d / expected;
    }
    return t;
}

double q_statistic(double t, std::int64_t n, double eta) {
    if (n < 1) throw InvalidParams("q_statistic requires N >= 1");
    if (eta < 0.0 || eta > 1.0) throw OutOfRange("q_statistic requires eta in [0, 1]");
    return t / std::pow(static_cast<double>(n), eta);
}

namespace {

struct TiltedMean {
    double e_ln_n;   // E_x[ln N] under weights t_l / N_l^x
    double sum_w;    // sum of shifted weights (diagnostic only)
};

// Weights span many orders of magnitude for big N_l; shift by the max log
// weight before exponentiating. t_l = 0 contributes nothing.
TiltedMean tilted_mean_ln_n(double x, std::span<const double> t,
                            std::span<const double> ln_n) {
    double max_lw = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < t.size(); ++l) {
        if (t[l] > 0.0) max_lw = std::max(max_lw, std::log(t[l]) - x * ln_n[l]);
    }
    if (!std::isfinite(max_lw)) throw InvalidParams("g requires sum of t_l > 0");
    double sw = 0.0, swl = 0.0;
    for (std::size_t l = 0; l < t.size(); ++l) {
        if (t[l] <= 0.0) continue;
        const double w = std::exp(std::log(t[l]) - x * ln_n[l] - max_lw);
        sw += w;
        swl += w * ln_n[l];
    }
    return {swl / sw, sw};
}

std::vector<double> log_sizes(std::span<const std::int64_t> n) {
    std::vector<double> ln_n(n.size());
    for (std::size_t l = 0; l < n.size(); ++l) {
        if (n[l] < 1) throw InvalidParams("cluster sizes must be >= 1");
        ln_n[l] = std::log(static_cast<double>(n[l]));
    }
    return ln_n;
}

bool all_sizes_equal(std::span<const std::int64_t> n) {
    for (std::size_t l = 1; l < n.size(); ++l) {
        if (n[l] != n[0]) return false;
    }
    return true;
}

}  // namespace

double g_function(double eta, std::span<const double> t, std::span<const std::int64_t> n,
                  std::int64_t divisor) {
    if (t.size() != n.size() || t.size() < 2) {
        throw InvalidParams("g needs matching t and N with at least two clusters");
    }
    if (all_sizes_equal(n)) {
        throw DegenerateClusters("g is undefined when all cluster sizes are equal", 0.0);
    }
    const auto ln_n = log_sizes(n);
    double sum_ln = 0.0;
    for (double v : ln_n) sum_ln += v;
    const double d = (divisor == 0) ? static_cast<double>(t.size()) : static_cast<double>(divisor);
    return tilted_mean_ln_n(eta, t, ln_n).e_ln_n - sum_ln / d;
}

MleResult mle_estimate(std::span<const double> t, std::span<const std::int64_t> n, int k,
                       DfConvention convention) {
    if (t.size() != n.size() || t.size() < 2) {
        throw InvalidParams("mle_estimate needs at least two clusters");
    }
    if (k < 2) throw InvalidParams("mle_estimate requires k >= 2");
    const auto L = static_cast<std::int64_t>(t.size());
    const double Ld = static_cast<double>(L);

    double sum_t = 0.0;
    for (double v : t) {
        if (v < 0.0) throw InvalidParams("t statistics must be non-negative");
        sum_t += v;
    }
    if (!(sum_t > 0.0)) throw InvalidParams("mle_estimate requires sum of t_l > 0");

    if (all_sizes_equal(n)) {
        const double product = sum_t / (static_cast<double>(k - 1) * Ld);
        throw DegenerateClusters(
            "all cluster sizes equal: only lambda*N0^eta is identifiable, value " +
                std::to_string(product),
            product);
    }

    const auto ln_n = log_sizes(n);
    double sum_ln = 0.0, sum_t_ln = 0.0, sum_t_over_n = 0.0, sum_t_over_n_ln = 0.0;
    for (std::size_t l = 0; l < t.size(); ++l) {
        sum_ln += ln_n[l];
        sum_t_ln += t[l] * ln_n[l];
        const double ratio = t[l] / static_cast<double>(n[l]);
        sum_t_over_n += ratio;
        sum_t_over_n_ln += ratio * ln_n[l];
    }

    MleResult res;
    res.convention = convention;
    res.cov_lnN_T = sum_t_ln / Ld - (sum_t / Ld) * (sum_ln / Ld);
    res.cov_lnN_ToverN = sum_t_over_n_ln / Ld - (sum_t_over_n / Ld) * (sum_ln / Ld);

    const std::int64_t divisor = df_clusters(convention, L);
    auto g = [&](double x) { return g_function(x, t, n, divisor); };
    res.g0 = g(0.0);
    res.g1 = g(1.0);

    if (res.g0 <= 0.0) {
        res.mle_case = MleCase::CovNonPositive;
        res.eta_hat = 0.0;
    } else if (res.g1 >= 0.0) {
        res.mle_case = MleCase::BoundaryBadFit;
        res.eta_hat = 1.0;
        res.bad_fit = true;
    } else {
        // g is strictly decreasing with a sign change over [0,1]; plain
        // bisection converges unconditionally.
        res.mle_case = MleCase::Interior;
        double lo = 0.0, hi = 1.0;
        while (hi - lo > 1e-10) {
            const double mid = 0.5 * (lo + hi);
            if (g(mid) > 0.0) lo = mid; else hi = mid;
        }
        res.eta_hat = 0.5 * (lo + hi);
    }

    double s = 0.0;
    for (std::size_t l = 0; l < t.size(); ++l) {
        s += t[l] / std::pow(static_cast<double>(n[l]), res.eta_hat);
    }
    res.lambda_hat_L = s / (Ld * static_cast<double>(k - 1));
    res.lambda_hat_Lminus1 = s / ((Ld - 1.0) * static_cast<double>(k - 1));
    res.lambda_hat =
        convention == DfConvention::L ? res.lambda_hat_L : res.lambda_hat_Lminus1;

    // In the eta = 0 case a fitted lambda at or below 1 contradicts the model
    // class (lambda > 1 there), so flag the fit rather than test with it.
    if (res.mle_case == MleCase::CovNonPositive && res.lambda_hat <= 1.0) res.bad_fit = true;
    return res;
}

double cluster_test(double q, double lambda, int k) {
    if (!(lambda > 0.0)) throw DomainError("cluster_test requires lambda > 0");
    if (k < 2) throw DomainError("cluster_test requires k >= 2");
    return gamma_sf(GammaDist(0.5 * (k - 1), 0.5 / lambda), q);
}

GofResult aggregate_test(const std::vector<ClusterSample>& clusters, double eta, double lambda,
                         DfConvention convention) {
    if (clusters.empty()) throw InvalidParams("aggregate_test requires clusters");
    if (!(lambda > 0.0)) throw DomainError("aggregate_test requires lambda > 0");
    const int k = clusters.front().k();

    GofResult out;
    out.eta_used = eta;
    out.lambda_used = lambda;
    for (const auto& cluster : clusters) {
        GofRow row;
        row.label = cluster.label;
        row.t = t_statistic(cluster);
        row.q = q_statistic(row.t, cluster.size, eta);
        row.p_value = cluster_test(row.q, lambda, k);
        out.aggregate_stat += row.q;
        out.per_cluster.push_back(std::move(row));
    }
    const auto L = static_cast<std::int64_t>(clusters.size());
    out.df_shape = 0.5 * static_cast<double>(df_clusters(convention, L)) *
                   static_cast<double>(k - 1);
    out.aggregate_p = gamma_sf(GammaDist(out.df_shape, 0.5 / lambda), out.aggregate_stat);
    return out;
}

ClassicalChi2 classical_chi2(const std::vector<ClusterSample>& clusters, bool pooled_p_star) {
    if (clusters.empty()) throw InvalidParams("classical_chi2 requires clusters");
    const int k = clusters.front().k();
    const auto L = static_cast<std::int64_t>(clusters.size());

    ClassicalChi2 out;
    for (const auto& cluster : clusters) out.statistic += t_statistic(cluster);
    out.df = static_cast<double>((pooled_p_star ? L - 1 : L) * (k - 1));
    if (!(out.df > 0.0)) throw InvalidParams("classical_chi2 has zero degrees of freedom");
    out.p_value = chi_squared_sf(out.df, out.statistic);
    return out;
}

namespace {

void assign_p_star(std::vector<ClusterSample>& clusters, const std::vector<double>& p) {
    for (double v : p) {
        if (!(v > 0.0)) {
            throw ZeroProbability("reference probabilities must be strictly positive");
        }
    }
    for (auto& cluster : clusters) {
        if (cluster.k() != static_cast<int>(p.size())) {
            throw InvalidParams("clusters disagree on the number of categories");
        }
        cluster.p_star = p;
    }
}

std::vector<double> frequencies(const ClusterSample& cluster) {
    std::vector<double> p(cluster.counts.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = static_cast<double>(cluster.counts[i]) / static_cast<double>(cluster.size);
    }
    return p;
}

}  // namespace

void build_p_star_uniform(std::vector<ClusterSample>& clusters) {
    if (clusters.empty()) throw InvalidParams("no clusters");
    assign_p_star(clusters,
                  std::vector<double>(clusters.front().counts.size(),
                                      1.0 / static_cast<double>(clusters.front().counts.size())));
}

void build_p_star_pooled(std::vector<ClusterSample>& clusters) {
    if (clusters.empty()) throw InvalidParams("no clusters");
    const auto k = clusters.front().counts.size();
    std::vector<double> totals(k, 0.0);
    double grand = 0.0;
    for (const auto& cluster : clusters) {
        if (cluster.counts.size() != k) {
            throw InvalidParams("clusters disagree on the number of categories");
        }
        for (std::size_t i = 0; i < k; ++i) totals[i] += static_cast<double>(cluster.counts[i]);
        grand += static_cast<double>(cluster.size);
    }
    for (double& v : totals) v /= grand;
    assign_p_star(clusters, totals);
}

void build_p_star_from_reference(std::vector<ClusterSample>& clusters,
                                 const std::vector<ClusterSample>& reference) {
    if (clusters.size() != reference.size()) {
        throw InvalidParams("reference sample must have one cluster per tested cluster");
    }
    for (std::size_t l = 0; l < clusters.size(); ++l) {
        const auto p = frequencies(reference[l]);
        for (double v : p) {
            if (!(v > 0.0)) {
                throw ZeroProbability("reference cluster \"" + reference[l].label +
                                      "\" has an empty category");
            }
        }
        if (clusters[l].k() != static_cast<int>(p.size())) {
            throw InvalidParams("reference cluster \"" + reference[l].label +
                                "\" disagrees on the number of categories");
        }
        clusters[l].p_star = p;
    }
}

std::vector<ClusterSample> build_p_star_benchmark(const std::vector<ClusterSample>& clusters,
                                                  std::size_t benchmark_index) {
    if (benchmark_index >= clusters.size()) throw OutOfRange("benchmark index out of range");
    const auto p = frequencies(clusters[benchmark_index]);
    std::vector<ClusterSample> out;
    for (std::size_t l = 0; l < clusters.size(); ++l) {
        if (l == benchmark_index) continue;
        out.push_back(clusters[l]);
    }
    assign_p_star(out, p);
    return out;
}

namespace {

std::vector<PortmanteauRow> portmanteau(std::span<const double> series, int max_lag,
                                        bool ljung_box_scaling) {
    const auto n = static_cast<std::int64_t>(series.size());
    if (max_lag < 1) throw InvalidParams("portmanteau test needs max_lag >= 1");
    if (n <= max_lag) throw InvalidParams("portmanteau test needs series length > max_lag");

    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    double denom = 0.0;
    for (double v : series) denom += (v - mean) * (v - mean);
    if (!(denom > 0.0)) throw ZeroVariance("portmanteau test on a constant series");

    std::vector<PortmanteauRow> rows;
    double acc = 0.0;
    const double nd = static_cast<double>(n);
    for (int h = 1; h <= max_lag; ++h) {
        double num = 0.0;
        for (std::int64_t i = h; i < n; ++i) {
            num += (series[i] - mean) * (series[i - h] - mean);
        }
        const double rho = num / denom;
        if (ljung_box_scaling) {
            acc += rho * rho / static_cast<double>(n - h);
        } else {
            acc += rho * rho;
        }
        PortmanteauRow row;
        row.lag = h;
        row.statistic = ljung_box_scaling ? nd * (nd + 2.0) * acc : nd * acc;
        row.p_value = chi_squared_sf(static_cast<double>(h), row.statistic);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

std::vector<PortmanteauRow> ljung_box(std::span<const double> series, int max_lag) {
    return portmanteau(series, max_lag, true);
}

std::vector<PortmanteauRow> box_pierce(std::span<const double> series, int max_lag) {
    return portmanteau(series, max_lag, false);
}

std::string_view mle_case_name(MleCase c) {
    switch (c) {
        case MleCase::CovNonPositive: return "cov_non_positive";
        case MleCase::Interior: return "interior";
        case MleCase::BoundaryBadFit: return "boundary_bad_fit";
    }
    return "unknown";
}

}  // namespace grpurn
