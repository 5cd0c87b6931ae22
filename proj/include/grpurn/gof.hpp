#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grpurn/errors.hpp"

namespace grpurn {

// Per-cluster category counts with the reference probabilities the test is
// performed against.
struct ClusterSample {
    std::string label;
    std::vector<std::int64_t> counts;  // O_i(l)
    std::int64_t size = 0;             // N_l = sum of counts
    std::vector<double> p_star;        // p0*_i(l); empty until a builder fills it

    static ClusterSample make(std::string label, std::vector<std::int64_t> counts);
    int k() const { return static_cast<int>(counts.size()); }
};

// The aggregate Gamma law loses one degree of freedom when the reference
// probabilities are pooled from the data; which divisor the likelihood uses
// must always be stated explicitly by the caller.
enum class DfConvention { L, LMinus1 };

inline std::int64_t df_clusters(DfConvention c, std::int64_t L) {
    return c == DfConvention::L ? L : L - 1;
}

// T_l = sum_i (O_i - N_l p*_i)^2 / (N_l p*_i)
double t_statistic(const ClusterSample& cluster);

// Q_l = T_l / N_l^eta
double q_statistic(double t, std::int64_t n, double eta);

// g(x) = E_x[ln N] - (1/divisor) sum_l ln N_l with tilted weights
// p(x,l) = (t_l / N_l^x) / sum(t / N^x). Strictly decreasing in x whenever two
// cluster sizes differ. divisor = 0 means L.
double g_function(double eta, std::span<const double> t, std::span<const std::int64_t> n,
                  std::int64_t divisor = 0);

enum class MleCase { CovNonPositive, Interior, BoundaryBadFit };
std::string_view mle_case_name(MleCase c);

struct MleResult {
    double eta_hat = 0.0;
    double lambda_hat = 0.0;  // under `convention`
    MleCase mle_case = MleCase::CovNonPositive;
    double g0 = 0.0;  // g at eta = 0 (convention divisor)
    double g1 = 0.0;  // g at eta = 1
    double cov_lnN_T = 0.0;
    double cov_lnN_ToverN = 0.0;
    double lambda_hat_L = 0.0;        // sum(t/N^eta)/(L(k-1))
    double lambda_hat_Lminus1 = 0.0;  // sum(t/N^eta)/((L-1)(k-1))
    DfConvention convention = DfConvention::L;
    // BoundaryBadFit, or case 1 with lambda_hat <= 1: the model does not fit
    // and the result must not be fed into the Gamma test.
    bool bad_fit = false;
};

// Three-case maximum likelihood for (eta, lambda):
//   g(0) <= 0            -> eta = 0, lambda = lambda(0)
//   g(0) > 0 and g(1) < 0 -> eta = unique root of g in (0,1), by bisection to 1e-10
//   g(1) >= 0            -> eta = 1, flagged as a bad fit
// Throws DegenerateClusters when every N_l is equal; the identifiable product
// lambda * N0^eta rides along in the exception.
MleResult mle_estimate(std::span<const double> t, std::span<const std::int64_t> n, int k,
                       DfConvention convention);

// Upper tail of Gamma((k-1)/2, 1/(2 lambda)) at Q.
double cluster_test(double q, double lambda, int k);

struct GofRow {
    std::string label;
    double t = 0.0;
    double q = 0.0;
    double p_value = 0.0;
};

struct GofResult {
    std::vector<GofRow> per_cluster;
    double aggregate_stat = 0.0;  // sum of Q_l
    double aggregate_p = 0.0;
    double df_shape = 0.0;  // Gamma shape used for the aggregate
    double lambda_used = 0.0;
    double eta_used = 0.0;
};

GofResult aggregate_test(const std::vector<ClusterSample>& clusters, double eta, double lambda,
                         DfConvention convention);

struct ClassicalChi2 {
    double statistic = 0.0;  // sum of T_l
    double df = 0.0;
    double p_value = 0.0;
};

// Uncorrected chi-squared over all clusters; df = (L-1)(k-1) when p* was
// pooled, L(k-1) otherwise.
ClassicalChi2 classical_chi2(const std::vector<ClusterSample>& clusters, bool pooled_p_star);

// Reference-probability builders. Each fills p_star in place and throws
// ZeroProbability if a resulting component vanishes.
void build_p_star_uniform(std::vector<ClusterSample>& clusters);
void build_p_star_pooled(std::vector<ClusterSample>& clusters);
// First-period sample supplies p* cluster by cluster (two-period design).
void build_p_star_from_reference(std::vector<ClusterSample>& clusters,
                                 const std::vector<ClusterSample>& reference);
// Benchmark cluster supplies p* for every other cluster; returns the L-1
// remaining clusters, benchmark excluded from testing.
std::vector<ClusterSample> build_p_star_benchmark(const std::vector<ClusterSample>& clusters,
                                                  std::size_t benchmark_index);

struct PortmanteauRow {
    int lag = 0;
    double statistic = 0.0;
    double p_value = 0.0;
};

// Ljung-Box: Q(H) = n(n+2) sum_{h<=H} rho_h^2/(n-h), p from the chi^2(H) tail.
std::vector<PortmanteauRow> ljung_box(std::span<const double> series, int max_lag);
// Box-Pierce: Q(H) = n sum_{h<=H} rho_h^2, same tail.
std::vector<PortmanteauRow> box_pierce(std::span<const double> series, int max_lag);

}  // namespace grpurn
