#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "grpurn/gof.hpp"
#include "grpurn/montecarlo.hpp"

namespace grpurn {

// Contingency CSV: header `label,count_1,...,count_k`, UTF-8, LF endings.
// Ragged or negative rows are ParseError with the line number.
std::vector<ClusterSample> parse_contingency(std::string_view text,
                                             std::string_view origin = "<memory>");
std::vector<ClusterSample> read_contingency(const std::filesystem::path& path);

// Canonical serialization (LF endings, no trailing comma); read-then-write of
// a canonical file is byte-identical.
std::string write_contingency(const std::vector<ClusterSample>& clusters);

// Keeps rows at indices offset, offset + stride, ... (every-m-th-cluster
// independence device).
std::vector<ClusterSample> thin_clusters(const std::vector<ClusterSample>& rows,
                                         std::int64_t stride, std::int64_t offset);

// The bundled COVID-Twitter daily sentiment counts (observation columns only;
// expected counts and statistics are always recomputed).
std::string_view covid_table3_csv();

// JSON emission with every intermediate quantity, for auditability.
std::string mle_result_to_json(const MleResult& result);
std::string gof_result_to_json(const GofResult& result);
std::string clt_report_to_json(const CltReport& report);

// Per-horizon CSV: replica,component,xi_bar,psi_bar,theta_bar,standardized,remainder
std::string replica_csv(const std::vector<ReplicaSummary>& summaries, const CltReport& report);
// Same layout for regimes without a CLT report; the last two columns are empty.
std::string replica_csv(const std::vector<ReplicaSummary>& summaries);

// CSV with header n,xi_index,psi_1..psi_k,r_star from recorded steps.
std::string trajectory_csv(const UrnParams& params, const Schedule& schedule,
                           const std::vector<StepRecord>& records);

}  // namespace grpurn
