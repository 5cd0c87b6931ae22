#include "grpurn/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace grpurn {

namespace {

constexpr std::string_view kCovidTable3 =
    "label,count_1,count_2\n"
    "2020-02-20,25,43\n"
    "2020-02-23,53564,60476\n"
    "2020-02-26,29831,37175\n"
    "2020-02-29,18220,22184\n"
    "2020-03-03,16801,14834\n"
    "2020-03-06,27906,27030\n"
    "2020-03-09,41650,34769\n"
    "2020-03-12,255,156\n"
    "2020-03-15,14193,13562\n"
    "2020-03-18,12064,10089\n"
    "2020-03-21,11571,10026\n"
    "2020-03-24,13339,9172\n"
    "2020-03-27,14798,10039\n"
    "2020-03-30,12689,10651\n"
    "2020-04-02,12714,9300\n"
    "2020-04-05,13373,10815\n"
    "2020-04-08,14889,11987\n"
    "2020-04-11,12153,10777\n"
    "2020-04-14,13406,11430\n"
    "2020-04-17,13977,11371\n"
    "2020-04-20,13753,12393\n";

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

}  // namespace

std::string_view covid_table3_csv() { return kCovidTable3; }

std::vector<ClusterSample> parse_contingency(std::string_view text, std::string_view origin) {
    if (text.empty()) throw EmptyFile("empty contingency file: " + std::string(origin));

    std::vector<ClusterSample> clusters;
    std::size_t line_no = 0;
    std::size_t k = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = eol + 1;
        ++line_no;
        if (line.empty()) continue;

        const auto fields = split_csv_line(line);
        if (line_no == 1) {
            if (fields.size() < 2 || fields[0] != "label") {
                throw ParseError(std::string(origin) +
                                     ": header must be label,count_1,...,count_k",
                                 line_no);
            }
            k = fields.size() - 1;
            for (std::size_t i = 1; i < fields.size(); ++i) {
                const std::string want = "count_" + std::to_string(i);
                if (fields[i] != want) {
                    throw ParseError(std::string(origin) + ": header column " +
                                         std::to_string(i + 1) + " must be " + want,
                                     line_no);
                }
            }
            continue;
        }
        if (fields.size() != k + 1) {
            throw ParseError(std::string(origin) + ": row \"" + std::string(fields[0]) +
                                 "\" has " + std::to_string(fields.size() - 1) +
                                 " counts, expected " + std::to_string(k),
                             line_no);
        }
        std::vector<std::int64_t> counts(k);
        std::int64_t row_total = 0;
        for (std::size_t i = 0; i < k; ++i) {
            const std::string_view f = fields[i + 1];
            std::int64_t value = 0;
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
            if (ec != std::errc() || ptr != f.data() + f.size()) {
                throw ParseError(std::string(origin) + ": row \"" + std::string(fields[0]) +
                                     "\": count \"" + std::string(f) +
                                     "\" is not a non-negative integer",
                                 line_no);
            }
            if (value < 0) {
                throw ParseError(std::string(origin) + ": row \"" + std::string(fields[0]) +
                                     "\": negative count",
                                 line_no);
            }
            counts[i] = value;
            row_total += value;
        }
        if (row_total == 0) {
            throw ParseError(std::string(origin) + ": row \"" + std::string(fields[0]) +
                                 "\" has no observations",
                             line_no);
        }
        clusters.push_back(ClusterSample::make(std::string(fields[0]), std::move(counts)));
    }
    if (clusters.empty()) {
        throw EmptyFile("contingency file has a header but no rows: " + std::string(origin));
    }
    return clusters;
}

std::vector<ClusterSample> read_contingency(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_contingency(buf.str(), path.string());
}

std::string write_contingency(const std::vector<ClusterSample>& clusters) {
    if (clusters.empty()) throw InvalidParams("nothing to write");
    std::string out = "label";
    for (int i = 1; i <= clusters.front().k(); ++i) out += ",count_" + std::to_string(i);
    out += '\n';
    for (const auto& cluster : clusters) {
        out += cluster.label;
        for (std::int64_t c : cluster.counts) out += ',' + std::to_string(c);
        out += '\n';
    }
    return out;
}

std::vector<ClusterSample> thin_clusters(const std::vector<ClusterSample>& rows,
                                         std::int64_t stride, std::int64_t offset) {
    if (stride < 1) throw OutOfRange("thin_clusters requires stride >= 1");
    if (offset < 0) throw OutOfRange("thin_clusters requires offset >= 0");
    std::vector<ClusterSample> out;
    for (std::size_t i = static_cast<std::size_t>(offset); i < rows.size();
         i += static_cast<std::size_t>(stride)) {
        out.push_back(rows[i]);
    }
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string mle_result_to_json(const MleResult& r) {
    std::string out = "{\n";
    out += "  \"eta_hat\": " + fmt(r.eta_hat) + ",\n";
    out += "  \"lambda_hat\": " + fmt(r.lambda_hat) + ",\n";
    out += "  \"case\": \"" + std::string(mle_case_name(r.mle_case)) + "\",\n";
    out += "  \"bad_fit\": " + std::string(r.bad_fit ? "true" : "false") + ",\n";
    out += "  \"g0\": " + fmt(r.g0) + ",\n";
    out += "  \"g1\": " + fmt(r.g1) + ",\n";
    out += "  \"cov_lnN_T\": " + fmt(r.cov_lnN_T) + ",\n";
    out += "  \"cov_lnN_ToverN\": " + fmt(r.cov_lnN_ToverN) + ",\n";
    out += "  \"lambda_hat_L\": " + fmt(r.lambda_hat_L) + ",\n";
    out += "  \"lambda_hat_L_minus_1\": " + fmt(r.lambda_hat_Lminus1) + ",\n";
    out += "  \"df_convention\": \"" +
           std::string(r.convention == DfConvention::L ? "L" : "L-1") + "\"\n";
    out += "}\n";
    return out;
}

std::string gof_result_to_json(const GofResult& r) {
    std::string out = "{\n";
    out += "  \"eta\": " + fmt(r.eta_used) + ",\n";
    out += "  \"lambda\": " + fmt(r.lambda_used) + ",\n";
    out += "  \"aggregate_stat\": " + fmt(r.aggregate_stat) + ",\n";
    out += "  \"aggregate_p\": " + fmt(r.aggregate_p) + ",\n";
    out += "  \"df_shape\": " + fmt(r.df_shape) + ",\n";
    out += "  \"per_cluster\": [\n";
    for (std::size_t i = 0; i < r.per_cluster.size(); ++i) {
        const auto& row = r.per_cluster[i];
        out += "    {\"label\": \"" + row.label + "\", \"T\": " + fmt(row.t) +
               ", \"Q\": " + fmt(row.q) + ", \"p\": " + fmt(row.p_value) + "}";
        out += (i + 1 < r.per_cluster.size()) ? ",\n" : "\n";
    }
    out += "  ]\n}\n";
    return out;
}

std::string clt_report_to_json(const CltReport& r) {
    std::string out = "{\n";
    out += "  \"horizon\": " + std::to_string(r.horizon) + ",\n";
    out += "  \"e\": " + fmt(r.e) + ",\n";
    out += "  \"lambda_theory\": " + fmt(r.lambda_theory) + ",\n";
    out += "  \"lambda_hat\": " + fmt(r.lambda_hat) + ",\n";
    out += "  \"replicas\": " + std::to_string(r.standardized.size() / r.k) + ",\n";
    double mean_norm = 0.0;
    for (double v : r.remainder_norms) mean_norm += v;
    if (!r.remainder_norms.empty()) mean_norm /= static_cast<double>(r.remainder_norms.size());
    out += "  \"mean_remainder_norm\": " + fmt(mean_norm) + "\n";
    out += "}\n";
    return out;
}

namespace {

std::string replica_csv_impl(const std::vector<ReplicaSummary>& summaries,
                             const CltReport* report) {
    std::string out = "replica,component,xi_bar,psi_bar,theta_bar,standardized,remainder\n";
    if (summaries.empty()) return out;
    const auto k = summaries.front().xi_bar.size();
    for (std::size_t r = 0; r < summaries.size(); ++r) {
        for (std::size_t i = 0; i < k; ++i) {
            out += std::to_string(r) + ',' + std::to_string(i + 1) + ',';
            out += fmt(summaries[r].xi_bar[i]) + ',';
            out += fmt(summaries[r].psi_bar[i]) + ',';
            out += fmt(summaries[r].theta_bar[i]) + ',';
            if (report) {
                out += fmt(report->standardized[r * k + i]) + ',';
                out += fmt(report->remainder[r * k + i]);
            } else {
                out += ',';
            }
            out += '\n';
        }
    }
    return out;
}

}  // namespace

std::string replica_csv(const std::vector<ReplicaSummary>& summaries, const CltReport& report) {
    return replica_csv_impl(summaries, &report);
}

std::string replica_csv(const std::vector<ReplicaSummary>& summaries) {
    return replica_csv_impl(summaries, nullptr);
}

std::string trajectory_csv(const UrnParams& params, const Schedule& schedule,
                           const std::vector<StepRecord>& records) {
    const int k = params.k();
    std::string out = "n,xi_index";
    for (int i = 1; i <= k; ++i) out += ",psi_" + std::to_string(i);
    out += ",r_star\n";

    UrnState state = new_state(params);
    for (const auto& rec : records) {
        apply_draw(state, params, schedule, rec.color);
        out += std::to_string(state.n) + ',' + std::to_string(rec.color + 1);
        for (int i = 0; i < k; ++i) out += ',' + fmt(state.psi[i]);
        out += ',' + fmt(state.r_star);
        out += '\n';
    }
    return out;
}

}  // namespace grpurn
