#include "grpurn/urn.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace grpurn {

namespace {

// psi drift is renormalized away on this cadence; the drift itself must stay
// far below the renormalization, or the state has been corrupted.
constexpr std::int64_t kRenormInterval = 10000;
constexpr double kMaxDrift = 1e-9;

}  // namespace

UrnParams UrnParams::make(std::vector<double> b0, std::vector<double> B0) {
    if (b0.empty() || b0.size() != B0.size()) {
        throw InvalidParams("b0 and B0 must be non-empty and the same length");
    }
    double b0_norm = 0.0;
    for (std::size_t i = 0; i < b0.size(); ++i) {
        if (!std::isfinite(b0[i]) || !std::isfinite(B0[i]) || b0[i] < 0.0 || B0[i] < 0.0) {
            throw InvalidParams("b0 and B0 must be finite and non-negative");
        }
        if (!(b0[i] + B0[i] > 0.0)) {
            throw InvalidParams("initial composition requires b0_i + B0_i > 0 for every color");
        }
        b0_norm += b0[i];
    }
    if (!(b0_norm > 0.0)) throw InvalidParams("|b0| must be positive");

    UrnParams p;
    p.p0.resize(b0.size());
    for (std::size_t i = 0; i < b0.size(); ++i) p.p0[i] = b0[i] / b0_norm;
    p.b0 = std::move(b0);
    p.B0 = std::move(B0);
    p.b0_norm = b0_norm;
    return p;
}

UrnState new_state(const UrnParams& params) {
    UrnState s;
    s.balls = params.B0;
    s.r_star = params.b0_norm;
    for (double v : params.B0) s.r_star += v;
    s.psi.resize(params.b0.size());
    for (std::size_t i = 0; i < s.psi.size(); ++i) {
        s.psi[i] = (params.b0[i] + params.B0[i]) / s.r_star;
    }
    s.counts.assign(params.b0.size(), 0);
    return s;
}

void apply_draw(UrnState& state, const UrnParams& params, const Schedule& schedule,
                int color, StepRecord* record) {
    const int k = params.k();
    if (color < 0 || color >= k) throw InvalidParams("drawn color out of range");

    const double beta_n = schedule.beta(state.n);
    const double alpha_next = schedule.alpha(state.n + 1);
    const double r_next = beta_n * state.r_star + (1.0 - beta_n) * params.b0_norm + alpha_next;

    if (record) {
        record->n = state.n + 1;
        record->color = color;
        record->psi_before = state.psi;
        record->delta_m.resize(k);
        for (int i = 0; i < k; ++i) {
            record->delta_m[i] = (i == color ? 1.0 : 0.0) - state.psi[i];
        }
        record->eps = params.b0_norm * (1.0 - beta_n) / r_next;
        record->del = alpha_next / r_next;
    }

    for (int i = 0; i < k; ++i) state.balls[i] *= beta_n;
    state.balls[color] += alpha_next;
    state.r_star = r_next;
    for (int i = 0; i < k; ++i) state.psi[i] = (params.b0[i] + state.balls[i]) / r_next;
    state.counts[color] += 1;
    state.n += 1;

    if (++state.steps_since_renorm >= kRenormInterval) {
        double sum = 0.0;
        for (double v : state.psi) sum += v;
        if (std::fabs(sum - 1.0) > kMaxDrift) {
            throw Error("psi drift " + std::to_string(sum - 1.0) +
                        " exceeds 1e-9 before renormalization; state is corrupted");
        }
        for (double& v : state.psi) v /= sum;
        double fresh = params.b0_norm;
        for (double v : state.balls) fresh += v;
        state.r_star = fresh;
        state.steps_since_renorm = 0;
    }
}

int step(UrnState& state, const UrnParams& params, const Schedule& schedule,
         RandomStream& stream, StepRecord* record) {
    const int color = sample_categorical(stream, state.psi);
    apply_draw(state, params, schedule, color, record);
    return color;
}

std::vector<double> closed_form_psi(const UrnParams& params, const Schedule& schedule,
                                    const std::vector<int>& history) {
    const int k = params.k();
    const auto n = static_cast<std::int64_t>(history.size());
    for (int c : history) {
        if (c < 0 || c >= k) throw InvalidParams("history entry out of range");
    }

    // backward pass: g_h = prod_{j=h}^{n-1} beta_j, g_n = 1
    std::vector<double> numer(params.b0);
    double denom = params.b0_norm;
    double tail_product = 1.0;
    double weight_sum = 0.0;
    std::vector<double> weighted(k, 0.0);
    for (std::int64_t h = n; h >= 1; --h) {
        const double f = schedule.alpha(h) * tail_product;
        weighted[history[static_cast<std::size_t>(h - 1)]] += f;
        weight_sum += f;
        tail_product *= schedule.beta(h - 1);  // extends the product down to j = h-1
    }
    // tail_product is now prod_{j=0}^{n-1} beta_j
    for (int i = 0; i < k; ++i) numer[i] += params.B0[i] * tail_product + weighted[i];
    double B0_norm = 0.0;
    for (double v : params.B0) B0_norm += v;
    denom += B0_norm * tail_product + weight_sum;

    std::vector<double> psi(k);
    for (int i = 0; i < k; ++i) psi[i] = numer[i] / denom;
    return psi;
}

WeightProfile weight_profile(const Schedule& schedule, std::int64_t n) {
    if (n < 1) throw OutOfRange("weight_profile requires n >= 1");
    const double neg_inf = -std::numeric_limits<double>::infinity();

    std::vector<double> log_f(static_cast<std::size_t>(n));
    double log_tail = 0.0;  // log prod_{j=h}^{n-1} beta_j, running backward
    for (std::int64_t h = n; h >= 1; --h) {
        log_f[static_cast<std::size_t>(h - 1)] = std::log(schedule.alpha(h)) + log_tail;
        const double beta = schedule.beta(h - 1);
        log_tail += (beta > 0.0) ? std::log(beta) : neg_inf;
    }

    WeightProfile out;
    out.weights.resize(log_f.size());
    for (std::size_t i = 0; i < log_f.size(); ++i) {
        out.weights[i] = std::isinf(log_f[i]) ? 0.0 : std::exp(log_f[i]);
    }
    // last descent in log_f determines the monotone tail
    std::int64_t h_star = 1;
    for (std::size_t i = 1; i < log_f.size(); ++i) {
        if (log_f[i] < log_f[i - 1]) h_star = static_cast<std::int64_t>(i) + 1;
    }
    out.h_star = h_star;
    out.monotone_tail_found = (n == 1) || (h_star < n);
    return out;
}

EpsDel epsilon_delta(const Schedule& schedule, const UrnParams& params, double r_star_next,
                     std::int64_t n) {
    if (!(r_star_next > 0.0)) throw InvalidParams("epsilon_delta requires r*_{n+1} > 0");
    return {params.b0_norm * (1.0 - schedule.beta(n)) / r_star_next,
            schedule.alpha(n + 1) / r_star_next};
}

}  // namespace grpurn
