#pragma once

#include <cstdint>
#include <vector>

#include "grpurn/rng.hpp"
#include "grpurn/schedule.hpp"

namespace grpurn {

// Immutable urn configuration: the intrinsic composition b0, the rescalable
// initial composition B0, and the derived long-run probabilities p0 = b0/|b0|.
struct UrnParams {
    std::vector<double> b0;
    std::vector<double> B0;
    std::vector<double> p0;
    double b0_norm = 0.0;

    static UrnParams make(std::vector<double> b0, std::vector<double> B0);
    int k() const { return static_cast<int>(b0.size()); }
};

// Live state of one trajectory.
struct UrnState {
    std::int64_t n = 0;                // extractions performed so far
    std::vector<double> balls;         // B_n
    double r_star = 0.0;               // |b0| + |B_n|, tracked by its recursion
    std::vector<double> psi;           // predictive means
    std::vector<std::int64_t> counts;  // O_i
    std::int64_t steps_since_renorm = 0;
};

struct StepRecord {
    std::int64_t n = 0;  // index of the step that produced this record (draw xi_n)
    int color = -1;
    std::vector<double> psi_before;  // psi_{n-1}
    std::vector<double> delta_m;     // xi_n - psi_{n-1}
    double eps = 0.0;                // eps_{n-1}
    double del = 0.0;                // delta_{n-1}
};

UrnState new_state(const UrnParams& params);

// Draw xi_{n+1} from psi_n and apply the reinforcement update
//   B_{n+1} = beta_n B_n + alpha_{n+1} xi_{n+1}
//   r*_{n+1} = beta_n r*_n + (1 - beta_n)|b0| + alpha_{n+1}.
// Returns the drawn color. `record`, when non-null, receives the transition
// quantities; long runs leave it null and stream statistics instead.
int step(UrnState& state, const UrnParams& params, const Schedule& schedule,
         RandomStream& stream, StepRecord* record = nullptr);

// Same update with the color imposed; used by tests and the closed-form replay.
void apply_draw(UrnState& state, const UrnParams& params, const Schedule& schedule,
                int color, StepRecord* record = nullptr);

// psi_n from the explicit formula
//   psi_n = [b0 + B0 P(0,n) + sum_h f(h,n) xi_h] / [|b0| + |B0| P(0,n) + sum_h f(h,n)]
// with f(h,n) = alpha_h prod_{j=h}^{n-1} beta_j. history holds drawn colors.
std::vector<double> closed_form_psi(const UrnParams& params, const Schedule& schedule,
                                    const std::vector<int>& history);

struct WeightProfile {
    std::vector<double> weights;  // f(1,n) .. f(n,n)
    std::int64_t h_star = 0;      // smallest h (1-based) with f non-decreasing from h on
    bool monotone_tail_found = false;  // false when only the trivial tail h = n qualifies
};

// Observation weights f(h,n), evaluated in log space so products of many
// beta_j < 1 underflow to exact zeros instead of denormal garbage.
WeightProfile weight_profile(const Schedule& schedule, std::int64_t n);

struct EpsDel {
    double eps;
    double del;
};

// eps_n = |b0|(1 - beta_n)/r*_{n+1}, delta_n = alpha_{n+1}/r*_{n+1}.
EpsDel epsilon_delta(const Schedule& schedule, const UrnParams& params, double r_star_next,
                     std::int64_t n);

}  // namespace grpurn
