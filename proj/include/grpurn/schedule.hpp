#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "grpurn/errors.hpp"

namespace grpurn {

enum class ScheduleVariant {
    Example1,
    Example2,
    StandardPolya,
    RescaledPolya,
    PemantlePower,
    PemantleExp,
    MemoryOne,
    Custom,
};

std::string_view variant_name(ScheduleVariant v);

// Serializable descriptor of a named schedule. Only the fields belonging to
// `variant` are meaningful; from_spec() rebuilds the evaluators.
struct ScheduleSpec {
    ScheduleVariant variant = ScheduleVariant::Custom;
    double c = 0.0;          // Example1
    double eps = 0.0;        // Example1, Example2
    double delta = 0.0;      // Example2
    double b0_norm = 0.0;    // Example1, Example2
    std::int64_t offset = 0; // Example2 index shift
    double alpha = 0.0;      // StandardPolya, RescaledPolya, MemoryOne
    double beta = 0.0;       // RescaledPolya
    double a = 0.0;          // PemantlePower (prefactor), PemantleExp (exponent in n^a)
    double exponent = 0.0;   // PemantlePower
    double b = 0.0;          // PemantleExp prefactor
    bool burnin_clamp = false;      // Example1: clamp beta_n < 0 to 0 for early n
    std::int64_t first_valid_n = 0; // Example1: first n with formula beta_n >= 0
};

// Parameter sequences (alpha_n)_{n>=1}, (beta_n)_{n>=0}. Evaluation is pure;
// values are validated on every call so a bad closure fails loudly, not as NaN
// propagation ten modules later.
class Schedule {
public:
    using Fn = std::function<double(std::int64_t)>;

    Schedule(Fn alpha_fn, Fn beta_fn, ScheduleSpec spec)
        : alpha_(std::move(alpha_fn)), beta_(std::move(beta_fn)), spec_(std::move(spec)) {}

    double alpha(std::int64_t n) const;  // n >= 1; must be finite and > 0
    double beta(std::int64_t n) const;   // n >= 0; must be finite and >= 0

    const ScheduleSpec& spec() const { return spec_; }

private:
    Fn alpha_;
    Fn beta_;
    ScheduleSpec spec_;
};

// beta_n = 1 - (1+c)(1+n)^(-eps), alpha_n = c*|b0|*(1+c)*n^(-eps). Keeping
// r*_n constant at (1+c)|b0| requires |B0| = c|b0|, returned as a constraint
// for the caller. For small n the formula gives beta_n < 0; without the clamp
// that is a DegenerateSchedule error naming the first offending index. With
// clamp_burnin the offending beta are clamped to 0 and alpha stays coupled as
// alpha_{n+1} = c|b0|(1 - beta_n), which preserves the constant r* exactly.
struct Example1Schedule {
    Schedule schedule;
    double required_B0_norm;
    std::int64_t first_valid_n;
};
Example1Schedule example1(double c, double eps, double b0_norm, bool clamp_burnin = false);

// gamma = eps - delta; 1 - beta_n = (1/|b0|)(1+n+offset)^(-delta);
// alpha_{n+1} = (n+1+offset)^gamma - (n+offset)^gamma [1 - (1/|b0|)(1+n+offset)^(-delta)]
//               - (1+n+offset)^(-delta).
// The index shift keeps every alpha strictly positive (the unshifted formula
// yields alpha_1 = 0). By construction r*_n = (n+offset)^gamma, so the caller
// must start the urn with |b0| + |B0| = offset^gamma; the required |B0| is
// returned. Resulting eps_n = (n+1+offset)^(-eps) exactly.
struct Example2Schedule {
    Schedule schedule;
    double required_B0_norm;
};
Example2Schedule example2(double eps, double delta, double b0_norm, std::int64_t offset);

// Smallest offset <= 10^4 making all alpha_n positive and offset^gamma >= |b0|;
// throws PositivityFailure if none exists.
std::int64_t example2_min_offset(double eps, double delta, double b0_norm);

Schedule standard_polya(double alpha);
Schedule rescaled_polya(double alpha, double beta);
// alpha_n = a * n^(-exponent), beta_n = 1
Schedule pemantle_power(double a, double exponent);
// cumulative A_n = exp(b n^a), i.e. alpha_n = exp(b n^a) - exp(b (n-1)^a); beta_n = 1
Schedule pemantle_exp(double b, double a);
Schedule memory_one(double alpha);
// Library-level escape hatch; not serializable.
Schedule memory_one(Schedule::Fn alpha_fn);
Schedule custom_schedule(Schedule::Fn alpha_fn, Schedule::Fn beta_fn);

Schedule from_spec(const ScheduleSpec& spec);

// JSON form {"variant": "...", "params": {...}} with canonical field order and
// floating parameters printed with 17 significant digits, so serialization
// round-trips bit-exactly.
std::string to_json(const ScheduleSpec& spec);
ScheduleSpec schedule_spec_from_json(std::string_view text);

}  // namespace grpurn
