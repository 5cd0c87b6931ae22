#include "grpurn/schedule.hpp"

#include <cmath>
#include <cstdio>
#include <utility>
#include <vector>

#include <json.hpp>

namespace grpurn {

std::string_view variant_name(ScheduleVariant v) {
    switch (v) {
        case ScheduleVariant::Example1: return "example1";
        case ScheduleVariant::Example2: return "example2";
        case ScheduleVariant::StandardPolya: return "standard_polya";
        case ScheduleVariant::RescaledPolya: return "rescaled_polya";
        case ScheduleVariant::PemantlePower: return "pemantle_power";
        case ScheduleVariant::PemantleExp: return "pemantle_exp";
        case ScheduleVariant::MemoryOne: return "memory_one";
        case ScheduleVariant::Custom: return "custom";
    }
    return "custom";
}

double Schedule::alpha(std::int64_t n) const {
    if (n < 1) throw ScheduleDomain("alpha_n is defined for n >= 1");
    const double v = alpha_(n);
    if (!std::isfinite(v) || !(v > 0.0)) {
        throw ScheduleDomain("alpha_" + std::to_string(n) + " = " + std::to_string(v) +
                             " violates alpha > 0");
    }
    return v;
}

double Schedule::beta(std::int64_t n) const {
    if (n < 0) throw ScheduleDomain("beta_n is defined for n >= 0");
    const double v = beta_(n);
    if (!std::isfinite(v) || v < 0.0) {
        throw ScheduleDomain("beta_" + std::to_string(n) + " = " + std::to_string(v) +
                             " violates beta >= 0");
    }
    return v;
}

Example1Schedule example1(double c, double eps, double b0_norm, bool clamp_burnin) {
    if (!(c > 0.0)) throw OutOfRange("example1 requires c > 0");
    if (!(eps > 0.0) || eps > 1.0) throw OutOfRange("example1 requires eps in (0, 1]");
    if (!(b0_norm > 0.0)) throw OutOfRange("example1 requires |b0| > 0");

    // beta_n >= 0  <=>  (1+n)^eps >= 1+c  <=>  n >= (1+c)^(1/eps) - 1
    const std::int64_t first_valid =
        static_cast<std::int64_t>(std::ceil(std::pow(1.0 + c, 1.0 / eps) - 1.0 - 1e-12));
    if (first_valid > 0 && !clamp_burnin) {
        throw DegenerateSchedule(
            "example1(c=" + std::to_string(c) + ", eps=" + std::to_string(eps) +
                "): beta_n < 0 for n < " + std::to_string(first_valid) +
                " (first offending n = 0); request the burn-in clamp or start later",
            0);
    }

    auto beta_fn = [c, eps, clamp_burnin](std::int64_t n) {
        const double v = 1.0 - (1.0 + c) * std::pow(1.0 + static_cast<double>(n), -eps);
        return (clamp_burnin && v < 0.0) ? 0.0 : v;
    };
    // alpha_{n+1} = c |b0| (1 - beta_n); with the clamp this coupling (rather
    // than the raw power law) is what keeps r* constant through the burn-in.
    auto alpha_fn = [c, b0_norm, beta_fn](std::int64_t n) {
        return c * b0_norm * (1.0 - beta_fn(n - 1));
    };

    ScheduleSpec spec;
    spec.variant = ScheduleVariant::Example1;
    spec.c = c;
    spec.eps = eps;
    spec.b0_norm = b0_norm;
    spec.burnin_clamp = clamp_burnin;
    spec.first_valid_n = first_valid;
    return {Schedule(std::move(alpha_fn), std::move(beta_fn), std::move(spec)),
            c * b0_norm, first_valid};
}

namespace {

double example2_alpha(double gamma, double delta, double inv_b0, std::int64_t m) {
    // alpha_{n+1} with m = n + offset:
    //   (m+1)^gamma - m^gamma + (m^gamma * inv_b0 - 1) (1+m)^(-delta)
    // The difference of powers is computed via expm1 to survive large m.
    const double mg = std::pow(static_cast<double>(m), gamma);
    const double diff = (m == 0) ? 1.0 : mg * std::expm1(gamma * std::log1p(1.0 / static_cast<double>(m)));
    return diff + (mg * inv_b0 - 1.0) * std::pow(1.0 + static_cast<double>(m), -delta);
}

bool example2_all_positive(double eps, double delta, double b0_norm, std::int64_t offset) {
    const double gamma = eps - delta;
    const double inv_b0 = 1.0 / b0_norm;
    // r*_0 = offset^gamma must cover |b0|
    if (std::pow(static_cast<double>(offset), gamma) < b0_norm - 1e-12) return false;
    // Beyond m >= |b0|^(1/gamma) both alpha terms are nonnegative; below that,
    // check every index explicitly.
    const double m_safe = std::pow(b0_norm, 1.0 / gamma);
    const auto check_to = static_cast<std::int64_t>(std::ceil(m_safe)) + 2;
    for (std::int64_t m = offset; m <= std::max(check_to, offset + 64); ++m) {
        if (!(example2_alpha(gamma, delta, inv_b0, m) > 0.0)) return false;
    }
    return true;
}

}  // namespace

std::int64_t example2_min_offset(double eps, double delta, double b0_norm) {
    for (std::int64_t off = 1; off <= 10000; ++off) {
        if (example2_all_positive(eps, delta, b0_norm, off)) return off;
    }
    throw PositivityFailure("example2: no offset <= 10^4 makes every alpha_n positive", -1);
}

Example2Schedule example2(double eps, double delta, double b0_norm, std::int64_t offset) {
    if (!(eps > 0.0) || !(eps < 1.0)) throw OutOfRange("example2 requires eps in (0, 1)");
    if (!(delta > eps / 2.0) || !(delta < eps)) {
        throw OutOfRange("example2 requires delta in (eps/2, eps)");
    }
    if (!(b0_norm > 0.0)) throw OutOfRange("example2 requires |b0| > 0");
    if (offset < 0) throw OutOfRange("example2 requires offset >= 0");

    if (offset == 0 || !example2_all_positive(eps, delta, b0_norm, offset)) {
        std::int64_t suggestion = -1;
        try {
            suggestion = example2_min_offset(eps, delta, b0_norm);
        } catch (const PositivityFailure&) {
        }
        throw PositivityFailure(
            "example2: alpha_n not strictly positive at offset " + std::to_string(offset) +
                (suggestion > 0 ? "; smallest working offset is " + std::to_string(suggestion)
                                : "; no offset <= 10^4 works"),
            suggestion);
    }

    const double gamma = eps - delta;
    const double inv_b0 = 1.0 / b0_norm;
    auto beta_fn = [delta, inv_b0, offset](std::int64_t n) {
        return 1.0 - inv_b0 * std::pow(1.0 + static_cast<double>(n + offset), -delta);
    };
    auto alpha_fn = [gamma, delta, inv_b0, offset](std::int64_t n) {
        return example2_alpha(gamma, delta, inv_b0, n - 1 + offset);
    };

    ScheduleSpec spec;
    spec.variant = ScheduleVariant::Example2;
    spec.eps = eps;
    spec.delta = delta;
    spec.b0_norm = b0_norm;
    spec.offset = offset;
    const double required_B0 = std::pow(static_cast<double>(offset), gamma) - b0_norm;
    return {Schedule(std::move(alpha_fn), std::move(beta_fn), std::move(spec)), required_B0};
}

Schedule standard_polya(double alpha) {
    if (!(alpha > 0.0)) throw OutOfRange("standard_polya requires alpha > 0");
    ScheduleSpec spec;
    spec.variant = ScheduleVariant::StandardPolya;
    spec.alpha = alpha;
    return Schedule([alpha](std::int64_t) { return alpha; },
                    [](std::int64_t) { return 1.0; }, std::move(spec));
}

Schedule rescaled_polya(double alpha, double beta) {
    if (!(alpha > 0.0)) throw OutOfRange("rescaled_polya requires alpha > 0");
    if (beta < 0.0) throw OutOfRange("rescaled_polya requires beta >= 0");
    ScheduleSpec spec;
    spec.variant = ScheduleVariant::RescaledPolya;
    spec.alpha = alpha;
    spec.beta = beta;
    return Schedule([alpha](std::int64_t) { return alpha; },
                    [beta](std::int64_t) { return beta; }, std::move(spec));
}

Schedule pemantle_power(double a, double exponent) {
    if (!(a > 0.0)) throw OutOfRange("pemantle_power requires a > 0");
    ScheduleSpec spec;
    spec.variant = ScheduleVariant::PemantlePower;
    spec.a = a;
    spec.exponent = exponent;
    return Schedule(
        [a, exponent](std::int64_t n) { return a * std::pow(static_cast<double>(n), -exponent); },
        [](std::int64_t) { return 1.0; }, std::move(spec));
}

Schedule pemantle_exp(double b, double a) {
    if (!(b > 0.0)) throw OutOfRange("pemantle_exp requires b > 0");
    if (!(a > 0.0) || !(a < 0.5)) throw OutOfRange("pemantle_exp requires a in (0, 0.5)");
    ScheduleSpec spec;
    spec.variant = ScheduleVariant::PemantleExp;
    spec.b = b;
    spec.a = a;
    return Schedule(
        [b, a](std::int64_t n) {
            // exp(b n^a) - exp(b (n-1)^a), stable split through expm1
            const double cur = b * std::pow(static_cast<double>(n), a);
            const double prev = (n == 1) ? 0.0 : b * std::pow(static_cast<double>(n - 1), a);
            return std::exp(prev) * std::expm1(cur - prev);
        },
        [](std::int64_t) { return 1.0; }, std::move(spec));
}

Schedule memory_one(double alpha) {
    if (!(alpha > 0.0)) throw OutOfRange("memory_one requires alpha > 0");
    ScheduleSpec spec;
    spec.variant = ScheduleVariant::MemoryOne;
    spec.alpha = alpha;
    return Schedule([alpha](std::int64_t) { return alpha; },
                    [](std::int64_t) { return 0.0; }, std::move(spec));
}

Schedule memory_one(Schedule::Fn alpha_fn) {
    ScheduleSpec spec;
    spec.variant = ScheduleVariant::Custom;
    return Schedule(std::move(alpha_fn), [](std::int64_t) { return 0.0; }, std::move(spec));
}

Schedule custom_schedule(Schedule::Fn alpha_fn, Schedule::Fn beta_fn) {
    ScheduleSpec spec;
    spec.variant = ScheduleVariant::Custom;
    return Schedule(std::move(alpha_fn), std::move(beta_fn), std::move(spec));
}

Schedule from_spec(const ScheduleSpec& spec) {
    switch (spec.variant) {
        case ScheduleVariant::Example1:
            return example1(spec.c, spec.eps, spec.b0_norm, spec.burnin_clamp).schedule;
        case ScheduleVariant::Example2:
            return example2(spec.eps, spec.delta, spec.b0_norm, spec.offset).schedule;
        case ScheduleVariant::StandardPolya:
            return standard_polya(spec.alpha);
        case ScheduleVariant::RescaledPolya:
            return rescaled_polya(spec.alpha, spec.beta);
        case ScheduleVariant::PemantlePower:
            return pemantle_power(spec.a, spec.exponent);
        case ScheduleVariant::PemantleExp:
            return pemantle_exp(spec.b, spec.a);
        case ScheduleVariant::MemoryOne:
            return memory_one(spec.alpha);
        case ScheduleVariant::Custom:
            throw InvalidParams("a custom schedule has no serializable form");
    }
    throw InvalidParams("unknown schedule variant");
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Canonical parameter order per variant.
std::vector<std::pair<std::string, std::string>> param_fields(const ScheduleSpec& s) {
    using P = std::pair<std::string, std::string>;
    switch (s.variant) {
        case ScheduleVariant::Example1: {
            std::vector<P> out{{"c", fmt17(s.c)}, {"eps", fmt17(s.eps)},
                               {"b0_norm", fmt17(s.b0_norm)},
                               {"burnin_clamp", s.burnin_clamp ? "true" : "false"}};
            if (s.burnin_clamp) out.emplace_back("first_valid_n", std::to_string(s.first_valid_n));
            return out;
        }
        case ScheduleVariant::Example2:
            return {{"eps", fmt17(s.eps)}, {"delta", fmt17(s.delta)},
                    {"b0_norm", fmt17(s.b0_norm)}, {"offset", std::to_string(s.offset)}};
        case ScheduleVariant::StandardPolya:
        case ScheduleVariant::MemoryOne:
            return {{"alpha", fmt17(s.alpha)}};
        case ScheduleVariant::RescaledPolya:
            return {{"alpha", fmt17(s.alpha)}, {"beta", fmt17(s.beta)}};
        case ScheduleVariant::PemantlePower:
            return {{"a", fmt17(s.a)}, {"exponent", fmt17(s.exponent)}};
        case ScheduleVariant::PemantleExp:
            return {{"b", fmt17(s.b)}, {"a", fmt17(s.a)}};
        case ScheduleVariant::Custom:
            break;
    }
    throw InvalidParams("a custom schedule has no serializable form");
}

}  // namespace

std::string to_json(const ScheduleSpec& spec) {
    std::string out = "{\"variant\": \"";
    out += variant_name(spec.variant);
    out += "\", \"params\": {";
    bool first = true;
    for (const auto& [key, value] : param_fields(spec)) {
        if (!first) out += ", ";
        first = false;
        out += "\"" + key + "\": " + value;
    }
    out += "}}";
    return out;
}

ScheduleSpec schedule_spec_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("schedule JSON: ") + e.what(), 0);
    }
    if (!j.contains("variant") || !j["variant"].is_string()) {
        throw ParseError("schedule JSON: missing \"variant\"", 0);
    }
    const std::string name = j["variant"].get<std::string>();
    const auto params = j.value("params", nlohmann::json::object());
    auto need = [&](const char* key) -> double {
        if (!params.contains(key)) {
            throw ParseError("schedule JSON: variant \"" + name + "\" requires param \"" + key + "\"", 0);
        }
        return params[key].get<double>();
    };

    ScheduleSpec s;
    if (name == "example1") {
        s.variant = ScheduleVariant::Example1;
        s.c = need("c");
        s.eps = need("eps");
        s.b0_norm = need("b0_norm");
        s.burnin_clamp = params.value("burnin_clamp", false);
        if (s.burnin_clamp) {
            s.first_valid_n = static_cast<std::int64_t>(
                std::ceil(std::pow(1.0 + s.c, 1.0 / s.eps) - 1.0 - 1e-12));
        }
    } else if (name == "example2") {
        s.variant = ScheduleVariant::Example2;
        s.eps = need("eps");
        s.delta = need("delta");
        s.b0_norm = need("b0_norm");
        s.offset = params.value("offset", std::int64_t{0});
    } else if (name == "standard_polya") {
        s.variant = ScheduleVariant::StandardPolya;
        s.alpha = need("alpha");
    } else if (name == "rescaled_polya") {
        s.variant = ScheduleVariant::RescaledPolya;
        s.alpha = need("alpha");
        s.beta = need("beta");
    } else if (name == "pemantle_power") {
        s.variant = ScheduleVariant::PemantlePower;
        s.a = need("a");
        s.exponent = need("exponent");
    } else if (name == "pemantle_exp") {
        s.variant = ScheduleVariant::PemantleExp;
        s.b = need("b");
        s.a = need("a");
    } else if (name == "memory_one") {
        s.variant = ScheduleVariant::MemoryOne;
        s.alpha = need("alpha");
    } else {
        throw ParseError(
            "schedule JSON: unknown variant \"" + name +
                "\"; valid variants: example1, example2, standard_polya, rescaled_polya, "
                "pemantle_power, pemantle_exp, memory_one",
            0);
    }
    return s;
}

}  // namespace grpurn
