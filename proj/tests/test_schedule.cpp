#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "grpurn/rng.hpp"
#include "grpurn/schedule.hpp"
#include "grpurn/urn.hpp"

using namespace grpurn;

TEST_CASE("example1 rejects early negative beta without the clamp") {
    // c=1, eps=0.5: beta_n >= 0 iff (1+n)^0.5 >= 2, i.e. n >= 3
    CHECK_THROWS_AS(example1(1.0, 0.5, 1.0), DegenerateSchedule);
    try {
        example1(1.0, 0.5, 1.0);
    } catch (const DegenerateSchedule& e) {
        CHECK(e.first_offending_n == 0);
    }
    const auto built = example1(1.0, 0.5, 1.0, /*clamp_burnin=*/true);
    CHECK(built.first_valid_n == 3);
    CHECK(built.required_B0_norm == doctest::Approx(1.0));
    CHECK(built.schedule.beta(0) == 0.0);  // clamped
    CHECK(built.schedule.beta(2) == 0.0);  // (1+2)^0.5 < 2, still clamped
    CHECK(built.schedule.beta(3) == doctest::Approx(1.0 - 2.0 / 2.0).epsilon(1e-12));  // exactly 0
    CHECK(built.schedule.beta(8) == doctest::Approx(1.0 - 2.0 / 3.0));
}

TEST_CASE("example1 formula values at c=1, eps=1") {
    // beta_0 = -c < 0 for every c, so construction always needs the clamp
    const auto built = example1(1.0, 1.0, 2.5, true);
    CHECK(built.first_valid_n == 1);
    CHECK(built.schedule.beta(10) == doctest::Approx(1.0 - 2.0 / 11.0).epsilon(1e-14));
    CHECK(built.schedule.alpha(10) == doctest::Approx(2.5 * 2.0 / 10.0).epsilon(1e-14));
}

TEST_CASE("example1 keeps r* constant on trajectory replay") {
    const double b0_norm = 1.0;
    const auto built = example1(1.0, 0.5, b0_norm, true);
    const auto params =
        UrnParams::make({1.0 / 6, 1.0 / 3, 0.5}, {1.0 / 6, 1.0 / 3, 0.5});  // |B0| = c|b0|
    auto state = new_state(params);
    RandomStream stream(11);
    const double expected = 2.0 * b0_norm;
    for (int n = 0; n < 20000; ++n) {
        step(state, params, built.schedule, stream);
        REQUIRE(std::fabs(state.r_star - expected) <= 1e-9 * expected);
    }
}

TEST_CASE("example1 domain validation") {
    CHECK_THROWS_AS(example1(-1.0, 0.5, 1.0), OutOfRange);
    CHECK_THROWS_AS(example1(1.0, 0.0, 1.0), OutOfRange);
    CHECK_THROWS_AS(example1(1.0, 1.5, 1.0), OutOfRange);
    CHECK_THROWS_AS(example1(1.0, 0.5, 0.0), OutOfRange);
}

TEST_CASE("example2 needs the index shift") {
    // offset 0 gives alpha_1 = 0; the error carries the smallest working offset
    try {
        example2(0.75, 0.5, 1.0, 0);
        FAIL("expected PositivityFailure");
    } catch (const PositivityFailure& e) {
        CHECK(e.suggested_offset == 1);
    }
    CHECK_THROWS_AS(example2(0.75, 0.5, 1.0, 0), PositivityFailure);
    CHECK_NOTHROW(example2(0.75, 0.5, 1.0, 1));
    CHECK(example2_min_offset(0.75, 0.5, 1.0) == 1);
}

TEST_CASE("example2 parameter ranges") {
    CHECK_THROWS_AS(example2(1.2, 0.8, 1.0, 1), OutOfRange);
    CHECK_THROWS_AS(example2(0.75, 0.2, 1.0, 1), OutOfRange);  // delta <= eps/2
    CHECK_THROWS_AS(example2(0.75, 0.8, 1.0, 1), OutOfRange);  // delta >= eps
    CHECK_THROWS_AS(example2(0.75, 0.5, -1.0, 1), OutOfRange);
}

TEST_CASE("example2 beta tends to one and alpha stays positive far out") {
    const auto built = example2(0.75, 0.5, 1.0, 1);
    double prev = built.schedule.beta(0);
    for (std::int64_t n : {1LL, 10LL, 100LL, 10000LL, 1000000LL}) {
        const double b = built.schedule.beta(n);
        CHECK(b > prev);
        prev = b;
        CHECK(built.schedule.alpha(n) > 0.0);
    }
    CHECK(built.schedule.beta(1000000) > 0.999);
    CHECK(built.required_B0_norm == doctest::Approx(0.0));  // offset^gamma - |b0| = 0
}

TEST_CASE("example2 replayed r* follows (n+offset)^gamma") {
    const auto built = example2(0.75, 0.5, 1.0, 1);
    const auto params = UrnParams::make({1.0 / 6, 1.0 / 3, 0.5}, {0.0, 0.0, 0.0});
    auto state = new_state(params);
    RandomStream stream(13);
    const double gamma = 0.25;
    for (int n = 1; n <= 20000; ++n) {
        step(state, params, built.schedule, stream);
        const double want = std::pow(static_cast<double>(n) + 1.0, gamma);
        REQUIRE(std::fabs(state.r_star - want) <= 1e-9 * want);
    }
}

TEST_CASE("simple constructors and their domains") {
    auto sp = standard_polya(2.0);
    CHECK(sp.alpha(7) == 2.0);
    CHECK(sp.beta(7) == 1.0);
    CHECK_THROWS_AS(standard_polya(0.0), OutOfRange);

    auto rp = rescaled_polya(1.0, 0.5);
    CHECK(rp.alpha(3) == 1.0);
    CHECK(rp.beta(3) == 0.5);
    CHECK_THROWS_AS(rescaled_polya(1.0, -0.1), OutOfRange);

    auto pp = pemantle_power(1.0, 2.0);
    CHECK(pp.alpha(10) == doctest::Approx(0.01));
    CHECK(pp.beta(10) == 1.0);

    auto pe = pemantle_exp(0.5, 0.3);
    // alpha_n = exp(b n^a) - exp(b (n-1)^a)
    CHECK(pe.alpha(1) == doctest::Approx(std::exp(0.5) - 1.0).epsilon(1e-12));
    CHECK(pe.alpha(5) ==
          doctest::Approx(std::exp(0.5 * std::pow(5.0, 0.3)) - std::exp(0.5 * std::pow(4.0, 0.3)))
              .epsilon(1e-12));
    CHECK_THROWS_AS(pemantle_exp(0.5, 0.7), OutOfRange);

    auto mo = memory_one(1.5);
    CHECK(mo.beta(0) == 0.0);
    CHECK(mo.alpha(4) == 1.5);
}

TEST_CASE("all named schedules have positive alpha at log-spaced indices") {
    std::vector<Schedule> schedules;
    schedules.push_back(example1(1.0, 0.5, 1.0, true).schedule);
    schedules.push_back(example1(0.5, 1.0, 2.0, true).schedule);
    schedules.push_back(example2(0.75, 0.5, 1.0, 1).schedule);
    schedules.push_back(example2(0.6, 0.35, 2.0, example2_min_offset(0.6, 0.35, 2.0)).schedule);
    schedules.push_back(standard_polya(1.0));
    schedules.push_back(rescaled_polya(2.0, 0.25));
    schedules.push_back(pemantle_power(1.0, 2.0));
    schedules.push_back(pemantle_exp(1.0, 0.25));
    schedules.push_back(memory_one(1.0));
    for (const auto& s : schedules) {
        for (std::int64_t n = 1; n <= 1000000; n *= 10) {
            REQUIRE(s.alpha(n) > 0.0);
            REQUIRE(s.beta(n) >= 0.0);
        }
    }
}

TEST_CASE("schedule evaluation validates closures") {
    auto bad = custom_schedule([](std::int64_t) { return -1.0; },
                               [](std::int64_t) { return 0.5; });
    CHECK_THROWS_AS(bad.alpha(1), ScheduleDomain);
    auto nan_beta = custom_schedule([](std::int64_t) { return 1.0; },
                                    [](std::int64_t) { return std::nan(""); });
    CHECK_THROWS_AS(nan_beta.beta(0), ScheduleDomain);
    CHECK_THROWS_AS(nan_beta.alpha(0), ScheduleDomain);  // n >= 1
}

TEST_CASE("spec JSON round-trips bit-exactly for every variant") {
    std::vector<ScheduleSpec> specs;
    specs.push_back(example1(1.0, 0.5, 1.0, true).schedule.spec());
    specs.push_back(example1(0.3, 1.0, 1.0 / 3.0, true).schedule.spec());
    specs.push_back(example2(0.75, 0.5, 1.0, 1).schedule.spec());
    specs.push_back(standard_polya(0.1 + 0.2).spec());  // 0.30000000000000004
    specs.push_back(rescaled_polya(1.0, 0.5).spec());
    specs.push_back(pemantle_power(1.0, 2.0).spec());
    specs.push_back(pemantle_exp(0.5, 0.3).spec());
    specs.push_back(memory_one(1.5).spec());

    for (const auto& s : specs) {
        const std::string json = to_json(s);
        const ScheduleSpec back = schedule_spec_from_json(json);
        CHECK(to_json(back) == json);
        CHECK(back.variant == s.variant);
        // doubles must round-trip to identical bits
        CHECK(std::memcmp(&back.c, &s.c, sizeof(double)) == 0);
        CHECK(std::memcmp(&back.eps, &s.eps, sizeof(double)) == 0);
        CHECK(std::memcmp(&back.alpha, &s.alpha, sizeof(double)) == 0);
        CHECK(std::memcmp(&back.a, &s.a, sizeof(double)) == 0);
    }

    CHECK_THROWS_AS(schedule_spec_from_json("{\"variant\": \"polya_deluxe\"}"), ParseError);
    CHECK_THROWS_AS(schedule_spec_from_json("not json"), ParseError);

    ScheduleSpec custom;
    CHECK_THROWS_AS(to_json(custom), InvalidParams);
    CHECK_THROWS_AS(from_spec(custom), InvalidParams);
}
