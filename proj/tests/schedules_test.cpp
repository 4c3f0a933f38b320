#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stochprox/schedules.hpp"

using namespace stochprox;

TEST_CASE("step schedule power law with cap") {
  StepSchedule s(0.05, 0.5, 0.01);
  CHECK(s.at(1) == 0.01);             // capped
  CHECK(s.at(100) == doctest::Approx(0.005));
  for (int n = 1; n < 50; ++n) CHECK(s.at(n + 1) <= s.at(n));
  CHECK_THROWS_AS(StepSchedule(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(StepSchedule(1.0, -0.5), std::invalid_argument);
}

TEST_CASE("weight and batch schedules") {
  WeightSchedule w(0.5);
  CHECK(w.at(4) == doctest::Approx(2.0));
  CHECK_THROWS_AS(WeightSchedule(-1.0), std::invalid_argument);

  BatchSchedule affine(200, 1.0, 1.0);  // m_n = 200 + n
  CHECK(affine.at(1) == 201);
  CHECK(affine.at(35) == 235);
  BatchSchedule cubic(45, 1.0 / 6000.0, 3.1);
  CHECK(cubic.at(1) == 45);  // floor(1/6000) = 0
  CHECK(cubic.at(100) >= 45 + 200);
  CHECK(BatchSchedule(0, 0.001, 0.0).at(1) == 1);  // clamped to >= 1
  CHECK(BatchSchedule::constant(7).at(13) == 7);
}

TEST_CASE("t sequences") {
  SUBCASE("recursive recursion and growth") {
    const auto t = make_t_sequence(TSequence::recursive(), 100);
    CHECK(t[0] == 1.0);
    CHECK(t[1] == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0));
    for (int n = 0; n < 100; ++n) {
      CHECK(t[n + 1] == doctest::Approx(0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t[n] * t[n]))));
    }
    // t_n ~ n/2
    CHECK(t[100] / 50.0 > 0.95);
    CHECK(t[100] / 50.0 < 1.05);
  }
  SUBCASE("linear half") {
    const auto t = make_t_sequence(TSequence::linear_half(), 6);
    CHECK(t[0] == 1.0);
    CHECK(t[4] == 3.0);
  }
  SUBCASE("power kind validates beta") {
    CHECK_THROWS_AS(make_t_sequence(TSequence::power(1.2, 2.0), 4), std::invalid_argument);
    CHECK_THROWS_AS(make_t_sequence(TSequence::power(0.5, -1.0), 4), std::invalid_argument);
    const auto t = make_t_sequence(TSequence::power(0.5, 2.0), 4);
    CHECK(t[0] == 1.0);
    CHECK(t[2] == doctest::Approx(std::sqrt(2.0)));
  }
  SUBCASE("ones kind for the degenerate reduction") {
    const auto t = make_t_sequence(TSequence::ones(), 5);
    for (double v : t) CHECK(v == 1.0);
  }
}

TEST_CASE("t-gamma compatibility validation") {
  SUBCASE("nonincreasing gamma passes with recursive and linear-half t") {
    StepSchedule dec(1.0, 0.3);
    CHECK(!validate_t_gamma(dec, TSequence::recursive(), 200));
    CHECK(!validate_t_gamma(dec, TSequence::linear_half(), 200));
    CHECK(!validate_t_gamma(StepSchedule::constant(0.5), TSequence::recursive(), 200));
  }
  SUBCASE("power t with adequate n0 passes") {
    CHECK(!validate_t_gamma(StepSchedule::constant(1.0), TSequence::power(0.5, 2.0), 200));
  }
  SUBCASE("increasing gamma with linear-half t violates at n = 1") {
    // gamma_n = n: gamma_2 t_1 (t_1 - 1) = 2 * 1.5 * 0.5 = 1.5 > gamma_1 t_0^2 = 1
    std::vector<double> gammas(12);
    for (int n = 1; n <= 11; ++n) gammas[static_cast<size_t>(n)] = n;
    const auto t = make_t_sequence(TSequence::linear_half(), 10);
    const auto bad = validate_t_gamma(gammas, t, 10);
    REQUIRE(bad.has_value());
    CHECK(*bad == 1);
  }
  SUBCASE("t_0 != 1 is reported as index 0") {
    std::vector<double> gammas{0.0, 1.0, 1.0};
    std::vector<double> t{2.0, 1.0};
    CHECK(validate_t_gamma(gammas, t, 1) == 0);
  }
}

TEST_CASE("tuning-table rows") {
  SUBCASE("averaged pg, bias row 1") {
    const auto row = schedule_preset(PresetTable::averaged_pg, "bias_1");
    CHECK(row.c.contains(0.0));
    CHECK(row.c.lo == 0.0);
    CHECK(row.c.hi == 0.0);
    const auto a = row.a_range(0.0);
    REQUIRE(a.has_value());
    CHECK(!a->contains(0.0));  // a > 0
    CHECK(a->contains(1.0));
    const auto b = row.b_range(0.0);
    REQUIRE(b.has_value());
    CHECK(b->lo == 1.0);
    CHECK(b->hi == 1.0);
    CHECK(row.rate_exponent(0.0) == 1.0);
    CHECK(row.cost_exponent(1.0, 0.0) == 2.0);
  }
  SUBCASE("fista, no-bias row 1") {
    const auto row = schedule_preset(PresetTable::fista, "no_bias_1");
    CHECK(row.c.lo == 0.0);
    CHECK(row.c.hi == 0.0);
    const auto b = row.b_range(0.0);
    REQUIRE(b.has_value());
    CHECK(!b->contains(3.0));  // b > 3
    CHECK(b->contains(3.1));
    CHECK(row.rate_exponent(0.0) == 2.0);
    CHECK(row.cost_exponent(3.1, 0.0) == doctest::Approx((3.1 + 1.0) / 2.0));
  }
  SUBCASE("averaged pg, no-bias row 2") {
    const auto row = schedule_preset(PresetTable::averaged_pg, "no_bias_2");
    CHECK(row.c.contains(0.0));
    CHECK(row.c.contains(0.5));
    CHECK(!row.c.contains(0.6));
    const auto a = row.a_range(0.25);
    REQUIRE(a.has_value());
    CHECK(!a->contains(-0.25));  // a > -c
    CHECK(a->contains(0.0));
    const auto b = row.b_range(0.25);
    REQUIRE(b.has_value());
    CHECK(b->lo == doctest::Approx(0.5));  // b = 1 - 2c
    CHECK(b->hi == doctest::Approx(0.5));
    CHECK(row.rate_exponent(0.25) == doctest::Approx(0.75));
    CHECK(row.cost_exponent(0.5, 0.25) == 2.0);
  }
  SUBCASE("exact rows have no batch constraint") {
    CHECK(!schedule_preset(PresetTable::averaged_pg, "exact").b_range(0.3).has_value());
    CHECK(std::isnan(schedule_preset(PresetTable::fista, "exact").cost_exponent(1.0, 0.3)));
  }
  SUBCASE("unknown row rejected") {
    CHECK_THROWS_AS(schedule_preset(PresetTable::fista, "nope"), std::invalid_argument);
  }
}
