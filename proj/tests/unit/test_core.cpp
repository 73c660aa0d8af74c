#include <doctest.h>

#include <cmath>

#include "capdual/bignum.hpp"
#include "capdual/error.hpp"
#include "capdual/log_value.hpp"
#include "capdual/rational_lp.hpp"
#include "capdual/types.hpp"
#include "support.hpp"

using namespace capdual;

TEST_CASE("log_sum_exp examples") {
    const LogValue two = LogValue::from_log(std::log(2.0));
    const std::vector<LogValue> a{two, two};
    CHECK(log_sum_exp(a).log_abs() == doctest::Approx(std::log(4.0)).epsilon(1e-15));
    CHECK(log_sum_exp(a).sign() == 1);

    const LogValue three = LogValue::from_log(std::log(3.0));
    const std::vector<LogValue> b{three, -three};
    CHECK(log_sum_exp(b).sign() == 0);

    const LogValue x = LogValue::from_double(-0.125);
    const std::vector<LogValue> c{x};
    CHECK(log_sum_exp(c) == x);
    CHECK(log_sum_exp(std::vector<LogValue>{}).is_zero());
}

TEST_CASE("LogValue arithmetic keeps signs and survives underflow") {
    const LogValue tiny = LogValue::from_log(-5000.0);
    const LogValue sq = tiny * tiny;
    CHECK(sq.log_abs() == doctest::Approx(-10000.0));
    CHECK((sq / tiny).log_abs() == doctest::Approx(-5000.0));
    CHECK((LogValue::from_double(2.0) - LogValue::from_double(5.0)).to_double() == doctest::Approx(-3.0));
    CHECK(LogValue::from_double(-2.0).pow(3.0).to_double() == doctest::Approx(-8.0));
    CHECK_THROWS_AS(LogValue::from_double(-2.0).pow(0.5), Error);
    CHECK_THROWS_AS(LogValue::one() / LogValue::zero(), Error);
    CHECK_THROWS_AS(LogValue::from_double(std::nan("")), Error);
    CHECK(log_add(-std::numeric_limits<double>::infinity(), 1.5) == 1.5);
}

TEST_CASE("log_sum_exp property: matches long double sums") {
    testing::Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<LogValue> xs;
        long double ref = 0;
        const int m = static_cast<int>(rng.integer(1, 12));
        for (int i = 0; i < m; ++i) {
            const double x = rng.uniform(-10, 10);
            xs.push_back(LogValue::from_double(x));
            ref += x;
        }
        CHECK(log_sum_exp(xs).to_double() == doctest::Approx(static_cast<double>(ref)).epsilon(1e-9).scale(10));
    }
}

TEST_CASE("log_binomial examples and exact oracle") {
    CHECK(log_binomial(2, 1) == doctest::Approx(std::log(2.0)));
    CHECK(log_binomial(7, 0) == 0.0);
    const double exact = testing::log_mpz(testing::binom(200, 100));
    CHECK(std::fabs(log_binomial(200, 100) - exact) <= 1e-10 * exact);
    testing::Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        const long k = rng.integer(0, 3000), j = rng.integer(0, k);
        const double e = testing::log_mpz(testing::binom(static_cast<unsigned long>(k), static_cast<unsigned long>(j)));
        CHECK(log_binomial(k, j) == doctest::Approx(e).epsilon(1e-10).scale(1));
    }
    CHECK_THROWS_AS(log_binomial(3, 4), Error);
    CHECK_THROWS_AS(log_binomial(3, -1), Error);
    CHECK(log_factorial(10) == doctest::Approx(std::log(3628800.0)));
}

TEST_CASE("BigNat") {
    CHECK(BigNat::factorial(20).to_u64() == 2432902008176640000ULL);
    CHECK(BigNat::binomial(60, 30) == BigNat(testing::binom(60, 30)));
    CHECK(BigNat::parse("123456789012345678901234567890").str() == "123456789012345678901234567890");
    CHECK_THROWS_AS(BigNat(3) - BigNat(4), Error);
    CHECK_THROWS_AS(BigNat(7) / BigNat(2), Error);
    CHECK_THROWS_AS(BigNat::parse("12a"), Error);
    CHECK_FALSE(BigNat::factorial(30).fits_u64());
    CHECK(BigNat::factorial(100).log().log_abs() == doctest::Approx(std::lgamma(101.0)).epsilon(1e-14));
    CHECK(BigNat(0).log().is_zero());
}

TEST_CASE("rationals") {
    CHECK(parse_rational("3/6") == Rational(1, 2));
    CHECK(parse_rational("0.25") == Rational(1, 4));
    CHECK(parse_rational("-1.5") == Rational(-3, 2));
    CHECK(parse_rational("7") == Rational(7));
    CHECK_THROWS_AS(parse_rational("1/0"), Error);
    CHECK_THROWS_AS(parse_rational(""), Error);
    CHECK_THROWS_AS(parse_rational("0.2.5"), Error);
    CHECK(rationalize(0.3333333333333) == Rational(1, 3));
    CHECK(rationalize(0.7) == Rational(7, 10));
    CHECK(log_of(Rational(1, 8)).log_abs() == doctest::Approx(-std::log(8.0)));
}

TEST_CASE("partitions and vectors") {
    CHECK_THROWS_AS(Partition({1, 2}), Error);
    CHECK_THROWS_AS(Partition({2, -1}), Error);
    const Partition p{3, 1, 0};
    CHECK(p.length() == 2);
    CHECK(p.size() == 4);
    CHECK(p[5] == 0);
    const auto ps = partitions_of(5, 2);
    REQUIRE(ps.size() == 3);
    CHECK(ps[0] == Partition{5, 0});
    CHECK(ps[2] == Partition{3, 2});
    // p(10) = 42 partitions in total.
    CHECK(partitions_of(10, 10).size() == 42);

    CHECK_THROWS_AS(WeightVector(std::vector<std::int64_t>{}), Error);
    CHECK_THROWS_AS(WeightVector(std::vector<std::int64_t>{2'000'000}), Error);
    CHECK_THROWS_AS(WeightedVector(1, {{WeightVector{1}, 1.0}, {WeightVector{1}, 2.0}}), Error);
    CHECK_THROWS_AS(WeightedVector(2, {{WeightVector{1}, 1.0}}), Error);
    CHECK_THROWS_AS(WeightedVector(1, {{WeightVector{1}, Complex(std::nan(""), 0)}}), Error);
    const WeightedVector v(1, {{WeightVector{1}, 0.6}, {WeightVector{-1}, Complex(0, 0.8)}, {WeightVector{0}, 0.0}});
    CHECK(v.norm_sq() == doctest::Approx(1.0));
    CHECK(v.pruned().size() == 2);

    CHECK_THROWS_AS(ProbVector({0.5, 0.6}), Error);
    CHECK_THROWS_AS(ProbVector({1.5, -0.5}), Error);
    CHECK(ProbVector({0.7, 0.3}).sorted_decreasing());
    CHECK_FALSE(ProbVector({0.3, 0.7}).sorted_decreasing());
}

TEST_CASE("exact simplex") {
    // max x + y s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
    RationalMatrix A(2, 4);
    A(0, 0) = 1, A(0, 1) = 2, A(0, 2) = 1;
    A(1, 0) = 3, A(1, 1) = 1, A(1, 3) = 1;
    const auto r = solve_standard_lp(A, {4, 6}, {1, 1, 0, 0});
    REQUIRE(r.status == LpResult::Status::optimal);
    CHECK(r.objective == Rational(14, 5));
    CHECK(r.x[0] == Rational(8, 5));
    CHECK(r.x[1] == Rational(6, 5));

    // x1 + x2 = -1 with x >= 0 is infeasible; the Farkas vector certifies it.
    RationalMatrix B(1, 2);
    B(0, 0) = 1, B(0, 1) = 1;
    const auto inf = solve_standard_lp(B, {-1}, {0, 0});
    REQUIRE(inf.status == LpResult::Status::infeasible);
    REQUIRE(inf.farkas.size() == 1);
    CHECK(inf.farkas[0] * B(0, 0) >= 0);
    CHECK(inf.farkas[0] * Rational(-1) < 0);

    RationalMatrix C(1, 2);
    C(0, 0) = 1, C(0, 1) = -1;
    CHECK(solve_standard_lp(C, {0}, {1, 0}).status == LpResult::Status::unbounded);
}
