#include <doctest.h>

#include <cmath>

#include "capdual/error.hpp"
#include "capdual/projection.hpp"
#include "support.hpp"

using namespace capdual;
using testing::rationals;

namespace {

const double kHalf = std::sqrt(0.5);

WeightedVector binomial() { return WeightedVector(1, {{WeightVector{1}, kHalf}, {WeightVector{-1}, kHalf}}); }

double log_binom_over_2k(long k) { return testing::log_mpz(testing::binom(k, k / 2)) - k * std::log(2.0); }

}  // namespace

TEST_CASE("projection table examples") {
    const auto t = projection_norm_table(binomial(), 7);
    CHECK(t.at(2, WeightVector{0}).to_double() == doctest::Approx(0.5));
    for (long k : {1, 3, 5, 7}) CHECK(t.at(k, WeightVector{0}).is_zero());
    for (long k = 1; k <= 7; ++k) CHECK(t.at(k, WeightVector{k}).log_abs() == doctest::Approx(-k * std::log(2.0)));
    CHECK(t.at(3, WeightVector{99}).is_zero());
    CHECK_THROWS_AS(t.at(8, WeightVector{0}), Error);
    CHECK_THROWS_AS(t.at(2, WeightVector{0, 0}), Error);
    CHECK(t.entries(4).size() == 5);
}

TEST_CASE("property: table equals brute-force tuple enumeration, serial equals parallel") {
    testing::Rng rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.integer(1, 3));
        const auto v = testing::random_vector(rng, n, static_cast<std::size_t>(rng.integer(1, 4)), 2);
        const int k = static_cast<int>(rng.integer(1, 5));
        const auto ts = projection_norm_table(v, k, Exec::serial);
        const auto tp = projection_norm_table(v, k, Exec::parallel);
        const auto ref = testing::brute_projection(v, k);
        for (const auto& [w, val] : ref)
            CHECK(ts.at(k, WeightVector(w)).to_double() == doctest::Approx(val).epsilon(1e-12));
        const auto es = ts.entries(k), ep = tp.entries(k);
        REQUIRE(es.size() == ep.size());
        for (std::size_t i = 0; i < es.size(); ++i) {
            CHECK(es[i].first == ep[i].first);
            CHECK(es[i].second == ep[i].second);
        }
        CHECK(es.size() == ref.size());
    }
}

TEST_CASE("property: completeness, supermultiplicativity and weak duality on random instances") {
    testing::Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.integer(1, 2));
        const auto v = testing::random_vector(rng, n, static_cast<std::size_t>(rng.integer(1, 5)), 2);
        const long K = 8;
        const auto t = projection_norm_table(v, K);
        const double log_norm = std::log(v.norm_sq());
        for (long k = 1; k <= K; ++k)
            CHECK(t.total(k).log_abs() == doctest::Approx(k * log_norm).epsilon(1e-12).scale(1));

        const long k = rng.integer(1, 4), l = rng.integer(1, 4);
        for (const auto& [a, va] : t.entries(k))
            for (const auto& [b, vb] : t.entries(l)) {
                std::vector<std::int64_t> s(n);
                for (std::size_t i = 0; i < n; ++i) s[i] = a[i] + b[i];
                CHECK(t.at(k + l, WeightVector(s)).log_abs() >= va.log_abs() + vb.log_abs() - 1e-12);
            }

        for (const auto& [lam, val] : t.entries(K)) {
            RationalVector th(n);
            for (std::size_t i = 0; i < n; ++i) th[i] = testing::frac(static_cast<long>(lam[i]), K);
            const auto cap = theta_capacity(v, th);
            REQUIRE_FALSE(cap.cap.is_zero());
            CHECK(val.log_abs() / K <= 2.0 * cap.log_cap() + 1e-9);
        }
    }
}

TEST_CASE("ray values match the table and the exact binomial") {
    const auto v = binomial();
    const auto ray = projection_ray(v, rationals({"0"}), 200);
    REQUIRE(ray.size() == 200);
    for (const auto& p : ray) {
        if (p.k % 2 == 1) {
            CHECK(p.norm_sq.is_zero());
            continue;
        }
        CHECK(p.norm_sq.log_abs() == doctest::Approx(log_binom_over_2k(p.k)).epsilon(1e-11));
    }

    testing::Rng rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.integer(1, 2));
        const auto w = testing::random_vector(rng, n, static_cast<std::size_t>(rng.integer(2, 5)), 2);
        const long K = 12;
        const auto t = projection_norm_table(w, K);
        RationalVector th(n);
        for (auto& x : th) x = testing::frac(rng.integer(-4, 4), rng.integer(1, 3));
        const auto rs = projection_ray(w, th, K, Exec::serial);
        const auto rp = projection_ray(w, th, K, Exec::parallel);
        REQUIRE(rs.size() == rp.size());
        for (std::size_t i = 0; i < rs.size(); ++i) {
            CHECK(rs[i].k == rp[i].k);
            CHECK(rs[i].norm_sq == rp[i].norm_sq);
            std::vector<std::int64_t> lam(n);
            bool integral = true;
            for (std::size_t d = 0; d < n; ++d) {
                const Rational x = th[d] * rs[i].k;
                integral = integral && x.get_den() == 1;
                lam[d] = x.get_num().get_si();
            }
            REQUIRE(integral);
            const auto ref = t.at(rs[i].k, WeightVector(lam));
            CHECK(rs[i].norm_sq.is_zero() == ref.is_zero());
            if (!ref.is_zero()) CHECK(rs[i].norm_sq.log_abs() == doctest::Approx(ref.log_abs()).epsilon(1e-9).scale(1));
        }
        // Every nonzero table entry on the ray shows up.
        std::size_t on_ray = 0;
        for (long k = 1; k <= K; ++k) {
            std::vector<std::int64_t> lam(n);
            bool integral = true;
            for (std::size_t d = 0; d < n; ++d) {
                const Rational x = th[d] * k;
                integral = integral && x.get_den() == 1;
                if (integral) lam[d] = x.get_num().get_si();
            }
            if (integral && !t.at(k, WeightVector(lam)).is_zero()) ++on_ray;
        }
        std::size_t nonzero = 0;
        for (const auto& p : rs) nonzero += !p.norm_sq.is_zero();
        CHECK(on_ray == nonzero);
    }
}

TEST_CASE("duality report examples") {
    const auto pure = WeightedVector(1, {{WeightVector{1}, 1.0}});
    const auto r = duality_report(pure, rationals({"1"}), 20);
    REQUIRE(r.rows.size() == 20);
    for (const auto& row : r.rows) CHECK(row.gap == doctest::Approx(0.0).scale(1).epsilon(1e-12));

    const auto b = duality_report(binomial(), rationals({"0"}), 200);
    REQUIRE(b.rows.size() == 100);
    CHECK(b.rows.back().k == 200);
    CHECK(std::exp(b.rows.back().rate / 2.0) == doctest::Approx(std::exp(log_binom_over_2k(200) / 400.0)));
    for (std::size_t i = 1; i < b.rows.size(); ++i) CHECK(b.rows[i].gap <= b.rows[i - 1].gap + 1e-12);
    for (const auto& row : b.rows) CHECK(row.gap >= -1e-12);

    CHECK(duality_report(binomial(), rationals({"2"}), 10).rows.empty());
}

TEST_CASE("prefactor sequence") {
    const auto s = prefactor_sequence(binomial(), 10000);
    CHECK(s.d == 1);
    CHECK(s.period == 2);
    REQUIRE_FALSE(s.values.empty());
    CHECK(s.values.back().first == 10000);
    CHECK(s.values.back().second == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-3));
    const double exact = std::exp(0.5 * std::log(10000.0) + log_binom_over_2k(10000));
    CHECK(s.values.back().second == doctest::Approx(exact).epsilon(1e-10));

    const auto point = WeightedVector(2, {{WeightVector{0, 0}, 1.0}});
    const auto p = prefactor_sequence(point, 20);
    CHECK(p.d == 0);
    for (const auto& [k, val] : p.values) CHECK(val == doctest::Approx(1.0));

    CHECK_THROWS_AS(prefactor_sequence(WeightedVector(1, {{WeightVector{1}, 1.0}}), 10), Error);
    CHECK_THROWS_AS(prefactor_sequence(WeightedVector(1, {{WeightVector{1}, 1.0}, {WeightVector{-1}, 1.0}}), 10), Error);
}

TEST_CASE("difference lattice data") {
    const WeightedVector sq(2, {{WeightVector{1, 0}, 0.5}, {WeightVector{-1, 0}, 0.5}, {WeightVector{0, 1}, 0.5},
                                {WeightVector{0, -1}, 0.5}});
    CHECK(difference_rank(sq) == 2);
    CHECK(stabilizer_period(sq) == 2);
    CHECK(difference_rank(binomial()) == 1);
    const WeightedVector tri(2, {{WeightVector{1, 0}, 1.0}, {WeightVector{0, 1}, 1.0}, {WeightVector{-1, -1}, 1.0}});
    CHECK(stabilizer_period(tri) == 3);
}

TEST_CASE("memory guard names the extent") {
    const WeightedVector v(3, {{WeightVector{1000, 0, 0}, 1.0}, {WeightVector{0, 1000, 0}, 1.0},
                               {WeightVector{0, 0, 1000}, 1.0}, {WeightVector{-1000, -1000, -1000}, 1.0}});
    try {
        projection_norm_table(v, 50, Exec::serial, 1 << 20);
        FAIL("expected BudgetError");
    } catch (const BudgetError& e) {
        CHECK(std::string(e.what()).find("extent") != std::string::npos);
    }
    CHECK_THROWS_AS(projection_ray(v, rationals({"0", "0", "0"}), 200, Exec::serial, 1 << 20), BudgetError);
}
