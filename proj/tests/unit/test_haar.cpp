#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "capdual/error.hpp"
#include "capdual/haar.hpp"
#include "capdual/spectrum.hpp"
#include "support.hpp"

using namespace capdual;

namespace {

bool within(const McEstimate& e, double exact, double sigmas = 4.0) {
    return std::abs(e.mean - Complex(exact)) <= sigmas * e.std_error + 1e-12;
}

}  // namespace

TEST_CASE("SplitMix streams are reproducible and distinct") {
    SplitMixStream a(5, 0), b(5, 0), c(5, 1), d(6, 0);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        CHECK(x != c.next());
        CHECK(x != d.next());
    }
    SplitMixStream u(1, 0);
    double lo = 1, hi = 0, s = 0;
    for (int i = 0; i < 100000; ++i) {
        const double x = u.uniform();
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        s += x;
    }
    CHECK(lo > 0.0);
    CHECK(hi <= 1.0);
    CHECK(s / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("Haar samples are unitary") {
    SplitMixStream rng(3, 0);
    for (int n = 1; n <= 8; ++n) {
        const auto u = sample_haar_unitary(n, rng);
        CHECK(unitarity_defect(u) < 1e-12);
        const auto s = sample_haar_special_unitary(n, rng);
        CHECK(unitarity_defect(s) < 1e-12);
        CHECK(std::abs(s.determinant() - Complex(1.0)) < 1e-12);
    }
    CHECK_THROWS_AS(sample_haar_unitary(0, rng), Error);
    CHECK_THROWS_AS(sample_haar_unitary(9, rng), Error);
}

TEST_CASE("Haar moments of U(2)") {
    SplitMixStream rng(11, 0);
    const int N = 1'000'000;
    double s1 = 0, s2 = 0;
    Complex m = 0;
    double m2 = 0;
    for (int i = 0; i < N; ++i) {
        const auto u = sample_haar_unitary(2, rng);
        const double a = std::norm(u(0, 0));
        s1 += a;
        s2 += a * a;
        m += u(0, 0);
        m2 += std::norm(u(0, 0));
    }
    const double mean = s1 / N, se = std::sqrt((s2 / N - mean * mean) / N);
    CHECK(std::fabs(mean - 0.5) <= 4 * se);
    CHECK(std::abs(m / double(N)) <= 4 * std::sqrt(m2 / N / N));

    // n = 1: uniform phase, so E[u] = 0 and E[u^2] = 0.
    SplitMixStream r1(12, 0);
    Complex z1 = 0, z2 = 0;
    for (int i = 0; i < 200000; ++i) {
        const Complex u = sample_haar_unitary(1, r1)(0, 0);
        CHECK(std::abs(std::abs(u) - 1.0) < 1e-14);
        z1 += u;
        z2 += u * u;
    }
    CHECK(std::abs(z1) / 200000 < 4 / std::sqrt(200000.0));
    CHECK(std::abs(z2) / 200000 < 4 / std::sqrt(200000.0));
}

TEST_CASE("U(2) character matches the eigenvalue formula") {
    SplitMixStream rng(21, 0);
    for (int t = 0; t < 50; ++t) {
        const Eigen::Matrix2cd u = sample_haar_unitary(2, rng);
        Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(u);
        const Complex a = es.eigenvalues()(0), b = es.eigenvalues()(1);
        for (int l1 = 0; l1 <= 5; ++l1)
            for (int l2 = 0; l2 <= l1; ++l2) {
                Complex h = 0;
                for (int i = 0; i <= l1 - l2; ++i) h += std::pow(a, i) * std::pow(b, l1 - l2 - i);
                const Complex ref = std::pow(a * b, l2) * h;
                CHECK(std::abs(u2_character(Partition{l1, l2}, u) - ref) < 1e-10);
            }
    }
    // Degenerate (scalar) matrices need no special casing.
    const Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
    CHECK(u2_character(Partition{3, 1}, I).real() == doctest::Approx(3.0));
    CHECK_THROWS_AS(u2_character(Partition{1, 1, 1}, I), Error);
}

TEST_CASE("torus Monte Carlo examples") {
    const double h = std::sqrt(0.5);
    const WeightedVector v(1, {{WeightVector{1}, h}, {WeightVector{-1}, h}});
    const auto e = mc_invariant_norm(v, 2, 1'000'000, 1);
    CHECK(within(e, 0.5));
    const auto odd = mc_invariant_norm(v, 3, 1'000'000, 2);
    CHECK(within(odd, 0.0));
    const auto iso = mc_isotypic_norm(v, 2, WeightVector{2}, 1'000'000, 3);
    CHECK(within(iso, 0.25));
    CHECK_THROWS_AS(mc_invariant_norm(v, 9, 100, 1), Error);
    CHECK_THROWS_AS(mc_invariant_norm(v, 2, 1, 1), Error);
    CHECK_THROWS_AS(mc_isotypic_norm(v, 2, WeightVector{0, 0}, 100, 1), Error);
}

TEST_CASE("SU(2) and U(2) Monte Carlo examples") {
    const Eigen::Vector2cd e1(1.0, 0.0);
    const auto su = UnitaryRep::standard(UnitaryGroup::SU, e1);
    CHECK(within(mc_invariant_norm(su, 2, 1'000'000, 4), 0.0));
    CHECK(unitary_isotypic_exact(su, 2, Partition{0}) == 0.0);
    CHECK(within(mc_isotypic_norm(su, 2, Partition{2}, 1'000'000, 5), 1.0));
    CHECK(within(mc_isotypic_norm(su, 2, Partition{1, 1}, 1'000'000, 6), 0.0));

    // Left multiplication with A A^dagger of spectrum (0.7, 0.3): the U(2) isotypic
    // norms at k = 3 are f^lambda s_lambda(0.7, 0.3).
    Eigen::Matrix2cd A;
    A << std::sqrt(0.7), 0, 0, std::sqrt(0.3);
    const auto u2 = UnitaryRep::matrix(UnitaryGroup::U, A);
    const std::vector<double> q{0.7, 0.3};
    double total = 0;
    for (const auto& lam : partitions_of(3, 2)) {
        const double exact = schur_weyl_weight(lam, q).to_double();
        total += exact;
        CHECK(unitary_isotypic_exact(u2, 3, lam) == doctest::Approx(exact));
        CHECK(within(mc_isotypic_norm(u2, 3, lam, 1'000'000, 7), exact));
    }
    CHECK(total == doctest::Approx(1.0));
    CHECK_THROWS_AS(mc_isotypic_norm(UnitaryRep::standard(UnitaryGroup::U, Eigen::Vector3cd(1, 0, 0)), 2, Partition{2}, 100, 1), Error);
}

TEST_CASE("serial and parallel estimates are bit-identical") {
    testing::Rng rng(5);
    const auto v = testing::random_vector(rng, 2, 4, 2, true);
    const auto a = mc_invariant_norm(v, 4, 100'000, 9, Exec::serial);
    const auto b = mc_invariant_norm(v, 4, 100'000, 9, Exec::parallel);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    const auto rep = UnitaryRep::standard(UnitaryGroup::U, Eigen::Vector2cd(0.6, Complex(0, 0.8)));
    const auto c = mc_isotypic_norm(rep, 3, Partition{2, 1}, 50'000, 3, Exec::serial);
    const auto d = mc_isotypic_norm(rep, 3, Partition{2, 1}, 50'000, 3, Exec::parallel);
    CHECK(c.mean == d.mean);
    const auto e = mc_isotypic_norm(rep, 3, Partition{2, 1}, 50'000, 4, Exec::serial);
    CHECK(c.mean != e.mean);
}
