#pragma once

// Seeded generators and brute-force oracles shared by the unit tests.

#include <gmpxx.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "capdual/bignum.hpp"
#include "capdual/torus.hpp"
#include "capdual/types.hpp"

namespace testing {

// xorshift64*; deliberately unrelated to the library's SplitMix streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_(seed * 2654435761ULL + 0x9E3779B97F4A7C15ULL) {
        if (s_ == 0) s_ = 1;
    }
    std::uint64_t next() {
        s_ ^= s_ >> 12;
        s_ ^= s_ << 25;
        s_ ^= s_ >> 27;
        return s_ * 0x2545F4914F6CDD1DULL;
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    long integer(long lo, long hi) { return lo + static_cast<long>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
    double gauss() {
        const double u = 1.0 - uniform(), v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
    }

private:
    std::uint64_t s_;
};

// Random torus vector: rank n, up to m distinct weights with entries in [-r, r],
// complex amplitudes.
inline capdual::WeightedVector random_vector(Rng& rng, std::size_t n, std::size_t m, long r, bool unit = false) {
    std::set<std::vector<std::int64_t>> seen;
    std::vector<capdual::WeightedVector::Term> terms;
    while (terms.size() < m) {
        std::vector<std::int64_t> w(n);
        for (auto& x : w) x = rng.integer(-r, r);
        if (!seen.insert(w).second) {
            if (seen.size() >= static_cast<std::size_t>(std::pow(2 * r + 1, n))) break;
            continue;
        }
        terms.push_back({capdual::WeightVector(w), {rng.uniform(0.1, 1.0), rng.uniform(-0.5, 0.5)}});
    }
    if (unit) {
        double s = 0;
        for (const auto& t : terms) s += std::norm(t.amplitude);
        for (auto& t : terms) t.amplitude /= std::sqrt(s);
    }
    return capdual::WeightedVector(n, terms);
}

// |Pi_{k,lambda} v^(x)k|^2 by enumerating every k-tuple of terms.
inline std::map<std::vector<std::int64_t>, double> brute_projection(const capdual::WeightedVector& v, int k) {
    std::map<std::vector<std::int64_t>, double> out;
    const auto terms = v.terms();
    std::vector<std::int64_t> sum(v.rank(), 0);
    std::function<void(int, double)> rec = [&](int depth, double prod) {
        if (depth == k) {
            out[sum] += prod;
            return;
        }
        for (const auto& t : terms) {
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += t.weight[i];
            rec(depth + 1, prod * std::norm(t.amplitude));
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] -= t.weight[i];
        }
    };
    rec(0, 1.0);
    return out;
}

// F(x) = -2<theta,x> + log sum q_w e^{2<w,x>} minimized by cyclic golden-section search.
inline double brute_log_cap_sq(const capdual::WeightedVector& v, const std::vector<double>& theta, double box = 30.0) {
    const std::size_t n = v.rank();
    auto F = [&](const std::vector<double>& x) {
        double mx = -1e300;
        std::vector<double> e;
        for (const auto& t : v.terms()) {
            double s = 0;
            for (std::size_t i = 0; i < n; ++i) s += 2.0 * static_cast<double>(t.weight[i]) * x[i];
            e.push_back(s + std::log(std::norm(t.amplitude)));
            mx = std::max(mx, e.back());
        }
        double acc = 0;
        for (double z : e) acc += std::exp(z - mx);
        double lin = 0;
        for (std::size_t i = 0; i < n; ++i) lin += theta[i] * x[i];
        return mx + std::log(acc) - 2.0 * lin;
    };
    std::vector<double> x(n, 0.0);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int sweep = 0; sweep < 60; ++sweep)
        for (std::size_t i = 0; i < n; ++i) {
            double a = -box, b = box;
            for (int it = 0; it < 120; ++it) {
                const double c = b - g * (b - a), d = a + g * (b - a);
                auto xc = x, xd = x;
                xc[i] = c;
                xd[i] = d;
                if (F(xc) < F(xd)) b = d;
                else a = c;
            }
            x[i] = 0.5 * (a + b);
        }
    return F(x);
}

// Semistandard tableaux sum: s_lambda(x) = sum_T x^T.
inline double brute_schur(const std::vector<int>& lambda, const std::vector<double>& x) {
    std::vector<std::vector<int>> t;
    for (int len : lambda)
        if (len > 0) t.emplace_back(static_cast<std::size_t>(len), 0);
    const int n = static_cast<int>(x.size());
    std::vector<std::pair<int, int>> cells;
    for (std::size_t r = 0; r < t.size(); ++r)
        for (std::size_t c = 0; c < t[r].size(); ++c) cells.emplace_back(static_cast<int>(r), static_cast<int>(c));
    double total = 0;
    std::function<void(std::size_t, double)> rec = [&](std::size_t idx, double prod) {
        if (idx == cells.size()) {
            total += prod;
            return;
        }
        const auto [r, c] = cells[idx];
        int lo = 0;
        if (c > 0) lo = std::max(lo, t[r][c - 1]);
        if (r > 0) lo = std::max(lo, t[r - 1][c] + 1);
        for (int v = lo; v < n; ++v) {
            t[r][c] = v;
            rec(idx + 1, prod * x[static_cast<std::size_t>(v)]);
        }
    };
    rec(0, 1.0);
    return total;
}

// Standard Young tableaux count by removing corners recursively.
inline mpz_class brute_syt(std::vector<int> lambda) {
    while (!lambda.empty() && lambda.back() == 0) lambda.pop_back();
    if (lambda.empty()) return 1;
    mpz_class total = 0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        const bool corner = i + 1 == lambda.size() || lambda[i + 1] < lambda[i];
        if (!corner) continue;
        auto mu = lambda;
        --mu[i];
        total += brute_syt(mu);
    }
    return total;
}

inline mpz_class binom(unsigned long n, unsigned long k) {
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

inline double log_mpz(const mpz_class& z) {
    long e = 0;
    const double m = mpz_get_d_2exp(&e, z.get_mpz_t());
    return std::log(m) + static_cast<double>(e) * std::log(2.0);
}

inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0) s += p[i] * std::log(p[i] / q[i]);
    return s;
}

inline std::vector<capdual::Rational> rationals(std::initializer_list<const char*> xs) {
    std::vector<capdual::Rational> out;
    for (const char* x : xs) out.push_back(capdual::parse_rational(x));
    return out;
}

// Canonical p/q (mpq_class(p, q) is not reduced, and GMP needs reduced operands).
inline capdual::Rational frac(long p, long q) {
    capdual::Rational r(p, q);
    r.canonicalize();
    return r;
}

}  // namespace testing
