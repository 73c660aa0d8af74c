#include "capdual/bignum.hpp"

#include <cctype>
#include <cmath>

#include "capdual/error.hpp"

namespace capdual {

BigNat::BigNat(std::uint64_t x) {
    mpz_import(v_.get_mpz_t(), 1, -1, sizeof x, 0, 0, &x);
}

BigNat::BigNat(const mpz_class& z) : v_(z) {
    if (sgn(v_) < 0) throw Error("BigNat: negative value");
}

BigNat BigNat::parse(std::string_view decimal) {
    mpz_class z;
    if (decimal.empty() || z.set_str(std::string(decimal), 10) != 0)
        throw Error("BigNat: not a decimal integer: " + std::string(decimal));
    return BigNat(z);
}

BigNat BigNat::factorial(unsigned long n) {
    BigNat r;
    mpz_fac_ui(r.v_.get_mpz_t(), n);
    return r;
}

BigNat BigNat::binomial(unsigned long n, unsigned long k) {
    BigNat r;
    if (k > n) return r;
    mpz_bin_uiui(r.v_.get_mpz_t(), n, k);
    return r;
}

BigNat& BigNat::operator-=(const BigNat& o) {
    if (cmp(v_, o.v_) < 0) throw Error("BigNat: subtraction underflow");
    v_ -= o.v_;
    return *this;
}

BigNat& BigNat::operator/=(const BigNat& o) {
    if (o.is_zero()) throw Error("BigNat: division by zero");
    if (!mpz_divisible_p(v_.get_mpz_t(), o.v_.get_mpz_t()))
        throw Error("BigNat: inexact division");
    mpz_divexact(v_.get_mpz_t(), v_.get_mpz_t(), o.v_.get_mpz_t());
    return *this;
}

bool BigNat::fits_u64() const { return mpz_sizeinbase(v_.get_mpz_t(), 2) <= 64; }

std::uint64_t BigNat::to_u64() const {
    if (!fits_u64()) throw Error("BigNat: value exceeds 64 bits");
    std::uint64_t out = 0;
    mpz_export(&out, nullptr, -1, sizeof out, 0, 0, v_.get_mpz_t());
    return out;
}

namespace {

double log_mpz(const mpz_t z) {
    long exp2 = 0;
    const double mant = mpz_get_d_2exp(&exp2, z);
    return std::log(std::fabs(mant)) + static_cast<double>(exp2) * std::log(2.0);
}

}  // namespace

LogValue BigNat::log() const {
    if (is_zero()) return LogValue::zero();
    return LogValue::from_log(log_mpz(v_.get_mpz_t()), 1);
}

Rational parse_rational(std::string_view text) {
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    if (s.empty()) throw Error("rational: empty string");
    Rational q;
    if (const auto dot = s.find('.'); dot != std::string::npos && s.find('/') == std::string::npos) {
        // Decimal literal: shift the point into the denominator.
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        const auto frac_len = s.size() - dot - 1;
        mpz_class num;
        if (digits.empty() || digits == "-" || num.set_str(digits, 10) != 0)
            throw Error("rational: malformed decimal '" + s + "'");
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_len);
        q = Rational(num, den);
        q.canonicalize();
        return q;
    }
    if (q.set_str(s, 10) != 0) throw Error("rational: malformed '" + s + "'");
    if (sgn(q.get_den()) == 0) throw Error("rational: zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
}

Rational rationalize(double x, double tol) {
    if (!std::isfinite(x)) throw Error("rationalize: non-finite input");
    // Continued-fraction convergents until within tolerance.
    mpz_class h_prev = 1, h = static_cast<long>(std::floor(x));
    mpz_class k_prev = 0, k = 1;
    double rem = x - std::floor(x);
    for (int iter = 0; iter < 64; ++iter) {
        Rational cur(h, k);
        if (std::fabs(to_double(cur) - x) <= tol) {
            cur.canonicalize();
            return cur;
        }
        if (rem == 0.0) break;
        const double inv = 1.0 / rem;
        const long a = static_cast<long>(std::floor(inv));
        rem = inv - std::floor(inv);
        mpz_class h_next = a * h + h_prev;
        mpz_class k_next = a * k + k_prev;
        h_prev = h;
        k_prev = k;
        h = h_next;
        k = k_next;
    }
    Rational cur(h, k);
    cur.canonicalize();
    if (std::fabs(to_double(cur) - x) > tol)
        throw Error("rationalize: no convergent within tolerance");
    return cur;
}

LogValue log_of(const Rational& q) {
    if (sgn(q) == 0) return LogValue::zero();
    const double l = log_mpz(q.get_num_mpz_t()) - log_mpz(q.get_den_mpz_t());
    return LogValue::from_log(l, sgn(q) > 0 ? 1 : -1);
}

double to_double(const Rational& q) { return q.get_d(); }

std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace capdual
