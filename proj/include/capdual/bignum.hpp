#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "capdual/log_value.hpp"

namespace capdual {

/// Exact nonnegative integer. Subtraction below zero throws.
class BigNat {
public:
    BigNat() = default;
    BigNat(std::uint64_t x);  // NOLINT(google-explicit-constructor)
    explicit BigNat(const mpz_class& z);
    static BigNat parse(std::string_view decimal);

    static BigNat factorial(unsigned long n);
    static BigNat binomial(unsigned long n, unsigned long k);

    BigNat& operator+=(const BigNat& o) { v_ += o.v_; return *this; }
    BigNat& operator-=(const BigNat& o);
    BigNat& operator*=(const BigNat& o) { v_ *= o.v_; return *this; }
    /// Exact division; throws if o does not divide *this.
    BigNat& operator/=(const BigNat& o);

    friend BigNat operator+(BigNat a, const BigNat& b) { return a += b; }
    friend BigNat operator-(BigNat a, const BigNat& b) { return a -= b; }
    friend BigNat operator*(BigNat a, const BigNat& b) { return a *= b; }
    friend BigNat operator/(BigNat a, const BigNat& b) { return a /= b; }

    friend bool operator==(const BigNat& a, const BigNat& b) { return cmp(a.v_, b.v_) == 0; }
    friend std::strong_ordering operator<=>(const BigNat& a, const BigNat& b) {
        const int c = cmp(a.v_, b.v_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    bool is_zero() const { return sgn(v_) == 0; }
    bool fits_u64() const;
    std::uint64_t to_u64() const;
    std::string str() const { return v_.get_str(); }
    /// Natural log; zero maps to the zero LogValue.
    LogValue log() const;
    const mpz_class& raw() const { return v_; }

private:
    mpz_class v_{0};
};

/// Exact rational number (GMP-backed).
using Rational = mpq_class;

/// Parses "p/q", "p", or a decimal literal such as "0.25" into an exact rational.
Rational parse_rational(std::string_view text);

/// Best rational approximation with |r - x| <= tol, smallest denominator.
Rational rationalize(double x, double tol = 1e-9);

/// Natural log of a positive rational; LogValue keeps the sign.
LogValue log_of(const Rational& q);

double to_double(const Rational& q);
std::string to_string(const Rational& q);

}  // namespace capdual
