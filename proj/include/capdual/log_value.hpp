#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>

namespace capdual {

/// Signed real stored as (sign, log|x|). Quantities that decay like e^{-ck}
/// stay representable for k far beyond the range of IEEE doubles.
class LogValue {
public:
    constexpr LogValue() = default;

    static constexpr LogValue zero() { return LogValue{}; }
    static LogValue one() { return from_log(0.0); }
    static LogValue from_log(double log_mag, int sign = 1);
    static LogValue from_double(double x);

    int sign() const { return sign_; }
    bool is_zero() const { return sign_ == 0; }
    /// Natural log of |x|; -inf for zero.
    double log_abs() const {
        return sign_ == 0 ? -std::numeric_limits<double>::infinity() : log_mag_;
    }
    double to_double() const;

    LogValue operator-() const;
    LogValue& operator*=(const LogValue& o);
    LogValue& operator/=(const LogValue& o);
    LogValue& operator+=(const LogValue& o);
    LogValue& operator-=(const LogValue& o) { return *this += -o; }

    friend LogValue operator*(LogValue a, const LogValue& b) { return a *= b; }
    friend LogValue operator/(LogValue a, const LogValue& b) { return a /= b; }
    friend LogValue operator+(LogValue a, const LogValue& b) { return a += b; }
    friend LogValue operator-(LogValue a, const LogValue& b) { return a -= b; }

    LogValue pow(double exponent) const;

    friend bool operator==(const LogValue& a, const LogValue& b) {
        return a.sign_ == b.sign_ && (a.sign_ == 0 || a.log_mag_ == b.log_mag_);
    }

    std::string str() const;

private:
    int sign_ = 0;
    double log_mag_ = 0.0;
};

/// Signed sum of a list of log-domain values. Positive and negative parts are
/// accumulated separately and combined once; an empty list sums to zero.
LogValue log_sum_exp(std::span<const LogValue> values);

/// log(e^a + e^b) for plain doubles, with -inf as the additive identity.
inline double log_add(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

/// log C(k, j) via lgamma.
double log_binomial(long long k, long long j);

/// log k!
double log_factorial(long long k);

}  // namespace capdual
