#include "capdual/log_value.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

#include "capdual/error.hpp"

namespace capdual {

LogValue LogValue::from_log(double log_mag, int sign) {
    LogValue v;
    if (sign == 0 || log_mag == -std::numeric_limits<double>::infinity()) return v;
    if (std::isnan(log_mag)) throw Error("LogValue: NaN magnitude");
    v.sign_ = sign > 0 ? 1 : -1;
    v.log_mag_ = log_mag;
    return v;
}

LogValue LogValue::from_double(double x) {
    if (std::isnan(x) || std::isinf(x)) throw Error("LogValue: non-finite input");
    if (x == 0.0) return {};
    return from_log(std::log(std::fabs(x)), x > 0 ? 1 : -1);
}

double LogValue::to_double() const {
    if (sign_ == 0) return 0.0;
    return sign_ * std::exp(log_mag_);
}

LogValue LogValue::operator-() const {
    LogValue v = *this;
    v.sign_ = -v.sign_;
    return v;
}

LogValue& LogValue::operator*=(const LogValue& o) {
    if (sign_ == 0 || o.sign_ == 0) {
        *this = {};
        return *this;
    }
    sign_ *= o.sign_;
    log_mag_ += o.log_mag_;
    return *this;
}

LogValue& LogValue::operator/=(const LogValue& o) {
    if (o.sign_ == 0) throw Error("LogValue: division by zero");
    if (sign_ == 0) return *this;
    sign_ *= o.sign_;
    log_mag_ -= o.log_mag_;
    return *this;
}

LogValue& LogValue::operator+=(const LogValue& o) {
    const LogValue pair[2] = {*this, o};
    *this = log_sum_exp(pair);
    return *this;
}

LogValue LogValue::pow(double exponent) const {
    if (sign_ == 0) {
        if (exponent == 0.0) return one();
        if (exponent < 0.0) throw Error("LogValue: negative power of zero");
        return {};
    }
    if (sign_ < 0) {
        const double r = std::round(exponent);
        if (r != exponent) throw Error("LogValue: non-integer power of a negative value");
        const bool odd = std::fmod(std::fabs(r), 2.0) == 1.0;
        return from_log(log_mag_ * exponent, odd ? -1 : 1);
    }
    return from_log(log_mag_ * exponent, 1);
}

std::string LogValue::str() const {
    if (sign_ == 0) return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%sexp(%.17g)", sign_ < 0 ? "-" : "", log_mag_);
    return buf;
}

namespace {

// log of the sum of exp(x) over xs; -inf for an empty list.
double lse(const std::vector<double>& xs) {
    if (xs.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(xs.begin(), xs.end());
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace

LogValue log_sum_exp(std::span<const LogValue> values) {
    std::vector<double> pos, neg;
    for (const auto& v : values) {
        if (v.sign() > 0) pos.push_back(v.log_abs());
        else if (v.sign() < 0) neg.push_back(v.log_abs());
    }
    const double lp = lse(pos);
    const double ln = lse(neg);
    if (lp == ln) return LogValue::zero();  // covers both empty
    if (lp > ln) {
        if (neg.empty()) return LogValue::from_log(lp, 1);
        return LogValue::from_log(lp + std::log1p(-std::exp(ln - lp)), 1);
    }
    if (pos.empty()) return LogValue::from_log(ln, -1);
    return LogValue::from_log(ln + std::log1p(-std::exp(lp - ln)), -1);
}

double log_factorial(long long k) {
    if (k < 0) throw Error("log_factorial: negative argument");
    return std::lgamma(static_cast<double>(k) + 1.0);
}

double log_binomial(long long k, long long j) {
    if (k < 0 || j < 0 || j > k)
        throw Error("log_binomial: need 0 <= j <= k, got k=" + std::to_string(k) +
                    " j=" + std::to_string(j));
    if (j == 0 || j == k) return 0.0;
    return log_factorial(k) - log_factorial(j) - log_factorial(k - j);
}

}  // namespace capdual
