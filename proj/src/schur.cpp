#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "capdual/error.hpp"
#include "capdual/spectrum.hpp"

namespace capdual {

BigNat standard_tableaux_count(const Partition& lambda) {
    const int k = lambda.size();
    const std::size_t rows = lambda.length();
    BigNat hooks = 1;
    for (std::size_t i = 0; i < rows; ++i)
        for (int j = 0; j < lambda[i]; ++j) {
            int below = 0;  // cells below (i, j)
            for (std::size_t r = i + 1; r < rows && lambda[r] > j; ++r) ++below;
            hooks *= BigNat(static_cast<std::uint64_t>(lambda[i] - j + below));
        }
    return BigNat::factorial(static_cast<unsigned long>(k)) / hooks;
}

namespace {

// RAII array of MPFR numbers at a fixed precision.
class MpfrArray {
public:
    MpfrArray(std::size_t n, mpfr_prec_t prec) : v_(n) {
        for (auto& x : v_) mpfr_init2(&x, prec), mpfr_set_zero(&x, 1);
    }
    ~MpfrArray() {
        for (auto& x : v_) mpfr_clear(&x);
    }
    MpfrArray(const MpfrArray&) = delete;
    MpfrArray& operator=(const MpfrArray&) = delete;
    mpfr_ptr operator[](std::size_t i) { return &v_[i]; }

private:
    std::vector<__mpfr_struct> v_;
};

LogValue to_log_value(mpfr_srcptr x) {
    if (mpfr_zero_p(x)) return LogValue::zero();
    long e = 0;
    const double m = mpfr_get_d_2exp(&e, x, MPFR_RNDN);
    return LogValue::from_log(std::log(std::fabs(m)) + static_cast<double>(e) * std::log(2.0), m < 0 ? -1 : 1);
}

}  // namespace

LogValue schur_polynomial(const Partition& lambda, std::span<const double> x) {
    std::vector<double> y;
    for (double xi : x) {
        if (!(xi >= 0.0) || !std::isfinite(xi)) throw Error("schur_polynomial: variables must be finite and >= 0");
        if (xi > 0.0) y.push_back(xi);
    }
    const std::size_t l = lambda.length();
    if (l == 0) return LogValue::one();
    if (l > y.size()) return LogValue::zero();
    std::sort(y.begin(), y.end(), std::greater<>());
    const double ymax = y.front();

    // Cancellation in the determinant costs about |lambda| log2(ymax/ymin) bits.
    const double loss = static_cast<double>(lambda.size()) * std::log2(ymax / y.back());
    const auto prec = static_cast<mpfr_prec_t>(std::min(64.0 + 16.0 * static_cast<double>(l) + std::ceil(loss), 1e6));

    // h_0..h_M of y / ymax.
    const std::size_t M = static_cast<std::size_t>(lambda[0]) + l - 1;
    MpfrArray h(M + 1, prec);
    mpfr_set_ui(h[0], 1, MPFR_RNDN);
    MpfrArray tmp(2, prec);
    for (double yi : y) {
        mpfr_set_d(tmp[0], yi, MPFR_RNDN);
        mpfr_div_d(tmp[0], tmp[0], ymax, MPFR_RNDN);
        for (std::size_t m = 1; m <= M; ++m) mpfr_fma(h[m], tmp[0], h[m - 1], h[m], MPFR_RNDN);
    }

    MpfrArray a(l * l, prec);
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = 0; j < l; ++j) {
            const long idx = static_cast<long>(lambda[i]) - static_cast<long>(i) + static_cast<long>(j);
            if (idx >= 0) mpfr_set(a[i * l + j], h[static_cast<std::size_t>(idx)], MPFR_RNDN);
        }

    // Gaussian elimination with partial pivoting.
    int sign = 1;
    MpfrArray det(1, prec);
    mpfr_set_ui(det[0], 1, MPFR_RNDN);
    for (std::size_t c = 0; c < l; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < l; ++r)
            if (mpfr_cmpabs(a[r * l + c], a[piv * l + c]) > 0) piv = r;
        if (mpfr_zero_p(a[piv * l + c])) return LogValue::zero();
        if (piv != c) {
            for (std::size_t j = 0; j < l; ++j) mpfr_swap(a[c * l + j], a[piv * l + j]);
            sign = -sign;
        }
        for (std::size_t r = c + 1; r < l; ++r) {
            mpfr_div(tmp[1], a[r * l + c], a[c * l + c], MPFR_RNDN);
            for (std::size_t j = c; j < l; ++j) {
                mpfr_mul(tmp[0], tmp[1], a[c * l + j], MPFR_RNDN);
                mpfr_sub(a[r * l + j], a[r * l + j], tmp[0], MPFR_RNDN);
            }
        }
        mpfr_mul(det[0], det[0], a[c * l + c], MPFR_RNDN);
    }
    if (sign < 0) mpfr_neg(det[0], det[0], MPFR_RNDN);
    return to_log_value(det[0]) *
           LogValue::from_log(static_cast<double>(lambda.size()) * std::log(ymax));
}

LogValue schur_weyl_weight(const Partition& lambda, std::span<const double> x) {
    const LogValue s = schur_polynomial(lambda, x);
    if (s.is_zero()) return s;
    return standard_tableaux_count(lambda).log() * s;
}

std::vector<SchurWeylRow> schur_weyl_measure(const ProbVector& q, int k) {
    if (!q.sorted_decreasing()) throw Error("schur_weyl_measure: q must be sorted decreasingly");
    if (k < 0 || k > 400) throw Error("schur_weyl_measure: k must lie in [0, 400]");
    if (q.size() > 4) throw Error("schur_weyl_measure: at most 4 parts supported");
    const auto parts = partitions_of(k, static_cast<int>(q.size()));
    std::vector<SchurWeylRow> rows(parts.size());
    const auto count = static_cast<long>(parts.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) {
        auto& row = rows[static_cast<std::size_t>(i)];
        row.lambda = parts[static_cast<std::size_t>(i)];
        row.f = standard_tableaux_count(row.lambda);
        row.s = schur_polynomial(row.lambda, q.values());
        row.prob = row.s.is_zero() ? LogValue::zero() : row.f.log() * row.s;
    }
    std::vector<LogValue> probs;
    for (const auto& r : rows) probs.push_back(r.prob);
    const double total = log_sum_exp(probs).to_double();
    if (std::fabs(total - 1.0) > 1e-8)
        throw Error("schur_weyl_measure: probabilities sum to " + std::to_string(total));
    return rows;
}

}  // namespace capdual
