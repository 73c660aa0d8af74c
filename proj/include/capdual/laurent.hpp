#pragma once

#include <map>
#include <optional>
#include <vector>

#include "capdual/bignum.hpp"
#include "capdual/types.hpp"

namespace capdual {

/// Laurent polynomial sum_e a_e z^e on C^x (the K-finite functions on U(1)).
class LaurentPoly {
public:
    LaurentPoly() = default;
    explicit LaurentPoly(std::map<int, Complex> terms);

    /// f = sum_w |c_w|^2 z^w for a rank-one weighted vector.
    static LaurentPoly from_vector(const WeightedVector& v);

    const std::map<int, Complex>& terms() const { return terms_; }
    int min_exponent() const;
    int max_exponent() const;
    bool is_constant() const;
    bool has_nonnegative_real_coefficients() const;

    Complex operator()(Complex z) const;
    Complex derivative(Complex z) const;

private:
    std::map<int, Complex> terms_;  // zero coefficients dropped
};

/// Same with exact rational coefficients.
using RationalLaurent = std::map<int, Rational>;

/// Constant term of f^k.
Complex laurent_cst_power(const LaurentPoly& f, int k);
Rational laurent_cst_power(const RationalLaurent& f, int k);

struct CriticalValues {
    std::vector<Complex> points;  // critical points z* != 0
    std::vector<Complex> values;  // f(z*)
    /// Index of the critical point on the positive real axis, when f has nonnegative
    /// real coefficients and both signs of exponents (it minimizes f over R_{>0}).
    std::optional<std::size_t> positive_real;
    double max_modulus = 0.0;
    double max_residual = 0.0;
};

/// Roots of z f'(z) on C^x via companion-matrix eigenvalues and one Newton polish.
CriticalValues critical_values(const LaurentPoly& f, double residual_tol = 1e-9);

}  // namespace capdual
