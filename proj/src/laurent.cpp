#include "capdual/laurent.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "capdual/error.hpp"

namespace capdual {

LaurentPoly::LaurentPoly(std::map<int, Complex> terms) {
    for (auto& [e, a] : terms)
        if (a != Complex(0.0)) terms_.emplace(e, a);
}

LaurentPoly LaurentPoly::from_vector(const WeightedVector& v) {
    if (v.rank() != 1) throw Error("LaurentPoly::from_vector: rank-one vector required");
    std::map<int, Complex> t;
    for (const auto& term : v.terms())
        t[static_cast<int>(term.weight[0])] += std::norm(term.amplitude);
    return LaurentPoly(std::move(t));
}

int LaurentPoly::min_exponent() const { return terms_.empty() ? 0 : terms_.begin()->first; }
int LaurentPoly::max_exponent() const { return terms_.empty() ? 0 : terms_.rbegin()->first; }

bool LaurentPoly::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == 0);
}

bool LaurentPoly::has_nonnegative_real_coefficients() const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [](const auto& t) { return t.second.imag() == 0.0 && t.second.real() >= 0.0; });
}

Complex LaurentPoly::operator()(Complex z) const {
    Complex s = 0.0;
    for (const auto& [e, a] : terms_) s += a * std::pow(z, e);
    return s;
}

Complex LaurentPoly::derivative(Complex z) const {
    Complex s = 0.0;
    for (const auto& [e, a] : terms_)
        if (e != 0) s += static_cast<double>(e) * a * std::pow(z, e - 1);
    return s;
}

namespace {

// Generic cst(f^k) by repeated convolution, dropping exponents that can no longer
// return to zero in the remaining factors.
template <class T>
T cst_power(const std::map<int, T>& f, int k) {
    if (k < 0) throw Error("laurent_cst_power: k must be >= 0");
    if (k == 0) return T(1);
    if (f.empty()) return T(0);
    const int lo = f.begin()->first, hi = f.rbegin()->first;
    std::map<long, T> cur{{0, T(1)}};
    for (int j = 1; j <= k; ++j) {
        const long rem = k - j;
        std::map<long, T> next;
        for (const auto& [e, c] : cur)
            for (const auto& [fe, fa] : f) {
                const long ne = e + fe;
                // Reachability of 0 from ne with rem more factors.
                if (ne + rem * static_cast<long>(lo) > 0 || ne + rem * static_cast<long>(hi) < 0) continue;
                next[ne] += c * fa;
            }
        cur = std::move(next);
        if (cur.empty()) return T(0);
    }
    const auto it = cur.find(0);
    return it == cur.end() ? T(0) : it->second;
}

}  // namespace

Complex laurent_cst_power(const LaurentPoly& f, int k) { return cst_power(f.terms(), k); }

Rational laurent_cst_power(const RationalLaurent& f, int k) {
    std::map<int, Rational> nz;
    for (const auto& [e, a] : f)
        if (sgn(a) != 0) nz.emplace(e, a);
    return cst_power(nz, k);
}

CriticalValues critical_values(const LaurentPoly& f, double residual_tol) {
    if (f.is_constant()) throw Error("critical_values: f is constant");
    const int lo = f.min_exponent();
    // P(z) = z^{-lo} * z f'(z) = sum_e e a_e z^{e - lo}.
    const int deg_full = f.max_exponent() - lo;
    std::vector<Complex> c(static_cast<std::size_t>(deg_full) + 1, 0.0);
    for (const auto& [e, a] : f.terms()) c[static_cast<std::size_t>(e - lo)] = static_cast<double>(e) * a;
    // Roots at z = 0 are not on C^x.
    std::size_t low = 0;
    while (low < c.size() && c[low] == Complex(0.0)) ++low;
    std::size_t high = c.size() - 1;
    while (high > low && c[high] == Complex(0.0)) --high;
    std::vector<Complex> poly(c.begin() + static_cast<long>(low), c.begin() + static_cast<long>(high) + 1);

    CriticalValues out;
    const int deg = static_cast<int>(poly.size()) - 1;
    if (deg <= 0) return out;  // f is a monomial: no critical points on C^x

    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -poly[static_cast<std::size_t>(i)] / poly.back();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, false);
    if (es.info() != Eigen::Success) throw Error("critical_values: eigenvalue solver failed");

    auto eval = [&](Complex z, Complex& dp) {
        Complex p = 0.0;
        dp = 0.0;
        for (int i = deg; i >= 0; --i) {
            dp = dp * z + p;
            p = p * z + poly[static_cast<std::size_t>(i)];
        }
        return p;
    };
    double scale = 0.0;
    for (const auto& a : poly) scale = std::max(scale, std::abs(a));

    for (int i = 0; i < deg; ++i) {
        Complex z = es.eigenvalues()(i);
        Complex dp;
        Complex p = eval(z, dp);
        if (dp != Complex(0.0)) z -= p / dp;  // Newton polish
        p = eval(z, dp);
        const double resid = std::abs(p) / (scale * std::max(1.0, std::pow(std::abs(z), deg)));
        out.max_residual = std::max(out.max_residual, resid);
        if (resid > residual_tol)
            throw Error("critical_values: root did not converge, residual " + std::to_string(resid));
        out.points.push_back(z);
        out.values.push_back(f(z));
        out.max_modulus = std::max(out.max_modulus, std::abs(out.values.back()));
    }

    if (f.has_nonnegative_real_coefficients() && f.min_exponent() < 0 && f.max_exponent() > 0) {
        for (std::size_t i = 0; i < out.points.size(); ++i) {
            const Complex z = out.points[i];
            if (z.real() > 0.0 && std::fabs(z.imag()) <= 1e-8 * std::abs(z)) {
                out.positive_real = i;
                break;
            }
        }
    }
    return out;
}

}  // namespace capdual
