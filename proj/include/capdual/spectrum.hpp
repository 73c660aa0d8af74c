#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "capdual/bignum.hpp"
#include "capdual/log_value.hpp"
#include "capdual/report.hpp"
#include "capdual/types.hpp"

namespace capdual {

/// Density matrix: Hermitian, PSD (eigenvalues >= -1e-12), unit trace within 1e-12.
class HermitianState {
public:
    explicit HermitianState(Eigen::MatrixXcd sigma, double tol = 1e-12);
    static HermitianState diagonal(std::span<const double> p);
    /// mu(A) = A A^dagger / ||A||_F^2.
    static HermitianState from_matrix(const Eigen::MatrixXcd& A);

    const Eigen::MatrixXcd& matrix() const { return sigma_; }
    std::size_t dim() const { return static_cast<std::size_t>(sigma_.rows()); }
    /// Eigenvalues, decreasing, clipped at 0.
    std::vector<double> spectrum() const;

private:
    Eigen::MatrixXcd sigma_;
};

/// Number of standard Young tableaux of shape lambda (hook length formula).
BigNat standard_tableaux_count(const Partition& lambda);

/// Schur polynomial s_lambda(x) for x >= 0 (Jacobi-Trudi in h_m, evaluated in
/// multiprecision so the alternating determinant keeps full double accuracy).
LogValue schur_polynomial(const Partition& lambda, std::span<const double> x);

/// f^lambda s_lambda(x): the squared norm of the lambda-isotypic part of A^{(x)k}
/// when A A^dagger has spectrum x.
LogValue schur_weyl_weight(const Partition& lambda, std::span<const double> x);

struct SchurWeylRow {
    Partition lambda;
    BigNat f;
    LogValue s;
    LogValue prob;
};

/// P(lambda) = f^lambda s_lambda(q) over all partitions of k with <= n parts, in
/// lexicographically decreasing order. Requires q sorted decreasing, k <= 400, n <= 4.
std::vector<SchurWeylRow> schur_weyl_measure(const ProbVector& q, int k);

/// Keyl rate I(rho || sigma) via leading principal minors of u^dagger sigma u;
/// +inf when a minor needed with positive weight vanishes.
double keyl_rate(const HermitianState& rho, const HermitianState& sigma);

/// tr rho (log rho - log sigma); +inf when supp rho is not inside supp sigma.
double quantum_relative_entropy(const HermitianState& rho, const HermitianState& sigma);

/// D_KL(p || q) for decreasingly sorted p, q.
double kw_rate(const ProbVector& p, const ProbVector& q);

struct KwCheck {
    double sampled_min;  // min of I(u diag(p) u^dagger || sigma) over samples and sigma's eigenbasis
    double analytic;     // D_KL(p || spec sigma)
};

KwCheck kw_minimization_check(const ProbVector& p, const HermitianState& sigma, int samples = 1000,
                              std::uint64_t seed = 1);

/// Multiplicities of V_lambda in (C^2)^{(x)k}; n[lambda] for 0 <= lambda <= k.
struct SU2MultTable {
    int k = 0;
    std::vector<BigNat> n;

    const BigNat& operator()(int lambda) const { return n.at(static_cast<std::size_t>(lambda)); }
};

SU2MultTable su2_multiplicities(int k);
/// One Clebsch-Gordan step k -> k+1.
SU2MultTable su2_step(const SU2MultTable& t);
/// C(k, (k-l)/2) - C(k, (k-l)/2 - 1), zero for the wrong parity.
BigNat su2_multiplicity_closed_form(int k, int lambda);

/// sup_{h >= 0} (theta h - log(chi_W(e^h)/d_W)) for the weight multiset of W.
double duffield_rate(std::span<const long> weights, double theta);

/// Partition of k with <= theta.size() parts nearest to k theta (Euclidean),
/// ties toward the larger first part.
Partition round_partition(std::span<const Rational> theta, long k);

/// Rows k = 1..k_max: -(1/k) log P(round(k theta)) against D_KL(theta || q).
ConvergenceReport schur_weyl_ldp_report(const ProbVector& q, std::span<const Rational> theta, long k_max);

/// Rows k = 1..k_max for an SU(2) representation with the given (symmetric) weight
/// multiset: P(lambda) = (lambda+1) n_{k,lambda} / d_W^k at the admissible lambda
/// nearest to k theta, against duffield_rate.
ConvergenceReport duffield_ldp_report(std::span<const long> weights, const Rational& theta, long k_max);

}  // namespace capdual
