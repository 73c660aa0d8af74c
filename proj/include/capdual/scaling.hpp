#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "capdual/bignum.hpp"
#include "capdual/log_value.hpp"
#include "capdual/report.hpp"
#include "capdual/torus.hpp"

namespace capdual {

/// Nonnegative matrix with exact entries (kept exact for the permanent side).
struct RationalMatrixInput {
    std::size_t rows = 0, cols = 0;
    std::vector<Rational> entries;  // row-major

    const Rational& operator()(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
    Eigen::MatrixXd to_double() const;
};

/// Parses a CSV matrix: one row per line, entries "p/q", integers or decimals.
RationalMatrixInput parse_matrix_csv(const std::string& text);

struct ScalingState {
    Eigen::MatrixXd M;
    Eigen::VectorXd x;  // row scaling (zero on rows with r_i = 0)
    Eigen::VectorXd y;  // column scaling
    RationalVector r, c;
};

enum class ScalingStatus { converged, max_iter, unscalable };
std::string to_string(ScalingStatus s);

struct ScalingOutcome {
    ScalingState state;
    ScalingStatus status = ScalingStatus::max_iter;
    int iterations = 0;
    /// l1 distance of the normalized scaled matrix's marginals to (r, c).
    double marginal_error = 0.0;
};

/// Builds the initial state (x = y = 1) after validating the marginals.
ScalingState make_scaling_state(Eigen::MatrixXd M, RationalVector r, RationalVector c);

/// Alternating row/column normalization of diag(x) M diag(y) toward marginals (r, c).
ScalingOutcome sinkhorn_scale(ScalingState state, double tol, int max_iter);

/// True if some nonnegative matrix supported inside supp(M) has marginals (r, c):
/// exact max-flow on the bipartite support graph.
bool support_admits_marginals(const Eigen::MatrixXd& M, const RationalVector& r,
                              const RationalVector& c);

/// Gradient (in log x, log y) of log sum M_ij x_i y_j - <r, log x> - <c, log y>;
/// returns its infinity norm.
double rc_gradient_norm(const ScalingState& s);

/// The (r,c)-capacity squared:  inf_{x,y>0} sum M_ij x_i y_j / (prod x^r prod y^c),
/// through the torus solver on weights e_i (+) e_j with amplitudes sqrt(M_ij).
LogValue rc_capacity(const Eigen::MatrixXd& M, const RationalVector& r, const RationalVector& c);

/// The torus instance behind rc_capacity.
WeightedVector rc_torus_instance(const Eigen::MatrixXd& M);

struct PermResult {
    Rational value;
    LogValue log_value;
    std::uint64_t tables = 0;
};

inline constexpr std::uint64_t kPermTableBudget = 10'000'000;

/// perm_{r,c}(M) = sum over nonnegative integer tables B with margins (r, c) of
/// prod M_ij^{B_ij} / B_ij!, exactly. Zero when no such table exists.
PermResult perm_rc_exact(const RationalMatrixInput& M, const std::vector<long>& r,
                         const std::vector<long>& c, std::uint64_t budget = kPermTableBudget,
                         bool parallel = true);

struct PermDualReport {
    ConvergenceReport report;  // rate = log (k! perm_{kr,kc})^{1/k}, target = log cap^2
    std::vector<Rational> exact;  // k! perm_{kr,kc}, one per report row
    double cap_sq = 0.0;
    /// Present for square M with uniform margins.
    struct Sandwich {
        Rational perm;
        double lower, upper;
        bool holds;
    };
    std::optional<Sandwich> sandwich;
};

/// Rows for every k <= k_max with k r, k c integral; the sandwich check compares
/// perm(M) with cap^{2n} n!/n^{2n} and cap^{2n}/n! (relative slack 1e-9).
PermDualReport perm_dual_report(const RationalMatrixInput& M, const RationalVector& r,
                                const RationalVector& c, long k_max);

}  // namespace capdual
