#pragma once

#include <optional>
#include <span>
#include <vector>

#include "capdual/bignum.hpp"
#include "capdual/log_value.hpp"
#include "capdual/types.hpp"

namespace capdual {

using RationalVector = std::vector<Rational>;

/// Rationalizes each entry (tolerance 1e-9).
RationalVector to_rational(std::span<const double> theta, double tol = 1e-9);
std::vector<double> to_doubles(std::span<const Rational> v);

/// Outcome of the exact test  theta in conv{w : c_w != 0}.
struct PolytopeMembership {
    bool contains = false;
    /// Convex combination of the terms of v reproducing theta (zero on pruned terms).
    RationalVector coefficients;
    /// When outside: <normal, w> >= offset for every support weight, <normal, theta> < offset.
    RationalVector normal;
    Rational offset;
};

PolytopeMembership moment_polytope_contains(const WeightedVector& v,
                                            std::span<const Rational> theta);

/// Same test for a bare list of lattice points.
PolytopeMembership hull_contains(std::span<const WeightVector> points,
                                 std::span<const Rational> theta);

/// Indices of the points that lie on the smallest face of their convex hull containing
/// theta (the points that can carry positive weight in a convex combination equal to
/// theta). Empty if theta is outside the hull.
std::vector<std::size_t> minimal_face(std::span<const WeightVector> points,
                                      std::span<const Rational> theta);

/// mu(v) = sum_w |c_w|^2 w / |v|^2.
std::vector<double> moment_map(const WeightedVector& v);

struct SolverOptions {
    double gradient_tol = 1e-10;
    int max_iterations = 500;
};

struct CapacityResult {
    /// cap_theta(v) in log form; zero sign means theta lies outside the moment polytope.
    LogValue cap;
    /// Minimizer of the objective; empty when the infimum is only approached at infinity.
    std::optional<std::vector<double>> minimizer;
    bool diverging = false;
    /// Indices (into v.terms()) of the weights on the minimal face through theta.
    std::vector<std::size_t> face;
    /// Minimizer of the objective restricted to the face weights (always finite when
    /// theta is in the polytope). Equals *minimizer when not diverging.
    std::vector<double> face_minimizer;
    int iterations = 0;
    double gradient_norm = 0.0;
    /// Present exactly when cap is zero.
    std::optional<PolytopeMembership> certificate;

    double log_cap() const { return cap.log_abs(); }
};

/// cap_theta(v) = inf_x e^{-<theta,x>} |e^x . v| for the torus acting diagonally in
/// the weight basis, minimized as the convex function
///   F(x) = -2<theta,x> + log sum_w |c_w|^2 e^{2<w,x>},   cap^2 = e^{inf F}.
/// theta = 0 gives the plain capacity.
CapacityResult theta_capacity(const WeightedVector& v, std::span<const Rational> theta,
                              const SolverOptions& opts = {});

/// log cap_theta^2(v) = -min { D_KL(p || q) : sum_w p_w w = theta },  q_w = |c_w|^2.
/// Solved through its Lagrange dual in the ambient coordinates, then evaluated on the
/// primal distribution. Requires |v| = 1 within 1e-10. Returns cap_theta^2.
LogValue capacity_kl_form(const WeightedVector& v, std::span<const Rational> theta,
                          const SolverOptions& opts = {});

/// KL divergence with 0 log 0 = 0; +inf when supp p is not inside supp q.
double kl_divergence(std::span<const double> p, std::span<const double> q);

}  // namespace capdual
