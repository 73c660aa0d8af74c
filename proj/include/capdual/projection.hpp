#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "capdual/lattice_kernels.hpp"
#include "capdual/log_value.hpp"
#include "capdual/report.hpp"
#include "capdual/torus.hpp"
#include "capdual/types.hpp"

namespace capdual {

enum class Exec { serial, parallel };

/// Default memory guard for dense lattice tables.
inline constexpr std::size_t kTableMemoryLimit = std::size_t{2} << 30;

/// |Pi_{k,lambda} v^{(x)k}|^2 for 0 <= k <= k_max and every weight lambda, for a
/// torus-weight vector. These are the coefficients of (sum_w |c_w|^2 t^w)^k.
class ProjectionTable {
public:
    ProjectionTable(std::size_t rank, long k_max, std::vector<kernels::Slice> slices);

    std::size_t rank() const { return rank_; }
    long k_max() const { return k_max_; }

    /// Zero when lambda is not reachable with k weights.
    LogValue at(long k, const WeightVector& lambda) const;
    /// Nonzero entries at level k, in lattice order.
    std::vector<std::pair<WeightVector, LogValue>> entries(long k) const;
    /// Sum over lambda at level k (equals |v|^{2k}).
    LogValue total(long k) const;

private:
    std::size_t rank_;
    long k_max_;
    std::vector<kernels::Slice> slices_;  // log-domain values
};

ProjectionTable projection_norm_table(const WeightedVector& v, long k_max,
                                      Exec exec = Exec::parallel,
                                      std::size_t memory_limit = kTableMemoryLimit);

struct RayPoint {
    long k;
    LogValue norm_sq;  // |Pi_{k, k theta} v^{(x)k}|^2
};

/// |Pi_{k,k theta} v^{(x)k}|^2 along the ray k theta, for every k <= k_max with
/// k theta integral. Works on the exponentially tilted weight distribution centred
/// at theta, so the tracked values decay only polynomially and k in the 10^4 range
/// is cheap in rank one.
std::vector<RayPoint> projection_ray(const WeightedVector& v, std::span<const Rational> theta,
                                     long k_max, Exec exec = Exec::parallel,
                                     std::size_t memory_limit = kTableMemoryLimit);

/// Rows compare (1/k) log |Pi_{k,k theta}|^2 with 2 log cap_theta(v); gap is their
/// difference (nonnegative by weak duality). Rows with a zero projection are skipped.
ConvergenceReport duality_report(const WeightedVector& v, std::span<const Rational> theta,
                                 long k_max, Exec exec = Exec::parallel);

/// Rank of the lattice spanned by differences of support weights
/// (= dim K - dim of the stabilizer of the line through v).
int difference_rank(const WeightedVector& v);

/// Smallest m >= 1 with m w0 in the difference lattice (w0 any support weight).
long stabilizer_period(const WeightedVector& v);

struct PrefactorSequence {
    int d = 0;
    long period = 1;
    std::vector<std::pair<long, double>> values;  // (k, k^{d/2} |Pi_k v^{(x)k}|^2)
};

/// Requires |v| = 1 and mu(v) = 0 (within 1e-10).
PrefactorSequence prefactor_sequence(const WeightedVector& v, long k_max,
                                     Exec exec = Exec::parallel);

}  // namespace capdual
