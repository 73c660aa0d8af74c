#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "capdual/projection.hpp"
#include "capdual/types.hpp"

namespace capdual {

/// Counter-based SplitMix64 stream: the i-th draw is mix(key + i * gamma), with the
/// key derived from (seed, stream). Streams are independent of evaluation order.
class SplitMixStream {
public:
    SplitMixStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next();
    /// Uniform on (0, 1].
    double uniform();
    /// Standard normal (Box-Muller).
    double normal();

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Haar-random element of U(n): Ginibre matrix, then modified Gram-Schmidt
/// (R with positive diagonal).
Eigen::MatrixXcd sample_haar_unitary(int n, SplitMixStream& rng);

/// Haar-random element of SU(n): u / det(u)^{1/n}.
Eigen::MatrixXcd sample_haar_special_unitary(int n, SplitMixStream& rng);

/// ||u^dagger u - 1|| in operator norm.
double unitarity_defect(const Eigen::MatrixXcd& u);

struct McEstimate {
    Complex mean;
    double std_error = 0.0;  // sample standard deviation / sqrt(samples)
    long samples = 0;
    std::uint64_t seed = 0;
};

enum class UnitaryGroup { U, SU };

/// Representation of U(n) or SU(n) whose matrix coefficient is <v, u v> = tr(u sigma):
/// the standard representation (sigma = v v^dagger) or left multiplication on n x n
/// matrices (sigma = A A^dagger).
struct UnitaryRep {
    UnitaryGroup group = UnitaryGroup::U;
    Eigen::MatrixXcd sigma;

    static UnitaryRep standard(UnitaryGroup g, const Eigen::VectorXcd& v);
    static UnitaryRep matrix(UnitaryGroup g, const Eigen::MatrixXcd& A);
    int n() const { return static_cast<int>(sigma.rows()); }
};

/// Samples are split into this many fixed blocks, each with its own stream, and
/// block sums are reduced in block order.
inline constexpr int kMcBlocks = 64;

/// Estimates of int_K <v, phi(u) v>^k du = ||Pi_k v^{(x)k}||^2.
McEstimate mc_invariant_norm(const WeightedVector& v, int k, long samples, std::uint64_t seed,
                             Exec exec = Exec::parallel);
McEstimate mc_invariant_norm(const UnitaryRep& rep, int k, long samples, std::uint64_t seed,
                             Exec exec = Exec::parallel);

/// Estimates of d_lambda int_K conj(chi_lambda(u)) <v, phi(u) v>^k du = ||Pi_{k,lambda} v^{(x)k}||^2.
/// For U(2) lambda is a partition with <= 2 parts; for SU(2) only lambda_1 - lambda_2 matters.
McEstimate mc_isotypic_norm(const WeightedVector& v, int k, const WeightVector& lambda, long samples,
                            std::uint64_t seed, Exec exec = Exec::parallel);
McEstimate mc_isotypic_norm(const UnitaryRep& rep, int k, const Partition& lambda, long samples,
                            std::uint64_t seed, Exec exec = Exec::parallel);

/// U(2) character chi_lambda(u) = det(u)^{lambda_2} h_{lambda_1 - lambda_2}(eigenvalues),
/// via the recurrence h_m = tr(u) h_{m-1} - det(u) h_{m-2} (no eigenvalues needed).
Complex u2_character(const Partition& lambda, const Eigen::Matrix2cd& u);

/// Exact counterpart of mc_isotypic_norm for U(2)/SU(2).
double unitary_isotypic_exact(const UnitaryRep& rep, int k, const Partition& lambda);

}  // namespace capdual
