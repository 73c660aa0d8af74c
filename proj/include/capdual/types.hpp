#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "capdual/bignum.hpp"

namespace capdual {

using Complex = std::complex<double>;

/// Default bound on |coordinate| of a weight.
inline constexpr std::int64_t kMaxWeightEntry = 1'000'000;

/// Element of the weight lattice Z^n of the torus T^n.
class WeightVector {
public:
    WeightVector() = default;
    explicit WeightVector(std::vector<std::int64_t> coords,
                          std::int64_t max_entry = kMaxWeightEntry);
    WeightVector(std::initializer_list<std::int64_t> coords);

    std::size_t rank() const { return coords_.size(); }
    std::int64_t operator[](std::size_t i) const { return coords_[i]; }
    std::span<const std::int64_t> coords() const { return coords_; }

    friend bool operator==(const WeightVector&, const WeightVector&) = default;
    friend auto operator<=>(const WeightVector&, const WeightVector&) = default;

    std::string str() const;

private:
    std::vector<std::int64_t> coords_;
};

/// A vector of a torus representation written in its weight basis:
/// v = sum_w c_w e_w, with the torus acting on e_w by the character w.
class WeightedVector {
public:
    struct Term {
        WeightVector weight;
        Complex amplitude;
    };

    WeightedVector(std::size_t rank, std::vector<Term> terms);

    std::size_t rank() const { return rank_; }
    std::span<const Term> terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }

    double norm_sq() const;
    bool is_zero() const;

    /// Squared amplitudes |c_w|^2, in term order.
    std::vector<double> intensities() const;

    /// Terms with |c_w|^2 at or below the pruning threshold removed.
    WeightedVector pruned(double threshold = 1e-30) const;

private:
    std::size_t rank_;
    std::vector<Term> terms_;
};

/// Non-increasing tuple of nonnegative integers.
class Partition {
public:
    Partition() = default;
    explicit Partition(std::vector<int> parts);
    Partition(std::initializer_list<int> parts);

    std::span<const int> parts() const { return parts_; }
    int operator[](std::size_t i) const { return i < parts_.size() ? parts_[i] : 0; }
    /// Number of nonzero parts.
    std::size_t length() const;
    std::size_t slots() const { return parts_.size(); }
    int size() const;

    friend bool operator==(const Partition&, const Partition&) = default;
    friend auto operator<=>(const Partition&, const Partition&) = default;

    std::string str() const;

private:
    std::vector<int> parts_;
};

/// All partitions of k with at most max_parts parts, each padded to max_parts
/// slots, in lexicographically decreasing order.
std::vector<Partition> partitions_of(int k, int max_parts);

/// Probability vector: entries >= 0 summing to 1 within 1e-12.
class ProbVector {
public:
    explicit ProbVector(std::vector<double> p);

    std::span<const double> values() const { return p_; }
    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    bool sorted_decreasing() const;

private:
    std::vector<double> p_;
};

}  // namespace capdual
