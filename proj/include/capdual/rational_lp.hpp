#pragma once

#include <vector>

#include "capdual/bignum.hpp"

namespace capdual {

/// Dense row-major rational matrix.
struct RationalMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Rational> data;

    RationalMatrix() = default;
    RationalMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
    Rational& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const Rational& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct LpResult {
    enum class Status { optimal, infeasible, unbounded };
    Status status = Status::infeasible;
    std::vector<Rational> x;
    Rational objective;
    /// For infeasible problems: y with y^T A >= 0 columnwise and y^T b < 0.
    std::vector<Rational> farkas;
};

/// Exact two-phase simplex (Bland's rule) for
///   maximize c^T x  subject to  A x = b, x >= 0.
LpResult solve_standard_lp(const RationalMatrix& A, const std::vector<Rational>& b,
                           const std::vector<Rational>& c);

}  // namespace capdual
