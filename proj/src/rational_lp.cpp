#include "capdual/rational_lp.hpp"

#include <optional>

#include "capdual/error.hpp"

namespace capdual {

namespace {

struct Tableau {
    std::size_t m, width;  // width = number of variable columns
    std::vector<Rational> t;  // m x (width + 1), last column is the RHS
    std::vector<std::size_t> basis;

    Rational& at(std::size_t i, std::size_t j) { return t[i * (width + 1) + j]; }
    Rational& rhs(std::size_t i) { return at(i, width); }

    void pivot(std::size_t row, std::size_t col) {
        const Rational p = at(row, col);
        for (std::size_t j = 0; j <= width; ++j) at(row, j) /= p;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row) continue;
            const Rational f = at(i, col);
            if (sgn(f) == 0) continue;
            for (std::size_t j = 0; j <= width; ++j)
                if (sgn(at(row, j)) != 0) at(i, j) -= f * at(row, j);
        }
        basis[row] = col;
    }

    Rational reduced_cost(const std::vector<Rational>& cost, std::size_t j) {
        Rational d = cost[j];
        for (std::size_t i = 0; i < m; ++i) d -= cost[basis[i]] * at(i, j);
        return d;
    }

    // Maximizes cost over the current basis; columns with allowed[j] == false never enter.
    // Returns false if unbounded.
    bool optimize(const std::vector<Rational>& cost, const std::vector<bool>& allowed) {
        for (;;) {
            std::optional<std::size_t> enter;
            for (std::size_t j = 0; j < width && !enter; ++j)
                if (allowed[j] && sgn(reduced_cost(cost, j)) > 0) enter = j;
            if (!enter) return true;
            std::optional<std::size_t> leave;
            Rational best;
            for (std::size_t i = 0; i < m; ++i) {
                if (sgn(at(i, *enter)) <= 0) continue;
                Rational ratio = rhs(i) / at(i, *enter);
                if (!leave || ratio < best || (ratio == best && basis[i] < basis[*leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (!leave) return false;
            pivot(*leave, *enter);
        }
    }
};

}  // namespace

LpResult solve_standard_lp(const RationalMatrix& A, const std::vector<Rational>& b,
                           const std::vector<Rational>& c) {
    const std::size_t m = A.rows, n = A.cols;
    if (b.size() != m || c.size() != n) throw Error("solve_standard_lp: dimension mismatch");

    Tableau tab{m, n + m, {}, {}};
    tab.t.assign(m * (n + m + 1), Rational(0));
    tab.basis.resize(m);
    std::vector<int> flip(m, 1);
    for (std::size_t i = 0; i < m; ++i) {
        flip[i] = sgn(b[i]) < 0 ? -1 : 1;
        for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = flip[i] * A(i, j);
        tab.at(i, n + i) = 1;
        tab.rhs(i) = flip[i] * b[i];
        tab.basis[i] = n + i;
    }

    // Phase 1: maximize -(sum of artificials).
    std::vector<Rational> cost1(n + m, Rational(0));
    for (std::size_t i = 0; i < m; ++i) cost1[n + i] = -1;
    std::vector<bool> allowed(n + m, true);
    tab.optimize(cost1, allowed);

    Rational infeas = 0;
    for (std::size_t i = 0; i < m; ++i)
        if (tab.basis[i] >= n) infeas += tab.rhs(i);

    LpResult res;
    if (sgn(infeas) > 0) {
        // Duals y = c_B B^{-1}; B^{-1} sits in the artificial columns.
        res.status = LpResult::Status::infeasible;
        res.farkas.assign(m, Rational(0));
        for (std::size_t r = 0; r < m; ++r) {
            Rational y = 0;
            for (std::size_t i = 0; i < m; ++i) y += cost1[tab.basis[i]] * tab.at(i, n + r);
            res.farkas[r] = flip[r] * y;
        }
        return res;
    }

    // Drive zero-level artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
        if (tab.basis[i] < n) continue;
        for (std::size_t j = 0; j < n; ++j)
            if (sgn(tab.at(i, j)) != 0) {
                tab.pivot(i, j);
                break;
            }
    }

    std::vector<Rational> cost2(n + m, Rational(0));
    for (std::size_t j = 0; j < n; ++j) cost2[j] = c[j];
    for (std::size_t j = n; j < n + m; ++j) allowed[j] = false;
    if (!tab.optimize(cost2, allowed)) {
        res.status = LpResult::Status::unbounded;
        return res;
    }
    res.status = LpResult::Status::optimal;
    res.x.assign(n, Rational(0));
    for (std::size_t i = 0; i < m; ++i)
        if (tab.basis[i] < n) res.x[tab.basis[i]] = tab.rhs(i);
    res.objective = 0;
    for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
    return res;
}

}  // namespace capdual
