#include "capdual/scaling.hpp"

#include <atomic>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

#include "capdual/error.hpp"

namespace capdual {

Eigen::MatrixXd RationalMatrixInput::to_double() const {
    Eigen::MatrixXd out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out(i, j) = (*this)(i, j).get_d();
    return out;
}

RationalMatrixInput parse_matrix_csv(const std::string& text) {
    RationalMatrixInput m;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<Rational> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(parse_rational(cell));
        if (m.rows == 0) m.cols = row.size();
        else if (row.size() != m.cols)
            throw Error("matrix CSV: row " + std::to_string(m.rows + 1) + " has " +
                        std::to_string(row.size()) + " entries, expected " + std::to_string(m.cols));
        m.entries.insert(m.entries.end(), row.begin(), row.end());
        ++m.rows;
    }
    if (m.rows == 0 || m.cols == 0) throw Error("matrix CSV: empty matrix");
    return m;
}

std::string to_string(ScalingStatus s) {
    switch (s) {
        case ScalingStatus::converged: return "converged";
        case ScalingStatus::max_iter: return "max_iter";
        case ScalingStatus::unscalable: return "unscalable";
    }
    return "?";
}

namespace {

void check_marginal(const RationalVector& v, std::size_t len, const char* name) {
    if (v.size() != len) throw Error(std::string("marginal ") + name + " has wrong length");
    Rational s = 0;
    for (const auto& x : v) {
        if (sgn(x) < 0) throw Error(std::string("marginal ") + name + " has a negative entry");
        s += x;
    }
    if (s != 1) throw Error(std::string("marginal ") + name + " must sum to 1");
}

double marginal_error(const ScalingState& s) {
    const Eigen::MatrixXd S = s.x.asDiagonal() * s.M * s.y.asDiagonal();
    const double total = S.sum();
    if (!(total > 0.0)) return std::numeric_limits<double>::infinity();
    double err = 0.0;
    for (Eigen::Index i = 0; i < S.rows(); ++i)
        err += std::fabs(S.row(i).sum() / total - s.r[static_cast<std::size_t>(i)].get_d());
    for (Eigen::Index j = 0; j < S.cols(); ++j)
        err += std::fabs(S.col(j).sum() / total - s.c[static_cast<std::size_t>(j)].get_d());
    return err;
}

}  // namespace

ScalingState make_scaling_state(Eigen::MatrixXd M, RationalVector r, RationalVector c) {
    if (M.size() == 0) throw Error("scaling: empty matrix");
    if (!M.allFinite() || (M.array() < 0.0).any()) throw Error("scaling: entries must be finite and >= 0");
    if ((M.array() == 0.0).all()) throw Error("scaling: zero matrix");
    check_marginal(r, static_cast<std::size_t>(M.rows()), "r");
    check_marginal(c, static_cast<std::size_t>(M.cols()), "c");
    ScalingState s;
    s.x = Eigen::VectorXd::Ones(M.rows());
    s.y = Eigen::VectorXd::Ones(M.cols());
    s.M = std::move(M);
    s.r = std::move(r);
    s.c = std::move(c);
    return s;
}

bool support_admits_marginals(const Eigen::MatrixXd& M, const RationalVector& r,
                              const RationalVector& c) {
    // Nodes: 0 source, 1..n rows, n+1..n+m columns, n+m+1 sink.
    const auto n = static_cast<std::size_t>(M.rows()), m = static_cast<std::size_t>(M.cols());
    const std::size_t N = n + m + 2, src = 0, sink = n + m + 1;
    std::vector<std::vector<Rational>> cap(N, std::vector<Rational>(N, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) cap[src][1 + i] = r[i];
    for (std::size_t j = 0; j < m; ++j) cap[1 + n + j][sink] = c[j];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) cap[1 + i][1 + n + j] = 1;

    Rational flow = 0;
    for (;;) {  // Edmonds-Karp
        std::vector<long> parent(N, -1);
        parent[src] = static_cast<long>(src);
        std::deque<std::size_t> queue{src};
        while (!queue.empty() && parent[sink] < 0) {
            const auto u = queue.front();
            queue.pop_front();
            for (std::size_t w = 0; w < N; ++w)
                if (parent[w] < 0 && sgn(cap[u][w]) > 0) {
                    parent[w] = static_cast<long>(u);
                    queue.push_back(w);
                }
        }
        if (parent[sink] < 0) break;
        Rational push = cap[static_cast<std::size_t>(parent[sink])][sink];
        for (std::size_t w = sink; w != src; w = static_cast<std::size_t>(parent[w]))
            push = std::min(push, cap[static_cast<std::size_t>(parent[w])][w]);
        for (std::size_t w = sink; w != src; w = static_cast<std::size_t>(parent[w])) {
            const auto u = static_cast<std::size_t>(parent[w]);
            cap[u][w] -= push;
            cap[w][u] += push;
        }
        flow += push;
    }
    return flow == 1;
}

ScalingOutcome sinkhorn_scale(ScalingState state, double tol, int max_iter) {
    ScalingOutcome out;
    if (!support_admits_marginals(state.M, state.r, state.c)) {
        out.status = ScalingStatus::unscalable;
        out.marginal_error = marginal_error(state);
        out.state = std::move(state);
        return out;
    }
    const auto n = state.M.rows(), m = state.M.cols();
    for (Eigen::Index i = 0; i < n; ++i)
        if (sgn(state.r[static_cast<std::size_t>(i)]) == 0) state.x(i) = 0.0;
    for (Eigen::Index j = 0; j < m; ++j)
        if (sgn(state.c[static_cast<std::size_t>(j)]) == 0) state.y(j) = 0.0;

    int it = 0;
    double err = marginal_error(state);
    for (; err > tol && it < max_iter; ++it) {
        const Eigen::VectorXd My = state.M * state.y;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double ri = state.r[static_cast<std::size_t>(i)].get_d();
            state.x(i) = ri > 0.0 ? ri / My(i) : 0.0;
        }
        const Eigen::VectorXd Mx = state.M.transpose() * state.x;
        for (Eigen::Index j = 0; j < m; ++j) {
            const double cj = state.c[static_cast<std::size_t>(j)].get_d();
            state.y(j) = cj > 0.0 ? cj / Mx(j) : 0.0;
        }
        err = marginal_error(state);
    }
    out.status = err <= tol ? ScalingStatus::converged : ScalingStatus::max_iter;
    out.iterations = it;
    out.marginal_error = err;
    out.state = std::move(state);
    return out;
}

double rc_gradient_norm(const ScalingState& s) {
    const Eigen::MatrixXd S = s.x.asDiagonal() * s.M * s.y.asDiagonal();
    const double total = S.sum();
    double g = 0.0;
    for (Eigen::Index i = 0; i < S.rows(); ++i)
        g = std::max(g, std::fabs(S.row(i).sum() / total - s.r[static_cast<std::size_t>(i)].get_d()));
    for (Eigen::Index j = 0; j < S.cols(); ++j)
        g = std::max(g, std::fabs(S.col(j).sum() / total - s.c[static_cast<std::size_t>(j)].get_d()));
    return g;
}

WeightedVector rc_torus_instance(const Eigen::MatrixXd& M) {
    const auto n = static_cast<std::size_t>(M.rows()), m = static_cast<std::size_t>(M.cols());
    std::vector<WeightedVector::Term> terms;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const double a = M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (a < 0.0) throw Error("rc_capacity: negative matrix entry");
            if (a == 0.0) continue;
            std::vector<std::int64_t> w(n + m, 0);
            w[i] = 1;
            w[n + j] = 1;
            terms.push_back({WeightVector(std::move(w)), Complex(std::sqrt(a), 0.0)});
        }
    if (terms.empty()) throw Error("rc_capacity: zero matrix");
    return WeightedVector(n + m, std::move(terms));
}

LogValue rc_capacity(const Eigen::MatrixXd& M, const RationalVector& r, const RationalVector& c) {
    check_marginal(r, static_cast<std::size_t>(M.rows()), "r");
    check_marginal(c, static_cast<std::size_t>(M.cols()), "c");
    RationalVector theta = r;
    theta.insert(theta.end(), c.begin(), c.end());
    const auto res = theta_capacity(rc_torus_instance(M), theta);
    if (res.cap.is_zero()) return LogValue::zero();
    return LogValue::from_log(2.0 * res.log_cap());
}

namespace {

struct PermEnumerator {
    const RationalMatrixInput& M;
    const std::vector<long>& r;
    std::size_t n, m;
    // term[i][j][b] = M_ij^b / b!
    std::vector<std::vector<std::vector<Rational>>> term;
    std::atomic<std::uint64_t>* counter;
    std::uint64_t budget;
    std::string estimate;

    void check_budget() const {
        if (counter->fetch_add(1, std::memory_order_relaxed) + 1 > budget)
            throw BudgetError("perm_rc_exact: more than " + std::to_string(budget) +
                              " contingency tables (upper estimate " + estimate + ")");
    }

    // Enumerates row i given remaining column sums; accumulates into sum.
    void rows_from(std::size_t i, std::vector<long>& colrem, const Rational& weight, Rational& sum) const {
        if (i + 1 == n) {
            long s = std::accumulate(colrem.begin(), colrem.end(), 0L);
            if (s != r[i]) return;
            Rational w = weight;
            for (std::size_t j = 0; j < m; ++j) {
                const auto b = static_cast<std::size_t>(colrem[j]);
                if (b >= term[i][j].size()) return;
                w *= term[i][j][b];
                if (sgn(w) == 0) return;
            }
            check_budget();
            sum += w;
            return;
        }
        std::vector<long> row(m, 0);
        compose(i, 0, r[i], colrem, row, weight, sum);
    }

    void compose(std::size_t i, std::size_t j, long left, std::vector<long>& colrem,
                 std::vector<long>& row, const Rational& weight, Rational& sum) const {
        if (j + 1 == m) {
            if (left > colrem[j] || static_cast<std::size_t>(left) >= term[i][j].size()) return;
            const Rational w = weight * term[i][j][static_cast<std::size_t>(left)];
            if (sgn(w) == 0) return;
            colrem[j] -= left;
            rows_from(i + 1, colrem, w, sum);
            colrem[j] += left;
            return;
        }
        const long top = std::min(left, colrem[j]);
        for (long b = 0; b <= top; ++b) {
            if (static_cast<std::size_t>(b) >= term[i][j].size()) break;
            const Rational w = weight * term[i][j][static_cast<std::size_t>(b)];
            if (sgn(w) == 0) continue;
            colrem[j] -= b;
            compose(i, j + 1, left - b, colrem, row, w, sum);
            colrem[j] += b;
        }
    }
};

void first_rows(std::size_t j, long left, const std::vector<long>& c, std::vector<long>& cur,
                std::vector<std::vector<long>>& out) {
    if (j + 1 == c.size()) {
        if (left <= c[j]) {
            cur[j] = left;
            out.push_back(cur);
        }
        return;
    }
    for (long b = 0; b <= std::min(left, c[j]); ++b) {
        cur[j] = b;
        first_rows(j + 1, left - b, c, cur, out);
    }
}

}  // namespace

PermResult perm_rc_exact(const RationalMatrixInput& M, const std::vector<long>& r,
                         const std::vector<long>& c, std::uint64_t budget, bool parallel) {
    if (r.size() != M.rows || c.size() != M.cols) throw Error("perm_rc_exact: margin length mismatch");
    for (const auto& e : M.entries)
        if (sgn(e) < 0) throw Error("perm_rc_exact: negative matrix entry");
    for (long x : r)
        if (x < 0) throw Error("perm_rc_exact: negative row sum");
    for (long x : c)
        if (x < 0) throw Error("perm_rc_exact: negative column sum");
    const long kr = std::accumulate(r.begin(), r.end(), 0L), kc = std::accumulate(c.begin(), c.end(), 0L);
    if (kr != kc)
        throw Error("perm_rc_exact: row sums total " + std::to_string(kr) + " but column sums total " +
                    std::to_string(kc));

    const std::size_t n = M.rows, m = M.cols;
    std::atomic<std::uint64_t> counter{0};
    PermEnumerator en{M, r, n, m, {}, &counter, budget, {}};
    en.term.resize(n, std::vector<std::vector<Rational>>(m));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const long top = std::min(r[i], c[j]);
            Rational t = 1;
            en.term[i][j].push_back(t);
            for (long b = 1; b <= top; ++b) {
                t *= M(i, j);
                t /= b;
                en.term[i][j].push_back(t);
            }
        }
    mpz_class est = 1;
    for (std::size_t i = 0; i < n; ++i) {
        mpz_class b;
        mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(r[i] + static_cast<long>(m) - 1), m - 1);
        est *= b;
    }
    en.estimate = est.get_str();

    PermResult res;
    res.value = 0;
    if (n == 1) {
        std::vector<long> colrem = c;
        en.rows_from(0, colrem, Rational(1), res.value);
    } else {
        std::vector<std::vector<long>> firsts;
        std::vector<long> cur(m, 0);
        first_rows(0, r[0], c, cur, firsts);
        std::vector<Rational> partial(firsts.size(), Rational(0));
        std::exception_ptr failure;
        const auto count = static_cast<long long>(firsts.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
        for (long long f = 0; f < count; ++f) {
            try {
                const auto& row = firsts[static_cast<std::size_t>(f)];
                Rational w = 1;
                std::vector<long> colrem = c;
                for (std::size_t j = 0; j < m; ++j) {
                    w *= en.term[0][j][static_cast<std::size_t>(row[j])];
                    colrem[j] -= row[j];
                }
                if (sgn(w) != 0) en.rows_from(1, colrem, w, partial[static_cast<std::size_t>(f)]);
            } catch (...) {
#pragma omp critical
                failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
        for (const auto& p : partial) res.value += p;  // fixed order
    }
    res.tables = counter.load();
    res.log_value = log_of(res.value);
    return res;
}

PermDualReport perm_dual_report(const RationalMatrixInput& M, const RationalVector& r,
                                const RationalVector& c, long k_max) {
    const Eigen::MatrixXd Md = M.to_double();
    PermDualReport out;
    const LogValue cap_sq = rc_capacity(Md, r, c);
    out.cap_sq = cap_sq.to_double();
    auto& rep = out.report;
    rep.family = "perm-dual";
    rep.theta = r;
    rep.theta.insert(rep.theta.end(), c.begin(), c.end());
    long period = 1;
    for (const auto& q : rep.theta) period = std::lcm(period, q.get_den().get_si());
    rep.period = period;

    for (long k = period; k <= k_max; k += period) {
        std::vector<long> kr, kc;
        for (const auto& q : r) kr.push_back(Rational(q * k).get_num().get_si());
        for (const auto& q : c) kc.push_back(Rational(q * k).get_num().get_si());
        const auto perm = perm_rc_exact(M, kr, kc);
        if (perm.value == 0) continue;
        ReportRow row;
        row.k = k;
        const Rational scaled = Rational(BigNat::factorial(static_cast<unsigned long>(k)).raw()) * perm.value;
        out.exact.push_back(scaled);
        row.log_value = log_of(scaled).log_abs();
        row.rate = row.log_value / static_cast<double>(k);
        row.target = cap_sq.log_abs();
        row.gap = row.target - row.rate;
        rep.rows.push_back(row);
    }

    bool uniform = M.rows == M.cols;
    const Rational inv_n(1, static_cast<unsigned long>(M.rows));
    for (const auto& q : r) uniform = uniform && q == inv_n;
    for (const auto& q : c) uniform = uniform && q == inv_n;
    if (uniform) {
        const auto n = static_cast<long>(M.rows);
        const auto perm = perm_rc_exact(M, std::vector<long>(M.rows, 1), std::vector<long>(M.cols, 1));
        const double cap2n = std::pow(out.cap_sq, static_cast<double>(n));
        const double nfact = std::exp(log_factorial(n));
        PermDualReport::Sandwich s;
        s.perm = perm.value;
        s.lower = cap2n * nfact / std::pow(static_cast<double>(n), 2.0 * static_cast<double>(n));
        s.upper = cap2n / nfact;
        const double p = perm.value.get_d();
        s.holds = s.lower <= p * (1.0 + 1e-9) && p <= s.upper * (1.0 + 1e-9);
        out.sandwich = s;
    }
    return out;
}

}  // namespace capdual
