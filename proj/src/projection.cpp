#include "capdual/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "capdual/error.hpp"

namespace capdual {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using kernels::Box;
using kernels::Slice;
using kernels::Step;

void convolve_log(Exec exec, const Slice& in, std::span<const Step> steps, Slice& out) {
    exec == Exec::parallel ? kernels::convolve_log_omp(in, steps, out)
                           : kernels::convolve_log_serial(in, steps, out);
}

double convolve_linear(Exec exec, const Slice& in, std::span<const Step> steps, Slice& out, double floor) {
    return exec == Exec::parallel ? kernels::convolve_linear_omp(in, steps, out, floor)
                                  : kernels::convolve_linear_serial(in, steps, out, floor);
}

Box origin_box(std::size_t n) {
    return Box{std::vector<std::int64_t>(n, 0), std::vector<std::int64_t>(n, 0)};
}

std::string extent_string(const Box& b) {
    std::string s;
    for (std::size_t d = 0; d < b.rank(); ++d)
        s += (d ? " x " : "") + std::to_string(b.extent(d));
    return s;
}

// Integer Hermite-style row echelon form of a generating set.
struct IntLattice {
    std::vector<std::vector<mpz_class>> rows;  // echelon rows
    std::vector<std::size_t> pivots;

    static IntLattice from_generators(std::vector<std::vector<mpz_class>> gens, std::size_t n) {
        IntLattice L;
        std::size_t row = 0;
        for (std::size_t col = 0; col < n && row < gens.size(); ++col) {
            // Euclid on column `col` among rows [row, end).
            for (;;) {
                std::size_t best = gens.size();
                for (std::size_t i = row; i < gens.size(); ++i)
                    if (sgn(gens[i][col]) != 0 &&
                        (best == gens.size() || abs(gens[i][col]) < abs(gens[best][col])))
                        best = i;
                if (best == gens.size()) break;
                std::swap(gens[row], gens[best]);
                bool done = true;
                for (std::size_t i = row + 1; i < gens.size(); ++i) {
                    if (sgn(gens[i][col]) == 0) continue;
                    mpz_class q;
                    mpz_fdiv_q(q.get_mpz_t(), gens[i][col].get_mpz_t(), gens[row][col].get_mpz_t());
                    for (std::size_t c = 0; c < n; ++c) gens[i][c] -= q * gens[row][c];
                    if (sgn(gens[i][col]) != 0) done = false;
                }
                if (done) break;
            }
            if (row < gens.size() && sgn(gens[row][col]) != 0) {
                L.rows.push_back(gens[row]);
                L.pivots.push_back(col);
                ++row;
            }
        }
        return L;
    }

    bool contains(std::vector<mpz_class> x) const {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto p = pivots[r];
            if (!mpz_divisible_p(x[p].get_mpz_t(), rows[r][p].get_mpz_t())) return false;
            mpz_class q;
            mpz_divexact(q.get_mpz_t(), x[p].get_mpz_t(), rows[r][p].get_mpz_t());
            for (std::size_t c = 0; c < x.size(); ++c) x[c] -= q * rows[r][c];
        }
        return std::all_of(x.begin(), x.end(), [](const mpz_class& z) { return sgn(z) == 0; });
    }

    // Coefficients of x in the echelon basis (x must lie in its rational span);
    // padded with zeros to `len` entries.
    RationalVector coordinates(RationalVector x, std::size_t len) const {
        RationalVector y(len, Rational(0));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto p = pivots[r];
            y[r] = x[p] / Rational(rows[r][p]);
            for (std::size_t c = 0; c < x.size(); ++c) x[c] -= y[r] * rows[r][c];
        }
        for (const auto& z : x)
            if (sgn(z) != 0) throw Error("lattice coordinates: vector outside the span");
        return y;
    }
};

std::vector<std::vector<mpz_class>> difference_generators(const WeightedVector& v) {
    const auto terms = v.terms();
    std::vector<std::vector<mpz_class>> gens;
    for (std::size_t i = 1; i < terms.size(); ++i) {
        std::vector<mpz_class> g(v.rank());
        for (std::size_t d = 0; d < v.rank(); ++d)
            g[d] = static_cast<long>(terms[i].weight[d] - terms[0].weight[d]);
        gens.push_back(std::move(g));
    }
    return gens;
}

}  // namespace

ProjectionTable::ProjectionTable(std::size_t rank, long k_max, std::vector<kernels::Slice> slices)
    : rank_(rank), k_max_(k_max), slices_(std::move(slices)) {}

LogValue ProjectionTable::at(long k, const WeightVector& lambda) const {
    if (k < 0 || k > k_max_) throw Error("ProjectionTable::at: k out of range");
    if (lambda.rank() != rank_) throw Error("ProjectionTable::at: weight rank mismatch");
    const auto& s = slices_[static_cast<std::size_t>(k)];
    const long long idx = s.box.cell_index(lambda.coords());
    if (idx < 0) return LogValue::zero();
    return LogValue::from_log(s.values[static_cast<std::size_t>(idx)]);
}

std::vector<std::pair<WeightVector, LogValue>> ProjectionTable::entries(long k) const {
    if (k < 0 || k > k_max_) throw Error("ProjectionTable::entries: k out of range");
    const auto& s = slices_[static_cast<std::size_t>(k)];
    std::vector<std::pair<WeightVector, LogValue>> out;
    const std::size_t n = rank_;
    std::vector<std::int64_t> c(n);
    for (std::size_t r = 0; r < s.box.rows(); ++r) {
        s.box.row_coords(r, c);
        const double* row = s.row(r);
        for (std::int64_t x = s.box.lo[n - 1]; x <= s.box.hi[n - 1]; ++x) {
            const double lv = row[x - s.box.lo[n - 1]];
            if (lv == kNegInf) continue;
            c[n - 1] = x;
            out.emplace_back(WeightVector(c, std::numeric_limits<std::int64_t>::max()),
                             LogValue::from_log(lv));
        }
    }
    return out;
}

LogValue ProjectionTable::total(long k) const {
    std::vector<LogValue> vals;
    for (auto& [w, lv] : entries(k)) vals.push_back(lv);
    return log_sum_exp(vals);
}

ProjectionTable projection_norm_table(const WeightedVector& v_in, long k_max, Exec exec,
                                      std::size_t memory_limit) {
    if (k_max < 1) throw Error("projection_norm_table: k_max must be >= 1");
    const WeightedVector v = v_in.pruned();
    const std::size_t n = v.rank();

    std::vector<Step> steps;
    std::vector<std::int64_t> wmin(n, 0), wmax(n, 0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& t = v.terms()[i];
        Step st{std::vector<std::int64_t>(t.weight.coords().begin(), t.weight.coords().end()),
                std::log(std::norm(t.amplitude))};
        for (std::size_t d = 0; d < n; ++d) {
            wmin[d] = i == 0 ? st.weight[d] : std::min(wmin[d], st.weight[d]);
            wmax[d] = i == 0 ? st.weight[d] : std::max(wmax[d], st.weight[d]);
        }
        steps.push_back(std::move(st));
    }

    // Memory guard on the full set of slices before allocating anything.
    double total_cells = 0.0;
    for (long k = 0; k <= k_max; ++k) {
        double cells = 1.0;
        for (std::size_t d = 0; d < n; ++d) cells *= static_cast<double>(k * (wmax[d] - wmin[d]) + 1);
        total_cells += cells;
    }
    if (total_cells * sizeof(double) > static_cast<double>(memory_limit)) {
        Box last;
        for (std::size_t d = 0; d < n; ++d) {
            last.lo.push_back(k_max * wmin[d]);
            last.hi.push_back(k_max * wmax[d]);
        }
        throw BudgetError("projection_norm_table: lattice extent " + extent_string(last) +
                          " at k=" + std::to_string(k_max) + " exceeds the memory budget");
    }

    std::vector<Slice> slices(static_cast<std::size_t>(k_max) + 1);
    slices[0].allocate(origin_box(n), 0.0);  // log 1
    for (long k = 1; k <= k_max; ++k) {
        const auto& prev = slices[static_cast<std::size_t>(k - 1)];
        auto& cur = slices[static_cast<std::size_t>(k)];
        if (steps.empty()) {
            cur.allocate(origin_box(n), kNegInf);
            continue;
        }
        Box b;
        for (std::size_t d = 0; d < n; ++d) {
            b.lo.push_back(prev.box.lo[d] + wmin[d]);
            b.hi.push_back(prev.box.hi[d] + wmax[d]);
        }
        cur.allocate(std::move(b), kNegInf);
        convolve_log(exec, prev, steps, cur);
    }
    return ProjectionTable(n, k_max, std::move(slices));
}

std::vector<RayPoint> projection_ray(const WeightedVector& v_in, std::span<const Rational> theta,
                                     long k_max, Exec exec, std::size_t memory_limit) {
    if (k_max < 1) throw Error("projection_ray: k_max must be >= 1");
    const std::size_t n = v_in.rank();
    if (theta.size() != n) throw Error("projection_ray: theta has wrong length");

    long period = 1;
    for (const auto& t : theta) {
        const long den = t.get_den().get_si();
        period = std::lcm(period, den);
    }
    const long K = (k_max / period) * period;
    std::vector<RayPoint> out;
    for (long k = period; k <= K; k += period) out.push_back({k, LogValue::zero()});
    if (out.empty()) return out;

    const auto cap = theta_capacity(v_in, theta);
    if (cap.cap.is_zero()) return out;

    // Work in coordinates of the lattice spanned by differences of face weights:
    // every cell reached after j steps lies on j w0 + L, so no cell is wasted.
    const auto terms = v_in.terms();
    const auto& x = cap.face_minimizer;
    const auto th = to_doubles(theta);
    const auto& w0 = terms[cap.face.front()].weight;
    std::vector<std::vector<mpz_class>> gens;
    for (auto f : cap.face) {
        std::vector<mpz_class> g(n);
        for (std::size_t d = 0; d < n; ++d) g[d] = static_cast<long>(terms[f].weight[d] - w0[d]);
        gens.push_back(std::move(g));
    }
    const auto L = IntLattice::from_generators(gens, n);
    const std::size_t dim = std::max<std::size_t>(L.rows.size(), 1);
    RationalVector shifted(n);
    for (std::size_t d = 0; d < n; ++d) shifted[d] = theta[d] - static_cast<long>(w0[d]);
    const RationalVector theta_y = L.coordinates(shifted, dim);
    const auto ty = to_doubles(theta_y);

    // Tilt the face weights so that theta becomes the mean step.
    std::vector<Step> steps;
    double shift = kNegInf;
    for (std::size_t i = 0; i < cap.face.size(); ++i) {
        const auto f = cap.face[i];
        const auto& w = terms[f].weight;
        double lf = std::log(std::norm(terms[f].amplitude));
        for (std::size_t d = 0; d < n; ++d) lf += 2.0 * static_cast<double>(w[d]) * x[d];
        RationalVector g(gens[i].begin(), gens[i].end());
        const auto y = L.coordinates(g, dim);
        std::vector<std::int64_t> yi;
        for (const auto& c : y) yi.push_back(c.get_num().get_si());
        steps.push_back({std::move(yi), lf});
        shift = std::max(shift, lf);
    }
    double r_inf = 0.0, r_one = 0.0;
    std::vector<std::int64_t> wmin(dim), wmax(dim);
    for (std::size_t i = 0; i < steps.size(); ++i) {
        steps[i].factor = std::exp(steps[i].factor - shift);
        double ninf = 0.0, none = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double dev = std::fabs(static_cast<double>(steps[i].weight[d]) - ty[d]);
            ninf = std::max(ninf, dev);
            none += dev;
            wmin[d] = i == 0 ? steps[i].weight[d] : std::min(wmin[d], steps[i].weight[d]);
            wmax[d] = i == 0 ? steps[i].weight[d] : std::max(wmax[d], steps[i].weight[d]);
        }
        r_inf = std::max(r_inf, ninf);
        r_one = std::max(r_one, none);
    }
    double theta_dot_x = 0.0;
    for (std::size_t d = 0; d < n; ++d) theta_dot_x += th[d] * x[d];

    constexpr double eps = 1e-9;
    Slice prev, cur;
    prev.allocate(origin_box(dim), 1.0);
    double log_scale = 0.0, prev_max = 1.0;
    std::vector<Step> scaled = steps;
    std::size_t next_out = 0;
    std::vector<std::int64_t> lead(dim), target(dim);
    for (long j = 1; j <= K; ++j) {
        const double remaining = static_cast<double>(K - j);
        Box b;
        for (std::size_t d = 0; d < dim; ++d) {
            const double centre = static_cast<double>(j) * ty[d];
            const auto lo = static_cast<std::int64_t>(std::ceil(centre - remaining * r_inf - eps));
            const auto hi = static_cast<std::int64_t>(std::floor(centre + remaining * r_inf + eps));
            b.lo.push_back(std::max(prev.box.lo[d] + wmin[d], lo));
            b.hi.push_back(std::min(prev.box.hi[d] + wmax[d], hi));
        }
        if (b.empty()) break;  // nothing can reach a later target
        double cells = static_cast<double>(b.cells());
        if (2.0 * cells * sizeof(double) > static_cast<double>(memory_limit))
            throw BudgetError("projection_ray: lattice extent " + extent_string(b) + " at k=" +
                              std::to_string(j) + " exceeds the memory budget");
        cur.reshape(std::move(b));
        kernels::propagate_row_ranges(prev, steps, cur);
        // l1 pruning of each row's last-coordinate interval.
        for (std::size_t r = 0; r < cur.box.rows(); ++r) {
            cur.box.row_coords(r, lead);
            double used = 0.0;
            for (std::size_t d = 0; d + 1 < dim; ++d)
                used += std::fabs(static_cast<double>(lead[d]) - static_cast<double>(j) * ty[d]);
            const double rho = remaining * r_one - used;
            const double centre = static_cast<double>(j) * ty[dim - 1];
            if (rho < -eps) {
                cur.row_hi[r] = cur.row_lo[r] - 1;
                continue;
            }
            cur.row_lo[r] = std::max(cur.row_lo[r], static_cast<std::int64_t>(std::ceil(centre - rho - eps)));
            cur.row_hi[r] = std::min(cur.row_hi[r], static_cast<std::int64_t>(std::floor(centre + rho + eps)));
        }
        // prev is stored divided by its maximum; fold that into this step's factors.
        for (std::size_t i = 0; i < steps.size(); ++i) scaled[i].factor = steps[i].factor / prev_max;
        log_scale += shift + std::log(prev_max);
        prev_max = convolve_linear(exec, prev, scaled, cur, 1e-300);
        if (prev_max == 0.0) break;

        if (j % period == 0) {
            bool integral = true;
            for (std::size_t d = 0; d < dim; ++d) {
                const Rational t = theta_y[d] * j;
                integral = integral && t.get_den() == 1;
                target[d] = t.get_num().get_si();
            }
            const long long idx = integral ? cur.box.cell_index(target) : -1;
            if (idx >= 0) {
                const auto r = static_cast<std::size_t>(idx / cur.box.extent(dim - 1));
                const double val = cur.values[static_cast<std::size_t>(idx)];
                if (val > 0.0 && target[dim - 1] >= cur.row_lo[r] && target[dim - 1] <= cur.row_hi[r])
                    out[next_out].norm_sq = LogValue::from_log(
                        log_scale + std::log(val) - 2.0 * static_cast<double>(j) * theta_dot_x);
            }
            ++next_out;
        }
        std::swap(prev, cur);
    }
    return out;
}

ConvergenceReport duality_report(const WeightedVector& v, std::span<const Rational> theta,
                                 long k_max, Exec exec) {
    ConvergenceReport rep;
    rep.family = "duality";
    rep.theta.assign(theta.begin(), theta.end());
    const auto cap = theta_capacity(v, theta);
    long period = 1;
    for (const auto& t : theta) period = std::lcm(period, t.get_den().get_si());
    rep.period = period;
    if (cap.cap.is_zero()) return rep;
    const double target = 2.0 * cap.log_cap();
    for (const auto& pt : projection_ray(v, theta, k_max, exec)) {
        if (pt.norm_sq.is_zero()) continue;
        ReportRow row;
        row.k = pt.k;
        row.log_value = pt.norm_sq.log_abs();
        row.rate = row.log_value / static_cast<double>(pt.k);
        row.target = target;
        row.gap = target - row.rate;
        rep.rows.push_back(row);
    }
    return rep;
}

int difference_rank(const WeightedVector& v_in) {
    const WeightedVector v = v_in.pruned();
    if (v.size() <= 1) return 0;
    return static_cast<int>(IntLattice::from_generators(difference_generators(v), v.rank()).rows.size());
}

long stabilizer_period(const WeightedVector& v_in) {
    const WeightedVector v = v_in.pruned();
    if (v.size() == 0) throw Error("stabilizer_period: zero vector");
    const std::size_t n = v.rank();
    const auto L = IntLattice::from_generators(difference_generators(v), n);
    const auto& w0 = v.terms()[0].weight;
    for (long m = 1; m <= 1'000'000; ++m) {
        std::vector<mpz_class> x(n);
        for (std::size_t d = 0; d < n; ++d) x[d] = mpz_class(static_cast<long>(w0[d])) * m;
        if (L.contains(x)) return m;
    }
    throw Error("stabilizer_period: no period below 10^6 (is 0 in the moment polytope?)");
}

PrefactorSequence prefactor_sequence(const WeightedVector& v, long k_max, Exec exec) {
    if (std::fabs(v.norm_sq() - 1.0) > 1e-10) throw Error("prefactor_sequence: need |v| = 1");
    const auto mu = moment_map(v);
    for (double m : mu)
        if (std::fabs(m) > 1e-10) throw Error("prefactor_sequence: need mu(v) = 0");
    PrefactorSequence seq;
    seq.d = difference_rank(v);
    seq.period = stabilizer_period(v);
    const RationalVector zero(v.rank(), Rational(0));
    for (const auto& pt : projection_ray(v, zero, k_max, exec)) {
        if (pt.k % seq.period != 0) continue;
        const double val = std::exp(0.5 * seq.d * std::log(static_cast<double>(pt.k)) +
                                    pt.norm_sq.log_abs());
        seq.values.emplace_back(pt.k, val);
    }
    return seq;
}

}  // namespace capdual
