#include "capdual/lattice_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "capdual/log_value.hpp"

namespace capdual::kernels {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Shared per-row body; Log selects the semiring.
template <bool Log>
double convolve_row(const Slice& in, std::span<const Step> steps, Slice& out, std::size_t r,
                    std::vector<std::int64_t>& lead, std::vector<std::int64_t>& src, double floor) {
    const std::size_t n = out.box.rank();
    const std::int64_t out_lo = out.row_lo[r], out_hi = out.row_hi[r];
    double* dst = out.row(r);
    const std::int64_t base = out.box.lo[n - 1];
    if (out_lo > out_hi) return 0.0;
    for (std::int64_t c = out_lo; c <= out_hi; ++c) dst[c - base] = Log ? kNegInf : 0.0;

    out.box.row_coords(r, lead);
    for (const auto& st : steps) {
        for (std::size_t d = 0; d + 1 < n; ++d) src[d] = lead[d] - st.weight[d];
        const long long rs = in.box.row_index(std::span<const std::int64_t>(src.data(), n - 1));
        if (rs < 0) continue;
        const auto srs = static_cast<std::size_t>(rs);
        const std::int64_t shift = st.weight[n - 1];
        const std::int64_t lo = std::max(out_lo, in.row_lo[srs] + shift);
        const std::int64_t hi = std::min(out_hi, in.row_hi[srs] + shift);
        if (lo > hi) continue;
        const double* s = in.row(srs) + (lo - shift - in.box.lo[n - 1]);
        double* d = dst + (lo - base);
        const std::int64_t len = hi - lo + 1;
        const double f = st.factor;
        if constexpr (Log) {
            for (std::int64_t i = 0; i < len; ++i) d[i] = log_add(d[i], f + s[i]);
        } else {
            for (std::int64_t i = 0; i < len; ++i) d[i] += f * s[i];
        }
    }
    if constexpr (Log) {
        return 0.0;
    } else {
        double m = 0.0;
        double* v = dst + (out_lo - base);
        const std::int64_t len = out_hi - out_lo + 1;
        if (floor <= 0.0) {
            for (std::int64_t i = 0; i < len; ++i) m = std::max(m, v[i]);
            return m;
        }
        std::int64_t first = len, last = -1;
        for (std::int64_t i = 0; i < len; ++i) {
            if (v[i] < floor) {
                v[i] = 0.0;
            } else {
                m = std::max(m, v[i]);
                first = std::min(first, i);
                last = i;
            }
        }
        if (last < 0) {
            out.row_hi[r] = out_lo - 1;
        } else {
            out.row_lo[r] = out_lo + first;
            out.row_hi[r] = out_lo + last;
        }
        return m;
    }
}

template <bool Log>
double convolve_serial(const Slice& in, std::span<const Step> steps, Slice& out, double floor) {
    const std::size_t n = out.box.rank();
    std::vector<std::int64_t> lead(n), src(n);
    const std::size_t rows = out.box.rows();
    double m = 0.0;
    for (std::size_t r = 0; r < rows; ++r) m = std::max(m, convolve_row<Log>(in, steps, out, r, lead, src, floor));
    return m;
}

template <bool Log>
double convolve_omp(const Slice& in, std::span<const Step> steps, Slice& out, double floor) {
    const std::size_t n = out.box.rank();
    const auto rows = static_cast<long long>(out.box.rows());
    double m = 0.0;
#pragma omp parallel reduction(max : m)
    {
        std::vector<std::int64_t> lead(n), src(n);
#pragma omp for schedule(static)
        for (long long r = 0; r < rows; ++r)
            m = std::max(m, convolve_row<Log>(in, steps, out, static_cast<std::size_t>(r), lead, src, floor));
    }
    return m;
}

}  // namespace

bool Box::empty() const {
    for (std::size_t d = 0; d < lo.size(); ++d)
        if (hi[d] < lo[d]) return true;
    return lo.empty();
}

std::size_t Box::rows() const {
    if (empty()) return 0;
    std::size_t r = 1;
    for (std::size_t d = 0; d + 1 < rank(); ++d) r *= static_cast<std::size_t>(extent(d));
    return r;
}

std::size_t Box::cells() const {
    if (empty()) return 0;
    return rows() * static_cast<std::size_t>(extent(rank() - 1));
}

void Box::row_coords(std::size_t r, std::span<std::int64_t> out) const {
    for (std::size_t d = rank() - 1; d-- > 0;) {
        const auto e = static_cast<std::size_t>(extent(d));
        out[d] = lo[d] + static_cast<std::int64_t>(r % e);
        r /= e;
    }
}

long long Box::row_index(std::span<const std::int64_t> lead) const {
    long long r = 0;
    for (std::size_t d = 0; d + 1 < rank(); ++d) {
        if (lead[d] < lo[d] || lead[d] > hi[d]) return -1;
        r = r * extent(d) + (lead[d] - lo[d]);
    }
    return r;
}

long long Box::cell_index(std::span<const std::int64_t> coords) const {
    const long long r = row_index(coords);
    const std::size_t last = rank() - 1;
    if (r < 0 || coords[last] < lo[last] || coords[last] > hi[last]) return -1;
    return r * extent(last) + (coords[last] - lo[last]);
}

void Slice::allocate(Box b, double fill) {
    box = std::move(b);
    values.assign(box.cells(), fill);
    const std::size_t rows = box.rows();
    const std::size_t last = box.rank() - 1;
    row_lo.assign(rows, box.lo[last]);
    row_hi.assign(rows, box.hi[last]);
}

void Slice::reshape(Box b) {
    box = std::move(b);
    values.resize(box.cells());
    const std::size_t rows = box.rows();
    const std::size_t last = box.rank() - 1;
    row_lo.assign(rows, box.lo[last]);
    row_hi.assign(rows, box.hi[last]);
}

double convolve_linear_serial(const Slice& in, std::span<const Step> steps, Slice& out, double floor) {
    return convolve_serial<false>(in, steps, out, floor);
}
double convolve_linear_omp(const Slice& in, std::span<const Step> steps, Slice& out, double floor) {
    return convolve_omp<false>(in, steps, out, floor);
}
void convolve_log_serial(const Slice& in, std::span<const Step> steps, Slice& out) {
    convolve_serial<true>(in, steps, out, 0.0);
}
void convolve_log_omp(const Slice& in, std::span<const Step> steps, Slice& out) {
    convolve_omp<true>(in, steps, out, 0.0);
}

void propagate_row_ranges(const Slice& in, std::span<const Step> steps, Slice& out) {
    const std::size_t n = out.box.rank();
    const std::size_t rows = out.box.rows();
    const std::int64_t blo = out.box.lo[n - 1], bhi = out.box.hi[n - 1];
    std::vector<std::int64_t> lead(n), src(n);
    out.row_lo.assign(rows, std::numeric_limits<std::int64_t>::max());
    out.row_hi.assign(rows, std::numeric_limits<std::int64_t>::min());
    for (std::size_t r = 0; r < rows; ++r) {
        out.box.row_coords(r, lead);
        for (const auto& st : steps) {
            for (std::size_t d = 0; d + 1 < n; ++d) src[d] = lead[d] - st.weight[d];
            const long long rs = in.box.row_index(std::span<const std::int64_t>(src.data(), n - 1));
            if (rs < 0) continue;
            const auto srs = static_cast<std::size_t>(rs);
            if (in.row_lo[srs] > in.row_hi[srs]) continue;
            out.row_lo[r] = std::min(out.row_lo[r], in.row_lo[srs] + st.weight[n - 1]);
            out.row_hi[r] = std::max(out.row_hi[r], in.row_hi[srs] + st.weight[n - 1]);
        }
        out.row_lo[r] = std::max(out.row_lo[r], blo);
        out.row_hi[r] = std::min(out.row_hi[r], bhi);
    }
}

}  // namespace capdual::kernels
