#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace capdual::kernels {

/// Axis-aligned box of lattice points, last coordinate contiguous in memory.
struct Box {
    std::vector<std::int64_t> lo, hi;  // inclusive

    std::size_t rank() const { return lo.size(); }
    bool empty() const;
    std::int64_t extent(std::size_t d) const { return hi[d] - lo[d] + 1; }
    /// Number of rows (product of all extents but the last).
    std::size_t rows() const;
    std::size_t cells() const;
    /// Leading coordinates of row r.
    void row_coords(std::size_t r, std::span<std::int64_t> out) const;
    /// Row index of leading coordinates, or -1 if outside.
    long long row_index(std::span<const std::int64_t> lead) const;
    long long cell_index(std::span<const std::int64_t> coords) const;
};

/// Dense values over a box. Row r is only meaningful on [row_lo[r], row_hi[r]]
/// (absolute last coordinate); everything else is an implicit zero.
struct Slice {
    Box box;
    std::vector<double> values;
    std::vector<std::int64_t> row_lo, row_hi;

    void allocate(Box b, double fill);
    /// Sets the box without touching values; only valid when a kernel will write
    /// every active range before anything reads it.
    void reshape(Box b);
    double* row(std::size_t r) { return values.data() + r * static_cast<std::size_t>(box.extent(box.rank() - 1)); }
    const double* row(std::size_t r) const {
        return values.data() + r * static_cast<std::size_t>(box.extent(box.rank() - 1));
    }
};

/// One convolution step: shift by weight, multiply by factor (linear kernels) or
/// add log factor (log kernels).
struct Step {
    std::vector<std::int64_t> weight;
    double factor;
};

/// out.box and out.row_lo/row_hi must be set by the caller. Computes
///   out[c] = sum_s factor_s * in[c - w_s]              (linear)
///   out[c] = logsumexp_s (factor_s + in[c - w_s])     (log; -inf is zero)
/// on each row's active range. Serial versions are the reference; the OpenMP versions
/// split rows across threads and produce bit-identical output.
///
/// The linear kernels return the largest output value. With floor > 0 they also
/// flush outputs below floor to zero and shrink each row range to its nonzero extent.
double convolve_linear_serial(const Slice& in, std::span<const Step> steps, Slice& out, double floor = 0.0);
double convolve_linear_omp(const Slice& in, std::span<const Step> steps, Slice& out, double floor = 0.0);
void convolve_log_serial(const Slice& in, std::span<const Step> steps, Slice& out);
void convolve_log_omp(const Slice& in, std::span<const Step> steps, Slice& out);

/// Hull of the shifted input row ranges, i.e. the support of the next slice.
void propagate_row_ranges(const Slice& in, std::span<const Step> steps, Slice& out);

}  // namespace capdual::kernels
