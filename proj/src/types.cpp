#include "capdual/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "capdual/error.hpp"

namespace capdual {

WeightVector::WeightVector(std::vector<std::int64_t> coords, std::int64_t max_entry)
    : coords_(std::move(coords)) {
    if (coords_.empty()) throw Error("WeightVector: rank must be >= 1");
    for (auto c : coords_)
        if (c > max_entry || c < -max_entry)
            throw Error("WeightVector: entry " + std::to_string(c) + " exceeds bound " +
                        std::to_string(max_entry));
}

WeightVector::WeightVector(std::initializer_list<std::int64_t> coords)
    : WeightVector(std::vector<std::int64_t>(coords)) {}

std::string WeightVector::str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < coords_.size(); ++i) os << (i ? "," : "") << coords_[i];
    os << ')';
    return os.str();
}

WeightedVector::WeightedVector(std::size_t rank, std::vector<Term> terms)
    : rank_(rank), terms_(std::move(terms)) {
    if (rank_ == 0) throw Error("WeightedVector: rank must be >= 1");
    std::set<WeightVector> seen;
    for (const auto& t : terms_) {
        if (t.weight.rank() != rank_)
            throw Error("WeightedVector: weight " + t.weight.str() + " has wrong rank");
        if (!std::isfinite(t.amplitude.real()) || !std::isfinite(t.amplitude.imag()))
            throw Error("WeightedVector: non-finite amplitude at weight " + t.weight.str());
        if (!seen.insert(t.weight).second)
            throw Error("WeightedVector: duplicate weight " + t.weight.str());
    }
    if (!std::isfinite(norm_sq())) throw Error("WeightedVector: norm overflows");
}

double WeightedVector::norm_sq() const {
    double s = 0.0;
    for (const auto& t : terms_) s += std::norm(t.amplitude);
    return s;
}

bool WeightedVector::is_zero() const { return norm_sq() == 0.0; }

std::vector<double> WeightedVector::intensities() const {
    std::vector<double> q;
    q.reserve(terms_.size());
    for (const auto& t : terms_) q.push_back(std::norm(t.amplitude));
    return q;
}

WeightedVector WeightedVector::pruned(double threshold) const {
    std::vector<Term> kept;
    for (const auto& t : terms_)
        if (std::norm(t.amplitude) > threshold) kept.push_back(t);
    return WeightedVector(rank_, std::move(kept));
}

Partition::Partition(std::vector<int> parts) : parts_(std::move(parts)) {
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (parts_[i] < 0) throw Error("Partition: negative part");
        if (i + 1 < parts_.size() && parts_[i] < parts_[i + 1])
            throw Error("Partition: parts must be non-increasing");
    }
}

Partition::Partition(std::initializer_list<int> parts) : Partition(std::vector<int>(parts)) {}

std::size_t Partition::length() const {
    return static_cast<std::size_t>(
        std::count_if(parts_.begin(), parts_.end(), [](int p) { return p > 0; }));
}

int Partition::size() const { return std::accumulate(parts_.begin(), parts_.end(), 0); }

std::string Partition::str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < parts_.size(); ++i) os << (i ? "," : "") << parts_[i];
    os << ')';
    return os.str();
}

namespace {

void gen_partitions(int remaining, int max_part, int slots_left, std::vector<int>& cur,
                    std::vector<Partition>& out) {
    if (slots_left == 0) {
        if (remaining == 0) out.emplace_back(cur);
        return;
    }
    // Remaining slots can absorb at most max_part each.
    for (int p = std::min(remaining, max_part); p >= 0; --p) {
        if (static_cast<long long>(p) * slots_left < remaining) break;
        cur.push_back(p);
        gen_partitions(remaining - p, p, slots_left - 1, cur, out);
        cur.pop_back();
    }
}

}  // namespace

std::vector<Partition> partitions_of(int k, int max_parts) {
    if (k < 0 || max_parts < 1) throw Error("partitions_of: need k >= 0 and max_parts >= 1");
    std::vector<Partition> out;
    std::vector<int> cur;
    gen_partitions(k, k, max_parts, cur, out);
    return out;
}

ProbVector::ProbVector(std::vector<double> p) : p_(std::move(p)) {
    if (p_.empty()) throw Error("ProbVector: empty");
    double s = 0.0;
    for (double x : p_) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw Error("ProbVector: entries must be >= 0");
        s += x;
    }
    if (std::fabs(s - 1.0) > 1e-12) throw Error("ProbVector: entries must sum to 1");
}

bool ProbVector::sorted_decreasing() const {
    return std::is_sorted(p_.begin(), p_.end(), std::greater<>());
}

}  // namespace capdual
