#include "capdual/haar.hpp"

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <numbers>

#include "capdual/error.hpp"
#include "capdual/spectrum.hpp"

namespace capdual {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

SplitMixStream::SplitMixStream(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed + kGamma) ^ mix64((stream + 1) * 0xd1b54a32d192ed03ULL)) {}

std::uint64_t SplitMixStream::next() { return mix64(key_ + (++counter_) * kGamma); }

double SplitMixStream::uniform() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

double SplitMixStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
}

Eigen::MatrixXcd sample_haar_unitary(int n, SplitMixStream& rng) {
    if (n < 1 || n > 8) throw Error("sample_haar_unitary: n must lie in [1, 8]");
    Eigen::MatrixXcd z(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double re = rng.normal();
            const double im = rng.normal();
            z(i, j) = Complex(re, im) * std::numbers::sqrt2 * 0.5;
        }
    // Modified Gram-Schmidt; R has a positive diagonal, which makes Q Haar.
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < j; ++i) z.col(j) -= z.col(i).dot(z.col(j)) * z.col(i);
        z.col(j) /= z.col(j).norm();
    }
    return z;
}

Eigen::MatrixXcd sample_haar_special_unitary(int n, SplitMixStream& rng) {
    Eigen::MatrixXcd u = sample_haar_unitary(n, rng);
    const Complex det = u.determinant();
    return u / std::pow(det, 1.0 / n);
}

double unitarity_defect(const Eigen::MatrixXcd& u) {
    const Eigen::MatrixXcd d = u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
    return Eigen::JacobiSVD<Eigen::MatrixXcd>(d).singularValues()(0);
}

UnitaryRep UnitaryRep::standard(UnitaryGroup g, const Eigen::VectorXcd& v) {
    return UnitaryRep{g, v * v.adjoint()};
}

UnitaryRep UnitaryRep::matrix(UnitaryGroup g, const Eigen::MatrixXcd& A) {
    if (A.rows() != A.cols()) throw Error("UnitaryRep::matrix: square matrix required");
    return UnitaryRep{g, A * A.adjoint()};
}

Complex u2_character(const Partition& lambda, const Eigen::Matrix2cd& u) {
    if (lambda.length() > 2) throw Error("u2_character: at most two parts");
    const Complex tr = u.trace(), det = u.determinant();
    const int m = lambda[0] - lambda[1];
    Complex h_prev = 1.0, h = tr;
    if (m == 0) h = 1.0;
    for (int i = 2; i <= m; ++i) {
        const Complex next = tr * h - det * h_prev;
        h_prev = h;
        h = next;
    }
    return std::pow(det, lambda[1]) * h;
}

namespace {

Complex ipow(Complex z, int k) {
    Complex r = 1.0;
    for (int i = 0; i < k; ++i) r *= z;
    return r;
}

struct Moments {
    Complex sum = 0.0;
    double sum_sq = 0.0;
};

template <class Draw>
McEstimate run_blocks(long samples, std::uint64_t seed, Exec exec, Draw draw) {
    if (samples < 2 || samples > 10'000'000) throw Error("Monte Carlo: samples must lie in [2, 1e7]");
    std::array<Moments, kMcBlocks> blocks{};
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (int b = 0; b < kMcBlocks; ++b) {
        SplitMixStream rng(seed, static_cast<std::uint64_t>(b));
        const long lo = samples * b / kMcBlocks, hi = samples * (b + 1) / kMcBlocks;
        Moments m;
        for (long s = lo; s < hi; ++s) {
            const Complex x = draw(rng);
            m.sum += x;
            m.sum_sq += std::norm(x);
        }
        blocks[static_cast<std::size_t>(b)] = m;
    }
    Moments total;
    for (const auto& m : blocks) {
        total.sum += m.sum;
        total.sum_sq += m.sum_sq;
    }
    const auto N = static_cast<double>(samples);
    McEstimate est;
    est.mean = total.sum / N;
    const double var = std::max(0.0, (total.sum_sq - N * std::norm(est.mean)) / (N - 1.0));
    est.std_error = std::sqrt(var / N);
    est.samples = samples;
    est.seed = seed;
    return est;
}

McEstimate torus_mc(const WeightedVector& v, int k, const std::vector<std::int64_t>& lambda, long samples,
                    std::uint64_t seed, Exec exec) {
    if (k < 0 || k > 8) throw Error("Monte Carlo: k must lie in [0, 8]");
    const auto terms = v.terms();
    const std::size_t n = v.rank();
    std::vector<double> q;
    for (const auto& t : terms) q.push_back(std::norm(t.amplitude));
    return run_blocks(samples, seed, exec, [&](SplitMixStream& rng) {
        std::array<double, 64> angle{};
        std::vector<double> big;
        double* t = angle.data();
        if (n > angle.size()) {
            big.resize(n);
            t = big.data();
        }
        for (std::size_t i = 0; i < n; ++i) t[i] = 2.0 * std::numbers::pi * rng.uniform();
        Complex f = 0.0;
        for (std::size_t j = 0; j < terms.size(); ++j) {
            double phase = 0.0;
            for (std::size_t i = 0; i < n; ++i) phase += static_cast<double>(terms[j].weight[i]) * t[i];
            f += q[j] * std::polar(1.0, phase);
        }
        double phase = 0.0;
        for (std::size_t i = 0; i < n; ++i) phase -= static_cast<double>(lambda[i]) * t[i];
        return ipow(f, k) * std::polar(1.0, phase);
    });
}

Eigen::MatrixXcd draw_group(const UnitaryRep& rep, SplitMixStream& rng) {
    return rep.group == UnitaryGroup::U ? sample_haar_unitary(rep.n(), rng)
                                        : sample_haar_special_unitary(rep.n(), rng);
}

}  // namespace

McEstimate mc_invariant_norm(const WeightedVector& v, int k, long samples, std::uint64_t seed, Exec exec) {
    return torus_mc(v, k, std::vector<std::int64_t>(v.rank(), 0), samples, seed, exec);
}

McEstimate mc_isotypic_norm(const WeightedVector& v, int k, const WeightVector& lambda, long samples,
                            std::uint64_t seed, Exec exec) {
    if (lambda.rank() != v.rank()) throw Error("mc_isotypic_norm: weight rank mismatch");
    return torus_mc(v, k, std::vector<std::int64_t>(lambda.coords().begin(), lambda.coords().end()), samples,
                    seed, exec);
}

McEstimate mc_invariant_norm(const UnitaryRep& rep, int k, long samples, std::uint64_t seed, Exec exec) {
    if (k < 0 || k > 8) throw Error("Monte Carlo: k must lie in [0, 8]");
    if (rep.sigma.rows() != rep.sigma.cols() || rep.n() < 1) throw Error("Monte Carlo: bad representation");
    return run_blocks(samples, seed, exec, [&](SplitMixStream& rng) {
        const Eigen::MatrixXcd u = draw_group(rep, rng);
        return ipow((u * rep.sigma).trace(), k);
    });
}

McEstimate mc_isotypic_norm(const UnitaryRep& rep, int k, const Partition& lambda, long samples,
                            std::uint64_t seed, Exec exec) {
    if (k < 0 || k > 8) throw Error("Monte Carlo: k must lie in [0, 8]");
    if (rep.n() != 2 || rep.sigma.cols() != 2) throw Error("mc_isotypic_norm: only U(2) and SU(2) are supported");
    if (lambda.length() > 2) throw Error("mc_isotypic_norm: lambda must have at most two parts");
    const double d = lambda[0] - lambda[1] + 1;
    return run_blocks(samples, seed, exec, [&](SplitMixStream& rng) {
        const Eigen::Matrix2cd u = draw_group(rep, rng);
        return d * std::conj(u2_character(lambda, u)) * ipow((u * rep.sigma).trace(), k);
    });
}

double unitary_isotypic_exact(const UnitaryRep& rep, int k, const Partition& lambda) {
    if (rep.n() != 2) throw Error("unitary_isotypic_exact: only U(2) and SU(2) are supported");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rep.sigma);
    std::vector<double> x;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) x.push_back(std::max(0.0, es.eigenvalues()(i)));
    Partition mu = lambda;
    if (rep.group == UnitaryGroup::SU) {
        const int j = lambda[0] - lambda[1];
        if (j > k || (k - j) % 2 != 0) return 0.0;
        mu = Partition{(k + j) / 2, (k - j) / 2};
    } else if (lambda.size() != k) {
        return 0.0;
    }
    return schur_weyl_weight(mu, x).to_double();
}

}  // namespace capdual
