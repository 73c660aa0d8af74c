#include "capdual/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "capdual/error.hpp"
#include "capdual/haar.hpp"
#include "capdual/torus.hpp"

namespace capdual {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Eigenvalues (decreasing) and matching eigenvectors of a Hermitian matrix.
std::pair<std::vector<double>, Eigen::MatrixXcd> eigen_decreasing(const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    const auto n = m.rows();
    std::vector<double> vals(static_cast<std::size_t>(n));
    Eigen::MatrixXcd vecs(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        vals[static_cast<std::size_t>(i)] = std::max(0.0, es.eigenvalues()(n - 1 - i));
        vecs.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    return {vals, vecs};
}

double entropy_term(std::span<const double> p) {
    double s = 0.0;
    for (double x : p)
        if (x > 0.0) s += x * std::log(x);
    return s;
}

}  // namespace

HermitianState::HermitianState(Eigen::MatrixXcd sigma, double tol) {
    if (sigma.rows() == 0 || sigma.rows() != sigma.cols()) throw Error("HermitianState: square matrix required");
    if (!sigma.allFinite()) throw Error("HermitianState: non-finite entry");
    if ((sigma - sigma.adjoint()).cwiseAbs().maxCoeff() > tol) throw Error("HermitianState: matrix is not Hermitian");
    sigma_ = (sigma + sigma.adjoint()) * 0.5;
    const double tr = sigma_.trace().real();
    if (std::fabs(tr - 1.0) > tol) throw Error("HermitianState: trace " + std::to_string(tr) + " != 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sigma_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) throw Error("HermitianState: matrix is not positive semidefinite");
}

HermitianState HermitianState::diagonal(std::span<const double> p) {
    Eigen::VectorXcd d(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) d(static_cast<Eigen::Index>(i)) = p[i];
    return HermitianState(d.asDiagonal().toDenseMatrix());
}

HermitianState HermitianState::from_matrix(const Eigen::MatrixXcd& A) {
    const double f = A.squaredNorm();
    if (!(f > 0.0)) throw Error("HermitianState::from_matrix: zero matrix");
    return HermitianState(A * A.adjoint() / f);
}

std::vector<double> HermitianState::spectrum() const { return eigen_decreasing(sigma_).first; }

double keyl_rate(const HermitianState& rho, const HermitianState& sigma) {
    if (rho.dim() != sigma.dim()) throw Error("keyl_rate: dimension mismatch");
    const auto [p, u] = eigen_decreasing(rho.matrix());
    Eigen::MatrixXcd a = u.adjoint() * sigma.matrix() * u;
    const auto n = static_cast<std::size_t>(a.rows());
    const double eps = 1e-14;

    // Leading principal minors from the pivots of an unpivoted LDL^dagger sweep.
    // Once a pivot vanishes every larger leading minor of a PSD matrix vanishes too.
    std::vector<double> log_minor(n, -kInf);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto K = static_cast<Eigen::Index>(k);
        const double piv = a(K, K).real();
        if (piv <= eps) break;
        acc += std::log(piv);
        log_minor[k] = acc;
        for (Eigen::Index i = K + 1; i < a.rows(); ++i)
            for (Eigen::Index j = K + 1; j < a.rows(); ++j) a(i, j) -= a(i, K) * std::conj(a(j, K)) / piv;
    }

    double rate = entropy_term(p);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = p[k] - (k + 1 < n ? p[k + 1] : 0.0);
        if (w <= 1e-15) continue;
        if (log_minor[k] == -kInf) return kInf;
        rate -= w * log_minor[k];
    }
    return rate < 0.0 && rate > -1e-12 ? 0.0 : rate;
}

double quantum_relative_entropy(const HermitianState& rho, const HermitianState& sigma) {
    if (rho.dim() != sigma.dim()) throw Error("quantum_relative_entropy: dimension mismatch");
    const auto [p, u] = eigen_decreasing(rho.matrix());
    const auto [s, v] = eigen_decreasing(sigma.matrix());
    const Eigen::MatrixXcd r = v.adjoint() * rho.matrix() * v;
    double cross = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        const double w = r(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)).real();
        if (w <= 1e-14) continue;
        if (s[j] <= 1e-14) return kInf;
        cross += w * std::log(s[j]);
    }
    return entropy_term(p) - cross;
}

double kw_rate(const ProbVector& p, const ProbVector& q) {
    if (!p.sorted_decreasing() || !q.sorted_decreasing()) throw Error("kw_rate: inputs must be sorted decreasingly");
    if (p.size() != q.size()) throw Error("kw_rate: length mismatch");
    return kl_divergence(p.values(), q.values());
}

KwCheck kw_minimization_check(const ProbVector& p, const HermitianState& sigma, int samples, std::uint64_t seed) {
    const int n = static_cast<int>(sigma.dim());
    if (n > 3) throw Error("kw_minimization_check: n <= 3 required");
    if (static_cast<int>(p.size()) != n) throw Error("kw_minimization_check: dimension mismatch");
    std::vector<double> ps(p.values().begin(), p.values().end());
    std::sort(ps.begin(), ps.end(), std::greater<>());
    const auto [q, v] = eigen_decreasing(sigma.matrix());

    KwCheck out;
    out.analytic = kw_rate(ProbVector(ps), ProbVector(q));
    Eigen::VectorXcd d(n);
    for (int i = 0; i < n; ++i) d(i) = ps[static_cast<std::size_t>(i)];
    const Eigen::MatrixXcd D = d.asDiagonal();
    out.sampled_min = keyl_rate(HermitianState(v * D * v.adjoint()), sigma);
    SplitMixStream rng(seed, 0);
    for (int s = 0; s < samples; ++s) {
        const Eigen::MatrixXcd u = sample_haar_unitary(n, rng);
        out.sampled_min = std::min(out.sampled_min, keyl_rate(HermitianState(u * D * u.adjoint()), sigma));
    }
    return out;
}

SU2MultTable su2_step(const SU2MultTable& t) {
    SU2MultTable out;
    out.k = t.k + 1;
    out.n.assign(static_cast<std::size_t>(out.k) + 1, BigNat(0));
    for (int l = 0; l <= out.k; ++l) {
        auto& x = out.n[static_cast<std::size_t>(l)];
        if (l >= 1 && l - 1 <= t.k) x += t.n[static_cast<std::size_t>(l - 1)];
        if (l + 1 <= t.k) x += t.n[static_cast<std::size_t>(l + 1)];
    }
    return out;
}

SU2MultTable su2_multiplicities(int k) {
    if (k < 0 || k > 1000) throw Error("su2_multiplicities: k must lie in [0, 1000]");
    SU2MultTable t;
    t.n = {BigNat(1)};
    for (int i = 0; i < k; ++i) t = su2_step(t);
    return t;
}

BigNat su2_multiplicity_closed_form(int k, int lambda) {
    if (lambda < 0 || lambda > k || (k - lambda) % 2 != 0) return BigNat(0);
    const auto a = static_cast<unsigned long>((k - lambda) / 2);
    BigNat x = BigNat::binomial(static_cast<unsigned long>(k), a);
    if (a >= 1) x -= BigNat::binomial(static_cast<unsigned long>(k), a - 1);
    return x;
}

double duffield_rate(std::span<const long> weights, double theta) {
    if (weights.empty()) throw Error("duffield_rate: empty weight multiset");
    const long wmax = *std::max_element(weights.begin(), weights.end());
    const auto d = static_cast<double>(weights.size());
    double mean = 0.0;
    for (long w : weights) mean += static_cast<double>(w);
    mean /= d;
    if (theta <= mean) return 0.0;
    if (theta > static_cast<double>(wmax)) return kInf;
    if (theta == static_cast<double>(wmax)) {
        const auto top = std::count(weights.begin(), weights.end(), wmax);
        return std::log(d / static_cast<double>(top));
    }
    // g(h) = log(chi(e^h)/d), shifted by wmax for stability; g' is the tilted mean.
    auto moments = [&](double h, double& g, double& g1, double& g2) {
        double z = 0.0, m1 = 0.0, m2 = 0.0;
        for (long w : weights) {
            const double e = std::exp(static_cast<double>(w - wmax) * h);
            z += e;
            m1 += static_cast<double>(w) * e;
            m2 += static_cast<double>(w) * static_cast<double>(w) * e;
        }
        g = std::log(z / d) + static_cast<double>(wmax) * h;
        g1 = m1 / z;
        g2 = m2 / z - g1 * g1;
    };
    double g, g1, g2;
    double lo = 0.0, hi = 1.0;
    for (moments(hi, g, g1, g2); g1 < theta; moments(hi, g, g1, g2)) lo = hi, hi *= 2.0;
    double h = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        moments(h, g, g1, g2);
        const double f = g1 - theta;
        if (f > 0.0) hi = h;
        else lo = h;
        if (std::fabs(f) < 1e-15 || hi - lo < 1e-15 * std::max(1.0, h)) break;
        double next = g2 > 0.0 ? h - f / g2 : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        h = next;
    }
    moments(h, g, g1, g2);
    return theta * h - g;
}

Partition round_partition(std::span<const Rational> theta, long k) {
    if (theta.empty()) throw Error("round_partition: empty theta");
    for (std::size_t i = 0; i + 1 < theta.size(); ++i)
        if (theta[i] < theta[i + 1]) throw Error("round_partition: theta must be sorted decreasingly");
    Rational total = 0;
    for (const auto& t : theta) {
        if (sgn(t) < 0) throw Error("round_partition: theta must be nonnegative");
        total += t;
    }
    if (total != 1) throw Error("round_partition: theta must sum to 1");
    // Largest remainders; ties go to the lower index, which keeps the parts sorted.
    std::vector<int> parts;
    std::vector<Rational> frac;
    long used = 0;
    for (const auto& t : theta) {
        const Rational x = t * k;
        const mpz_class fl = x.get_num() / x.get_den();
        parts.push_back(static_cast<int>(fl.get_si()));
        frac.push_back(x - Rational(fl));
        used += fl.get_si();
    }
    for (long left = k - used; left > 0; --left) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < frac.size(); ++i)
            if (frac[i] > frac[best]) best = i;
        ++parts[best];
        frac[best] = -1;
    }
    return Partition(parts);
}

ConvergenceReport schur_weyl_ldp_report(const ProbVector& q, std::span<const Rational> theta, long k_max) {
    if (!q.sorted_decreasing()) throw Error("schur_weyl_ldp_report: q must be sorted decreasingly");
    if (theta.size() != q.size()) throw Error("schur_weyl_ldp_report: theta and q differ in length");
    const auto th = to_doubles(theta);
    const double target = kw_rate(ProbVector(th), q);
    ConvergenceReport rep;
    rep.family = "schur-weyl-ldp";
    rep.theta.assign(theta.begin(), theta.end());
    for (long k = 1; k <= k_max; ++k) {
        const Partition lambda = round_partition(theta, k);
        const LogValue p = schur_weyl_weight(lambda, q.values());
        if (p.is_zero()) continue;
        ReportRow row;
        row.k = k;
        row.label = lambda.str();
        row.log_value = p.log_abs();
        row.rate = -row.log_value / static_cast<double>(k);
        row.target = target;
        row.gap = row.rate - target;
        rep.rows.push_back(row);
    }
    return rep;
}

ConvergenceReport duffield_ldp_report(std::span<const long> weights, const Rational& theta, long k_max) {
    if (weights.empty()) throw Error("duffield_ldp_report: empty weight multiset");
    std::vector<long> w(weights.begin(), weights.end()), neg;
    std::sort(w.begin(), w.end());
    for (auto it = w.rbegin(); it != w.rend(); ++it) neg.push_back(-*it);
    if (w != neg) throw Error("duffield_ldp_report: weights are not symmetric (not an SU(2) character)");
    const long wmax = w.back();
    if (sgn(theta) < 0 || theta > wmax) throw Error("duffield_ldp_report: theta outside [0, max weight]");
    const double target = duffield_rate(w, theta.get_d());
    const double log_d = std::log(static_cast<double>(w.size()));

    ConvergenceReport rep;
    rep.family = "duffield-ldp";
    rep.theta = {theta};
    // Weight multiplicities of W^{(x)k}, indexed by mu + k wmax.
    std::vector<BigNat> m{BigNat(1)};
    for (long k = 1; k <= k_max; ++k) {
        std::vector<BigNat> next(static_cast<std::size_t>(2 * k * wmax + 1), BigNat(0));
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i].is_zero()) continue;
            for (long x : w) next[static_cast<std::size_t>(static_cast<long>(i) + x + wmax)] += m[i];
        }
        m = std::move(next);
        const long off = k * wmax;
        auto mult = [&](long lambda) {
            const BigNat a = m[static_cast<std::size_t>(lambda + off)];
            if (lambda + 2 > off) return a;
            const BigNat& b = m[static_cast<std::size_t>(lambda + 2 + off)];
            return a - b;
        };
        const Rational center = theta * k;
        long best = -1;
        Rational best_dist;
        for (long lambda = 0; lambda <= off; ++lambda) {
            if (mult(lambda).is_zero()) continue;
            Rational dist = Rational(lambda) - center;
            dist = abs(dist);
            if (best < 0 || dist <= best_dist) best = lambda, best_dist = dist;
        }
        if (best < 0) continue;
        ReportRow row;
        row.k = k;
        row.label = std::to_string(best);
        row.log_value = std::log(static_cast<double>(best + 1)) + mult(best).log().log_abs() -
                        static_cast<double>(k) * log_d;
        row.rate = -row.log_value / static_cast<double>(k);
        row.target = target;
        row.gap = row.rate - target;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace capdual
