#include "capdual/torus.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "capdual/error.hpp"
#include "capdual/rational_lp.hpp"

namespace capdual {

namespace {

constexpr double kPruneThreshold = 1e-30;

void check_theta(std::size_t rank, std::span<const Rational> theta) {
    if (theta.size() != rank)
        throw Error("theta has length " + std::to_string(theta.size()) + ", expected " +
                    std::to_string(rank));
}

std::vector<WeightVector> support_weights(const WeightedVector& v) {
    std::vector<WeightVector> pts;
    for (const auto& t : v.terms()) pts.push_back(t.weight);
    return pts;
}

RationalMatrix hull_system(std::span<const WeightVector> points, std::size_t n) {
    RationalMatrix A(n + 1, points.size());
    for (std::size_t j = 0; j < points.size(); ++j) {
        for (std::size_t i = 0; i < n; ++i) A(i, j) = static_cast<long>(points[j][i]);
        A(n, j) = 1;
    }
    return A;
}

std::vector<Rational> hull_rhs(std::span<const Rational> theta) {
    std::vector<Rational> b(theta.begin(), theta.end());
    b.emplace_back(1);
    return b;
}

// The objective restricted to one face, written in orthonormal coordinates z of the
// face's direction space:  F(z) = -2<t,z> + log sum_f q_f e^{2<a_f,z>}.
struct FaceObjective {
    Eigen::MatrixXd basis;          // n x r
    std::vector<Eigen::VectorXd> a;  // reduced weights
    std::vector<double> log_q;
    Eigen::VectorXd t;

    struct Eval {
        double f;
        Eigen::VectorXd g;
        Eigen::MatrixXd H;
    };

    int dim() const { return static_cast<int>(basis.cols()); }

    double value(const Eigen::VectorXd& z) const {
        double m = -std::numeric_limits<double>::infinity();
        std::vector<double> s(a.size());
        for (std::size_t f = 0; f < a.size(); ++f) {
            s[f] = log_q[f] + 2.0 * a[f].dot(z);
            m = std::max(m, s[f]);
        }
        double Z = 0.0;
        for (double x : s) Z += std::exp(x - m);
        return -2.0 * t.dot(z) + m + std::log(Z);
    }

    Eval eval(const Eigen::VectorXd& z) const {
        const int r = dim();
        std::vector<double> s(a.size());
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < a.size(); ++f) {
            s[f] = log_q[f] + 2.0 * a[f].dot(z);
            m = std::max(m, s[f]);
        }
        double Z = 0.0;
        for (double& x : s) {
            x = std::exp(x - m);
            Z += x;
        }
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(r);
        Eigen::MatrixXd second = Eigen::MatrixXd::Zero(r, r);
        for (std::size_t f = 0; f < a.size(); ++f) {
            const double p = s[f] / Z;
            mean += p * a[f];
            second += p * a[f] * a[f].transpose();
        }
        return {-2.0 * t.dot(z) + m + std::log(Z), 2.0 * (mean - t),
                4.0 * (second - mean * mean.transpose())};
    }
};

FaceObjective make_face_objective(const WeightedVector& v, const std::vector<std::size_t>& face,
                                  std::span<const Rational> theta) {
    const std::size_t n = v.rank();
    const auto terms = v.terms();
    const auto& w0 = terms[face.front()].weight;
    Eigen::MatrixXd diffs(n, static_cast<Eigen::Index>(face.size()) - 1);
    for (std::size_t f = 1; f < face.size(); ++f)
        for (std::size_t i = 0; i < n; ++i)
            diffs(i, f - 1) = static_cast<double>(terms[face[f]].weight[i] - w0[i]);

    FaceObjective obj;
    if (diffs.cols() == 0) {
        obj.basis = Eigen::MatrixXd::Zero(n, 0);
    } else {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(diffs);
        const auto r = qr.rank();
        Eigen::MatrixXd q = qr.householderQ();
        obj.basis = q.leftCols(r);
    }
    const auto r = obj.basis.cols();
    for (auto f : face) {
        Eigen::VectorXd d(n);
        for (std::size_t i = 0; i < n; ++i)
            d(i) = static_cast<double>(terms[f].weight[i] - w0[i]);
        obj.a.push_back(obj.basis.transpose() * d);
        obj.log_q.push_back(std::log(std::norm(terms[f].amplitude)));
    }
    Eigen::VectorXd th(n);
    for (std::size_t i = 0; i < n; ++i) th(i) = theta[i].get_d() - static_cast<double>(w0[i]);
    obj.t = r > 0 ? Eigen::VectorXd(obj.basis.transpose() * th) : Eigen::VectorXd(0);
    return obj;
}

struct NewtonOutcome {
    Eigen::VectorXd z;
    double f;
    int iterations;
    double grad_inf;
};

NewtonOutcome minimize_face(const FaceObjective& obj, const SolverOptions& opts) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(obj.dim());
    int it = 0;
    auto ev = obj.eval(z);
    double gnorm = (obj.basis * ev.g).cwiseAbs().maxCoeff();
    if (obj.dim() == 0) return {z, ev.f, 0, 0.0};
    for (; it < opts.max_iterations && gnorm > opts.gradient_tol; ++it) {
        Eigen::VectorXd d;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(ev.H);
        bool newton_ok = ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                         ldlt.vectorD().minCoeff() > 1e-14 * std::max(1.0, ev.H.trace());
        if (newton_ok) {
            d = ldlt.solve(-ev.g);
            newton_ok = d.allFinite() && ev.g.dot(d) < 0.0;
        }
        if (!newton_ok) d = -ev.g;  // singular Hessian: plain gradient step
        const double slope = ev.g.dot(d);
        double step = 1.0;
        double f_new = obj.value(z + step * d);
        while (!(f_new <= ev.f + 1e-4 * step * slope) && step > 1e-20) {
            step *= 0.5;
            f_new = obj.value(z + step * d);
        }
        if (step <= 1e-20) break;  // no further progress in floating point
        z += step * d;
        ev = obj.eval(z);
        gnorm = (obj.basis * ev.g).cwiseAbs().maxCoeff();
    }
    return {z, ev.f, it, gnorm};
}

}  // namespace

RationalVector to_rational(std::span<const double> theta, double tol) {
    RationalVector out;
    for (double x : theta) out.push_back(rationalize(x, tol));
    return out;
}

std::vector<double> to_doubles(std::span<const Rational> v) {
    std::vector<double> out;
    for (const auto& q : v) out.push_back(q.get_d());
    return out;
}

PolytopeMembership hull_contains(std::span<const WeightVector> points,
                                 std::span<const Rational> theta) {
    if (points.empty()) throw Error("hull_contains: empty point set");
    const std::size_t n = points.front().rank();
    check_theta(n, theta);
    const auto A = hull_system(points, n);
    const auto lp = solve_standard_lp(A, hull_rhs(theta), RationalVector(points.size(), Rational(0)));
    PolytopeMembership out;
    if (lp.status == LpResult::Status::optimal) {
        out.contains = true;
        out.coefficients = lp.x;
        return out;
    }
    out.contains = false;
    out.normal.assign(lp.farkas.begin(), lp.farkas.begin() + static_cast<long>(n));
    out.offset = -lp.farkas[n];
    return out;
}

PolytopeMembership moment_polytope_contains(const WeightedVector& v,
                                            std::span<const Rational> theta) {
    check_theta(v.rank(), theta);
    std::vector<WeightVector> pts;
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (std::norm(v.terms()[i].amplitude) > kPruneThreshold) {
            pts.push_back(v.terms()[i].weight);
            index.push_back(i);
        }
    if (pts.empty()) throw Error("moment_polytope_contains: zero vector");
    auto res = hull_contains(pts, theta);
    if (res.contains) {
        RationalVector full(v.size(), Rational(0));
        for (std::size_t j = 0; j < index.size(); ++j) full[index[j]] = res.coefficients[j];
        res.coefficients = std::move(full);
    }
    return res;
}

std::vector<std::size_t> minimal_face(std::span<const WeightVector> points,
                                      std::span<const Rational> theta) {
    const std::size_t n = points.front().rank();
    check_theta(n, theta);
    const auto A = hull_system(points, n);
    const auto b = hull_rhs(theta);
    std::vector<bool> on_face(points.size(), false);
    const auto first = solve_standard_lp(A, b, RationalVector(points.size(), Rational(0)));
    if (first.status != LpResult::Status::optimal) return {};
    for (std::size_t j = 0; j < points.size(); ++j)
        if (sgn(first.x[j]) > 0) on_face[j] = true;
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (on_face[j]) continue;
        RationalVector c(points.size(), Rational(0));
        c[j] = 1;
        const auto lp = solve_standard_lp(A, b, c);
        if (lp.status == LpResult::Status::optimal)
            for (std::size_t i = 0; i < points.size(); ++i)
                if (sgn(lp.x[i]) > 0) on_face[i] = true;
    }
    std::vector<std::size_t> face;
    for (std::size_t j = 0; j < points.size(); ++j)
        if (on_face[j]) face.push_back(j);
    return face;
}

std::vector<double> moment_map(const WeightedVector& v) {
    const double nrm = v.norm_sq();
    if (!(nrm > 0.0)) throw Error("moment_map: zero vector");
    std::vector<double> mu(v.rank(), 0.0);
    for (const auto& t : v.terms()) {
        const double q = std::norm(t.amplitude) / nrm;
        for (std::size_t i = 0; i < v.rank(); ++i) mu[i] += q * static_cast<double>(t.weight[i]);
    }
    return mu;
}

CapacityResult theta_capacity(const WeightedVector& v_in, std::span<const Rational> theta,
                              const SolverOptions& opts) {
    check_theta(v_in.rank(), theta);
    if (!(v_in.norm_sq() > 0.0)) throw Error("theta_capacity: zero vector");
    const WeightedVector v = v_in.pruned(kPruneThreshold);
    if (v.size() == 0) throw Error("theta_capacity: zero vector after support pruning");

    CapacityResult res;
    const auto pts = support_weights(v);
    auto membership = hull_contains(pts, theta);
    if (!membership.contains) {
        res.cap = LogValue::zero();
        res.certificate = std::move(membership);
        return res;
    }
    const auto face = minimal_face(pts, theta);
    const auto obj = make_face_objective(v, face, theta);
    const auto out = minimize_face(obj, opts);

    res.cap = LogValue::from_log(0.5 * out.f);
    res.iterations = out.iterations;
    res.gradient_norm = out.grad_inf;
    const Eigen::VectorXd x = obj.basis * out.z;
    res.face_minimizer.assign(x.data(), x.data() + x.size());
    res.diverging = face.size() != v.size();
    if (!res.diverging) res.minimizer = res.face_minimizer;

    // Report face indices against the caller's (unpruned) term list.
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < v_in.size(); ++i)
        if (std::norm(v_in.terms()[i].amplitude) > kPruneThreshold) kept.push_back(i);
    for (auto f : face) res.face.push_back(kept[f]);
    return res;
}

LogValue capacity_kl_form(const WeightedVector& v_in, std::span<const Rational> theta,
                          const SolverOptions& opts) {
    check_theta(v_in.rank(), theta);
    if (std::fabs(v_in.norm_sq() - 1.0) > 1e-10)
        throw Error("capacity_kl_form: vector must have unit norm");
    const WeightedVector v = v_in.pruned(kPruneThreshold);
    const auto pts = support_weights(v);
    const auto face = minimal_face(pts, theta);
    if (face.empty()) return LogValue::zero();

    const std::size_t n = v.rank();
    const auto th = to_doubles(theta);
    std::vector<Eigen::VectorXd> u;  // face weights centered at theta
    std::vector<double> q;
    for (auto f : face) {
        Eigen::VectorXd d(n);
        for (std::size_t i = 0; i < n; ++i)
            d(i) = static_cast<double>(v.terms()[f].weight[i]) - th[i];
        u.push_back(d);
        q.push_back(std::norm(v.terms()[f].amplitude));
    }

    // Dual: minimize  phi(y) = log sum_f q_f e^{<y,u_f>}.
    auto tilt = [&](const Eigen::VectorXd& y, std::vector<double>& p) {
        double m = -std::numeric_limits<double>::infinity();
        p.resize(u.size());
        for (std::size_t f = 0; f < u.size(); ++f) {
            p[f] = std::log(q[f]) + y.dot(u[f]);
            m = std::max(m, p[f]);
        }
        double Z = 0.0;
        for (double& x : p) {
            x = std::exp(x - m);
            Z += x;
        }
        for (double& x : p) x /= Z;
        return m + std::log(Z);
    };

    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    std::vector<double> p;
    double phi = tilt(y, p);
    for (int it = 0; it < opts.max_iterations; ++it) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t f = 0; f < u.size(); ++f) g += p[f] * u[f];
        if (g.cwiseAbs().maxCoeff() <= 1e-2 * opts.gradient_tol) break;
        Eigen::MatrixXd H = -g * g.transpose();
        for (std::size_t f = 0; f < u.size(); ++f) H += p[f] * u[f] * u[f].transpose();
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(H);
        cod.setThreshold(1e-13);
        Eigen::VectorXd d = -cod.solve(g);
        if (!d.allFinite() || g.dot(d) >= 0.0) d = -g;
        double step = 1.0;
        std::vector<double> p_new;
        double phi_new = tilt(y + step * d, p_new);
        while (!(phi_new <= phi + 1e-4 * step * g.dot(d)) && step > 1e-20) {
            step *= 0.5;
            phi_new = tilt(y + step * d, p_new);
        }
        if (step <= 1e-20) break;
        y += step * d;
        phi = phi_new;
        p = std::move(p_new);
    }

    // Primal evaluation at the tilted distribution.
    double kl = 0.0;
    for (std::size_t f = 0; f < p.size(); ++f)
        if (p[f] > 0.0) kl += p[f] * (std::log(p[f]) - std::log(q[f]));
    return LogValue::from_log(-kl);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw Error("kl_divergence: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        s += p[i] * std::log(p[i] / q[i]);
    }
    return s;
}

}  // namespace capdual
