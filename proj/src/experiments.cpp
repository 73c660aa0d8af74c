#include "capdual/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <json.hpp>
#include <set>
#include <sstream>

#include "capdual/haar.hpp"
#include "capdual/laurent.hpp"
#include "capdual/projection.hpp"
#include "capdual/scaling.hpp"
#include "capdual/spectrum.hpp"
#include "capdual/torus.hpp"

#ifndef CAPDUAL_VERSION
#define CAPDUAL_VERSION "0.1.0+unknown"
#endif

namespace capdual {

namespace {

using json = nlohmann::ordered_json;

// ---- schema helpers --------------------------------------------------------

class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    const json& req(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) throw ConfigError(where() + ": missing field \"" + key + "\"");
        return j_.at(key);
    }
    const json* opt(const std::string& key) {
        used_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }
    std::string at(const std::string& key) const { return path_ + "/" + key; }
    std::string where() const { return path_.empty() ? "config" : path_; }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) throw ConfigError(where() + ": unknown field \"" + k + "\"");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

Rational as_rational(const json& j, const std::string& path) {
    try {
        if (j.is_string()) return parse_rational(j.get<std::string>());
        if (j.is_number()) return parse_rational(j.dump());
    } catch (const Error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    throw ConfigError(path + ": expected a number or a \"p/q\" string");
}

double as_double(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    return as_rational(j, path).get_d();
}

long as_long(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return j.get<long>();
}

Complex as_complex(const json& j, const std::string& path) {
    if (j.is_array()) {
        if (j.size() != 2) throw ConfigError(path + ": complex entries are [real, imag] pairs");
        return {as_double(j[0], path + "/0"), as_double(j[1], path + "/1")};
    }
    return {as_double(j, path), 0.0};
}

const json& as_array(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array");
    return j;
}

RationalVector as_rational_vector(const json& j, const std::string& path) {
    RationalVector out;
    for (std::size_t i = 0; i < as_array(j, path).size(); ++i)
        out.push_back(as_rational(j[i], path + "/" + std::to_string(i)));
    return out;
}

std::vector<double> as_double_vector(const json& j, const std::string& path) {
    std::vector<double> out;
    for (std::size_t i = 0; i < as_array(j, path).size(); ++i)
        out.push_back(as_double(j[i], path + "/" + std::to_string(i)));
    return out;
}

std::vector<long> as_long_vector(const json& j, const std::string& path) {
    std::vector<long> out;
    for (std::size_t i = 0; i < as_array(j, path).size(); ++i)
        out.push_back(as_long(j[i], path + "/" + std::to_string(i)));
    return out;
}

Eigen::MatrixXcd as_complex_matrix(const json& j, const std::string& path) {
    const auto& rows = as_array(j, path);
    if (rows.empty()) throw ConfigError(path + ": empty matrix");
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto m = static_cast<Eigen::Index>(as_array(rows[0], path + "/0").size());
    Eigen::MatrixXcd out(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::string rp = path + "/" + std::to_string(i);
        const auto& row = as_array(rows[static_cast<std::size_t>(i)], rp);
        if (static_cast<Eigen::Index>(row.size()) != m) throw ConfigError(rp + ": ragged matrix");
        for (Eigen::Index c = 0; c < m; ++c)
            out(i, c) = as_complex(row[static_cast<std::size_t>(c)], rp + "/" + std::to_string(c));
    }
    return out;
}

// {"rank": n, "terms": [{"weight": [...], "amplitude": x | [re, im]} or {"weight": [...], "q": x}]}
WeightedVector as_weighted_vector(const json& j, const std::string& path) {
    Fields f(j, path);
    const long rank = as_long(f.req("rank"), f.at("rank"));
    if (rank < 1) throw ConfigError(f.at("rank") + ": must be >= 1");
    std::vector<WeightedVector::Term> terms;
    const auto& arr = as_array(f.req("terms"), f.at("terms"));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string tp = f.at("terms") + "/" + std::to_string(i);
        Fields t(arr[i], tp);
        const auto w = as_long_vector(t.req("weight"), t.at("weight"));
        const json* amp = t.opt("amplitude");
        const json* q = t.opt("q");
        if ((amp == nullptr) == (q == nullptr)) throw ConfigError(tp + ": give exactly one of \"amplitude\" and \"q\"");
        Complex a;
        if (amp) {
            a = as_complex(*amp, t.at("amplitude"));
        } else {
            const double qq = as_double(*q, t.at("q"));
            if (qq < 0.0) throw ConfigError(t.at("q") + ": must be >= 0");
            a = std::sqrt(qq);
        }
        t.finish();
        try {
            terms.push_back({WeightVector(std::vector<std::int64_t>(w.begin(), w.end())), a});
        } catch (const Error& e) {
            throw ConfigError(tp + ": " + e.what());
        }
    }
    f.finish();
    try {
        return WeightedVector(static_cast<std::size_t>(rank), std::move(terms));
    } catch (const Error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

HermitianState as_state(const json& j, const std::string& path) {
    try {
        return HermitianState(as_complex_matrix(j, path));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

// ---- report plumbing -------------------------------------------------------

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

std::string quoted(const std::string& s) {
    return s.find_first_of(",\"") == std::string::npos ? s : "\"" + s + "\"";
}

json jnum(double x) { return std::isfinite(x) ? json(x) : json(num(x)); }

struct Check {
    std::string name;
    json value;
    std::string threshold;
    bool pass;
};

struct Outcome {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    json headline = json::object();
    json tolerances = json::object();
    std::vector<Check> checks;
};

// Tolerance block with defaults; unknown keys rejected.
class Tolerances {
public:
    Tolerances(const json* j, std::string path) : path_(std::move(path)) {
        if (j) {
            if (!j->is_object()) throw ConfigError(path_ + ": expected an object");
            given_ = *j;
        }
    }
    double number(const std::string& key, double def) {
        used_.insert(key);
        const double v = given_.contains(key) ? as_double(given_[key], path_ + "/" + key) : def;
        effective_[key] = v;
        return v;
    }
    bool flag(const std::string& key, bool def) {
        used_.insert(key);
        bool v = def;
        if (given_.contains(key)) {
            if (!given_[key].is_boolean()) throw ConfigError(path_ + "/" + key + ": expected a boolean");
            v = given_[key].get<bool>();
        }
        effective_[key] = v;
        return v;
    }
    std::pair<double, double> range(const std::string& key, std::pair<double, double> def) {
        used_.insert(key);
        auto v = def;
        if (given_.contains(key)) {
            const auto r = as_double_vector(given_[key], path_ + "/" + key);
            if (r.size() != 2 || r[0] > r[1]) throw ConfigError(path_ + "/" + key + ": expected [lo, hi]");
            v = {r[0], r[1]};
        }
        effective_[key] = json::array({v.first, v.second});
        return v;
    }
    // [{"k": ..., "max_abs_gap": ...}, ...]
    std::vector<std::pair<long, double>> checkpoints(const std::string& key,
                                                     std::vector<std::pair<long, double>> def) {
        used_.insert(key);
        auto v = def;
        if (given_.contains(key)) {
            v.clear();
            const std::string p = path_ + "/" + key;
            const auto& arr = as_array(given_[key], p);
            for (std::size_t i = 0; i < arr.size(); ++i) {
                Fields f(arr[i], p + "/" + std::to_string(i));
                const long k = as_long(f.req("k"), f.at("k"));
                const double g = as_double(f.req("max_abs_gap"), f.at("max_abs_gap"));
                f.finish();
                v.emplace_back(k, g);
            }
        }
        json e = json::array();
        for (const auto& [k, g] : v) e.push_back({{"k", k}, {"max_abs_gap", g}});
        effective_[key] = e;
        return v;
    }
    void finish() const {
        for (const auto& [k, v] : given_.items())
            if (!used_.count(k)) throw ConfigError(path_ + ": unknown field \"" + k + "\"");
    }
    const json& effective() const { return effective_; }

private:
    std::string path_;
    json given_ = json::object();
    json effective_ = json::object();
    std::set<std::string> used_;
};

long k_max_field(Fields& f, long def, long lo, long hi) {
    const json* j = f.opt("k_max");
    const long k = j ? as_long(*j, f.at("k_max")) : def;
    if (k < lo || k > hi)
        throw ConfigError(f.at("k_max") + ": must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return k;
}

const ReportRow* row_at(const ConvergenceReport& rep, long k) {
    for (const auto& r : rep.rows)
        if (r.k == k) return &r;
    return nullptr;
}

// ---- experiments -------------------------------------------------------------

Outcome run_duality(Fields& f, Tolerances& tol) {
    const auto v = as_weighted_vector(f.req("vector"), f.at("vector"));
    const auto theta = as_rational_vector(f.req("theta"), f.at("theta"));
    if (theta.size() != v.rank()) throw ConfigError(f.at("theta") + ": length differs from the vector rank");
    const long k_max = k_max_field(f, 200, 1, 1'000'000);
    const auto ratio = tol.range("ratio_range", {0.985, 1.0});
    const bool monotone = tol.flag("require_monotone", true);
    const double slack = tol.number("weak_duality_slack", 1e-9);
    tol.finish();
    f.finish();

    const auto cap = theta_capacity(v, theta);
    const auto rep = duality_report(v, theta, k_max);
    Outcome o;
    o.header = {"k", "log_norm[ln]", "rate[ln]", "log_cap[ln]", "gap[ln]"};
    bool weak = true, mono = true;
    double prev = -1.0;
    for (const auto& r : rep.rows) {
        // Columns use |Pi_k v^(x)k| and cap (not their squares).
        const double log_norm = 0.5 * r.log_value, rate = 0.5 * r.rate, log_cap = 0.5 * r.target;
        const double gap = log_cap - rate;
        o.rows.push_back({std::to_string(r.k), num(log_norm), num(rate), num(log_cap), num(gap)});
        weak = weak && gap >= -slack;
        const double ratio_k = std::exp(-gap);
        mono = mono && ratio_k >= prev - 1e-12;
        prev = ratio_k;
    }
    o.headline["log_cap"] = jnum(cap.log_cap());
    o.headline["in_moment_polytope"] = !cap.cap.is_zero();
    o.headline["period"] = rep.period;
    o.headline["rows"] = rep.rows.size();
    if (cap.cap.is_zero()) {
        o.checks.push_back({"projections_vanish_outside_polytope", rep.rows.size(), "0 nonzero rows", rep.rows.empty()});
        return o;
    }
    if (rep.rows.empty()) throw Error("duality: no k <= k_max with k theta integral and a nonzero projection");
    const double final_ratio = std::exp(-(0.5 * rep.rows.back().target - 0.5 * rep.rows.back().rate));
    o.headline["final_k"] = rep.rows.back().k;
    o.headline["final_ratio"] = final_ratio;
    o.checks.push_back({"final_ratio_in_range", final_ratio,
                        "[" + num(ratio.first) + ", " + num(ratio.second) + "]",
                        final_ratio >= ratio.first && final_ratio <= ratio.second + 1e-12});
    o.checks.push_back({"weak_duality", weak, "gap >= -" + num(slack), weak});
    if (monotone) o.checks.push_back({"ratio_nondecreasing", mono, "nondecreasing in k", mono});
    return o;
}

Outcome run_prefactor(Fields& f, Tolerances& tol) {
    const auto v = as_weighted_vector(f.req("vector"), f.at("vector"));
    const long k_max = k_max_field(f, 10000, 1, 1'000'000);
    const auto window = tol.range("cauchy_window", {static_cast<double>(k_max) / 4.0, static_cast<double>(k_max)});
    const double ctol = tol.number("cauchy_tol", 0.01);
    const json* fr = nullptr;
    std::pair<double, double> final_range{0.0, 0.0};
    if (const json* t = f.opt("tolerances"); t && t->contains("final_range")) {
        fr = &(*t)["final_range"];
        final_range = tol.range("final_range", {0.0, 0.0});
    }
    tol.finish();
    f.finish();

    const auto seq = prefactor_sequence(v, k_max);
    Outcome o;
    o.header = {"k", "log_norm_sq[ln]", "scaled_norm_sq[linear]"};
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& [k, val] : seq.values) {
        const double log_norm_sq = std::log(val) - 0.5 * seq.d * std::log(static_cast<double>(k));
        o.rows.push_back({std::to_string(k), num(log_norm_sq), num(val)});
        if (k >= window.first && k <= window.second) lo = std::min(lo, val), hi = std::max(hi, val);
    }
    if (seq.values.empty()) throw Error("prefactor: no k <= k_max on the stabilizer period");
    o.headline["d"] = seq.d;
    o.headline["period"] = seq.period;
    o.headline["final_k"] = seq.values.back().first;
    o.headline["final_value"] = seq.values.back().second;
    const double spread = hi > 0.0 ? (hi - lo) / lo : std::numeric_limits<double>::infinity();
    o.headline["cauchy_spread"] = jnum(spread);
    o.checks.push_back({"cauchy_within_window", jnum(spread), "<= " + num(ctol), spread <= ctol});
    if (fr) {
        const double x = seq.values.back().second;
        o.checks.push_back({"final_value_in_range", x, "[" + num(final_range.first) + ", " + num(final_range.second) + "]",
                            x >= final_range.first && x <= final_range.second});
    }
    return o;
}

RationalMatrixInput read_matrix(Fields& f, const std::filesystem::path& dir) {
    const json* inl = f.opt("matrix");
    const json* csv = f.opt("matrix_csv");
    if ((inl == nullptr) == (csv == nullptr)) throw ConfigError(f.where() + ": give exactly one of \"matrix\" and \"matrix_csv\"");
    if (csv) {
        if (!csv->is_string()) throw ConfigError(f.at("matrix_csv") + ": expected a path");
        const auto path = dir / csv->get<std::string>();
        std::ifstream in(path);
        if (!in) throw ConfigError(f.at("matrix_csv") + ": cannot open " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            return parse_matrix_csv(ss.str());
        } catch (const Error& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }
    RationalMatrixInput m;
    const auto& rows = as_array(*inl, f.at("matrix"));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = as_rational_vector(rows[i], f.at("matrix") + "/" + std::to_string(i));
        if (i == 0) m.cols = r.size();
        if (r.size() != m.cols || r.empty()) throw ConfigError(f.at("matrix") + ": ragged or empty matrix");
        m.entries.insert(m.entries.end(), r.begin(), r.end());
        ++m.rows;
    }
    if (m.rows == 0) throw ConfigError(f.at("matrix") + ": empty matrix");
    return m;
}

Outcome run_perm_dual(Fields& f, Tolerances& tol, const std::filesystem::path& dir) {
    const auto M = read_matrix(f, dir);
    const auto r = as_rational_vector(f.req("r"), f.at("r"));
    const auto c = as_rational_vector(f.req("c"), f.at("c"));
    const long k_max = k_max_field(f, 60, 1, 10'000);
    const double slack = tol.number("weak_duality_slack", 1e-9);
    const double min_ratio = tol.number("min_ratio", 3.55 / 4.0);
    const double grad_tol = tol.number("sinkhorn_gradient", 1e-7);
    const double sk_tol = tol.number("sinkhorn_marginal_error", 1e-10);
    const auto sk_iter = static_cast<int>(tol.number("sinkhorn_max_iter", 100000));
    tol.finish();
    f.finish();

    const auto rep = perm_dual_report(M, r, c, k_max);
    const auto sk = sinkhorn_scale(make_scaling_state(M.to_double(), r, c), sk_tol, sk_iter);
    Outcome o;
    o.header = {"k", "kfact_perm_exact", "log_kfact_perm[ln]", "rate[ln]", "log_cap_sq[ln]", "gap[ln]"};
    bool weak = true;
    for (std::size_t i = 0; i < rep.report.rows.size(); ++i) {
        const auto& row = rep.report.rows[i];
        o.rows.push_back({std::to_string(row.k), rep.exact[i].get_str(), num(row.log_value), num(row.rate),
                          num(row.target), num(row.gap)});
        weak = weak && std::exp(row.rate) <= rep.cap_sq + slack;
    }
    o.headline["cap_sq"] = rep.cap_sq;
    o.headline["sinkhorn_status"] = to_string(sk.status);
    o.headline["sinkhorn_iterations"] = sk.iterations;
    o.checks.push_back({"weak_duality", weak, "(k! perm)^(1/k) <= cap^2 + " + num(slack), weak});
    if (!rep.report.rows.empty()) {
        const double ratio = std::exp(rep.report.rows.back().rate) / rep.cap_sq;
        o.headline["final_k"] = rep.report.rows.back().k;
        o.headline["final_root"] = std::exp(rep.report.rows.back().rate);
        o.checks.push_back({"final_ratio", ratio, ">= " + num(min_ratio), ratio >= min_ratio});
    }
    if (rep.sandwich) {
        const auto& s = *rep.sandwich;
        o.headline["perm"] = s.perm.get_str();
        o.headline["sandwich_lower"] = s.lower;
        o.headline["sandwich_upper"] = s.upper;
        o.checks.push_back({"sandwich", s.holds, "cap^2n n!/n^2n <= perm <= cap^2n/n!", s.holds});
    }
    if (sk.status == ScalingStatus::unscalable) {
        const bool consistent = rep.cap_sq == 0.0;
        o.checks.push_back({"unscalable_has_zero_capacity", consistent, "cap^2 == 0", consistent});
    } else {
        const double g = rc_gradient_norm(sk.state);
        o.headline["sinkhorn_gradient"] = g;
        o.checks.push_back({"sinkhorn_stationarity", g, "<= " + num(grad_tol),
                            sk.status == ScalingStatus::converged && g <= grad_tol});
    }
    return o;
}

void gap_checks(Outcome& o, const ConvergenceReport& rep, const std::vector<std::pair<long, double>>& cps,
                bool require_decrease) {
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    for (const auto& [k, g] : cps) {
        const ReportRow* r = row_at(rep, k);
        if (!r) throw Error("no row at checkpoint k=" + std::to_string(k));
        const double a = std::fabs(r->gap);
        o.checks.push_back({"gap_at_k" + std::to_string(k), a, "<= " + num(g), a <= g});
        decreasing = decreasing && a < prev;
        prev = a;
    }
    if (require_decrease && cps.size() > 1)
        o.checks.push_back({"gap_strictly_decreasing", decreasing, "across checkpoints", decreasing});
}

Outcome run_schur_weyl(Fields& f, Tolerances& tol) {
    const json* qj = f.opt("q");
    const json* sj = f.opt("sigma");
    if ((qj == nullptr) == (sj == nullptr)) throw ConfigError(f.where() + ": give exactly one of \"q\" and \"sigma\"");
    std::optional<HermitianState> sigma;
    std::vector<double> q;
    if (qj) {
        q = as_double_vector(*qj, f.at("q"));
    } else {
        sigma = as_state(*sj, f.at("sigma"));
        q = sigma->spectrum();
    }
    const auto theta = as_rational_vector(f.req("theta"), f.at("theta"));
    std::optional<HermitianState> rho;
    if (const json* rj = f.opt("rho")) rho = as_state(*rj, f.at("rho"));
    const long k_max = k_max_field(f, 400, 1, 400);
    std::vector<std::pair<long, double>> def;
    for (auto [k, g] : std::vector<std::pair<long, double>>{{100, 0.15}, {400, 0.05}})
        if (k <= k_max) def.emplace_back(k, g);
    const auto cps = tol.checkpoints("checkpoints", def);
    const bool decrease = tol.flag("require_decrease", true);
    const double keyl_slack = tol.number("keyl_slack", 1e-9);
    tol.finish();
    f.finish();

    ProbVector qv = [&] {
        try {
            return ProbVector(q);
        } catch (const Error& e) {
            throw ConfigError(f.at("q") + ": " + e.what());
        }
    }();
    const auto rep = schur_weyl_ldp_report(qv, theta, k_max);
    Outcome o;
    o.header = {"k", "lambda", "log_prob[ln]", "rate[ln]", "target[ln]", "gap[ln]"};
    for (const auto& r : rep.rows)
        o.rows.push_back({std::to_string(r.k), quoted(r.label), num(r.log_value), num(r.rate), num(r.target), num(r.gap)});
    o.headline["kl_rate"] = rep.rows.empty() ? json(nullptr) : jnum(rep.rows.front().target);
    gap_checks(o, rep, cps, decrease);
    if (rho) {
        const HermitianState s = sigma ? *sigma : HermitianState::diagonal(q);
        if (rho->dim() != s.dim()) throw ConfigError(f.at("rho") + ": dimension differs from sigma");
        const double I = keyl_rate(*rho, s), D = quantum_relative_entropy(*rho, s);
        o.headline["keyl_rate"] = jnum(I);
        o.headline["quantum_relative_entropy"] = jnum(D);
        const bool ok = std::isinf(D) || I <= D + keyl_slack;
        o.checks.push_back({"keyl_below_relative_entropy", jnum(I), "<= " + num(D) + " + " + num(keyl_slack), ok});
    }
    return o;
}

Outcome run_duffield(Fields& f, Tolerances& tol) {
    const auto weights = as_long_vector(f.req("weights"), f.at("weights"));
    const Rational theta = as_rational(f.req("theta"), f.at("theta"));
    const long k_max = k_max_field(f, 200, 1, 5000);
    std::vector<std::pair<long, double>> def;
    if (k_max >= 200) def.emplace_back(200, 0.05);
    const auto cps = tol.checkpoints("checkpoints", def);
    const bool decrease = tol.flag("require_decrease", false);
    const json* mj = f.opt("multiplicity_check_k_max");
    const long mult_k = mj ? as_long(*mj, f.at("multiplicity_check_k_max")) : 0;
    if (mult_k < 0 || mult_k > 1000) throw ConfigError(f.at("multiplicity_check_k_max") + ": must lie in [0, 1000]");
    tol.finish();
    f.finish();

    const auto rep = duffield_ldp_report(weights, theta, k_max);
    Outcome o;
    o.header = {"k", "lambda", "log_prob[ln]", "rate[ln]", "target[ln]", "gap[ln]"};
    for (const auto& r : rep.rows)
        o.rows.push_back({std::to_string(r.k), r.label, num(r.log_value), num(r.rate), num(r.target), num(r.gap)});
    o.headline["rate"] = jnum(duffield_rate(weights, theta.get_d()));
    gap_checks(o, rep, cps, decrease);
    if (mult_k > 0) {
        bool ok = true;
        SU2MultTable t = su2_multiplicities(0);
        for (int k = 1; k <= mult_k && ok; ++k) {
            t = su2_step(t);
            BigNat dim = 0;
            for (int l = 0; l <= k; ++l) {
                ok = ok && t(l) == su2_multiplicity_closed_form(k, l);
                dim += BigNat(static_cast<std::uint64_t>(l + 1)) * t(l);
            }
            ok = ok && dim == BigNat(mpz_class(mpz_class(1) << static_cast<mp_bitcnt_t>(k)));
        }
        o.checks.push_back({"su2_multiplicities_closed_form", ok, "exact for k <= " + std::to_string(mult_k), ok});
    }
    return o;
}

Outcome run_mc(Fields& f, Tolerances& tol, std::uint64_t seed) {
    const json& gj = f.req("group");
    if (!gj.is_string()) throw ConfigError(f.at("group") + ": expected \"torus\", \"U\" or \"SU\"");
    const std::string group = gj.get<std::string>();
    const long k = as_long(f.req("k"), f.at("k"));
    if (k < 0 || k > 8) throw ConfigError(f.at("k") + ": must lie in [0, 8]");
    const json* sj = f.opt("samples");
    const long samples = sj ? as_long(*sj, f.at("samples")) : 1'000'000;
    if (samples < 2 || samples > 10'000'000) throw ConfigError(f.at("samples") + ": must lie in [2, 1e7]");
    const json* rj = f.opt("runs");
    const long runs = rj ? as_long(*rj, f.at("runs")) : 1;
    if (runs < 1 || runs > 1000) throw ConfigError(f.at("runs") + ": must lie in [1, 1000]");
    const double sigmas = tol.number("max_sigmas", 4.0);
    const double min_fraction = tol.number("min_fraction", 0.95);

    std::function<McEstimate(std::uint64_t)> estimate;
    double exact = 0.0;
    std::optional<WeightedVector> tv;
    std::optional<UnitaryRep> rep;
    if (group == "torus") {
        tv = as_weighted_vector(f.req("vector"), f.at("vector"));
        std::vector<std::int64_t> lam(tv->rank(), 0);
        if (const json* w = f.opt("weight")) {
            const auto l = as_long_vector(*w, f.at("weight"));
            if (l.size() != tv->rank()) throw ConfigError(f.at("weight") + ": rank mismatch");
            lam.assign(l.begin(), l.end());
        }
        const WeightVector lw(lam);
        exact = k == 0 ? (lw == WeightVector(std::vector<std::int64_t>(tv->rank(), 0)) ? 1.0 : 0.0)
                       : projection_norm_table(*tv, k).at(k, lw).to_double();
        estimate = [&, lw](std::uint64_t s) { return mc_isotypic_norm(*tv, static_cast<int>(k), lw, samples, s); };
    } else if (group == "U" || group == "SU") {
        const UnitaryGroup g = group == "U" ? UnitaryGroup::U : UnitaryGroup::SU;
        const json& kind = f.req("rep");
        if (!kind.is_string()) throw ConfigError(f.at("rep") + ": expected \"standard\" or \"matrix\"");
        if (kind == "standard") {
            const auto m = as_complex_matrix(json::array({f.req("state")}), f.at("state"));
            rep = UnitaryRep::standard(g, m.row(0).transpose());
        } else if (kind == "matrix") {
            const auto A = as_complex_matrix(f.req("matrix"), f.at("matrix"));
            if (A.rows() != A.cols()) throw ConfigError(f.at("matrix") + ": square matrix required");
            rep = UnitaryRep::matrix(g, A);
        } else {
            throw ConfigError(f.at("rep") + ": expected \"standard\" or \"matrix\"");
        }
        if (rep->n() > 8) throw ConfigError(f.where() + ": n <= 8 required");
        if (const json* lj = f.opt("lambda")) {
            const auto l = as_long_vector(*lj, f.at("lambda"));
            std::vector<int> parts(l.begin(), l.end());
            Partition lambda = [&] {
                try {
                    return Partition(parts);
                } catch (const Error& e) {
                    throw ConfigError(f.at("lambda") + ": " + e.what());
                }
            }();
            if (rep->n() != 2) throw ConfigError(f.at("lambda") + ": isotypic estimates need n = 2");
            exact = unitary_isotypic_exact(*rep, static_cast<int>(k), lambda);
            estimate = [&, lambda](std::uint64_t s) {
                return mc_isotypic_norm(*rep, static_cast<int>(k), lambda, samples, s);
            };
        } else {
            if (g == UnitaryGroup::SU && rep->n() != 2)
                throw ConfigError(f.where() + ": exact invariant norms for SU(n) need n = 2");
            exact = g == UnitaryGroup::U ? (k == 0 ? 1.0 : 0.0) : unitary_isotypic_exact(*rep, static_cast<int>(k), Partition{0});
            estimate = [&](std::uint64_t s) { return mc_invariant_norm(*rep, static_cast<int>(k), samples, s); };
        }
    } else {
        throw ConfigError(f.at("group") + ": unsupported group \"" + group + "\"");
    }
    tol.finish();
    f.finish();

    Outcome o;
    o.header = {"run", "seed", "mean_re[linear]", "mean_im[linear]", "std_error[linear]", "exact[linear]", "z[sigmas]"};
    long inside = 0;
    for (long i = 0; i < runs; ++i) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
        const auto est = estimate(s);
        const double dev = std::abs(est.mean - Complex(exact, 0.0));
        const double z = est.std_error > 0.0 ? dev / est.std_error : (dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        if (z <= sigmas) ++inside;
        o.rows.push_back({std::to_string(i), std::to_string(s), num(est.mean.real()), num(est.mean.imag()),
                          num(est.std_error), num(exact), num(z)});
    }
    const double frac = static_cast<double>(inside) / static_cast<double>(runs);
    o.headline["exact"] = exact;
    o.headline["fraction_within"] = frac;
    o.checks.push_back({"fraction_within_sigmas", frac, ">= " + num(min_fraction) + " within " + num(sigmas) + " sigma",
                        frac >= min_fraction});
    return o;
}

Outcome run_capacity(Fields& f, Tolerances& tol) {
    const auto v = as_weighted_vector(f.req("vector"), f.at("vector"));
    const auto theta = as_rational_vector(f.req("theta"), f.at("theta"));
    if (theta.size() != v.rank()) throw ConfigError(f.at("theta") + ": length differs from the vector rank");
    const double agree = tol.number("solver_agreement", 1e-8);
    tol.finish();
    f.finish();
    if (v.is_zero()) throw Error("capacity: zero vector");

    const auto res = theta_capacity(v, theta);
    const double log_norm = 0.5 * std::log(v.norm_sq());
    std::vector<WeightedVector::Term> unit;
    for (const auto& t : v.terms()) unit.push_back({t.weight, t.amplitude / std::exp(log_norm)});
    const LogValue kl_sq = capacity_kl_form(WeightedVector(v.rank(), unit), theta);
    const double log_cap_kl = kl_sq.is_zero() ? -std::numeric_limits<double>::infinity() : 0.5 * kl_sq.log_abs() + log_norm;

    Outcome o;
    o.header = {"log_cap[ln]", "log_cap_kl[ln]", "abs_diff[ln]", "iterations", "gradient_norm"};
    const double diff = res.cap.is_zero() && kl_sq.is_zero() ? 0.0 : std::fabs(res.log_cap() - log_cap_kl);
    o.rows.push_back({num(res.log_cap()), num(log_cap_kl), num(diff), std::to_string(res.iterations), num(res.gradient_norm)});
    o.headline["log_cap"] = jnum(res.log_cap());
    o.headline["in_moment_polytope"] = !res.cap.is_zero();
    o.headline["diverging"] = res.diverging;
    json face = json::array();
    for (auto i : res.face) face.push_back(i);
    o.headline["face"] = face;
    if (res.minimizer) {
        json x = json::array();
        for (double d : *res.minimizer) x.push_back(d);
        o.headline["minimizer"] = x;
    }
    if (res.certificate) {
        json nrm = json::array();
        for (const auto& q : res.certificate->normal) nrm.push_back(q.get_str());
        o.headline["separating_normal"] = nrm;
        o.headline["separating_offset"] = res.certificate->offset.get_str();
    }
    o.checks.push_back({"solver_agreement", jnum(diff), "<= " + num(agree), diff <= agree});
    return o;
}

Outcome run_laurent(Fields& f, Tolerances& tol) {
    const json& cj = f.req("coefficients");
    if (!cj.is_object() || cj.empty()) throw ConfigError(f.at("coefficients") + ": expected {\"exponent\": value, ...}");
    std::map<int, Complex> coeffs;
    RationalLaurent exact;
    bool real = true;
    for (const auto& [key, val] : cj.items()) {
        int e = 0;
        try {
            std::size_t used = 0;
            e = std::stoi(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            throw ConfigError(f.at("coefficients") + ": exponent \"" + key + "\" is not an integer");
        }
        const std::string path = f.at("coefficients") + "/" + key;
        const Complex a = as_complex(val, path);
        real = real && !val.is_array();
        if (real) exact[e] += as_rational(val, path);
        coeffs[e] += a;
    }
    const long k_max = k_max_field(f, 60, 1, 2000);
    const auto ratio = tol.range("ratio_range", {1.93 / 2.0, 1.0});
    const double cap_tol = tol.number("cap_agreement", 1e-9);
    tol.finish();
    f.finish();

    const LaurentPoly poly(coeffs);
    if (poly.is_constant()) throw Error("laurent: f is constant");
    const auto cv = critical_values(poly);

    Outcome o;
    o.header = {"k", "cst_re[linear]", "cst_im[linear]", "cst_exact", "log_abs_cst[ln]", "root_rate[ln]"};
    double last_root = 0.0;
    long last_k = 0;
    for (long k = 1; k <= k_max; ++k) {
        Complex cst;
        std::string ex;
        double log_abs;
        if (real) {
            const Rational c = laurent_cst_power(exact, static_cast<int>(k));
            if (sgn(c) == 0) continue;
            ex = c.get_str();
            cst = c.get_d();
            log_abs = log_of(c).log_abs();
        } else {
            cst = laurent_cst_power(poly, static_cast<int>(k));
            if (std::abs(cst) == 0.0) continue;
            log_abs = std::log(std::abs(cst));
        }
        const double root = log_abs / static_cast<double>(k);
        o.rows.push_back({std::to_string(k), num(cst.real()), num(cst.imag()), ex, num(log_abs), num(root)});
        last_root = std::exp(root);
        last_k = k;
    }
    o.headline["max_critical_modulus"] = cv.max_modulus;
    o.headline["critical_points"] = cv.points.size();
    if (last_k > 0) {
        const double r = last_root / cv.max_modulus;
        o.headline["final_k"] = last_k;
        o.headline["final_root"] = last_root;
        o.checks.push_back({"root_over_max_critical_value", r,
                            "[" + num(ratio.first) + ", " + num(ratio.second) + "]",
                            r >= ratio.first && r <= ratio.second + 1e-12});
    }
    if (cv.positive_real) {
        std::vector<WeightedVector::Term> terms;
        for (const auto& [e, a] : poly.terms()) terms.push_back({WeightVector{e}, std::sqrt(a.real())});
        const RationalVector zero{Rational(0)};
        const auto cap = theta_capacity(WeightedVector(1, terms), zero);
        const double cap_sq = std::exp(2.0 * cap.log_cap());
        const double val = cv.values[*cv.positive_real].real();
        o.headline["positive_critical_value"] = val;
        o.headline["cap_sq"] = cap_sq;
        o.checks.push_back({"positive_critical_value_is_cap_sq", std::fabs(val - cap_sq), "<= " + num(cap_tol),
                            std::fabs(val - cap_sq) <= cap_tol});
    }
    return o;
}

std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line, col = 1;
        else ++col;
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

const std::vector<ExperimentInfo>& experiment_catalog() {
    static const std::vector<ExperimentInfo> catalog = {
        {"duality", "|Pi_{k,k theta} v^(x)k|^(1/k) -> cap_theta(v) for a torus weight vector",
         "vector: {rank, terms: [{weight, amplitude | q}]}\ntheta: rational array\nk_max (200)\n"
         "tolerances: ratio_range [0.985, 1], require_monotone (true), weak_duality_slack (1e-9)"},
        {"prefactor", "k^(d/2) |Pi_k v^(x)k|^2 converges to a positive limit when mu(v) = 0",
         "vector: unit vector with moment map zero\nk_max (10000)\n"
         "tolerances: cauchy_window [k_max/4, k_max], cauchy_tol (0.01), final_range [lo, hi] (optional)"},
        {"perm-dual", "(k! perm_{kr,kc}(M))^(1/k) -> cap_{r,c}(M)^2, with the permanent sandwich",
         "matrix: rational rows | matrix_csv: path\nr, c: rational arrays summing to 1\nk_max (60)\n"
         "tolerances: weak_duality_slack (1e-9), min_ratio (0.8875), sinkhorn_gradient (1e-7),\n"
         "            sinkhorn_marginal_error (1e-10), sinkhorn_max_iter (100000)"},
        {"schur-weyl-ldp", "-(1/k) log P(lambda = round(k theta)) -> D(theta || q) for the Schur-Weyl measure",
         "q: sorted spectrum | sigma: complex matrix ([re, im] entries)\ntheta: rational array\n"
         "rho: complex matrix (optional, Keyl rate check)\nk_max (400)\n"
         "tolerances: checkpoints [{k: 100, max_abs_gap: 0.15}, {k: 400, max_abs_gap: 0.05}],\n"
         "            require_decrease (true), keyl_slack (1e-9)"},
        {"duffield-ldp", "-(1/k) log((lambda+1) n_{k,lambda} / d^k) -> Legendre transform of log(chi/d) for SU(2)",
         "weights: symmetric integer multiset\ntheta: rational\nk_max (200)\nmultiplicity_check_k_max (0)\n"
         "tolerances: checkpoints [{k: 200, max_abs_gap: 0.05}], require_decrease (false)"},
        {"mc-check", "Haar average of <v, u v>^k (times a conjugate character) equals the projection norm",
         "group: torus | U | SU\ntorus: vector, weight (optional)\nU/SU: rep: standard (state) | matrix (matrix), lambda (optional)\n"
         "k (<= 8), samples (1e6), runs (1)\ntolerances: max_sigmas (4), min_fraction (0.95)"},
        {"capacity", "theta-capacity by Newton on the face agrees with the relative-entropy form",
         "vector, theta\ntolerances: solver_agreement (1e-8)"},
        {"laurent", "|cst(f^k)|^(1/k) -> max |critical value|; positive critical value equals cap^2",
         "coefficients: {exponent: value | [re, im]}\nk_max (60)\n"
         "tolerances: ratio_range [0.965, 1], cap_agreement (1e-9)"},
    };
    return catalog;
}

std::string list_experiments() {
    std::ostringstream os;
    for (const auto& e : experiment_catalog()) {
        os << e.name << "\n  checks: " << e.checks << "\n";
        std::istringstream s(e.schema);
        std::string line;
        while (std::getline(s, line)) os << "  " << line << "\n";
        os << "\n";
    }
    return os.str();
}

std::string version_string() { return CAPDUAL_VERSION; }

void set_thread_cap(int n) {
    if (n > 0) omp_set_num_threads(n);
}

RunResult run_experiment(const std::string& text, const RunOptions& opts, const std::filesystem::path& config_dir) {
    json cfg;
    try {
        cfg = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed config at " + line_col(text, e.byte) + ": " + e.what());
    }
    Fields f(cfg, "");
    const json& ej = f.req("experiment");
    if (!ej.is_string()) throw ConfigError("config/experiment: expected a string");
    const std::string experiment = ej.get<std::string>();
    const auto& cat = experiment_catalog();
    if (std::none_of(cat.begin(), cat.end(), [&](const auto& e) { return e.name == experiment; }))
        throw ConfigError("unknown experiment \"" + experiment + "\" (see `capdual list`)");

    std::string name = experiment;
    if (const json* nj = f.opt("name")) {
        if (!nj->is_string() || nj->get<std::string>().empty() ||
            nj->get<std::string>().find_first_of("/\\") != std::string::npos)
            throw ConfigError("config/name: expected a plain file stem");
        name = nj->get<std::string>();
    }
    std::filesystem::path out_dir = ".";
    if (const json* oj = f.opt("output")) {
        if (!oj->is_string()) throw ConfigError("config/output: expected a directory path");
        out_dir = oj->get<std::string>();
    }
    if (opts.out_dir) out_dir = *opts.out_dir;
    std::uint64_t seed = 1;
    if (const json* sj = f.opt("seed")) {
        if (!sj->is_number_unsigned()) throw ConfigError("config/seed: expected a nonnegative integer");
        seed = sj->get<std::uint64_t>();
    }
    if (opts.seed) seed = *opts.seed;
    Tolerances tol(f.opt("tolerances"), "config/tolerances");

    Outcome o;
    if (experiment == "duality") o = run_duality(f, tol);
    else if (experiment == "prefactor") o = run_prefactor(f, tol);
    else if (experiment == "perm-dual") o = run_perm_dual(f, tol, config_dir);
    else if (experiment == "schur-weyl-ldp") o = run_schur_weyl(f, tol);
    else if (experiment == "duffield-ldp") o = run_duffield(f, tol);
    else if (experiment == "mc-check") o = run_mc(f, tol, seed);
    else if (experiment == "capacity") o = run_capacity(f, tol);
    else o = run_laurent(f, tol);

    bool pass = true;
    json checks = json::array();
    for (const auto& c : o.checks) {
        pass = pass && c.pass;
        checks.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
    }

    RunResult res;
    std::filesystem::create_directories(out_dir);
    res.csv = out_dir / (name + ".csv");
    res.summary = out_dir / (name + ".summary.json");
    {
        std::ofstream csv(res.csv, std::ios::binary);
        for (std::size_t i = 0; i < o.header.size(); ++i) csv << (i ? "," : "") << o.header[i];
        csv << "\n";
        for (const auto& row : o.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) csv << (i ? "," : "") << row[i];
            csv << "\n";
        }
        if (!csv) throw Error("cannot write " + res.csv.string());
    }
    json summary;
    summary["experiment"] = experiment;
    summary["version"] = version_string();
    summary["seed"] = seed;
    summary["config"] = cfg;
    summary["tolerances"] = tol.effective();
    summary["headline"] = o.headline;
    summary["checks"] = checks;
    summary["pass"] = pass;
    summary["csv"] = res.csv.filename().string();
    {
        std::ofstream js(res.summary, std::ios::binary);
        js << summary.dump(2) << "\n";
        if (!js) throw Error("cannot write " + res.summary.string());
    }
    res.pass = pass;
    res.exit_code = pass ? 0 : 2;
    return res;
}

RunResult run_experiment_file(const std::filesystem::path& config, const RunOptions& opts) {
    std::ifstream in(config, std::ios::binary);
    if (!in) throw ConfigError("cannot open config " + config.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return run_experiment(ss.str(), opts, config.parent_path().empty() ? "." : config.parent_path());
}

}  // namespace capdual
