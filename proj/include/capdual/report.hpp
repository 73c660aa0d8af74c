#pragma once

#include <string>
#include <vector>

#include "capdual/bignum.hpp"

namespace capdual {

/// One row of a finite-k versus asymptotic comparison. All logs are natural.
struct ReportRow {
    long k = 0;
    std::string label;       // e.g. the partition or weight evaluated at this k
    double log_value = 0.0;  // log of the finite-k quantity
    double rate = 0.0;       // per-k exponent derived from log_value
    double target = 0.0;     // analytic limit of `rate`
    double gap = 0.0;        // signed distance to the target (definition per family)
};

struct ConvergenceReport {
    std::string family;  // "duality", "perm-dual", "schur-weyl-ldp", "duffield-ldp"
    std::vector<Rational> theta;
    long period = 1;     // rows are taken on multiples of this k
    std::vector<ReportRow> rows;
};

}  // namespace capdual
