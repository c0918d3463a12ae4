#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "sonoloc/types.hpp"

namespace sonoloc {

struct PseudoRangeEntry {
    Vec3 anchor;
    double toa_s = 0.0;
};

// Measured ToAs plus the constants needed to turn them into ranges. t_s is
// the common transmit epoch; any unknown part of it is absorbed into the
// solved clock term.
struct PseudoRangeSet {
    std::vector<PseudoRangeEntry> entries;
    double c = 344.38;
    double t_s = 0.0;
};

struct PositionFix {
    Vec3 position;
    double clock_term_m = 0.0;   // c * (t_b + t_s), meters
    double residual_rms_m = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct SolveOptions {
    int dims = 3;                 // 2 fixes z to fixed_z
    double fixed_z = 0.0;
    std::optional<Vec3> init;     // default: anchor centroid
    bool reject_outliers = true;  // one 3x-median residual pass
    int max_iterations = 100;
    double step_tolerance_m = 1e-9;
    double condition_limit = 1e8;
};

struct InsufficientAnchorsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateGeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Levenberg-Marquardt minimization of sum_i (c*t_i - beta - |U_i - P|)^2 over
// position and the clock term beta. Needs dims+1 entries; throws on rank-
// deficient geometry. A non-converged solve returns the best iterate with
// converged = false.
PositionFix trilaterate(const PseudoRangeSet& prs, const SolveOptions& opts = {});

// Geometric dilution of precision of the anchor set seen from `at`:
// sqrt(trace((A^T A)^-1)) for the unit-vector-plus-clock design matrix.
// Throws DegenerateGeometryError for singular geometry.
double gdop(const PseudoRangeSet& prs, const Vec3& at, int dims = 3);

// Residuals r_i and the analytic Jacobian d r_i / d (P, beta) at a point;
// exposed for the finite-difference gradient checks.
std::vector<double> pseudorange_residuals(const PseudoRangeSet& prs, const Vec3& p, double beta_m);

}  // namespace sonoloc
