#include "sonoloc/locator.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace sonoloc {

namespace {

// Unknown layout: [x, y, (z,) beta]; n_pos position components + 1.
struct Model {
    const PseudoRangeSet& prs;
    int n_pos;
    double fixed_z;

    Vec3 position(const Eigen::VectorXd& u) const {
        return n_pos == 3 ? Vec3{u(0), u(1), u(2)} : Vec3{u(0), u(1), fixed_z};
    }

    Eigen::VectorXd residuals(const Eigen::VectorXd& u,
                              const std::vector<std::size_t>& active) const {
        const Vec3 p = position(u);
        const double beta = u(n_pos);
        Eigen::VectorXd r(static_cast<Eigen::Index>(active.size()));
        for (Eigen::Index i = 0; i < r.size(); ++i) {
            const auto& e = prs.entries[active[static_cast<std::size_t>(i)]];
            // beta absorbs c*(t_b + t_s), so t_s needs no separate term.
            r(i) = prs.c * e.toa_s - beta - distance(e.anchor, p);
        }
        return r;
    }

    Eigen::MatrixXd jacobian(const Eigen::VectorXd& u,
                             const std::vector<std::size_t>& active) const {
        const Vec3 p = position(u);
        Eigen::MatrixXd j(static_cast<Eigen::Index>(active.size()), n_pos + 1);
        for (Eigen::Index i = 0; i < j.rows(); ++i) {
            const auto& e = prs.entries[active[static_cast<std::size_t>(i)]];
            const Vec3 d = e.anchor - p;
            const double dist = std::max(d.norm(), 1e-12);
            j(i, 0) = d.x / dist;
            j(i, 1) = d.y / dist;
            if (n_pos == 3) j(i, 2) = d.z / dist;
            j(i, n_pos) = -1.0;
        }
        return j;
    }
};

struct LmResult {
    Eigen::VectorXd u;
    int iterations = 0;
    bool converged = false;
    double residual_rms = 0.0;
};

LmResult levenberg_marquardt(const Model& model, Eigen::VectorXd u,
                             const std::vector<std::size_t>& active, const SolveOptions& opts) {
    double lambda = 1e-3;
    Eigen::VectorXd r = model.residuals(u, active);
    double cost = r.squaredNorm();

    LmResult out;
    for (out.iterations = 0; out.iterations < opts.max_iterations; ++out.iterations) {
        const Eigen::MatrixXd j = model.jacobian(u, active);

        Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
        const double smin = svd.singularValues().tail(1)(0);
        const double smax = svd.singularValues()(0);
        if (smin <= 0 || smax / smin > opts.condition_limit)
            throw DegenerateGeometryError("trilaterate: Jacobian condition number above limit");

        const Eigen::MatrixXd jtj = j.transpose() * j;
        const Eigen::VectorXd jtr = j.transpose() * r;

        bool stepped = false;
        for (int tries = 0; tries < 25 && !stepped; ++tries) {
            Eigen::MatrixXd a = jtj;
            a.diagonal().array() += lambda;
            const Eigen::VectorXd step = a.ldlt().solve(jtr);
            const Eigen::VectorXd candidate = u + step;
            const Eigen::VectorXd rc = model.residuals(candidate, active);
            const double candidate_cost = rc.squaredNorm();
            if (candidate_cost < cost) {
                u = candidate;
                r = rc;
                cost = candidate_cost;
                lambda = std::max(lambda / 10.0, 1e-12);
                stepped = true;
                if (step.norm() < opts.step_tolerance_m) {
                    out.converged = true;
                }
            } else {
                lambda *= 10.0;
            }
        }
        if (out.converged || !stepped) {
            // A stall with a vanishing gradient is the minimum, not a failure.
            if (!stepped) out.converged = jtr.norm() < 1e-8 * (1.0 + std::sqrt(cost));
            break;
        }
    }
    out.u = u;
    out.residual_rms = std::sqrt(cost / static_cast<double>(active.size()));
    return out;
}

}  // namespace

std::vector<double> pseudorange_residuals(const PseudoRangeSet& prs, const Vec3& p,
                                          double beta_m) {
    std::vector<double> r;
    r.reserve(prs.entries.size());
    for (const auto& e : prs.entries)
        r.push_back(prs.c * e.toa_s - beta_m - distance(e.anchor, p));
    return r;
}

PositionFix trilaterate(const PseudoRangeSet& prs, const SolveOptions& opts) {
    const int n_pos = opts.dims == 2 ? 2 : 3;
    const std::size_t needed = static_cast<std::size_t>(n_pos) + 1;
    if (prs.entries.size() < needed)
        throw InsufficientAnchorsError("trilaterate: need at least " + std::to_string(needed) +
                                       " anchors for " + std::to_string(opts.dims) + "D");

    Model model{prs, n_pos, opts.fixed_z};

    Vec3 init{0, 0, 0};
    if (opts.init) {
        init = *opts.init;
    } else {
        for (const auto& e : prs.entries) init = init + e.anchor;
        init = init * (1.0 / static_cast<double>(prs.entries.size()));
    }
    Eigen::VectorXd u(n_pos + 1);
    u(0) = init.x;
    u(1) = init.y;
    if (n_pos == 3) u(2) = init.z;
    u(n_pos) = 0.0;

    std::vector<std::size_t> active(prs.entries.size());
    for (std::size_t i = 0; i < active.size(); ++i) active[i] = i;

    LmResult res = levenberg_marquardt(model, u, active, opts);

    if (opts.reject_outliers && prs.entries.size() > needed) {
        // One pass: drop entries whose residual exceeds 3x the median, then
        // re-solve. Guards against echo-corrupted ToAs.
        Eigen::VectorXd r = model.residuals(res.u, active);
        std::vector<double> mags;
        for (Eigen::Index i = 0; i < r.size(); ++i) mags.push_back(std::abs(r(i)));
        std::vector<double> sorted = mags;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2),
                         sorted.end());
        const double med = sorted[sorted.size() / 2];
        if (med > 0) {
            std::vector<std::size_t> kept;
            for (std::size_t i = 0; i < active.size(); ++i)
                if (mags[i] <= 3.0 * med) kept.push_back(active[i]);
            if (kept.size() >= needed && kept.size() < active.size())
                res = levenberg_marquardt(model, res.u, kept, opts);
        }
    }

    PositionFix fix;
    fix.position = model.position(res.u);
    fix.clock_term_m = res.u(n_pos);
    fix.residual_rms_m = res.residual_rms;
    fix.iterations = res.iterations;
    fix.converged = res.converged;
    return fix;
}

double gdop(const PseudoRangeSet& prs, const Vec3& at, int dims) {
    const int n_pos = dims == 2 ? 2 : 3;
    if (prs.entries.size() < static_cast<std::size_t>(n_pos) + 1)
        throw InsufficientAnchorsError("gdop: too few anchors");

    Eigen::MatrixXd a(static_cast<Eigen::Index>(prs.entries.size()), n_pos + 1);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const Vec3 d = prs.entries[static_cast<std::size_t>(i)].anchor - at;
        const double dist = d.norm();
        if (dist <= 0) throw DegenerateGeometryError("gdop: anchor coincides with point");
        a(i, 0) = d.x / dist;
        a(i, 1) = d.y / dist;
        if (n_pos == 3) a(i, 2) = d.z / dist;
        a(i, n_pos) = 1.0;
    }
    const Eigen::MatrixXd ata = a.transpose() * a;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(ata);
    if (!lu.isInvertible()) throw DegenerateGeometryError("gdop: singular anchor geometry");
    return std::sqrt(lu.inverse().trace());
}

}  // namespace sonoloc
