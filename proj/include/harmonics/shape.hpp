#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "harmonics/attractor.hpp"
#include "harmonics/dynamics.hpp"
#include "harmonics/env.hpp"
#include "harmonics/errors.hpp"
#include "harmonics/spectral.hpp"
#include "harmonics/swarm.hpp"

namespace harmonics {

// Target shape as a 0/1 indicator over free cells.
struct TargetShape {
    Eigen::VectorXd w_des;
};

namespace detail {

// Basis matrix with every column L2-normalized (the stored pi_1 is
// L1-normalized, so rescale it here).
inline Eigen::MatrixXd l2_basis(const SpectralBasis& basis) {
    Eigen::MatrixXd B = basis.right;
    B.col(0) /= B.col(0).norm();
    return B;
}

} // namespace detail

// Coefficients of the shape in the L2-normalized harmonic basis, from one
// dense linear solve (the harmonics of a non-symmetric chain are not
// orthogonal, so dot products would not reconstruct the shape).
inline Eigen::VectorXd decompose_shape(const TargetShape& shape, const SpectralBasis& basis) {
    if (shape.w_des.size() != basis.n)
        throw ShapeMismatchError("shape length does not match basis size");
    if (shape.w_des.isZero(0.0))
        throw ValidationError("target shape has no nonzero entries");
    if (basis.condition_number > 1e10)
        throw IllConditionedError("harmonic basis condition number " +
                                  std::to_string(basis.condition_number));
    const Eigen::MatrixXd B = detail::l2_basis(basis);
    const Eigen::VectorXd c = B.partialPivLu().solve(shape.w_des);
    const double residual = (B * c - shape.w_des).norm();
    if (residual > 1e-8)
        throw NumericalError("shape decomposition residual " + std::to_string(residual));
    return c;
}

// The selected subset of harmonics approximating a shape.
struct HarmonicPlan {
    std::vector<std::pair<int, double>> selected;  // (1-based index, coefficient), |c| desc
    double percentile = 1.0;
    int count = 0;
    Eigen::VectorXd approximation;
    double residual_l2 = 0.0;
};

// Keeps the ceil(n*p) coefficients of largest magnitude, ties broken by
// lower harmonic index.
inline HarmonicPlan select_harmonics(const Eigen::VectorXd& c, const SpectralBasis& basis,
                                     double p) {
    if (p <= 0.0 || p > 1.0)
        throw ValidationError("percentile must lie in (0, 1]");
    const int n = basis.n;
    if (c.size() != n)
        throw ShapeMismatchError("coefficient vector length does not match basis");

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        if (std::abs(c(i)) != std::abs(c(j)))
            return std::abs(c(i)) > std::abs(c(j));
        return i < j;
    });

    HarmonicPlan plan;
    plan.percentile = p;
    plan.count = static_cast<int>(std::ceil(n * p));
    const Eigen::MatrixXd B = detail::l2_basis(basis);
    plan.approximation = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < plan.count; ++k) {
        const int i = order[static_cast<size_t>(k)];
        plan.selected.emplace_back(i + 1, c(i));
        plan.approximation += c(i) * B.col(i);
    }
    plan.residual_l2 = (B * c - plan.approximation).norm();
    return plan;
}

// Initial per-robot weight c ||pi||^2 / (N pi_s): all N robots starting at
// cell s with this weight give an aggregated vector whose projection on
// pi is exactly c ||pi||^2.
inline double initial_weight(double c, const Eigen::VectorXd& pi, int robots, int start_cell) {
    if (robots < 1)
        throw ValidationError("robot count must be >= 1");
    if (start_cell < 0 || start_cell >= pi.size())
        throw ValidationError("start cell out of range");
    if (std::abs(pi(start_cell)) < 1e-9)
        throw NodalStartError("start cell lies on a node of the harmonic; pick another cell");
    return c * pi.squaredNorm() / (static_cast<double>(robots) * pi(start_cell));
}

struct HarmonicRunResult {
    Eigen::VectorXd wbar;
    bool converged = false;
    long steps = 0;
    double final_change = 0.0;
};

// Exact-dynamics stand-in for one harmonic swarm: iterates M_a from the
// ideal initial aggregated vector (all weight at the start cell).
inline HarmonicRunResult run_harmonic_exact(const AttractorMatrix& am, const Eigen::VectorXd& pi,
                                            double c, int start_cell,
                                            const ConvergenceCriterion& crit) {
    Eigen::VectorXd w0 = Eigen::VectorXd::Zero(am.M.rows());
    w0(start_cell) = initial_weight(c, pi, 1, start_cell);
    HarmonicRunResult result;
    if (c == 0.0) {
        result.wbar = Eigen::VectorXd::Zero(am.M.rows());
        result.converged = true;
        return result;
    }
    const Trajectory traj = iterate(am.M, w0, crit);
    result.wbar = *traj.limit;
    result.converged = traj.converged_at.has_value();
    result.steps = traj.converged_at.value_or(crit.max_steps);
    return result;
}

// Particle run for one harmonic swarm: steps the weighted simulator until
// the normalized aggregated vector stabilizes (relative L1 change below
// tolerance over the window) or max_steps is hit. Non-convergence is
// reported, not thrown; the caller decides whether to proceed.
inline HarmonicRunResult run_harmonic_swarm(const Environment& env, const KernelTable& table,
                                            const Eigen::VectorXd& pi, double c, int robots,
                                            int start_cell, std::uint64_t seed,
                                            const ConvergenceCriterion& crit, int threads = 1,
                                            const std::vector<std::vector<int>>* disks = nullptr) {
    const int n = env.size();
    HarmonicRunResult result;
    if (c == 0.0) {
        result.wbar = Eigen::VectorXd::Zero(n);
        result.converged = true;
        return result;
    }
    SwarmState state = make_swarm(robots, start_cell, initial_weight(c, pi, robots, start_cell));
    Eigen::VectorXd prev = aggregate_weights(state, n);
    prev /= std::max(prev.lpNorm<1>(), 1e-300);
    int quiet = 0;
    for (long t = 1; t <= crit.max_steps; ++t) {
        step_weighted(state, table, env, seed, threads, disks);
        Eigen::VectorXd cur = aggregate_weights(state, n);
        const double scale = cur.lpNorm<1>();
        if (scale > 0.0)
            cur /= scale;
        result.final_change = (cur - prev).lpNorm<1>();
        prev = cur;
        result.steps = t;
        quiet = (result.final_change < crit.tolerance) ? quiet + 1 : 0;
        if (quiet >= crit.window) {
            result.converged = true;
            break;
        }
    }
    result.wbar = aggregate_weights(state, n);
    return result;
}

// Global rescale restoring the projection coefficient: returns s * wbar
// with s = c ||pi||^2 / (wbar . pi). Uses the right-eigenvector (paper
// mode) projection, which is what the planned c is defined against.
inline Eigen::VectorXd rescale(const Eigen::VectorXd& wbar, const Eigen::VectorXd& pi, double c,
                               double floor = 1e-12) {
    if (wbar.size() != pi.size())
        throw ShapeMismatchError("rescale: vector lengths disagree");
    if (c == 0.0)
        return Eigen::VectorXd::Zero(wbar.size());
    const double proj = wbar.dot(pi);
    if (std::abs(proj) < floor)
        throw DissipationError("aggregated weights dissipated below the rescale floor; "
                               "increase robots or steps");
    return (c * pi.squaredNorm() / proj) * wbar;
}

struct ReconstructionResult {
    Eigen::VectorXd total;
    double tau = 0.0;
    std::vector<bool> occupied;
};

inline ReconstructionResult superpose_and_threshold(const std::vector<Eigen::VectorXd>& fields,
                                                    double tau, int n) {
    ReconstructionResult result;
    result.total = Eigen::VectorXd::Zero(n);
    for (const auto& f : fields) {
        if (f.size() != n)
            throw ShapeMismatchError("superpose: field length mismatch");
        result.total += f;
    }
    result.tau = tau;
    result.occupied.assign(static_cast<size_t>(n), false);
    for (int i = 0; i < n; ++i)
        result.occupied[static_cast<size_t>(i)] = result.total(i) > tau;
    return result;
}

// Default threshold: half the mean of the total field over the support
// predicted by the harmonic approximation (cells where the approximation
// of the 0/1 indicator exceeds 0.5). Falls back to half the field maximum
// when that support is empty.
inline double default_threshold(const Eigen::VectorXd& total,
                                const Eigen::VectorXd& approximation) {
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < approximation.size(); ++i) {
        if (approximation(i) > 0.5) {
            sum += total(i);
            ++count;
        }
    }
    if (count == 0)
        return 0.5 * total.maxCoeff();
    return 0.5 * sum / static_cast<double>(count);
}

} // namespace harmonics
