#pragma once

#include <cmath>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "harmonics/errors.hpp"
#include "harmonics/spectral.hpp"

namespace harmonics {

// Stops when the relative L1 change stays below `tolerance` for `window`
// consecutive steps, or at `max_steps`.
struct ConvergenceCriterion {
    double tolerance = 1e-9;
    int window = 5;
    long max_steps = 100000;
};

struct Trajectory {
    std::string label;
    Eigen::VectorXd initial;
    std::vector<std::pair<long, Eigen::VectorXd>> snapshots;
    std::optional<long> converged_at;
    std::optional<Eigen::VectorXd> limit;
};

// Exact (infinite-swarm) vector iteration v <- A v. Snapshots are taken
// at the requested steps plus t = 0 and the final step. Throws
// DivergenceError when the L1 norm grows past 1e12 x the initial norm.
template <typename Matrix>
Trajectory iterate(const Matrix& A, const Eigen::VectorXd& v0, const ConvergenceCriterion& crit,
                   const std::set<long>& snapshot_steps = {}, std::string label = {}) {
    if (A.rows() != A.cols() || A.cols() != v0.size())
        throw ShapeMismatchError("iterate: matrix/vector dimensions disagree");
    if (crit.tolerance <= 0.0 || crit.window < 1 || crit.max_steps < crit.window)
        throw ValidationError("invalid convergence criterion");

    Trajectory traj;
    traj.label = std::move(label);
    traj.initial = v0;
    traj.snapshots.emplace_back(0, v0);

    const double norm0 = std::max(v0.lpNorm<1>(), 1e-300);
    Eigen::VectorXd v = v0;
    int quiet_steps = 0;
    for (long t = 1; t <= crit.max_steps; ++t) {
        Eigen::VectorXd next = A * v;
        const double change = (next - v).lpNorm<1>();
        const double scale = std::max(next.lpNorm<1>(), 1e-300);
        v = std::move(next);
        if (v.lpNorm<1>() > 1e12 * norm0)
            throw DivergenceError("iteration diverged at step " + std::to_string(t));
        if (snapshot_steps.count(t))
            traj.snapshots.emplace_back(t, v);
        quiet_steps = (change / scale < crit.tolerance) ? quiet_steps + 1 : 0;
        if (quiet_steps >= crit.window) {
            traj.converged_at = t;
            break;
        }
    }
    if (traj.snapshots.empty() || traj.snapshots.back().second != v) {
        const long t_final = traj.converged_at.value_or(crit.max_steps);
        if (traj.snapshots.back().first != t_final)
            traj.snapshots.emplace_back(t_final, v);
    }
    traj.limit = v;
    return traj;
}

enum class ProjectionMode { Paper, Exact };

// Component of v along harmonic a. Paper mode is the right-eigenvector
// dot-product formula (v . pi_a)/||pi_a||^2; Exact mode uses the left
// eigenvector, (phi_a . v)/(phi_a . pi_a), which is conserved under any
// dynamics sharing the eigenbasis.
inline double project_coefficient(const Eigen::VectorXd& v, const SpectralBasis& basis, int a,
                                  ProjectionMode mode) {
    if (a < 1 || a > basis.n)
        throw ValidationError("harmonic index a out of range");
    if (v.size() != basis.n)
        throw ShapeMismatchError("vector length does not match basis");
    const Eigen::VectorXd pi = basis.pi(a);
    if (mode == ProjectionMode::Paper)
        return v.dot(pi) / pi.squaredNorm();
    const Eigen::VectorXd phi = basis.phi(a);
    const double denom = phi.dot(pi);
    if (std::abs(denom) < 1e-12)
        throw IllConditionedError("left/right eigenvector pairing is ill-conditioned");
    return phi.dot(v) / denom;
}

} // namespace harmonics
