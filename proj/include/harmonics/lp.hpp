#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "harmonics/errors.hpp"

namespace harmonics {

struct LpResult {
    bool feasible = false;
    bool bounded = true;
    Eigen::VectorXd x;
    double objective = 0.0;
};

namespace detail {

// Seidel's randomized incremental algorithm for linear programs in a
// small, fixed dimension:  min c.x  s.t.  A x <= b,  |x_j| <= box.
// Expected O(d! * m) — ideal for a handful of variables against hundreds
// of constraints, and far more stable than a dense tableau because every
// step is either a feasibility check or an exact 1-variable elimination.
//
// Returns true with `x` filled on success, false when infeasible.
inline bool seidel_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                      const Eigen::VectorXd& c, double box, std::mt19937_64& rng,
                      Eigen::VectorXd& x, int depth = 0) {
    const int d = static_cast<int>(c.size());
    const int m = static_cast<int>(A.rows());
    const double tol = 1e-9;
    if (depth > 64)
        throw NumericalError("LP recursion depth exceeded (internal error)");

    if (d == 1) {
        double lo = -box, hi = box;
        for (int i = 0; i < m; ++i) {
            const double a = A(i, 0);
            if (a > tol)
                hi = std::min(hi, b(i) / a);
            else if (a < -tol)
                lo = std::max(lo, b(i) / a);
            else if (b(i) < -std::abs(a) * box - tol)
                return false;  // ~zero row with a genuinely negative rhs
        }
        if (lo > hi + tol * std::max(1.0, std::max(std::abs(lo), std::abs(hi))))
            return false;
        x.resize(1);
        x(0) = (c(0) >= 0.0) ? lo : hi;
        return true;
    }

    // Start at the box corner that minimizes the objective; every
    // processed constraint keeps x optimal for the prefix.
    x.resize(d);
    for (int j = 0; j < d; ++j)
        x(j) = (c(j) >= 0.0) ? -box : box;

    std::vector<int> order(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i)
        order[static_cast<size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);

    for (int idx = 0; idx < m; ++idx) {
        const int i = order[static_cast<size_t>(idx)];
        if (A.row(i).dot(x) <= b(i) + tol)
            continue;

        // x violates constraint i, so the new optimum lies on its
        // hyperplane. Eliminate the variable with the largest pivot.
        int piv = 0;
        for (int j = 1; j < d; ++j)
            if (std::abs(A(i, j)) > std::abs(A(i, piv)))
                piv = j;
        const double apiv = A(i, piv);
        if (std::abs(apiv) <= tol)
            return false;  // 0.x <= b with b < lhs: contradictory row

        // Substitute x_piv = (b_i - sum_{k != piv} a_ik x_k) / a_ipiv
        // into the prefix constraints, the eliminated variable's box
        // bounds, and the objective.
        const int msub = idx + 2;
        Eigen::MatrixXd As(msub, d - 1);
        Eigen::VectorXd bs(msub);
        auto reduce_row = [&](const Eigen::RowVectorXd& arow, double brow, int out) {
            const double f = arow(piv) / apiv;
            int col = 0;
            for (int k = 0; k < d; ++k) {
                if (k == piv)
                    continue;
                As(out, col++) = arow(k) - f * A(i, k);
            }
            bs(out) = brow - f * b(i);
            // Rescale so the largest coefficient is O(1); the eliminations
            // otherwise drift across many orders of magnitude and the
            // absolute tolerances below stop meaning anything.
            const double mx = As.row(out).cwiseAbs().maxCoeff();
            if (mx > tol) {
                As.row(out) /= mx;
                bs(out) /= mx;
            }
        };
        for (int r = 0; r < idx; ++r)
            reduce_row(A.row(order[static_cast<size_t>(r)]), b(order[static_cast<size_t>(r)]),
                       r);
        Eigen::RowVectorXd boxrow = Eigen::RowVectorXd::Zero(d);
        boxrow(piv) = 1.0;
        reduce_row(boxrow, box, idx);
        boxrow(piv) = -1.0;
        reduce_row(boxrow, box, idx + 1);

        Eigen::VectorXd cs(d - 1);
        {
            const double f = c(piv) / apiv;
            int col = 0;
            for (int k = 0; k < d; ++k) {
                if (k == piv)
                    continue;
                cs(col++) = c(k) - f * A(i, k);
            }
        }

        Eigen::VectorXd y;
        if (!seidel_lp(As, bs, cs, box, rng, y, depth + 1))
            return false;

        double acc = b(i);
        int col = 0;
        for (int k = 0; k < d; ++k) {
            if (k == piv)
                continue;
            x(k) = y(col);
            acc -= A(i, k) * y(col++);
        }
        x(piv) = acc / apiv;
    }
    return true;
}

} // namespace detail

// Solves  min c.x  s.t.  A x <= b  with free variables confined to a large
// bounding box. Deterministic: the randomized constraint order is drawn
// from a fixed-seed generator.
inline LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                         const Eigen::VectorXd& b, double box = 1e8) {
    if (A.rows() != b.size() || A.cols() != c.size())
        throw ValidationError("LP dimensions disagree");
    LpResult result;
    Eigen::VectorXd x;
    // With exact arithmetic the shuffled insertion order never changes the
    // answer, but a poorly conditioned elimination chain can produce a
    // spurious "infeasible" in floating point. Retrying under a few fixed
    // alternative orders stays deterministic and sidesteps the bad chains.
    constexpr std::uint64_t kSeeds[] = {0x9e3779b97f4a7c15ULL, 0xd1342543de82ef95ULL,
                                        0xaf251af3b0f025b5ULL, 0x2545f4914f6cdd1dULL,
                                        0x9e6c63d0a48d9a3fULL};
    bool solved = false;
    for (std::uint64_t seed : kSeeds) {
        std::mt19937_64 rng(seed);
        if (detail::seidel_lp(A, b, c, box, rng, x)) {
            solved = true;
            break;
        }
    }
    if (!solved) {
        result.feasible = false;
        return result;
    }
    result.feasible = true;
    result.x = x;
    result.objective = c.dot(x);
    // A solution pinned to the artificial box means the genuine program
    // is unbounded (or practically so) in that direction.
    result.bounded = x.cwiseAbs().maxCoeff() < 0.99 * box;
    return result;
}

} // namespace harmonics
