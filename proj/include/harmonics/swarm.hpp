#pragma once

#include <cstdint>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "harmonics/attractor.hpp"
#include "harmonics/env.hpp"
#include "harmonics/errors.hpp"
#include "harmonics/rng.hpp"

namespace harmonics {

enum class SwarmMode { Unweighted, Weighted };

// Per-robot positions and weights. Weights are carried (and meaningful)
// in Weighted mode only.
struct SwarmState {
    long t = 0;
    std::vector<int> positions;
    std::vector<double> weights;

    int count() const { return static_cast<int>(positions.size()); }
};

inline SwarmState make_swarm(int robots, int start_cell, double initial_weight = 1.0) {
    if (robots < 1)
        throw ValidationError("swarm needs at least one robot");
    SwarmState s;
    s.positions.assign(static_cast<size_t>(robots), start_cell);
    s.weights.assign(static_cast<size_t>(robots), initial_weight);
    return s;
}

namespace detail {

template <typename Fn>
void for_each_robot(int robots, int threads, Fn&& fn) {
    if (threads <= 1) {
        for (int r = 0; r < robots; ++r)
            fn(r);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (robots + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = t * chunk;
        const int hi = std::min(robots, lo + chunk);
        if (lo >= hi)
            break;
        pool.emplace_back([lo, hi, &fn] {
            for (int r = lo; r < hi; ++r)
                fn(r);
        });
    }
    for (auto& th : pool)
        th.join();
}

} // namespace detail

// One unweighted step: every robot samples its next cell from the column
// of P at its current cell.
inline void step_unweighted(SwarmState& state, const TransitionMatrix& tm, std::uint64_t seed,
                            int threads = 1) {
    const long t = state.t;
    detail::for_each_robot(state.count(), threads, [&](int r) {
        const int cur = state.positions[static_cast<size_t>(r)];
        double u = event_uniform(seed, static_cast<std::uint64_t>(r),
                                 static_cast<std::uint64_t>(t));
        int dest = cur;
        for (Eigen::SparseMatrix<double>::InnerIterator it(tm.P, cur); it; ++it) {
            dest = static_cast<int>(it.row());  // falls through to the last entry
            if (u < it.value())
                break;
            u -= it.value();
        }
        state.positions[static_cast<size_t>(r)] = dest;
    });
    ++state.t;
}

// Cells within `radius` hops of every cell; used by the opt-in local
// proposal variant of the weighted step.
inline std::vector<std::vector<int>> proposal_disks(const Environment& env, int radius) {
    std::vector<std::vector<int>> disks(static_cast<size_t>(env.size()));
    for (int j = 0; j < env.size(); ++j) {
        const std::vector<int> dist = hop_distances_from(env, j);
        for (int i = 0; i < env.size(); ++i)
            if (dist[static_cast<size_t>(i)] >= 0 && dist[static_cast<size_t>(i)] <= radius)
                disks[static_cast<size_t>(j)].push_back(i);
    }
    return disks;
}

// One weighted step per the individual-robot rule: pick the boundary
// kernel K_b when the current cell is boundary-classified (otherwise the
// generic kernel), jump to a uniformly random cell, multiply the carried
// weight by n x k_delta (zero beyond the kernel support), then set every
// occupant of a cell to that cell's mean weight.
//
// `disks` switches to the variance-reduction variant: the destination is
// uniform over the radius-r disk and the multiplier becomes |disk| x
// k_delta, which leaves the expected aggregated dynamics unchanged.
inline void step_weighted(SwarmState& state, const KernelTable& table, const Environment& env,
                          std::uint64_t seed, int threads = 1,
                          const std::vector<std::vector<int>>* disks = nullptr) {
    const int n = env.size();
    const long t = state.t;
    detail::for_each_robot(state.count(), threads, [&](int r) {
        const int cur = state.positions[static_cast<size_t>(r)];
        const Kernel& kernel = table.kernel_for(cur);
        const double u = event_uniform(seed, static_cast<std::uint64_t>(r),
                                       static_cast<std::uint64_t>(t));
        int dest;
        double proposal_count;
        if (disks) {
            const auto& disk = (*disks)[static_cast<size_t>(cur)];
            dest = disk[std::min(static_cast<size_t>(u * disk.size()), disk.size() - 1)];
            proposal_count = static_cast<double>(disk.size());
        } else {
            dest = std::min(static_cast<int>(u * n), n - 1);
            proposal_count = static_cast<double>(n);
        }
        const Cell from = env.coord(cur);
        const Cell to = env.coord(dest);
        const double k = KernelTable::entry(kernel, {to.row - from.row, to.col - from.col});
        state.positions[static_cast<size_t>(r)] = dest;
        state.weights[static_cast<size_t>(r)] *= proposal_count * k;
    });

    // Synchronous per-cell averaging; serial so results are independent
    // of the thread count.
    std::vector<double> sum(static_cast<size_t>(n), 0.0);
    std::vector<long> cnt(static_cast<size_t>(n), 0);
    for (int r = 0; r < state.count(); ++r) {
        sum[static_cast<size_t>(state.positions[static_cast<size_t>(r)])] +=
            state.weights[static_cast<size_t>(r)];
        ++cnt[static_cast<size_t>(state.positions[static_cast<size_t>(r)])];
    }
    for (int r = 0; r < state.count(); ++r) {
        const int cell = state.positions[static_cast<size_t>(r)];
        state.weights[static_cast<size_t>(r)] =
            sum[static_cast<size_t>(cell)] / static_cast<double>(cnt[static_cast<size_t>(cell)]);
    }
    ++state.t;
}

// Per-cell sum of robot weights.
inline Eigen::VectorXd aggregate_weights(const SwarmState& state, int n) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (int r = 0; r < state.count(); ++r)
        w(state.positions[static_cast<size_t>(r)]) += state.weights[static_cast<size_t>(r)];
    return w;
}

// Per-cell robot counts.
inline Eigen::VectorXd aggregate_counts(const SwarmState& state, int n) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (int r = 0; r < state.count(); ++r)
        w(state.positions[static_cast<size_t>(r)]) += 1.0;
    return w;
}

} // namespace harmonics
