#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "harmonics/errors.hpp"

namespace harmonics {

enum class EnvKind { Line1D, Grid2D };

// Position of a cell on the underlying lattice. Line environments use
// row = 0, col = position along the line.
struct Cell {
    int row = 0;
    int col = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
};

// Discrete cell environment: a 1D segment or a 2D grid with an obstacle
// mask. Free cells are compacted to indices 0..n-1 in row-major order;
// the adjacency graph is symmetric (1D: left/right, 2D: 8-connected).
class Environment {
  public:
    static Environment line(int n) {
        if (n < 1)
            throw InvalidDimensionError("line environment needs n >= 1");
        Environment env;
        env.kind_ = EnvKind::Line1D;
        env.rows_ = 1;
        env.cols_ = n;
        env.obstacle_.assign(static_cast<size_t>(n), 0);
        env.build_index();
        return env;
    }

    static Environment grid(int rows, int cols, std::vector<std::uint8_t> obstacle) {
        if (rows < 1 || cols < 1)
            throw InvalidDimensionError("grid dimensions must be positive");
        if (obstacle.size() != static_cast<size_t>(rows) * static_cast<size_t>(cols))
            throw InvalidDimensionError("obstacle mask size does not match grid dimensions");
        Environment env;
        env.kind_ = EnvKind::Grid2D;
        env.rows_ = rows;
        env.cols_ = cols;
        env.obstacle_ = std::move(obstacle);
        env.build_index();
        if (env.size() == 0)
            throw EmptyEnvironmentError("grid has no free cells");
        if (!env.connected())
            throw ConnectivityError("free-cell graph is disconnected");
        return env;
    }

    EnvKind kind() const { return kind_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int size() const { return static_cast<int>(free_cells_.size()); }

    bool obstacle_at(int row, int col) const {
        return obstacle_[static_cast<size_t>(row) * cols_ + col] != 0;
    }

    // Free index of a raw (row, col) position, or -1 for obstacles /
    // out-of-range positions.
    int index_at(int row, int col) const {
        if (row < 0 || row >= rows_ || col < 0 || col >= cols_)
            return -1;
        return index_of_[static_cast<size_t>(row) * cols_ + col];
    }

    Cell coord(int free_index) const {
        const int raw = free_cells_[static_cast<size_t>(free_index)];
        return {raw / cols_, raw % cols_};
    }

    const std::vector<int>& neighbors(int free_index) const {
        return adjacency_[static_cast<size_t>(free_index)];
    }

    // Maximum neighbor count a cell of this kind can have. Cells with
    // fewer free neighbors are boundary-affected.
    int full_degree() const { return kind_ == EnvKind::Line1D ? 2 : 8; }

    bool connected() const {
        const int n = size();
        if (n == 0)
            return false;
        std::vector<std::uint8_t> seen(static_cast<size_t>(n), 0);
        std::deque<int> queue{0};
        seen[0] = 1;
        int reached = 1;
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int v : adjacency_[static_cast<size_t>(u)]) {
                if (!seen[static_cast<size_t>(v)]) {
                    seen[static_cast<size_t>(v)] = 1;
                    ++reached;
                    queue.push_back(v);
                }
            }
        }
        return reached == n;
    }

  private:
    void build_index() {
        index_of_.assign(static_cast<size_t>(rows_) * cols_, -1);
        free_cells_.clear();
        for (int raw = 0; raw < rows_ * cols_; ++raw) {
            if (!obstacle_[static_cast<size_t>(raw)]) {
                index_of_[static_cast<size_t>(raw)] = static_cast<int>(free_cells_.size());
                free_cells_.push_back(raw);
            }
        }
        adjacency_.assign(free_cells_.size(), {});
        for (int i = 0; i < size(); ++i) {
            const Cell c = coord(i);
            if (kind_ == EnvKind::Line1D) {
                for (int dc : {-1, +1}) {
                    const int j = index_at(0, c.col + dc);
                    if (j >= 0)
                        adjacency_[static_cast<size_t>(i)].push_back(j);
                }
            } else {
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        if (dr == 0 && dc == 0)
                            continue;
                        const int j = index_at(c.row + dr, c.col + dc);
                        if (j >= 0)
                            adjacency_[static_cast<size_t>(i)].push_back(j);
                    }
            }
        }
    }

    EnvKind kind_ = EnvKind::Line1D;
    int rows_ = 0;
    int cols_ = 0;
    std::vector<std::uint8_t> obstacle_;
    std::vector<int> free_cells_;
    std::vector<int> index_of_;
    std::vector<std::vector<int>> adjacency_;
};

// Sparse column-stochastic transition matrix over the free cells.
struct TransitionMatrix {
    int n = 0;
    Eigen::SparseMatrix<double> P;
};

namespace detail {

inline void check_column_sums(const Eigen::SparseMatrix<double>& P) {
    for (int j = 0; j < P.outerSize(); ++j) {
        double sum = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(P, j); it; ++it)
            sum += it.value();
        if (std::abs(sum - 1.0) > 1e-12)
            throw NumericalError("transition matrix column " + std::to_string(j) +
                                 " sums to " + std::to_string(sum));
    }
}

} // namespace detail

// Line-segment chain: interior cells step left/right with probability 0.4
// each and stay with 0.2; the two end cells step to their sole neighbor
// with 0.8 and stay with 0.2.
inline TransitionMatrix build_line_chain(int n) {
    if (n < 2)
        throw InvalidDimensionError("line chain needs n >= 2");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(3 * n));
    for (int j = 0; j < n; ++j) {
        trip.emplace_back(j, j, 0.2);
        if (j == 0) {
            trip.emplace_back(1, 0, 0.8);
        } else if (j == n - 1) {
            trip.emplace_back(n - 2, n - 1, 0.8);
        } else {
            trip.emplace_back(j - 1, j, 0.4);
            trip.emplace_back(j + 1, j, 0.4);
        }
    }
    TransitionMatrix tm;
    tm.n = n;
    tm.P.resize(n, n);
    tm.P.setFromTriplets(trip.begin(), trip.end());
    detail::check_column_sums(tm.P);
    return tm;
}

// 8-connected grid chain: with all 8 neighbors free, horizontal/vertical
// moves have probability 0.14, diagonal moves 0.10, staying put 0.04.
// Probability mass freed by blocked neighbors is split equally among the
// remaining free neighbors; the self-transition stays 0.04. A cell with
// no free neighbors keeps all mass on itself.
inline TransitionMatrix build_grid_chain(const Environment& env) {
    if (env.kind() != EnvKind::Grid2D)
        throw InvalidDimensionError("build_grid_chain requires a Grid2D environment");
    const int n = env.size();
    if (n == 0)
        throw EmptyEnvironmentError("grid has no free cells");
    if (!env.connected())
        throw ConnectivityError("free-cell graph is disconnected");

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(9 * n));
    for (int j = 0; j < n; ++j) {
        const Cell c = env.coord(j);
        const auto& nbrs = env.neighbors(j);
        if (nbrs.empty()) {
            trip.emplace_back(j, j, 1.0);
            continue;
        }
        double freed = 0.0;
        double base_sum = 0.0;
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc == 0)
                    continue;
                const double base = (dr == 0 || dc == 0) ? 0.14 : 0.10;
                if (env.index_at(c.row + dr, c.col + dc) < 0)
                    freed += base;
                else
                    base_sum += base;
            }
        const double bonus = freed / static_cast<double>(nbrs.size());
        double col_sum = 0.04;
        trip.emplace_back(j, j, 0.04);
        for (int i : nbrs) {
            const Cell d = env.coord(i);
            const bool diag = (d.row != c.row) && (d.col != c.col);
            const double p = (diag ? 0.10 : 0.14) + bonus;
            trip.emplace_back(i, j, p);
            col_sum += p;
        }
        (void)base_sum;
        if (std::abs(col_sum - 1.0) > 1e-12)
            throw NumericalError("grid column redistribution failed to conserve mass");
    }
    TransitionMatrix tm;
    tm.n = n;
    tm.P.resize(n, n);
    tm.P.setFromTriplets(trip.begin(), trip.end());
    detail::check_column_sums(tm.P);
    return tm;
}

// BFS hop distances from one free cell to all free cells. Unreachable
// cells get -1 (cannot occur on a valid, connected Environment).
inline std::vector<int> hop_distances_from(const Environment& env, int src) {
    const int n = env.size();
    std::vector<int> dist(static_cast<size_t>(n), -1);
    dist[static_cast<size_t>(src)] = 0;
    std::deque<int> queue{src};
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        for (int v : env.neighbors(u)) {
            if (dist[static_cast<size_t>(v)] < 0) {
                dist[static_cast<size_t>(v)] = dist[static_cast<size_t>(u)] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

inline int hop_distance(const Environment& env, int i, int j) {
    if (i < 0 || i >= env.size() || j < 0 || j >= env.size())
        throw ValidationError("hop_distance: cell index out of range");
    const int d = hop_distances_from(env, j)[static_cast<size_t>(i)];
    if (d < 0)
        throw ConnectivityError("hop_distance: cells are not connected");
    return d;
}

// --- Environment / shape overlay text files -------------------------------
//
// Environment file: first line "line N" or "grid R C"; grids are followed
// by R rows of C characters, '.' free and '#' obstacle. A shape overlay
// uses the same layout with 'X' marking target cells.

inline Environment parse_environment(std::istream& in) {
    std::string head;
    if (!std::getline(in, head))
        throw ParseError("empty environment file");
    std::istringstream hs(head);
    std::string tag;
    hs >> tag;
    if (tag == "line") {
        int n = 0;
        if (!(hs >> n) || n < 1)
            throw ParseError("bad 'line N' header");
        return Environment::line(n);
    }
    if (tag == "grid") {
        int rows = 0, cols = 0;
        if (!(hs >> rows >> cols) || rows < 1 || cols < 1)
            throw ParseError("bad 'grid R C' header");
        std::vector<std::uint8_t> mask;
        mask.reserve(static_cast<size_t>(rows) * cols);
        std::string row;
        for (int r = 0; r < rows; ++r) {
            if (!std::getline(in, row) || static_cast<int>(row.size()) < cols)
                throw ParseError("grid row " + std::to_string(r) + " missing or too short");
            for (int c = 0; c < cols; ++c) {
                if (row[static_cast<size_t>(c)] == '#')
                    mask.push_back(1);
                else if (row[static_cast<size_t>(c)] == '.')
                    mask.push_back(0);
                else
                    throw ParseError(std::string("unexpected grid character '") +
                                     row[static_cast<size_t>(c)] + "'");
            }
        }
        return Environment::grid(rows, cols, std::move(mask));
    }
    throw ParseError("environment header must start with 'line' or 'grid'");
}

// Parses a {'.','X'} overlay against an already-loaded environment and
// returns a 0/1 indicator over free cells. 'X' on an obstacle is an error.
inline Eigen::VectorXd parse_shape_overlay(const Environment& env, std::istream& in) {
    std::string head;
    if (!std::getline(in, head))
        throw ParseError("empty shape file");
    std::istringstream hs(head);
    std::string tag;
    int rows = 0, cols = 0;
    hs >> tag >> rows >> cols;
    if (tag != "grid" && tag != "line")
        throw ParseError("shape header must start with 'grid' or 'line'");
    if (tag == "line") {
        cols = rows;
        rows = 1;
    }
    if (rows != env.rows() || cols != env.cols())
        throw ShapeMismatchError("shape overlay dimensions do not match environment");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(env.size());
    std::string row;
    for (int r = 0; r < rows; ++r) {
        if (!std::getline(in, row) || static_cast<int>(row.size()) < cols)
            throw ParseError("shape row " + std::to_string(r) + " missing or too short");
        for (int c = 0; c < cols; ++c) {
            const char ch = row[static_cast<size_t>(c)];
            if (ch == 'X') {
                const int idx = env.index_at(r, c);
                if (idx < 0)
                    throw ShapeMismatchError("shape marks an obstacle cell as target");
                w(idx) = 1.0;
            } else if (ch != '.' && ch != '#') {
                throw ParseError(std::string("unexpected shape character '") + ch + "'");
            }
        }
    }
    if (w.sum() == 0.0)
        throw ValidationError("shape overlay marks no target cells");
    return w;
}

} // namespace harmonics
