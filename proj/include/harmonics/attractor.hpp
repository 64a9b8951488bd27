#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "harmonics/env.hpp"
#include "harmonics/errors.hpp"
#include "harmonics/lp.hpp"
#include "harmonics/spectral.hpp"

namespace harmonics {

// Polynomial f(u) = 1 + kappa_1 u + ... + kappa_r u^r. The constant term
// is structural; coefficients store kappa_1..kappa_r only.
struct PolynomialDesign {
    int order = 0;
    std::vector<double> coeffs;
    double beta = 0.0;
    double epsilon = 0.0;
    double delta_a = 0.0;
    double achieved_gap = 0.0;

    double eval(double u) const {
        double acc = 0.0;
        for (int j = order - 1; j >= 0; --j)
            acc = acc * u + coeffs[static_cast<size_t>(j)];
        return 1.0 + acc * u;
    }
};

namespace detail {

inline double spectral_spread(const SpectralBasis& basis, int a) {
    double delta = 0.0;
    for (int i = 1; i <= basis.n; ++i)
        delta = std::max(delta, std::abs(basis.lambda(i) - basis.lambda(a)));
    return delta;
}

inline void check_target(const SpectralBasis& basis, int a) {
    if (a < 1 || a > basis.n)
        throw ValidationError("harmonic index a out of range");
}

} // namespace detail

// Closed-form designs: order 2 uses kappa_2 = -(beta+1)/Delta^2; order 4
// uses kappa_2 = -3(beta+1)/Delta^2, kappa_4 = 2(beta+1)/Delta^4. Both
// satisfy f(0) = 1 and |f(u)| < 1 on [-Delta, Delta] \ {0} for |beta| < 1.
inline PolynomialDesign design_closed_form(const SpectralBasis& basis, int a, int order,
                                           double beta) {
    detail::check_target(basis, a);
    if (order != 2 && order != 4)
        throw ValidationError("closed-form designs exist for order 2 and 4 only");
    if (std::abs(beta) >= 1.0)
        throw ValidationError("closed-form design requires |beta| < 1");
    const double delta = detail::spectral_spread(basis, a);
    if (delta <= 0.0)
        throw DegenerateSpectrumError("all eigenvalues coincide with lambda_a");

    PolynomialDesign d;
    d.order = order;
    d.beta = beta;
    d.epsilon = 0.0;
    d.delta_a = delta;
    d.coeffs.assign(static_cast<size_t>(order), 0.0);
    const double k = beta + 1.0;
    if (order == 2) {
        d.coeffs[1] = -k / (delta * delta);
    } else {
        d.coeffs[1] = -3.0 * k / (delta * delta);
        d.coeffs[3] = 2.0 * k / (delta * delta * delta * delta);
    }
    double gap = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= basis.n; ++i)
        if (i != a)
            gap = std::max(gap, d.eval(basis.lambda(i) - basis.lambda(a)));
    d.achieved_gap = gap;
    return d;
}

// f(u) = 1 + u targets the steady state: for a = 1 every lambda_i - 1
// lies in (-2, 0), so all non-principal eigenvalues of M_1 = P map into
// (-1, 1).
inline PolynomialDesign design_first_order_for_pi1(const SpectralBasis& basis) {
    PolynomialDesign d;
    d.order = 1;
    d.coeffs = {1.0};
    d.beta = 1.0;
    d.epsilon = 0.0;
    d.delta_a = detail::spectral_spread(basis, 1);
    double gap = -std::numeric_limits<double>::infinity();
    for (int i = 2; i <= basis.n; ++i)
        gap = std::max(gap, d.eval(basis.lambda(i) - basis.lambda(1)));
    d.achieved_gap = gap;
    return d;
}

// Minimax design: minimize max_{i != a} f(lambda_i - lambda_a) subject to
// -beta <= f(lambda_i - lambda_a) <= 1 - epsilon. f is linear in kappa, so
// the epigraph reformulation is an exact linear program.
inline PolynomialDesign design_optimized(const SpectralBasis& basis, int a, int order,
                                         double beta, double epsilon) {
    detail::check_target(basis, a);
    if (order < 1)
        throw ValidationError("polynomial order must be >= 1");
    if (epsilon <= 0.0 || epsilon >= 1.0)
        throw ValidationError("epsilon must lie in (0, 1)");
    if (beta <= -1.0 || beta > 1.0)
        throw ValidationError("beta must lie in (-1, 1]");

    std::vector<double> us;
    us.reserve(static_cast<size_t>(basis.n - 1));
    for (int i = 1; i <= basis.n; ++i)
        if (i != a)
            us.push_back(basis.lambda(i) - basis.lambda(a));
    if (us.empty())
        throw DegenerateSpectrumError("no non-target eigenvalues to constrain");

    // Variables: kappa_1..kappa_r, t. Rows per point u:
    //   f(u) - t <= 0,  f(u) <= 1 - epsilon,  -f(u) <= beta + 1,
    // written with the structural constant moved to the right-hand side.
    // The LP is posed in scaled variables kappa'_j = kappa_j * s^j with
    // s = max |u|, so every tableau entry is O(1); raw powers of u span
    // many orders of magnitude and wreck the pivoting otherwise.
    double scale = 0.0;
    for (double u : us)
        scale = std::max(scale, std::abs(u));
    if (scale == 0.0)
        throw DegenerateSpectrumError("all non-target eigenvalues coincide with the target");
    const int nv = order + 1;
    const int m = 3 * static_cast<int>(us.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, nv);
    Eigen::VectorXd b(m);
    int row = 0;
    for (double u : us) {
        Eigen::VectorXd powers(order);
        double p = 1.0;
        for (int j = 0; j < order; ++j) {
            p *= u / scale;
            powers(j) = p;
        }
        A.block(row, 0, 1, order) = powers.transpose();
        A(row, order) = -1.0;
        b(row++) = -1.0;
        A.block(row, 0, 1, order) = powers.transpose();
        b(row++) = -epsilon;
        A.block(row, 0, 1, order) = -powers.transpose();
        b(row++) = beta + 1.0;
    }
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nv);
    c(order) = 1.0;

    const LpResult lp = solve_lp(c, A, b);
    if (!lp.feasible)
        throw InfeasibleDesignError(
            "no order-" + std::to_string(order) + " polynomial satisfies the constraints for a=" +
            std::to_string(a) + "; try a larger order or a smaller epsilon");
    if (!lp.bounded)
        throw NumericalError("design LP unbounded (internal error)");

    PolynomialDesign d;
    d.order = order;
    d.beta = beta;
    d.epsilon = epsilon;
    d.delta_a = detail::spectral_spread(basis, a);
    d.coeffs.resize(static_cast<size_t>(order));
    double unscale = 1.0;
    for (int j = 0; j < order; ++j) {
        unscale /= scale;
        d.coeffs[static_cast<size_t>(j)] = lp.x(j) * unscale;
    }
    double gap = -std::numeric_limits<double>::infinity();
    for (double u : us) {
        const double f = d.eval(u);
        if (f < -beta - 1e-6 || f > 1.0 - epsilon + 1e-6)
            throw NumericalError("optimized design violates its own constraints");
        gap = std::max(gap, f);
    }
    d.achieved_gap = gap;
    return d;
}

// Attractor matrix M_a = f(P - lambda_a I) together with its kernel
// radius (= polynomial order) and the spectral gap it achieves.
struct AttractorMatrix {
    int target_index = 0;
    Eigen::SparseMatrix<double> M;
    int radius = 0;
    double eigen_gap = 0.0;
    PolynomialDesign design;
};

// Horner evaluation in the matrix argument: r sparse multiplies, each of
// which widens the band by one hop.
inline AttractorMatrix assemble_matrix(const TransitionMatrix& tm, const SpectralBasis& basis,
                                       const PolynomialDesign& design, int a) {
    detail::check_target(basis, a);
    const int n = tm.n;
    Eigen::SparseMatrix<double> ident(n, n);
    ident.setIdentity();
    Eigen::SparseMatrix<double> shifted = tm.P - basis.lambda(a) * ident;

    Eigen::SparseMatrix<double> acc =
        design.coeffs[static_cast<size_t>(design.order - 1)] * ident;
    for (int j = design.order - 2; j >= 0; --j) {
        acc = Eigen::SparseMatrix<double>(acc * shifted) +
              design.coeffs[static_cast<size_t>(j)] * ident;
    }
    AttractorMatrix am;
    am.target_index = a;
    am.M = Eigen::SparseMatrix<double>(acc * shifted) + ident;
    am.M.prune(0.0, 0.0);
    am.radius = design.order;
    am.design = design;

    double max_other = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double expected = design.eval(basis.lambda(i) - basis.lambda(a));
        const double res =
            (am.M * basis.pi(i) - expected * basis.pi(i)).lpNorm<Eigen::Infinity>();
        if (res > 1e-6)
            throw AssemblyError("attractor matrix residual " + std::to_string(res) +
                                " at eigenpair " + std::to_string(i));
        if (i != a)
            max_other = std::max(max_other, std::abs(expected));
    }
    am.eigen_gap = 1.0 - max_other;
    return am;
}

// Relative lattice offset between two cells (destination minus source).
struct Offset {
    int dr = 0;
    int dc = 0;

    friend bool operator==(const Offset&, const Offset&) = default;
    friend bool operator<(const Offset& a, const Offset& b) {
        return a.dr != b.dr ? a.dr < b.dr : a.dc < b.dc;
    }
};

using Kernel = std::map<Offset, double>;

// Column kernels of an attractor matrix: one generic kernel shared by all
// interior states plus individual kernels for boundary-affected states.
struct KernelTable {
    int target_index = 0;
    int radius = 0;
    double beta = 0.0;
    double epsilon = 0.0;
    std::vector<double> coeffs;
    Kernel generic;
    std::map<int, Kernel> boundary;  // keyed by free-cell index

    // 0 when the offset is outside the kernel support.
    static double entry(const Kernel& k, Offset d) {
        const auto it = k.find(d);
        return it == k.end() ? 0.0 : it->second;
    }

    bool is_boundary(int cell) const { return boundary.count(cell) != 0; }

    const Kernel& kernel_for(int cell) const {
        const auto it = boundary.find(cell);
        return it == boundary.end() ? generic : it->second;
    }
};

// Hop distance from every free cell to the nearest boundary-affected cell
// (a cell with fewer than the full number of neighbors). All-(-1) when the
// environment has no such cells.
inline std::vector<int> boundary_distances(const Environment& env) {
    const int n = env.size();
    std::vector<int> dist(static_cast<size_t>(n), -1);
    std::deque<int> queue;
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(env.neighbors(i).size()) < env.full_degree()) {
            dist[static_cast<size_t>(i)] = 0;
            queue.push_back(i);
        }
    }
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

// Re-expresses the columns of M in relative offsets. States farther than
// r hops from every boundary-affected cell must share one generic kernel;
// this is verified column by column, not assumed.
inline KernelTable extract_kernels(const Environment& env, const AttractorMatrix& am) {
    const int n = env.size();
    if (am.M.rows() != n)
        throw ShapeMismatchError("attractor matrix size does not match environment");

    KernelTable table;
    table.target_index = am.target_index;
    table.radius = am.radius;
    table.beta = am.design.beta;
    table.epsilon = am.design.epsilon;
    table.coeffs = am.design.coeffs;

    const std::vector<int> bdist = boundary_distances(env);
    const auto column_kernel = [&](int j) {
        Kernel k;
        const Cell cj = env.coord(j);
        for (Eigen::SparseMatrix<double>::InnerIterator it(am.M, j); it; ++it) {
            const Cell ci = env.coord(static_cast<int>(it.row()));
            const Offset d{ci.row - cj.row, ci.col - cj.col};
            if (std::max(std::abs(d.dr), std::abs(d.dc)) > am.radius)
                throw KernelExtractionError("kernel entry beyond the stated radius");
            k[d] = it.value();
        }
        return k;
    };

    bool have_generic = false;
    for (int j = 0; j < n; ++j) {
        const bool interior = bdist[static_cast<size_t>(j)] < 0 ||
                              bdist[static_cast<size_t>(j)] > am.radius;
        Kernel k = column_kernel(j);
        if (!interior) {
            table.boundary.emplace(j, std::move(k));
            continue;
        }
        if (!have_generic) {
            table.generic = std::move(k);
            have_generic = true;
            continue;
        }
        if (k.size() != table.generic.size())
            throw KernelExtractionError("interior columns are not translation invariant");
        for (const auto& [off, val] : k) {
            const double ref = KernelTable::entry(table.generic, off);
            if (std::abs(val - ref) > 1e-12)
                throw KernelExtractionError("interior kernel mismatch at state " +
                                            std::to_string(j));
        }
    }
    return table;
}

// Rebuilds the column matrix from a kernel table (round-trip check and
// the path by which a simulated robot's local rule becomes a matrix).
inline Eigen::SparseMatrix<double> reconstruct_matrix(const Environment& env,
                                                      const KernelTable& table) {
    const int n = env.size();
    std::vector<Eigen::Triplet<double>> trip;
    for (int j = 0; j < n; ++j) {
        const Kernel& k = table.kernel_for(j);
        const Cell cj = env.coord(j);
        for (const auto& [off, val] : k) {
            const int i = env.index_at(cj.row + off.dr, cj.col + off.dc);
            if (i < 0)
                throw KernelExtractionError("kernel offset leaves the free-cell set");
            trip.emplace_back(i, j, val);
        }
    }
    Eigen::SparseMatrix<double> M(n, n);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

// --- text serialization ----------------------------------------------------

// Boundary kernels are written keyed by cell coordinate (row, col).
inline std::string to_text(const Environment& env, const KernelTable& table) {
    std::ostringstream out;
    out.precision(17);
    out << "kernel-table a=" << table.target_index << " r=" << table.radius
        << " beta=" << table.beta << " epsilon=" << table.epsilon << " kappa=";
    for (size_t j = 0; j < table.coeffs.size(); ++j)
        out << (j ? "," : "") << table.coeffs[j];
    out << "\n";
    out << "generic " << table.generic.size() << "\n";
    for (const auto& [off, val] : table.generic)
        out << off.dr << " " << off.dc << " " << val << "\n";
    for (const auto& [cell, kernel] : table.boundary) {
        const Cell c = env.coord(cell);
        out << "boundary " << c.row << " " << c.col << " " << kernel.size() << "\n";
        for (const auto& [off, val] : kernel)
            out << off.dr << " " << off.dc << " " << val << "\n";
    }
    return out.str();
}

inline KernelTable kernel_table_from_text(const Environment& env, std::istream& in) {
    KernelTable table;
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("empty kernel-table stream");
    {
        std::istringstream hs(line);
        std::string tag, field;
        hs >> tag;
        if (tag != "kernel-table")
            throw ParseError("kernel-table header missing");
        while (hs >> field) {
            const auto eq = field.find('=');
            if (eq == std::string::npos)
                throw ParseError("malformed kernel-table header field: " + field);
            const std::string key = field.substr(0, eq);
            const std::string val = field.substr(eq + 1);
            if (key == "a")
                table.target_index = std::stoi(val);
            else if (key == "r")
                table.radius = std::stoi(val);
            else if (key == "beta")
                table.beta = std::stod(val);
            else if (key == "epsilon")
                table.epsilon = std::stod(val);
            else if (key == "kappa") {
                std::istringstream ks(val);
                std::string tok;
                while (std::getline(ks, tok, ','))
                    if (!tok.empty())
                        table.coeffs.push_back(std::stod(tok));
            }
        }
    }
    const auto read_kernel = [&](int count) {
        Kernel k;
        for (int i = 0; i < count; ++i) {
            if (!std::getline(in, line))
                throw ParseError("kernel-table truncated");
            std::istringstream es(line);
            Offset off;
            double val = 0.0;
            if (!(es >> off.dr >> off.dc >> val))
                throw ParseError("bad kernel entry: " + line);
            k[off] = val;
        }
        return k;
    };
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream hs(line);
        std::string tag;
        hs >> tag;
        if (tag == "generic") {
            int count = 0;
            hs >> count;
            table.generic = read_kernel(count);
        } else if (tag == "boundary") {
            int row = 0, col = 0, count = 0;
            if (!(hs >> row >> col >> count))
                throw ParseError("bad boundary kernel header: " + line);
            const int cell = env.index_at(row, col);
            if (cell < 0)
                throw ParseError("boundary kernel at a non-free cell");
            table.boundary[cell] = read_kernel(count);
        } else {
            throw ParseError("unexpected kernel-table line: " + line);
        }
    }
    return table;
}

} // namespace harmonics
