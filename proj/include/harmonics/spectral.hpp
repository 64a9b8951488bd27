#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "harmonics/env.hpp"
#include "harmonics/errors.hpp"

namespace harmonics {

enum class NormalizationMode { L1, L2, MaxAbs };

// Scales v so that the requested norm is 1; the sign pattern is kept.
inline Eigen::VectorXd normalize(const Eigen::VectorXd& v, NormalizationMode mode) {
    double scale = 0.0;
    switch (mode) {
    case NormalizationMode::L1:
        scale = v.lpNorm<1>();
        break;
    case NormalizationMode::L2:
        scale = v.norm();
        break;
    case NormalizationMode::MaxAbs:
        scale = v.lpNorm<Eigen::Infinity>();
        break;
    }
    if (scale == 0.0)
        throw DegenerateInputError("cannot normalize the zero vector");
    return v / scale;
}

// Full eigen-decomposition of a transition matrix. Eigenpairs are sorted
// by descending |lambda|, ties by descending signed lambda, then by the
// solver's original index. Harmonic indices are 1-based: pi(1) is the
// steady state (stored L1-normalized, all positive); pi(i), i > 1, are
// stored L2-normalized with the first largest-magnitude entry positive.
// Left eigenvectors are the rows of the inverse of the right-eigenvector
// matrix, so phi(i) . pi(j) = delta_ij by construction.
class SpectralBasis {
  public:
    int n = 0;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd right;  // column i-1 holds pi_i
    Eigen::MatrixXd left;   // row i-1 holds phi_i
    double condition_number = 0.0;

    double lambda(int a) const { return eigenvalues(a - 1); }
    Eigen::VectorXd pi(int a) const { return right.col(a - 1); }
    Eigen::VectorXd phi(int a) const { return left.row(a - 1).transpose(); }
};

inline SpectralBasis decompose(const TransitionMatrix& tm) {
    const int n = tm.n;
    const Eigen::MatrixXd P = Eigen::MatrixXd(tm.P);

    Eigen::EigenSolver<Eigen::MatrixXd> solver(P);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigen-decomposition failed to converge");

    const Eigen::VectorXcd values = solver.eigenvalues();
    const Eigen::MatrixXcd vectors = solver.eigenvectors();
    for (int i = 0; i < n; ++i) {
        if (std::abs(values(i).imag()) > 1e-8)
            throw ComplexSpectrumError("eigenvalue " + std::to_string(i) +
                                       " has imaginary part " + std::to_string(values(i).imag()));
        if (vectors.col(i).imag().lpNorm<Eigen::Infinity>() > 1e-8)
            throw ComplexSpectrumError("eigenvector " + std::to_string(i) + " is not real");
    }

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double la = values(a).real(), lb = values(b).real();
        if (std::abs(la) != std::abs(lb))
            return std::abs(la) > std::abs(lb);
        if (la != lb)
            return la > lb;
        return a < b;
    });

    SpectralBasis basis;
    basis.n = n;
    basis.eigenvalues.resize(n);
    basis.right.resize(n, n);
    for (int i = 0; i < n; ++i) {
        basis.eigenvalues(i) = values(order[static_cast<size_t>(i)]).real();
        Eigen::VectorXd v = vectors.col(order[static_cast<size_t>(i)]).real();

        // Sign convention: first entry of largest magnitude is positive.
        const double maxabs = v.lpNorm<Eigen::Infinity>();
        for (int k = 0; k < n; ++k) {
            if (std::abs(v(k)) >= maxabs - 1e-12 * maxabs) {
                if (v(k) < 0)
                    v = -v;
                break;
            }
        }
        basis.right.col(i) = (i == 0) ? normalize(v, NormalizationMode::L1)
                                      : normalize(v, NormalizationMode::L2);
    }

    if (std::abs(basis.eigenvalues(0) - 1.0) > 1e-9)
        throw NumericalError("leading eigenvalue is not 1 (matrix not stochastic/irreducible?)");
    for (int i = 1; i < n; ++i)
        if (std::abs(basis.eigenvalues(i)) >= 1.0)
            throw NumericalError("non-principal eigenvalue with |lambda| >= 1 (periodic chain?)");

    if (basis.right.col(0).minCoeff() <= 0.0)
        throw NumericalError("steady-state eigenvector is not strictly positive");

    // Residual check doubles as a defectiveness guard: a defective matrix
    // makes the solver emit near-parallel columns and blows up cond(V).
    for (int i = 0; i < n; ++i) {
        const double res =
            (P * basis.right.col(i) - basis.eigenvalues(i) * basis.right.col(i))
                .lpNorm<Eigen::Infinity>();
        if (res > 1e-8)
            throw NonDiagonalizableError("eigenpair " + std::to_string(i + 1) +
                                         " residual " + std::to_string(res));
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis.right);
    if (!lu.isInvertible())
        throw NonDiagonalizableError("right-eigenvector matrix is singular");
    basis.left = lu.inverse();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis.right);
    basis.condition_number =
        svd.singularValues()(0) / svd.singularValues()(n - 1);

    return basis;
}

// The stationary distribution pi_1, L1-normalized and strictly positive.
inline Eigen::VectorXd steady_state(const SpectralBasis& basis) {
    return normalize(basis.pi(1), NormalizationMode::L1);
}

} // namespace harmonics
