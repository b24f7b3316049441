#pragma once

#include <Eigen/Dense>

#include "condgen/error.hpp"

namespace condgen {

struct LeastSquaresSolution {
    Eigen::VectorXd coefficients;
    double residual_sum_of_squares = 0.0;
    Eigen::Index rank = 0;
    bool rank_deficient = false;
};

/// Minimum-norm least squares: among all coefficient vectors minimizing
/// |A x - y|^2, returns the one with smallest |x|. Rank deficiency is
/// reported, not fatal; collinear condition attributes are expected in
/// small inspection samples.
inline LeastSquaresSolution solve_least_squares(const Eigen::MatrixXd& design,
                                                const Eigen::VectorXd& target) {
    if (design.rows() != target.size())
        throw ConfigError("least squares: design rows != target length");
    if (design.rows() == 0 || design.cols() == 0)
        throw InsufficientDataError("least squares: empty system");

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
    LeastSquaresSolution out;
    out.coefficients = cod.solve(target);
    out.rank = cod.rank();
    out.rank_deficient = out.rank < design.cols();
    out.residual_sum_of_squares = (design * out.coefficients - target).squaredNorm();
    return out;
}

/// Lawson-Hanson active-set non-negative least squares. Small systems only
/// (combination weights), so the dense inner solves are fine.
inline Eigen::VectorXd solve_nonnegative_least_squares(const Eigen::MatrixXd& design,
                                                       const Eigen::VectorXd& target,
                                                       int max_iterations = 200) {
    const Eigen::Index n = design.cols();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);

    const double tol = 1e-12 * design.cwiseAbs().maxCoeff() * static_cast<double>(design.rows());

    auto solve_passive = [&](const std::vector<bool>& mask) {
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (mask[static_cast<std::size_t>(i)]) ++k;
        Eigen::MatrixXd sub(design.rows(), k);
        Eigen::Index c = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (mask[static_cast<std::size_t>(i)]) sub.col(c++) = design.col(i);
        Eigen::VectorXd zs = sub.completeOrthogonalDecomposition().solve(target);
        Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
        c = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (mask[static_cast<std::size_t>(i)]) z(i) = zs(c++);
        return z;
    };

    for (int iter = 0; iter < max_iterations; ++iter) {
        Eigen::VectorXd gradient = design.transpose() * (target - design * x);
        Eigen::Index best = -1;
        double best_w = tol;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!passive[static_cast<std::size_t>(i)] && gradient(i) > best_w) {
                best_w = gradient(i);
                best = i;
            }
        }
        if (best < 0) break;
        passive[static_cast<std::size_t>(best)] = true;

        Eigen::VectorXd z = solve_passive(passive);
        while (true) {
            bool feasible = true;
            double alpha = 1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (passive[static_cast<std::size_t>(i)] && z(i) <= 0.0) {
                    feasible = false;
                    const double step = x(i) / (x(i) - z(i));
                    alpha = std::min(alpha, step);
                }
            }
            if (feasible) {
                x = z;
                break;
            }
            x += alpha * (z - x);
            for (Eigen::Index i = 0; i < n; ++i) {
                if (passive[static_cast<std::size_t>(i)] && x(i) <= tol) {
                    passive[static_cast<std::size_t>(i)] = false;
                    x(i) = 0.0;
                }
            }
            z = solve_passive(passive);
        }
    }
    return x;
}

} // namespace condgen
