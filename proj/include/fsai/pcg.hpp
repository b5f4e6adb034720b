#pragma once

#include "fsai/precond.hpp"
#include "fsai/sparse.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fsai {

struct SolverConfig {
    double epsilon = 1e-6;       ///< on ||b - A x|| / ||b||
    index_t max_iter = 0;        ///< 0 means n
    bool record_history = false; ///< relative recurrence residual per iteration
    /// Direction update d = r + beta d instead of d = s + beta d. Only
    /// equivalent to preconditioned CG for the identity preconditioner.
    bool raw_residual_update = false;
    /// The true residual is recomputed in double every `check_interval`
    /// iterations and whenever the recurrence residual reaches epsilon.
    index_t check_interval = 50;
};

struct SolveReport {
    std::vector<double> solution;
    index_t iterations = 0;
    bool converged = false;           ///< final true residual <= epsilon
    double final_rel_residual = 0.0;  ///< true residual, computed in double
    std::vector<double> residual_history;
    std::uint64_t flops = 0;          ///< build + solve
    double wall_time = 0.0;           ///< seconds, solve only
};

/// Preconditioned conjugate gradient on A x = b. A, b, the Krylov vectors and
/// the preconditioner are in precision T; the iterate x and the convergence
/// check are in double. At every true-residual check that does not confirm
/// convergence, r is replaced by the true residual (the search direction is
/// kept). Throws NumericalBreakdown on non-finite inner products
/// or a non-positive curvature d^t A d.
template <class T>
SolveReport pcg_solve(const CsrMatrix<T>& a, std::span<const T> b, const Preconditioner<T>& m,
                      std::span<const double> x0 = {}, const SolverConfig& config = {});

/// 2 ((sqrt(mu2) - 1) / (sqrt(mu2) + 1))^(m-1): bound on ||x - x_m||_A / ||x - x_0||_A
/// where x_m is the iterate after m - 1 steps. Throws DomainError for mu2 < 1
/// or m < 1.
double convergence_bound(double mu2, index_t m);

/// Flops of one iteration: 2 nnz(A) + apply cost + 10 n.
template <class T>
std::uint64_t flops_per_iteration(const CsrMatrix<T>& a, const Preconditioner<T>& m);

/// Build + iterations * flops_per_iteration.
template <class T>
std::uint64_t flop_model(const CsrMatrix<T>& a, const Preconditioner<T>& m, index_t iterations);

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct EigenEstimate {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    index_t iterations = 0;
    bool early_terminated = false; ///< Krylov space became invariant before `iters`

    double condition() const { return lambda_max / lambda_min; }
};

/// Lanczos with full reorthogonalization from a seeded random start vector.
/// The extreme Ritz values are found by bisection on the tridiagonal matrix.
EigenEstimate estimate_extreme_eigs(const LinearOperator& op, index_t n, index_t iters,
                                    std::uint64_t seed = 1);

/// Symmetric form of the preconditioned matrix: D^-1/2 A D^-1/2 for a
/// diagonal preconditioner, Z^t A Z for a factored one, A otherwise.
LinearOperator preconditioned_operator(const CsrMatrix<double>& a, const Preconditioner<double>& m);

/// Extreme eigenvalues of a symmetric tridiagonal matrix given its diagonal
/// and off-diagonal (length n-1), by Sturm-sequence bisection.
std::pair<double, double> tridiagonal_extreme_eigs(std::span<const double> alpha, std::span<const double> beta);

} // namespace fsai
