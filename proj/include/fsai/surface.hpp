#pragma once

#include "fsai/ocean_grid.hpp"
#include "fsai/pcg.hpp"
#include "fsai/precond.hpp"

#include <string>
#include <vector>

namespace fsai {

/// Free-surface state at steps n-1 and n. D is the centred time derivative
/// of the sea-surface height eta.
struct SurfaceState {
    std::vector<double> eta_prev;
    std::vector<double> eta_curr;
    std::vector<double> d_prev;
    std::vector<double> d_curr;
    index_t step = 0;

    /// eta at both levels set to `eta0`, D = 0.
    static SurfaceState at_rest(std::vector<double> eta0);
};

enum class WarmStart {
    doubled,     ///< x0 = 2 D^n
    extrapolate, ///< x0 = 2 D^n - D^(n-1)
    zero,
};

/// Everything the stepper needs to solve for D^(n+1). The system matrix
/// (A + S) is fixed for a grid, so it and its preconditioner are built once.
///
/// With A the five-point matrix, the implicit step is
///   (A + S) D^(n+1) = S D^(n-1) + (1/T_c) G eta^n
/// where S = diag(dt * area / (g T_c)) with the cell area (e1 d_lambda)(e2 d_phi),
/// and G is the zero-flux form of A (diagonal replaced by minus the off-diagonal
/// row sum), so a constant eta produces no forcing. T_c = t_c * dt; per Fourier
/// mode the leapfrog pair is stable for every wavenumber iff t_c >= 2.
/// Filter time T_c in seconds: the grid's dimensionless t_c times dt.
inline double filter_time(const GridSpec& grid) noexcept { return grid.t_c * grid.dt; }

class SurfaceSolver {
public:
    struct Options {
        PrecondSpec precond{};
        SolverConfig config{};
        WarmStart warm_start = WarmStart::doubled;
    };

    explicit SurfaceSolver(const GridSpec& grid) : SurfaceSolver(grid, Options{}) {}
    SurfaceSolver(const GridSpec& grid, Options options);

    const CsrMatrix<double>& system() const noexcept { return system_; }
    const CsrMatrix<double>& forcing_operator() const noexcept { return forcing_; }
    const std::vector<double>& sigma() const noexcept { return sigma_; }
    const Preconditioner<double>& preconditioner() const noexcept { return precond_; }
    const Options& options() const noexcept { return options_; }
    index_t size() const noexcept { return system_.rows(); }
    /// Iterations of the most recent solve.
    index_t last_iterations() const noexcept { return last_iterations_; }

    std::vector<double> solve(std::span<const double> rhs, std::span<const double> x0);

private:
    Options options_;
    CsrMatrix<double> system_;
    CsrMatrix<double> forcing_;
    std::vector<double> sigma_;
    Preconditioner<double> precond_;
    index_t last_iterations_ = 0;
};

/// One leapfrog step: eta^(n+1) = eta^(n-1) - 2 dt D^n, then D^(n+1) from the
/// implicit system. A solve that misses its tolerance raises ConvergenceError
/// carrying the index of the step being computed.
SurfaceState step_surface(const SurfaceState& state, const GridSpec& grid, SurfaceSolver& solver);

} // namespace fsai
