#include "fsai/surface.hpp"

#include <cstdio>

namespace fsai {

SurfaceState SurfaceState::at_rest(std::vector<double> eta0) {
    SurfaceState s;
    s.eta_prev = eta0;
    s.eta_curr = std::move(eta0);
    s.d_prev.assign(s.eta_curr.size(), 0.0);
    s.d_curr.assign(s.eta_curr.size(), 0.0);
    return s;
}

namespace {

CsrMatrix<double> zero_flux(const CsrMatrix<double>& a) {
    std::vector<double> vals(a.values().begin(), a.values().end());
    for (index_t i = 0; i < a.rows(); ++i) {
        const auto cols = a.row_cols(i);
        double off = 0.0;
        std::ptrdiff_t diag = -1;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const auto pos = a.row_start()[i] + static_cast<std::ptrdiff_t>(k);
            if (cols[k] == i)
                diag = pos;
            else
                off += vals[pos];
        }
        if (diag >= 0) vals[diag] = -off;
    }
    return {a.rows(), a.cols(), std::vector<index_t>(a.row_start().begin(), a.row_start().end()),
            std::vector<index_t>(a.col_index().begin(), a.col_index().end()), std::move(vals)};
}

} // namespace

SurfaceSolver::SurfaceSolver(const GridSpec& grid, Options options) : options_(std::move(options)) {
    grid.validate();
    const CsrMatrix<double> a = assemble_matrix(grid);
    forcing_ = zero_flux(a);
    sigma_.resize(static_cast<std::size_t>(grid.size()));
    for (index_t j = 0; j < grid.jpj; ++j) {
        const auto sf = scale_factors(grid.phi(j), grid);
        const double s = grid.dt * (sf.e1 * grid.d_lambda) * (sf.e2 * grid.d_phi) / (grid.gravity * filter_time(grid));
        for (index_t i = 0; i < grid.jpi; ++i) sigma_[grid.index(i, j)] = s;
    }
    std::vector<double> vals(a.values().begin(), a.values().end());
    for (index_t i = 0; i < a.rows(); ++i) {
        const auto cols = a.row_cols(i);
        for (std::size_t k = 0; k < cols.size(); ++k)
            if (cols[k] == i) vals[a.row_start()[i] + static_cast<std::ptrdiff_t>(k)] += sigma_[i];
    }
    system_ = CsrMatrix<double>(a.rows(), a.cols(), std::vector<index_t>(a.row_start().begin(), a.row_start().end()),
                                std::vector<index_t>(a.col_index().begin(), a.col_index().end()), std::move(vals));
    precond_ = make_preconditioner(system_, options_.precond);
}

std::vector<double> SurfaceSolver::solve(std::span<const double> rhs, std::span<const double> x0) {
    const auto rep = pcg_solve<double>(system_, rhs, precond_, x0, options_.config);
    last_iterations_ = rep.iterations;
    if (!rep.converged) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "free-surface solve stalled at relative residual %.3e after %d iterations",
                      rep.final_rel_residual, static_cast<int>(rep.iterations));
        throw ConvergenceError(buf, 0);
    }
    return rep.solution;
}

SurfaceState step_surface(const SurfaceState& state, const GridSpec& grid, SurfaceSolver& solver) {
    const auto n = static_cast<std::size_t>(solver.size());
    if (static_cast<std::size_t>(grid.size()) != n) throw DimensionError("grid does not match the solver");
    for (const auto* v : {&state.eta_prev, &state.eta_curr, &state.d_prev, &state.d_curr})
        detail::check_len(v->size(), n, "surface state");

    SurfaceState next;
    next.step = state.step + 1;
    next.eta_prev = state.eta_curr;
    next.eta_curr.resize(n);
    for (std::size_t k = 0; k < n; ++k) next.eta_curr[k] = state.eta_prev[k] - 2.0 * grid.dt * state.d_curr[k];

    // G eta in flux form, sum_j g_ij (eta_j - eta_i), so a constant eta gives exactly zero.
    const auto& g_op = solver.forcing_operator();
    std::vector<double> rhs(n, 0.0);
    for (index_t i = 0; i < g_op.rows(); ++i) {
        const auto cols = g_op.row_cols(i);
        const auto vals = g_op.row_values(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k)
            if (cols[k] != i) acc += vals[k] * (state.eta_curr[cols[k]] - state.eta_curr[i]);
        rhs[i] = acc;
    }
    const auto& sigma = solver.sigma();
    const double tc = filter_time(grid);
    for (std::size_t k = 0; k < n; ++k) rhs[k] = rhs[k] / tc + sigma[k] * state.d_prev[k];

    std::vector<double> x0(n, 0.0);
    switch (solver.options().warm_start) {
    case WarmStart::doubled:
        for (std::size_t k = 0; k < n; ++k) x0[k] = 2.0 * state.d_curr[k];
        break;
    case WarmStart::extrapolate:
        for (std::size_t k = 0; k < n; ++k) x0[k] = 2.0 * state.d_curr[k] - state.d_prev[k];
        break;
    case WarmStart::zero: break;
    }
    try {
        next.d_curr = solver.solve(rhs, x0);
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(std::string(e.what()).substr(0, std::string(e.what()).rfind(" (step")),
                               static_cast<std::size_t>(next.step));
    }
    next.d_prev = state.d_curr;
    return next;
}

} // namespace fsai
