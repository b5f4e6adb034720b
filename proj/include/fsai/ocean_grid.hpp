#pragma once

#include "fsai/sparse.hpp"

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <string>
#include <vector>

namespace fsai {

/// Analytic bathymetry H(lambda, phi) in meters.
struct Bathymetry {
    enum class Kind { constant, seamount };

    Kind kind = Kind::constant;
    double depth = 4000.0;

    // Gaussian seamount: H = depth * (1 - height * exp(-r^2 / width^2)),
    // r the angular distance to (lon0, lat0). height must stay below 1.
    double height = 0.5;
    double width = 0.2;
    double lon0 = 0.0;
    double lat0 = 0.0;

    double at(double lambda, double phi) const;
};

/// How the five-point stencil is closed at the west/east edges. North and
/// south edges are always homogeneous Dirichlet.
enum class Closure {
    dirichlet, ///< neighbours outside the domain are dropped
    periodic,  ///< longitude wraps: (jpi-1, j) couples to (0, j)
};

/// Geographical grid. Longitude index i is the fast one (west to east),
/// latitude index j the slow one (south to north): unknown k = j * jpi + i.
struct GridSpec {
    index_t jpi = 3;
    index_t jpj = 3;
    double lambda0 = 0.0; ///< radians
    double phi0 = 0.0;    ///< radians
    double d_lambda = 0.1;
    double d_phi = 0.1;
    double dt = 1.0;      ///< seconds
    double radius = 1.0;  ///< meters
    double gravity = 9.81;
    double t_c = 2.0;     ///< free-surface filter time in units of dt
    Bathymetry bathymetry{};
    Closure closure = Closure::dirichlet;

    /// Throws DomainError when an invariant is violated. The latitude of the
    /// virtual row jpj (used by the north-face coefficient) must also stay
    /// strictly below pi/2.
    void validate() const;

    index_t size() const noexcept { return jpi * jpj; }
    index_t index(index_t i, index_t j) const noexcept { return j * jpi + i; }
    double lambda(index_t i) const noexcept { return lambda0 + i * d_lambda; }
    double phi(index_t j) const noexcept { return phi0 + j * d_phi; }
};

enum class Regime { equator, pole };

/// Benchmark-style ORCA-like grid: d_phi = 0.1 deg, global longitude
/// (d_lambda = 360/jpi deg), periodic closure. The equator regime centres the
/// latitude window on 0; the pole regime puts its virtual north row at
/// pi/2 - 1e-4.
GridSpec orca_like_grid(index_t jpi, index_t jpj, Regime regime, Closure closure = Closure::periodic);

inline constexpr double pole_gap = 1e-4;
inline constexpr double orca_dphi_deg = 0.1;

/// Flat key=value grid description; `#` begins a comment. Recognized keys:
/// jpi, jpj, phi0_deg, dphi_deg, dlambda_deg, lambda0_deg, dt, depth,
/// bathymetry (constant|seamount), seamount_height, seamount_width_deg,
/// seamount_lon_deg, seamount_lat_deg, radius, gravity, t_c,
/// closure (dirichlet|periodic).
GridSpec parse_grid_config(std::istream& in);
GridSpec read_grid_config(const std::string& path);

struct ScaleFactors {
    double e1;
    double e2;
    double e3;
};

ScaleFactors scale_factors(double phi, const GridSpec& grid);

/// Face coefficients. `c_ew(i, j)` couples (i-1, j) and (i, j); `c_ns(i, j)`
/// couples (i, j-1) and (i, j). Both accept the virtual indices i = jpi and
/// j = jpj; with periodic closure i = jpi wraps to 0.
double coefficient_ew(const GridSpec& grid, index_t i, index_t j);
double coefficient_ns(const GridSpec& grid, index_t i, index_t j);

struct CoefficientFields {
    std::vector<double> c_ns; ///< jpi * jpj, grid ordering
    std::vector<double> c_ew;
    std::vector<double> diag;
};

CoefficientFields assemble_coefficients(const GridSpec& grid);

/// SPD five-point matrix (negated elliptic operator, natural ordering).
CsrMatrix<double> assemble_matrix(const GridSpec& grid);

/// Synthetic barotropic momentum components used to form the right-hand side.
struct RhsFields {
    std::vector<double> m_u;
    std::vector<double> m_v;
};

/// Sum of a few seeded low-order modes, periodic in longitude. With
/// noise > 0 each field is scaled to unit RMS and seeded white noise of RMS
/// `noise` is added, giving the forcing a grid-scale component.
RhsFields smooth_random_fields(const GridSpec& grid, std::uint64_t seed, double noise = 0.0);

/// White-noise fraction used by the benchmark problems.
inline constexpr double default_forcing_noise = 0.1;

/// b = delta_i(e2 M_u) - delta_j(e1 M_v) with forward differences, backward at
/// the east/north edge (east wraps with periodic closure).
std::vector<double> forcing_divergence(const GridSpec& grid, const RhsFields& f);

/// Right-hand side of the SPD system: the negation of forcing_divergence.
std::vector<double> assemble_rhs(const GridSpec& grid, const RhsFields& f);

struct NormalizedRow {
    double alpha_e;
    double alpha_w;
    double beta_s;
    double beta_n;
};

/// Off-diagonal magnitudes of row (i, j) after diagonal scaling. Only rows
/// with all four neighbours inside the domain are accepted.
NormalizedRow normalized_row(const GridSpec& grid, index_t i, index_t j);

/// tridiag(-1/2, 1, -1/2) of order n: the pole limit of the diagonally scaled system.
CsrMatrix<double> limit_matrix(index_t n);

/// 1 + cos(k pi / (n + 1)), k = 1..n, i.e. sorted descending.
std::vector<double> limit_eigenvalues(index_t n);

/// lambda_max / lambda_min of limit_matrix(n) from the closed form.
double limit_condition_number(index_t n);

inline constexpr double deg = std::numbers::pi / 180.0;

} // namespace fsai
