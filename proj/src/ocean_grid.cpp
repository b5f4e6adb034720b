#include "fsai/ocean_grid.hpp"

#include <algorithm>

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace fsai {

namespace {
constexpr double half_pi = std::numbers::pi / 2.0;
}

double Bathymetry::at(double lambda, double phi) const {
    if (kind == Kind::constant) return depth;
    const double dl = lambda - lon0;
    const double dp = phi - lat0;
    return depth * (1.0 - height * std::exp(-(dl * dl + dp * dp) / (width * width)));
}

void GridSpec::validate() const {
    if (jpi < 3 || jpj < 3) throw DomainError("grid needs jpi >= 3 and jpj >= 3");
    if (!(d_lambda > 0.0) || !(d_phi > 0.0)) throw DomainError("grid steps must be positive");
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    if (!(radius > 0.0) || !(gravity > 0.0) || !(t_c > 0.0))
        throw DomainError("radius, gravity and t_c must be positive");
    if (!(phi0 > -half_pi) || !(phi0 + jpj * d_phi < half_pi))
        throw DomainError("latitude window must lie strictly inside (-pi/2, pi/2)");
    if (bathymetry.kind == Bathymetry::Kind::seamount &&
        (!(bathymetry.height < 1.0) || !(bathymetry.width > 0.0)))
        throw DomainError("seamount needs height < 1 and width > 0");
    for (index_t j = 0; j <= jpj; ++j)
        for (index_t i = 0; i <= jpi; ++i)
            if (!(bathymetry.at(lambda(i), phi(j)) > 0.0))
                throw DomainError("bathymetry must be positive everywhere");
}

GridSpec orca_like_grid(index_t jpi, index_t jpj, Regime regime, Closure closure) {
    GridSpec g;
    g.jpi = jpi;
    g.jpj = jpj;
    g.d_phi = orca_dphi_deg * deg;
    g.d_lambda = 2.0 * std::numbers::pi / jpi;
    g.phi0 = regime == Regime::equator ? -0.5 * (jpj - 1) * g.d_phi : half_pi - jpj * g.d_phi - pole_gap;
    g.dt = 5760.0;
    g.radius = 6.371e6;
    g.bathymetry.depth = 4000.0;
    g.closure = closure;
    g.validate();
    return g;
}

GridSpec parse_grid_config(std::istream& in) {
    GridSpec g;
    std::string line;
    std::size_t lineno = 0;
    bool have_jpi = false, have_jpj = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        std::string key = line.substr(0, eq);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        key = trim(key);
        if (key.empty()) continue;
        if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
        const std::string value = trim(line.substr(eq + 1));

        auto number = [&]() {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(value, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != value.size())
                throw ParseError("bad number '" + value + "' for " + key, lineno);
            return v;
        };
        auto count = [&]() {
            const double v = number();
            if (v != std::floor(v) || v < 0) throw ParseError(key + " must be a non-negative integer", lineno);
            return static_cast<index_t>(v);
        };

        if (key == "jpi") {
            g.jpi = count();
            have_jpi = true;
        } else if (key == "jpj") {
            g.jpj = count();
            have_jpj = true;
        } else if (key == "phi0_deg") {
            g.phi0 = number() * deg;
        } else if (key == "dphi_deg") {
            g.d_phi = number() * deg;
        } else if (key == "dlambda_deg") {
            g.d_lambda = number() * deg;
        } else if (key == "lambda0_deg") {
            g.lambda0 = number() * deg;
        } else if (key == "dt") {
            g.dt = number();
        } else if (key == "depth") {
            g.bathymetry.depth = number();
        } else if (key == "bathymetry") {
            if (value == "constant")
                g.bathymetry.kind = Bathymetry::Kind::constant;
            else if (value == "seamount")
                g.bathymetry.kind = Bathymetry::Kind::seamount;
            else
                throw ParseError("unknown bathymetry '" + value + "'", lineno);
        } else if (key == "seamount_height") {
            g.bathymetry.height = number();
        } else if (key == "seamount_width_deg") {
            g.bathymetry.width = number() * deg;
        } else if (key == "seamount_lon_deg") {
            g.bathymetry.lon0 = number() * deg;
        } else if (key == "seamount_lat_deg") {
            g.bathymetry.lat0 = number() * deg;
        } else if (key == "radius") {
            g.radius = number();
        } else if (key == "gravity") {
            g.gravity = number();
        } else if (key == "t_c") {
            g.t_c = number();
        } else if (key == "closure") {
            if (value == "dirichlet")
                g.closure = Closure::dirichlet;
            else if (value == "periodic")
                g.closure = Closure::periodic;
            else
                throw ParseError("unknown closure '" + value + "'", lineno);
        } else {
            throw ParseError("unknown key '" + key + "'", lineno);
        }
    }
    if (!have_jpi || !have_jpj) throw ConfigError("grid config must set jpi and jpj");
    g.validate();
    return g;
}

GridSpec read_grid_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return parse_grid_config(in);
}

ScaleFactors scale_factors(double phi, const GridSpec& grid) {
    if (!(std::abs(phi) < half_pi)) throw DomainError("latitude at or beyond a pole");
    return {grid.radius * std::cos(phi), grid.radius, 1.0};
}

double coefficient_ew(const GridSpec& grid, index_t i, index_t j) {
    if (grid.closure == Closure::periodic && i == grid.jpi) i = 0;
    const auto e = scale_factors(grid.phi(j), grid);
    return 2.0 * grid.dt * grid.dt * grid.bathymetry.at(grid.lambda(i), grid.phi(j)) * e.e2 / e.e1;
}

double coefficient_ns(const GridSpec& grid, index_t i, index_t j) {
    const auto e = scale_factors(grid.phi(j), grid);
    return 2.0 * grid.dt * grid.dt * grid.bathymetry.at(grid.lambda(i), grid.phi(j)) * e.e1 / e.e2;
}

CoefficientFields assemble_coefficients(const GridSpec& grid) {
    grid.validate();
    const auto n = static_cast<std::size_t>(grid.size());
    CoefficientFields f{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (index_t j = 0; j < grid.jpj; ++j) {
        for (index_t i = 0; i < grid.jpi; ++i) {
            const auto k = static_cast<std::size_t>(grid.index(i, j));
            f.c_ns[k] = coefficient_ns(grid, i, j);
            f.c_ew[k] = coefficient_ew(grid, i, j);
            f.diag[k] = coefficient_ew(grid, i + 1, j) + f.c_ew[k] + f.c_ns[k] + coefficient_ns(grid, i, j + 1);
        }
    }
    return f;
}

CsrMatrix<double> assemble_matrix(const GridSpec& grid) {
    const auto coef = assemble_coefficients(grid);
    const index_t jpi = grid.jpi;
    const index_t jpj = grid.jpj;
    const bool periodic = grid.closure == Closure::periodic;

    std::vector<index_t> rs;
    std::vector<index_t> ci;
    std::vector<double> va;
    rs.reserve(static_cast<std::size_t>(grid.size()) + 1);
    ci.reserve(5 * static_cast<std::size_t>(grid.size()));
    va.reserve(5 * static_cast<std::size_t>(grid.size()));
    rs.push_back(0);

    struct Entry {
        index_t col;
        double value;
    };
    for (index_t j = 0; j < jpj; ++j) {
        for (index_t i = 0; i < jpi; ++i) {
            const index_t k = grid.index(i, j);
            Entry row[5];
            int m = 0;
            row[m++] = {k, coef.diag[k]};
            if (j > 0) row[m++] = {k - jpi, -coef.c_ns[k]};
            if (j < jpj - 1) row[m++] = {k + jpi, -coef.c_ns[grid.index(i, j + 1)]};
            if (i > 0)
                row[m++] = {k - 1, -coef.c_ew[k]};
            else if (periodic)
                row[m++] = {grid.index(jpi - 1, j), -coef.c_ew[k]};
            if (i < jpi - 1)
                row[m++] = {k + 1, -coef.c_ew[k + 1]};
            else if (periodic)
                row[m++] = {grid.index(0, j), -coef.c_ew[grid.index(0, j)]};
            for (int e = 1; e < m; ++e)
                for (int f = e; f > 0 && row[f].col < row[f - 1].col; --f) std::swap(row[f], row[f - 1]);
            for (int e = 0; e < m; ++e) {
                ci.push_back(row[e].col);
                va.push_back(row[e].value);
            }
            rs.push_back(static_cast<index_t>(ci.size()));
        }
    }
    return CsrMatrix<double>(grid.size(), grid.size(), std::move(rs), std::move(ci), std::move(va));
}

RhsFields smooth_random_fields(const GridSpec& grid, std::uint64_t seed, double noise) {
    if (!(noise >= 0.0)) throw DomainError("noise fraction must be non-negative");
    constexpr int modes = 8;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> wave(1, 4);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> amp(0.0, 1.0);
    const auto n = static_cast<std::size_t>(grid.size());

    auto field = [&]() {
        std::vector<double> f(n, 0.0);
        for (int m = 0; m < modes; ++m) {
            const int a = wave(rng);
            const int b = wave(rng);
            const double pa = phase(rng);
            const double pb = phase(rng);
            const double c = amp(rng);
            for (index_t j = 0; j < grid.jpj; ++j)
                for (index_t i = 0; i < grid.jpi; ++i)
                    f[grid.index(i, j)] += c * std::sin(2.0 * std::numbers::pi * a * i / grid.jpi + pa) *
                                           std::sin(std::numbers::pi * b * j / grid.jpj + pb);
        }
        if (noise > 0.0) {
            double ss = 0.0;
            for (const double v : f) ss += v * v;
            const double rms = std::sqrt(ss / static_cast<double>(n));
            for (auto& v : f) v = v / rms + noise * amp(rng);
        }
        return f;
    };
    RhsFields out;
    out.m_u = field();
    out.m_v = field();
    return out;
}

std::vector<double> forcing_divergence(const GridSpec& grid, const RhsFields& f) {
    const auto n = static_cast<std::size_t>(grid.size());
    if (f.m_u.size() != n || f.m_v.size() != n) throw DimensionError("forcing fields do not match grid");
    const index_t jpi = grid.jpi;
    const index_t jpj = grid.jpj;
    std::vector<double> g(n), h(n);
    for (index_t j = 0; j < jpj; ++j) {
        const auto e = scale_factors(grid.phi(j), grid);
        for (index_t i = 0; i < jpi; ++i) {
            const auto k = grid.index(i, j);
            g[k] = e.e2 * f.m_u[k];
            h[k] = e.e1 * f.m_v[k];
        }
    }
    std::vector<double> b(n);
    for (index_t j = 0; j < jpj; ++j) {
        for (index_t i = 0; i < jpi; ++i) {
            const auto k = grid.index(i, j);
            double di = 0.0;
            if (i < jpi - 1)
                di = g[k + 1] - g[k];
            else if (grid.closure == Closure::periodic)
                di = g[grid.index(0, j)] - g[k];
            else
                di = g[k] - g[k - 1];
            const double dj = j < jpj - 1 ? h[k + jpi] - h[k] : h[k] - h[k - jpi];
            b[k] = di - dj;
        }
    }
    return b;
}

std::vector<double> assemble_rhs(const GridSpec& grid, const RhsFields& f) {
    auto b = forcing_divergence(grid, f);
    for (auto& v : b) v = -v;
    return b;
}

NormalizedRow normalized_row(const GridSpec& grid, index_t i, index_t j) {
    grid.validate();
    const bool periodic = grid.closure == Closure::periodic;
    const bool interior_i = periodic ? (i >= 0 && i < grid.jpi) : (i > 0 && i < grid.jpi - 1);
    if (!interior_i || j <= 0 || j >= grid.jpj - 1)
        throw DomainError("normalized_row needs an interior point");
    const double ew_w = coefficient_ew(grid, i, j);
    const double ew_e = coefficient_ew(grid, i + 1, j);
    const double ns_s = coefficient_ns(grid, i, j);
    const double ns_n = coefficient_ns(grid, i, j + 1);
    const double d = ew_w + ew_e + ns_s + ns_n;
    return {ew_e / d, ew_w / d, ns_s / d, ns_n / d};
}

CsrMatrix<double> limit_matrix(index_t n) {
    if (n < 1) throw DomainError("limit_matrix needs n >= 1");
    std::vector<CooEntry<double>> e;
    e.reserve(3 * static_cast<std::size_t>(n));
    for (index_t k = 0; k < n; ++k) {
        if (k > 0) e.push_back({k, k - 1, -0.5});
        e.push_back({k, k, 1.0});
        if (k + 1 < n) e.push_back({k, k + 1, -0.5});
    }
    return csr_from_coo(std::move(e), n, n);
}

std::vector<double> limit_eigenvalues(index_t n) {
    if (n < 1) throw DomainError("limit_eigenvalues needs n >= 1");
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (index_t k = 1; k <= n; ++k) ev[k - 1] = 1.0 + std::cos(k * std::numbers::pi / (n + 1));
    return ev;
}

double limit_condition_number(index_t n) {
    const double c = std::cos(std::numbers::pi / (n + 1));
    return (1.0 + c) / (1.0 - c);
}

} // namespace fsai
