#include "fsai/bench.hpp"

#include "fsai/matrix_market.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace fsai {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

index_t parse_count(const std::string& s, const std::string& context) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || v <= 0 || v > std::numeric_limits<index_t>::max())
        throw ConfigError("bad size '" + s + "' in '" + context + "'");
    return static_cast<index_t>(v);
}

Regime parse_regime(const std::string& s, const std::string& context) {
    if (s == "equator") return Regime::equator;
    if (s == "pole") return Regime::pole;
    throw ConfigError("regime must be equator or pole in '" + context + "'");
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (const char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

} // namespace

Precision parse_precision(const std::string& text) {
    if (text == "single") return Precision::single;
    if (text == "double") return Precision::double_;
    throw ConfigError("precision must be single or double, got '" + text + "'");
}

const char* to_string(Precision p) { return p == Precision::single ? "single" : "double"; }

index_t ProblemSpec::expected_size() const noexcept {
    switch (kind) {
    case Kind::orca: return jpi * jpj;
    case Kind::limit: return n;
    default: return 0;
    }
}

ProblemSpec parse_problem(const std::string& text, bool allow_large) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("problem '" + text + "' has no kind prefix");
    const std::string kind = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);
    ProblemSpec p;
    p.id = text;
    if (kind == "mm" || kind == "grid") {
        if (rest.empty()) throw ConfigError("missing path in '" + text + "'");
        p.kind = kind == "mm" ? ProblemSpec::Kind::matrix_market : ProblemSpec::Kind::grid_file;
        p.path = rest;
        return p;
    }
    if (kind == "limit") {
        p.kind = ProblemSpec::Kind::limit;
        p.n = parse_count(rest, text);
    } else if (kind == "orca") {
        const auto parts = split(rest, ':');
        if (parts.size() < 2 || parts.size() > 3) throw ConfigError("expected orca:<jpi>x<jpj>:<regime> in '" + text + "'");
        const auto x = parts[0].find('x');
        if (x == std::string::npos) throw ConfigError("expected <jpi>x<jpj> in '" + text + "'");
        p.kind = ProblemSpec::Kind::orca;
        p.jpi = parse_count(parts[0].substr(0, x), text);
        p.jpj = parse_count(parts[0].substr(x + 1), text);
        if (p.jpi < 3 || p.jpj < 3) throw ConfigError("orca grids need at least 3x3 points in '" + text + "'");
        p.regime = parse_regime(parts[1], text);
        if (parts.size() == 3) {
            if (parts[2] == "dirichlet")
                p.closure = Closure::dirichlet;
            else if (parts[2] == "periodic")
                p.closure = Closure::periodic;
            else
                throw ConfigError("closure must be dirichlet or periodic in '" + text + "'");
        }
    } else if (kind == "orca2" || kind == "orca05" || kind == "orca025") {
        p.kind = ProblemSpec::Kind::orca;
        if (kind == "orca2") {
            p.jpi = 180;
            p.jpj = 149;
        } else if (kind == "orca05") {
            p.jpi = 751;
            p.jpj = 510;
        } else {
            p.jpi = 1442;
            p.jpj = 1021;
        }
        p.regime = parse_regime(rest, text);
    } else {
        throw ConfigError("unknown problem kind '" + kind + "'");
    }
    if (!allow_large && static_cast<long long>(p.expected_size()) > large_problem_threshold)
        throw ConfigError("problem '" + text + "' has " + std::to_string(p.expected_size()) +
                          " unknowns; pass --allow-large to run it");
    return p;
}

Problem build_problem(const ProblemSpec& spec, std::uint64_t seed, double forcing_noise) {
    Problem p;
    p.id = spec.id;
    auto random_rhs = [&] {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        p.b.resize(static_cast<std::size_t>(p.a.rows()));
        for (auto& v : p.b) v = u(rng);
    };
    switch (spec.kind) {
    case ProblemSpec::Kind::orca:
    case ProblemSpec::Kind::grid_file: {
        GridSpec g = spec.kind == ProblemSpec::Kind::orca ? orca_like_grid(spec.jpi, spec.jpj, spec.regime, spec.closure)
                                                           : read_grid_config(spec.path);
        p.a = assemble_matrix(g);
        p.b = assemble_rhs(g, smooth_random_fields(g, seed, forcing_noise));
        p.grid = g;
        break;
    }
    case ProblemSpec::Kind::matrix_market:
        p.a = read_matrix_market(spec.path);
        if (!p.a.square()) throw ConfigError("matrix in '" + spec.path + "' is not square");
        random_rhs();
        break;
    case ProblemSpec::Kind::limit:
        p.a = limit_matrix(spec.n);
        random_rhs();
        break;
    }
    return p;
}

void ExperimentConfig::validate() const {
    if (preconditioners.empty()) throw ConfigError("at least one preconditioner is required");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (!(max_iter_factor > 0.0) || !std::isfinite(max_iter_factor))
        throw ConfigError("max_iter_factor must be positive");
    if (lanczos_iters < 1) throw ConfigError("lanczos_iters must be positive");
    if (!(forcing_noise >= 0.0)) throw ConfigError("forcing noise must be non-negative");
    if (problem.kind == ProblemSpec::Kind::matrix_market || problem.kind == ProblemSpec::Kind::grid_file) {
        std::ifstream probe(problem.path);
        if (!probe) throw ConfigError("cannot read '" + problem.path + "'");
    }
}

namespace {

template <class T>
SolveReport solve_in(const Problem& p, const Preconditioner<double>& m, const SolverConfig& sc) {
    if constexpr (std::is_same_v<T, double>) {
        return pcg_solve<double>(p.a, p.b, m, {}, sc);
    } else {
        const auto a = p.a.cast<float>();
        const std::vector<float> b(p.b.begin(), p.b.end());
        return pcg_solve<float>(a, b, m.cast<float>(), {}, sc);
    }
}

} // namespace

std::vector<ReportRow> run_experiment(const ExperimentConfig& config) {
    config.validate();
    const Problem p = build_problem(config.problem, config.seed, config.forcing_noise);
    const index_t n = p.a.rows();

    std::vector<Preconditioner<double>> built;
    built.reserve(config.preconditioners.size());
    for (const auto& spec : config.preconditioners) built.push_back(make_preconditioner(p.a, spec));

    SolverConfig sc;
    sc.epsilon = config.epsilon;
    sc.max_iter = std::max<index_t>(1, static_cast<index_t>(std::ceil(config.max_iter_factor * n)));
    sc.raw_residual_update = config.raw_residual_update;

    std::vector<ReportRow> rows;
    for (const auto& m : built) {
        const SolveReport rep = config.precision == Precision::single ? solve_in<float>(p, m, sc) : solve_in<double>(p, m, sc);
        ReportRow row;
        row.problem = p.id;
        row.n = n;
        row.nnz = p.a.nnz();
        row.precond = m.label();
        row.iters = rep.iterations;
        row.converged = rep.converged;
        row.residual = rep.final_rel_residual;
        row.build_flops = m.build_flops();
        row.solve_flops = rep.flops - m.build_flops();
        row.wall_s = rep.wall_time;
        if (config.estimate_condition && n > 0) {
            const auto est = estimate_extreme_eigs(preconditioned_operator(p.a, m), n,
                                                   std::min(config.lanczos_iters, n), config.seed);
            row.cond_est = est.condition();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

ReportFormat parse_format(const std::string& text) {
    if (text == "csv") return ReportFormat::csv;
    if (text == "json") return ReportFormat::json;
    throw ConfigError("format must be csv or json, got '" + text + "'");
}

void emit_report(const std::vector<ReportRow>& rows, ReportFormat format, std::ostream& out) {
    if (rows.empty()) throw ConfigError("report has no rows");
    if (format == ReportFormat::csv) {
        out << csv_header << '\n';
        for (const auto& r : rows) {
            out << csv_field(r.problem) << ',' << r.n << ',' << r.nnz << ',' << csv_field(r.precond) << ','
                << r.iters << ',' << (r.converged ? "true" : "false") << ',' << format_g17(r.residual) << ','
                << r.build_flops << ',' << r.solve_flops << ',' << format_g17(r.wall_s) << ','
                << (r.cond_est ? format_g17(*r.cond_est) : std::string("NA")) << '\n';
        }
        return;
    }
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json o;
        o["problem"] = r.problem;
        o["n"] = r.n;
        o["nnz"] = r.nnz;
        o["precond"] = r.precond;
        o["iters"] = r.iters;
        o["converged"] = r.converged;
        o["residual"] = r.residual;
        o["build_flops"] = r.build_flops;
        o["solve_flops"] = r.solve_flops;
        o["wall_s"] = r.wall_s;
        o["cond_est"] = r.cond_est ? nlohmann::json(*r.cond_est) : nlohmann::json(nullptr);
        arr.push_back(std::move(o));
    }
    out << arr.dump(2) << '\n';
}

void emit_report(const std::vector<ReportRow>& rows, ReportFormat format, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    emit_report(rows, format, out);
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<ReportRow> parse_json_report(std::istream& in) {
    const auto arr = nlohmann::json::parse(in);
    std::vector<ReportRow> rows;
    for (const auto& o : arr) {
        ReportRow r;
        r.problem = o.at("problem").get<std::string>();
        r.n = o.at("n").get<index_t>();
        r.nnz = o.at("nnz").get<index_t>();
        r.precond = o.at("precond").get<std::string>();
        r.iters = o.at("iters").get<index_t>();
        r.converged = o.at("converged").get<bool>();
        r.residual = o.at("residual").get<double>();
        r.build_flops = o.at("build_flops").get<std::uint64_t>();
        r.solve_flops = o.at("solve_flops").get<std::uint64_t>();
        r.wall_s = o.at("wall_s").get<double>();
        if (!o.at("cond_est").is_null()) r.cond_est = o.at("cond_est").get<double>();
        rows.push_back(std::move(r));
    }
    return rows;
}

std::uint64_t memory_occupancy(index_t n_rows, std::uint64_t nnz, Precision precision) {
    const std::uint64_t scalar = precision == Precision::single ? sizeof(float) : sizeof(double);
    return nnz * (scalar + sizeof(index_t)) + (static_cast<std::uint64_t>(n_rows) + 1) * sizeof(index_t);
}

std::uint64_t memory_occupancy(const CsrMatrix<double>& a, Precision precision) {
    return memory_occupancy(a.rows(), static_cast<std::uint64_t>(a.nnz()), precision);
}

std::uint64_t working_set_bytes(const CsrMatrix<double>& a, const Preconditioner<double>& m, Precision precision) {
    const std::uint64_t scalar = precision == Precision::single ? sizeof(float) : sizeof(double);
    const auto n = static_cast<std::uint64_t>(a.rows());
    std::uint64_t bytes = memory_occupancy(a, precision) + 6 * n * scalar + n * sizeof(double);
    if (const auto* d = m.diagonal()) bytes += d->inv_diag.size() * scalar;
    if (const auto* f = m.factored())
        bytes += memory_occupancy(f->z, precision) + memory_occupancy(f->z_t, precision);
    return bytes;
}

} // namespace fsai
