#pragma once

#include "fsai/ocean_grid.hpp"
#include "fsai/pcg.hpp"
#include "fsai/precond.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fsai {

enum class Precision { single, double_ };

Precision parse_precision(const std::string& text);
const char* to_string(Precision p);

/// Problem source. Accepted text forms:
///   orca:<jpi>x<jpj>:<equator|pole>[:<dirichlet|periodic>]
///   orca2:<regime>, orca05:<regime>, orca025:<regime>   (grid sizes of the
///       three global resolutions; the last two need allow_large)
///   mm:<path>        Matrix Market file
///   limit:<n>        tridiag(-1/2, 1, -1/2)
///   grid:<path>      key=value grid description
struct ProblemSpec {
    enum class Kind { orca, matrix_market, limit, grid_file };

    Kind kind = Kind::limit;
    index_t jpi = 0;
    index_t jpj = 0;
    Regime regime = Regime::equator;
    Closure closure = Closure::periodic;
    std::string path;
    index_t n = 0;
    std::string id; ///< the text it was parsed from

    /// Unknown count, or 0 when it depends on a file.
    index_t expected_size() const noexcept;
};

inline constexpr index_t large_problem_threshold = 100000;

ProblemSpec parse_problem(const std::string& text, bool allow_large = false);

struct Problem {
    std::string id;
    CsrMatrix<double> a;
    std::vector<double> b;
    std::optional<GridSpec> grid;
};

/// Assembles or loads the matrix and builds a seeded right-hand side: the
/// synthetic forcing for grid problems (smooth modes plus `forcing_noise`
/// white noise), uniform [-1, 1] entries otherwise.
Problem build_problem(const ProblemSpec& spec, std::uint64_t seed, double forcing_noise = default_forcing_noise);

struct ExperimentConfig {
    ProblemSpec problem;
    std::vector<PrecondSpec> preconditioners;
    double epsilon = 1e-6;
    double max_iter_factor = 1.0; ///< max_iter = ceil(factor * n)
    Precision precision = Precision::double_;
    std::uint64_t seed = 1;
    double forcing_noise = default_forcing_noise;
    bool raw_residual_update = false;
    bool estimate_condition = false; ///< Lanczos on the preconditioned operator
    index_t lanczos_iters = 200;

    /// Throws ConfigError.
    void validate() const;
};

struct ReportRow {
    std::string problem;
    index_t n = 0;
    index_t nnz = 0;
    std::string precond;
    index_t iters = 0;
    bool converged = false;
    double residual = 0.0;
    std::uint64_t build_flops = 0;
    std::uint64_t solve_flops = 0;
    double wall_s = 0.0;
    std::optional<double> cond_est;
};

/// One row per preconditioner, in the order given. The problem and every
/// preconditioner are built before the first solve, so configuration errors
/// surface early.
std::vector<ReportRow> run_experiment(const ExperimentConfig& config);

enum class ReportFormat { csv, json };

ReportFormat parse_format(const std::string& text);

inline constexpr const char* csv_header =
    "problem,n,nnz,precond,iters,converged,residual,build_flops,solve_flops,wall_s,cond_est";

void emit_report(const std::vector<ReportRow>& rows, ReportFormat format, std::ostream& out);
void emit_report(const std::vector<ReportRow>& rows, ReportFormat format, const std::string& path);

/// Parses what emit_report wrote in JSON form.
std::vector<ReportRow> parse_json_report(std::istream& in);

/// Raw CSR bytes: nnz (scalar + 4) + (rows + 1) 4.
std::uint64_t memory_occupancy(index_t n_rows, std::uint64_t nnz, Precision precision);
std::uint64_t memory_occupancy(const CsrMatrix<double>& a, Precision precision);

/// CSR of A, the preconditioner's stored data and the six PCG work vectors
/// (r, s, d, q, workspace, b) in the working precision plus the double iterate.
std::uint64_t working_set_bytes(const CsrMatrix<double>& a, const Preconditioner<double>& m, Precision precision);

} // namespace fsai
