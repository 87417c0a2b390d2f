#pragma once

#include "sem/mesh.hpp"
#include "sem/solver.hpp"

#include <array>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace sem
{

using Point = std::array<double, 3>;

/// u = cos(k(x1-3x2+2x3)) sin(k(1+x1)) sin(k(1-x2)) sin(k(2x1+x2)) sin(k(3x1-2x2+2x3))
/// on (0, 2 pi)^3 with f = lambda u - Laplace(u).
struct ManufacturedProblem
{
    double k      = 5.0;
    double lambda = 0.0;
    Box    domain{{0.0, 0.0, 0.0}, {2.0 * std::numbers::pi, 2.0 * std::numbers::pi, 2.0 * std::numbers::pi}};

    [[nodiscard]] double solution(const Point& x) const;
    [[nodiscard]] Point  gradient(const Point& x) const;
    [[nodiscard]] double laplacian(const Point& x) const;
    [[nodiscard]] double rhs(const Point& x) const { return lambda * solution(x) - laplacian(x); }

    /// Dirichlet data u on all six sides.
    [[nodiscard]] HelmholtzProblem problem() const;
};

double evaluate_solution(const ManufacturedProblem& prob, const Point& x);
double evaluate_rhs(const ManufacturedProblem& prob, const Point& x);

/// max over all nodes of |u_h - u_ex|
double max_nodal_error(const ManufacturedProblem& prob, const SolveResult& res);

enum class ExperimentKind
{
    operator_benchmark,
    solver_benchmark,
    element_scaling,
    solve,
};

std::string    to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& s);

struct ExperimentSpec
{
    ExperimentKind                  kind = ExperimentKind::solve;
    std::vector<int>                degrees{8};
    std::array<int, 3>              counts{8, 8, 8};
    std::vector<std::array<int, 3>> scaling_counts; // element_scaling only
    std::vector<double>             alphas{1.0};
    Box                             domain = ManufacturedProblem{}.domain;
    double                          lambda = 0.0;
    double                          k      = 5.0;
    std::vector<OperatorVariant>    variants{OperatorVariant::mmc, OperatorVariant::tpc, OperatorVariant::tpt};
    std::vector<SolverKind>         solvers{SolverKind::uc, SolverKind::dc, SolverKind::bc, SolverKind::bt};
    int                             repetitions    = 1; // kept runs
    int                             warmup         = 0; // discarded runs before the kept ones
    double                          tolerance      = 1e-12;
    std::size_t                     max_iterations = 100000;
    double                          mmc_mem_cap    = 4.0e9;
    bool                            parallel       = false;
    std::string                     output;

    void validate() const;
};

/// Desk-scale defaults per experiment; `paper_scale` restores the full sweeps.
ExperimentSpec default_spec(ExperimentKind kind, bool paper_scale = false);

/// Sets one field from its flag name (without dashes) and textual value, as
/// used by both spec files and the command line. Lists are comma separated.
void apply_spec_entry(ExperimentSpec& spec, const std::string& key, const std::string& value);

/// Flat `key = value` file, `#` starts a comment. Keys mirror the CLI flags.
void apply_spec_file(ExperimentSpec& spec, const std::string& path);

/// Parses "A:B" into A..B inclusive, or "A,B,C" into a list.
std::vector<int>   parse_degrees(const std::string& s);
/// Parses "N1xN2xN3" or a single "N".
std::array<int, 3> parse_counts(const std::string& s);

struct ResultRow
{
    std::string   experiment;
    int           p          = 0;
    std::size_t   n_elements = 0;
    double        alpha      = 1.0;
    double        lambda     = 0.0;
    std::string   variant;
    std::string   status; // ok | skipped | not_converged | fit
    std::size_t   iterations      = 0;
    double        setup_seconds   = 0.0;
    double        run_seconds     = 0.0;
    std::uint64_t mults_primary   = 0;
    std::uint64_t mults_condensed = 0;
    std::uint64_t mults_total     = 0;
    double        max_error       = 0.0;
    std::string   note;

    bool operator==(const ResultRow&) const = default;
};

/// Column order of the CSV output.
const std::vector<std::string>& csv_columns();

void                   emit_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> read_csv(const std::string& path);

/// Two-column files `<dir>/<experiment>_<series>.dat`; returns written paths.
std::vector<std::string> emit_plot_data(const std::vector<ResultRow>& rows, const std::string& dir);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

std::vector<ResultRow> run_operator_benchmark(const ExperimentSpec& spec);
std::vector<ResultRow> run_solver_benchmark(const ExperimentSpec& spec);
/// Appends one `fit` row per solver with the fitted growth exponents in `note`.
std::vector<ResultRow> run_element_scaling(const ExperimentSpec& spec);
/// Single manufactured-solution solve per (alpha, p, solver) listed in `spec`.
std::vector<ResultRow> run_single_solve(const ExperimentSpec& spec);

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

} // namespace sem
