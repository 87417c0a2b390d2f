#include "sem/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace sem
{

namespace
{

struct Factor
{
    Point  a;
    double c;
    bool   cosine;
};

// cos(k(x1-3x2+2x3)) sin(k(1+x1)) sin(k(1-x2)) sin(k(2x1+x2)) sin(k(3x1-2x2+2x3))
constexpr std::array<Factor, 5> kFactors{{
    {{1.0, -3.0, 2.0}, 0.0, true},
    {{1.0, 0.0, 0.0}, 1.0, false},
    {{0.0, -1.0, 0.0}, 1.0, false},
    {{2.0, 1.0, 0.0}, 0.0, false},
    {{3.0, -2.0, 2.0}, 0.0, false},
}};

/// Values and first derivatives (with respect to the argument) of the factors.
void factor_values(double k, const Point& x, std::array<double, 5>& v, std::array<double, 5>& dv)
{
    for (std::size_t m = 0; m < 5; ++m)
    {
        const auto&  f = kFactors[m];
        const double t = k * (f.c + f.a[0] * x[0] + f.a[1] * x[1] + f.a[2] * x[2]);
        if (f.cosine)
        {
            v[m]  = std::cos(t);
            dv[m] = -std::sin(t);
        }
        else
        {
            v[m]  = std::sin(t);
            dv[m] = std::cos(t);
        }
    }
}

double product_except(const std::array<double, 5>& v, std::size_t i, std::size_t j)
{
    double s = 1.0;
    for (std::size_t m = 0; m < 5; ++m)
        if (m != i && m != j)
            s *= v[m];
    return s;
}

double dot3(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream        ss(s);
    std::string              item;
    while (std::getline(ss, item, sep))
    {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& s)
{
    try
    {
        std::size_t  pos = 0;
        const double v   = std::stod(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument("trailing characters");
        return v;
    }
    catch (const std::exception&)
    {
        throw std::invalid_argument("invalid number '" + s + "' for '" + key + "'");
    }
}

long parse_int(const std::string& key, const std::string& s)
{
    try
    {
        std::size_t pos = 0;
        const long  v   = std::stol(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument("trailing characters");
        return v;
    }
    catch (const std::exception&)
    {
        throw std::invalid_argument("invalid integer '" + s + "' for '" + key + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& s)
{
    if (s == "1" || s == "true" || s == "yes" || s == "on")
        return true;
    if (s == "0" || s == "false" || s == "no" || s == "off")
        return false;
    throw std::invalid_argument("invalid boolean '" + s + "' for '" + key + "'");
}

std::string format_double(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> parse_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string              cur;
    bool                     quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i)
    {
        const char c = line[i];
        if (quoted)
        {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"')
            {
                cur += '"';
                ++i;
            }
            else if (c == '"')
                quoted = false;
            else
                cur += c;
        }
        else if (c == '"')
            quoted = true;
        else if (c == ',')
        {
            fields.push_back(cur);
            cur.clear();
        }
        else
            cur += c;
    }
    fields.push_back(cur);
    return fields;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string count_label(const std::array<int, 3>& c)
{
    return std::to_string(c[0]) + "x" + std::to_string(c[1]) + "x" + std::to_string(c[2]);
}

std::string alpha_label(double a)
{
    std::ostringstream os;
    os << a;
    return os.str();
}

ResultRow solve_row(const ExperimentSpec& spec, const std::string& experiment, const std::array<int, 3>& counts,
                    double alpha, int p, SolverKind solver)
{
    ManufacturedProblem prob;
    prob.k      = spec.k;
    prob.lambda = spec.lambda;
    prob.domain = spec.domain;
    const auto mesh = build_mesh(counts, spec.domain, alpha);

    SolverConfig cfg;
    cfg.kind           = solver;
    cfg.tolerance      = spec.tolerance;
    cfg.max_iterations = spec.max_iterations;
    cfg.parallel       = spec.parallel;
    cfg.mmc_mem_cap    = spec.mmc_mem_cap;
    if (spec.variants.size() == 1)
        cfg.operator_variant = spec.variants.front();

    ResultRow row;
    row.experiment = experiment;
    row.p          = p;
    row.n_elements = mesh.n_elements();
    row.alpha      = alpha;
    row.lambda     = spec.lambda;
    row.variant    = to_string(solver);

    double      setup = 0.0, total = 0.0;
    SolveResult res;
    for (int r = 0; r < spec.warmup + spec.repetitions; ++r)
    {
        res = solve_helmholtz(prob.problem(), mesh, p, cfg);
        if (r >= spec.warmup)
        {
            setup += res.report.setup_seconds;
            total += res.report.total_seconds;
        }
    }
    const auto& rep     = res.report;
    row.iterations      = rep.iterations;
    row.setup_seconds   = setup / spec.repetitions;
    row.run_seconds     = total / spec.repetitions;
    row.mults_primary   = rep.counters.operator_apply.primary.count;
    row.mults_condensed = rep.counters.operator_apply.condensed.count;
    row.mults_total     = row.mults_primary + row.mults_condensed + rep.counters.preconditioner.count +
                      rep.counters.vector_ops.count;
    row.max_error = max_nodal_error(prob, res);
    row.status    = rep.converged ? "ok" : "not_converged";
    std::ostringstream note;
    note << "mesh=" << count_label(counts) << " reduction=" << std::setprecision(3)
         << (rep.initial_residual > 0 ? rep.final_true_residual / rep.initial_residual : 0.0);
    if (rep.breakdown)
        note << " breakdown";
    row.note = note.str();
    return row;
}

} // namespace

double ManufacturedProblem::solution(const Point& x) const
{
    std::array<double, 5> v{}, dv{};
    factor_values(k, x, v, dv);
    return product_except(v, 5, 5);
}

Point ManufacturedProblem::gradient(const Point& x) const
{
    std::array<double, 5> v{}, dv{};
    factor_values(k, x, v, dv);
    Point g{0.0, 0.0, 0.0};
    for (std::size_t m = 0; m < 5; ++m)
    {
        const double s = k * dv[m] * product_except(v, m, m);
        for (std::size_t i = 0; i < 3; ++i)
            g[i] += s * kFactors[m].a[i];
    }
    return g;
}

double ManufacturedProblem::laplacian(const Point& x) const
{
    std::array<double, 5> v{}, dv{};
    factor_values(k, x, v, dv);
    double s = 0.0;
    for (std::size_t m = 0; m < 5; ++m)
    {
        // f'' = -f for both sine and cosine
        s -= v[m] * dot3(kFactors[m].a, kFactors[m].a) * product_except(v, m, m);
        for (std::size_t n = 0; n < 5; ++n)
            if (n != m)
                s += dv[m] * dv[n] * dot3(kFactors[m].a, kFactors[n].a) * product_except(v, m, n);
    }
    return k * k * s;
}

HelmholtzProblem ManufacturedProblem::problem() const
{
    HelmholtzProblem hp;
    hp.lambda    = lambda;
    hp.rhs       = [*this](const Point& x) { return rhs(x); };
    hp.dirichlet = [*this](const Point& x) { return solution(x); };
    return hp;
}

double evaluate_solution(const ManufacturedProblem& prob, const Point& x) { return prob.solution(x); }
double evaluate_rhs(const ManufacturedProblem& prob, const Point& x) { return prob.rhs(x); }

double max_nodal_error(const ManufacturedProblem& prob, const SolveResult& res)
{
    double err = 0.0;
    for (std::size_t i = 0; i < res.u.size(); ++i)
        err = std::max(err, std::abs(res.u[i] - prob.solution(res.coordinates[i])));
    return err;
}

std::string to_string(ExperimentKind k)
{
    switch (k)
    {
    case ExperimentKind::operator_benchmark: return "operator";
    case ExperimentKind::solver_benchmark: return "solver";
    case ExperimentKind::element_scaling: return "scaling";
    case ExperimentKind::solve: return "solve";
    }
    return "?";
}

ExperimentKind parse_experiment_kind(const std::string& s)
{
    if (s == "operator" || s == "bench-operator")
        return ExperimentKind::operator_benchmark;
    if (s == "solver" || s == "bench-solver")
        return ExperimentKind::solver_benchmark;
    if (s == "scaling" || s == "bench-scaling")
        return ExperimentKind::element_scaling;
    if (s == "solve")
        return ExperimentKind::solve;
    throw std::invalid_argument("unknown experiment '" + s + "'");
}

void ExperimentSpec::validate() const
{
    if (repetitions < 1)
        throw std::invalid_argument("repetitions must be >= 1");
    if (warmup < 0)
        throw std::invalid_argument("warmup must be >= 0");
    if (degrees.empty())
        throw std::invalid_argument("no polynomial degree given");
    for (int p : degrees)
        if (p < 2)
            throw std::invalid_argument("polynomial degrees must be >= 2, got " + std::to_string(p));
    for (int c : counts)
        if (c < 1)
            throw std::invalid_argument("element counts must be >= 1");
    for (const auto& sc : scaling_counts)
        for (int c : sc)
            if (c < 1)
                throw std::invalid_argument("element counts must be >= 1");
    for (double a : alphas)
        if (!(a > 0.0))
            throw std::invalid_argument("expansion factors must be positive");
    if (!(lambda >= 0.0))
        throw std::invalid_argument("lambda must be >= 0");
    if (!(tolerance > 0.0 && tolerance < 1.0))
        throw std::invalid_argument("tolerance must lie in (0, 1)");
}

ExperimentSpec default_spec(ExperimentKind kind, bool paper_scale)
{
    ExperimentSpec s;
    s.kind = kind;
    switch (kind)
    {
    case ExperimentKind::operator_benchmark:
        s.counts      = paper_scale ? std::array<int, 3>{8, 8, 8} : std::array<int, 3>{4, 4, 4};
        s.degrees     = parse_degrees(paper_scale ? "2:32" : "2:16");
        s.lambda      = std::numbers::pi;
        s.repetitions = paper_scale ? 100 : 10;
        s.warmup      = 1;
        break;
    case ExperimentKind::solver_benchmark:
        s.counts      = {8, 8, 8};
        s.degrees     = paper_scale ? parse_degrees("2,4,6,8,10,12,14,16,20,24,28,32") : parse_degrees("2,4,6,8,10,12,14,16");
        s.alphas      = {1.0, 1.5, 2.0};
        s.repetitions = paper_scale ? 10 : 1;
        s.warmup      = paper_scale ? 1 : 0;
        break;
    case ExperimentKind::element_scaling:
        s.degrees = {16};
        for (int c : paper_scale ? std::vector<int>{2, 4, 6, 8, 10, 12, 14, 16} : std::vector<int>{2, 4, 8})
            s.scaling_counts.push_back({c, c, c});
        s.solvers     = paper_scale ? std::vector<SolverKind>{SolverKind::uc, SolverKind::dc, SolverKind::bc, SolverKind::bt}
                                    : std::vector<SolverKind>{SolverKind::bc, SolverKind::bt};
        s.repetitions = paper_scale ? 10 : 1;
        s.warmup      = paper_scale ? 1 : 0;
        break;
    case ExperimentKind::solve:
        s.counts  = {8, 8, 8};
        s.degrees = {8};
        s.solvers = {SolverKind::bt};
        break;
    }
    return s;
}

std::vector<int> parse_degrees(const std::string& s)
{
    std::vector<int> out;
    const auto       colon = s.find(':');
    if (colon != std::string::npos)
    {
        const auto a = static_cast<int>(parse_int("p-range", trim(s.substr(0, colon))));
        const auto b = static_cast<int>(parse_int("p-range", trim(s.substr(colon + 1))));
        if (b < a)
            throw std::invalid_argument("empty degree range '" + s + "'");
        for (int p = a; p <= b; ++p)
            out.push_back(p);
        return out;
    }
    for (const auto& item : split(s, ','))
        out.push_back(static_cast<int>(parse_int("p", item)));
    if (out.empty())
        throw std::invalid_argument("no degree in '" + s + "'");
    return out;
}

std::array<int, 3> parse_counts(const std::string& s)
{
    const auto parts = split(s, 'x');
    if (parts.size() == 1)
    {
        const auto n = static_cast<int>(parse_int("ne", parts[0]));
        return {n, n, n};
    }
    if (parts.size() != 3)
        throw std::invalid_argument("element counts must look like N1xN2xN3, got '" + s + "'");
    return {static_cast<int>(parse_int("ne", parts[0])), static_cast<int>(parse_int("ne", parts[1])),
            static_cast<int>(parse_int("ne", parts[2]))};
}

void apply_spec_entry(ExperimentSpec& spec, const std::string& key, const std::string& value)
{
    const std::string v = trim(value);
    if (key == "experiment")
        spec.kind = parse_experiment_kind(v);
    else if (key == "p" || key == "p-range")
        spec.degrees = parse_degrees(v);
    else if (key == "ne")
        spec.counts = parse_counts(v);
    else if (key == "scaling-ne")
    {
        spec.scaling_counts.clear();
        for (const auto& item : split(v, ','))
            spec.scaling_counts.push_back(parse_counts(item));
    }
    else if (key == "alpha")
    {
        spec.alphas.clear();
        for (const auto& item : split(v, ','))
            spec.alphas.push_back(parse_double(key, item));
    }
    else if (key == "lambda")
        spec.lambda = parse_double(key, v);
    else if (key == "k")
        spec.k = parse_double(key, v);
    else if (key == "variant")
    {
        spec.variants.clear();
        for (const auto& item : split(v, ','))
            spec.variants.push_back(parse_operator_variant(item));
    }
    else if (key == "solver")
    {
        spec.solvers.clear();
        for (const auto& item : split(v, ','))
            spec.solvers.push_back(parse_solver_kind(item));
    }
    else if (key == "tol")
        spec.tolerance = parse_double(key, v);
    else if (key == "reps")
        spec.repetitions = static_cast<int>(parse_int(key, v));
    else if (key == "warmup")
        spec.warmup = static_cast<int>(parse_int(key, v));
    else if (key == "max-iterations")
        spec.max_iterations = static_cast<std::size_t>(parse_int(key, v));
    else if (key == "mmc-mem-cap")
        spec.mmc_mem_cap = parse_double(key, v);
    else if (key == "parallel")
        spec.parallel = parse_bool(key, v);
    else if (key == "out")
        spec.output = v;
    else if (key == "domain")
    {
        const auto parts = split(v, ',');
        if (parts.size() != 6)
            throw std::invalid_argument("domain needs six numbers lo1,lo2,lo3,hi1,hi2,hi3");
        for (std::size_t a = 0; a < 3; ++a)
        {
            spec.domain.lo[a] = parse_double(key, parts[a]);
            spec.domain.hi[a] = parse_double(key, parts[a + 3]);
        }
    }
    else
        throw std::invalid_argument("unknown spec key '" + key + "'");
}

void apply_spec_file(ExperimentSpec& spec, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open spec file '" + path + "'");
    std::string line;
    int         lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key = value");
        try
        {
            apply_spec_entry(spec, trim(line.substr(0, eq)), line.substr(eq + 1));
        }
        catch (const std::invalid_argument& e)
        {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

const std::vector<std::string>& csv_columns()
{
    static const std::vector<std::string> cols{
        "experiment",    "p",           "n_elements",    "alpha",           "lambda",
        "variant",       "status",      "iterations",    "setup_seconds",   "run_seconds",
        "mults_primary", "mults_condensed", "mults_total", "max_error",     "note"};
    return cols;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path)
{
    const auto parent = std::filesystem::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty())
        std::filesystem::create_directories(parent, ec);
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write CSV file '" + path + "'");
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& r : rows)
    {
        out << csv_field(r.experiment) << ',' << r.p << ',' << r.n_elements << ',' << format_double(r.alpha) << ','
            << format_double(r.lambda) << ',' << csv_field(r.variant) << ',' << csv_field(r.status) << ','
            << r.iterations << ',' << format_double(r.setup_seconds) << ',' << format_double(r.run_seconds) << ','
            << r.mults_primary << ',' << r.mults_condensed << ',' << r.mults_total << ','
            << format_double(r.max_error) << ',' << csv_field(r.note) << '\n';
    }
    if (!out)
        throw std::runtime_error("error while writing CSV file '" + path + "'");
}

std::vector<ResultRow> read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open CSV file '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || parse_csv_line(line) != csv_columns())
        throw std::runtime_error("CSV file '" + path + "' does not have the expected header");
    std::vector<ResultRow> rows;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        // quoted fields may span lines
        std::string more;
        while (std::count(line.begin(), line.end(), '"') % 2 != 0 && std::getline(in, more))
            line += '\n' + more;
        const auto f = parse_csv_line(line);
        if (f.size() != csv_columns().size())
            throw std::runtime_error("CSV file '" + path + "': wrong field count");
        ResultRow r;
        r.experiment      = f[0];
        r.p               = std::stoi(f[1]);
        r.n_elements      = std::stoull(f[2]);
        r.alpha           = std::stod(f[3]);
        r.lambda          = std::stod(f[4]);
        r.variant         = f[5];
        r.status          = f[6];
        r.iterations      = std::stoull(f[7]);
        r.setup_seconds   = std::stod(f[8]);
        r.run_seconds     = std::stod(f[9]);
        r.mults_primary   = std::stoull(f[10]);
        r.mults_condensed = std::stoull(f[11]);
        r.mults_total     = std::stoull(f[12]);
        r.max_error       = std::stod(f[13]);
        r.note            = f[14];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<std::string> emit_plot_data(const std::vector<ResultRow>& rows, const std::string& dir)
{
    // series name -> (x, y) points
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    for (const auto& r : rows)
    {
        if (r.status != "ok")
            continue;
        if (r.experiment == "operator")
            series["operator_" + r.variant].emplace_back(r.p, r.run_seconds);
        else if (r.experiment == "solver" || r.experiment == "solve")
        {
            const auto base = r.experiment + "_" + r.variant + "_alpha" + alpha_label(r.alpha);
            series[base + "_iterations"].emplace_back(r.p, static_cast<double>(r.iterations));
            series[base + "_time"].emplace_back(r.p, r.run_seconds);
            series[base + "_error"].emplace_back(r.p, r.max_error);
        }
        else if (r.experiment == "scaling")
        {
            series["scaling_" + r.variant + "_iterations"].emplace_back(static_cast<double>(r.n_elements),
                                                                        static_cast<double>(r.iterations));
            series["scaling_" + r.variant + "_time"].emplace_back(static_cast<double>(r.n_elements), r.run_seconds);
        }
    }
    if (!dir.empty())
        std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    for (const auto& [name, pts] : series)
    {
        const auto    path = (std::filesystem::path(dir.empty() ? "." : dir) / (name + ".dat")).string();
        std::ofstream out(path);
        if (!out)
            throw std::runtime_error("cannot write plot file '" + path + "'");
        for (const auto& [x, y] : pts)
            out << format_double(x) << ' ' << format_double(y) << '\n';
        written.push_back(path);
    }
    return written;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need at least two matching points");
    const double n = static_cast<double>(x.size());
    double       sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<ResultRow> run_operator_benchmark(const ExperimentSpec& spec)
{
    spec.validate();
    std::vector<ResultRow> rows;
    const double           alpha = spec.alphas.empty() ? 1.0 : spec.alphas.front();
    const auto             mesh  = build_mesh(spec.counts, spec.domain, alpha);
    for (int p : spec.degrees)
    {
        const auto ref  = make_reference_element(p);
        const auto dofs = build_dof_maps(mesh, p);
        std::mt19937_64                        rng(12345u + static_cast<unsigned>(p));
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<double>                    x(dofs.n_condensed), y(dofs.n_condensed);
        for (auto& v : x)
            v = dist(rng);

        for (auto variant : spec.variants)
        {
            ResultRow row;
            row.experiment = "operator";
            row.p          = p;
            row.n_elements = mesh.n_elements();
            row.alpha      = alpha;
            row.lambda     = spec.lambda;
            row.variant    = to_string(variant);
            try
            {
                const auto t0 = Clock::now();
                const CondensedSystem sys(mesh, dofs, ref, spec.lambda, variant, {spec.parallel, spec.mmc_mem_cap});
                row.setup_seconds = seconds_since(t0);
                for (int r = 0; r < spec.warmup; ++r)
                    sys.apply(x, y);
                const auto t1 = Clock::now();
                for (int r = 0; r < spec.repetitions; ++r)
                    sys.apply(x, y);
                row.run_seconds = seconds_since(t1) / spec.repetitions;
                OpCounters c;
                sys.apply(x, y, &c);
                row.mults_primary   = c.primary.count;
                row.mults_condensed = c.condensed.count;
                row.mults_total     = c.primary.count + c.condensed.count;
                row.status          = "ok";
                if (variant == OperatorVariant::mmc)
                    row.note = "estimate_bytes=" + format_double(estimate_mmc_memory(p, mesh.n_elements()));
            }
            catch (const MemoryCapExceeded& e)
            {
                row.status = "skipped";
                row.note   = e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<ResultRow> run_solver_benchmark(const ExperimentSpec& spec)
{
    spec.validate();
    std::vector<ResultRow> rows;
    for (double alpha : spec.alphas)
        for (int p : spec.degrees)
            for (auto solver : spec.solvers)
                rows.push_back(solve_row(spec, "solver", spec.counts, alpha, p, solver));
    return rows;
}

std::vector<ResultRow> run_element_scaling(const ExperimentSpec& spec)
{
    spec.validate();
    auto counts_list = spec.scaling_counts;
    if (counts_list.empty())
        counts_list.push_back(spec.counts);
    const double           alpha = spec.alphas.empty() ? 1.0 : spec.alphas.front();
    std::vector<ResultRow> rows;
    for (int p : spec.degrees)
        for (auto solver : spec.solvers)
        {
            std::vector<double> ne, its, time;
            for (const auto& c : counts_list)
            {
                auto row = solve_row(spec, "scaling", c, alpha, p, solver);
                if (row.status == "ok")
                {
                    ne.push_back(static_cast<double>(row.n_elements));
                    its.push_back(static_cast<double>(std::max<std::size_t>(row.iterations, 1)));
                    time.push_back(row.run_seconds);
                }
                rows.push_back(std::move(row));
            }
            if (ne.size() >= 2)
            {
                ResultRow fit;
                fit.experiment = "scaling";
                fit.p          = p;
                fit.alpha      = alpha;
                fit.lambda     = spec.lambda;
                fit.variant    = to_string(solver);
                fit.status     = "fit";
                std::ostringstream note;
                note << std::setprecision(4) << "iteration_exponent=" << loglog_slope(ne, its)
                     << " time_exponent=" << loglog_slope(ne, time);
                fit.note = note.str();
                rows.push_back(std::move(fit));
            }
        }
    return rows;
}

std::vector<ResultRow> run_single_solve(const ExperimentSpec& spec)
{
    spec.validate();
    std::vector<ResultRow> rows;
    for (double alpha : spec.alphas)
        for (int p : spec.degrees)
            for (auto solver : spec.solvers)
                rows.push_back(solve_row(spec, "solve", spec.counts, alpha, p, solver));
    return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec)
{
    switch (spec.kind)
    {
    case ExperimentKind::operator_benchmark: return run_operator_benchmark(spec);
    case ExperimentKind::solver_benchmark: return run_solver_benchmark(spec);
    case ExperimentKind::element_scaling: return run_element_scaling(spec);
    case ExperimentKind::solve: return run_single_solve(spec);
    }
    return {};
}

} // namespace sem
