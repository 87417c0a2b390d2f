// Command line driver for the Helmholtz benchmarks.
#include "sem/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>

namespace
{

struct Flags
{
    std::map<std::string, std::string> values;
    std::string                        spec_file;
    bool                               paper_scale = false;
};

void add_flags(CLI::App* app, Flags& f)
{
    static const std::vector<std::pair<std::string, std::string>> options{
        {"p", "Polynomial degree(s), e.g. 8 or 4,8,12"},
        {"p-range", "Degree range A:B (inclusive)"},
        {"ne", "Element counts N1xN2xN3"},
        {"scaling-ne", "Comma separated element counts for the scaling run"},
        {"alpha", "Expansion factor(s), comma separated"},
        {"lambda", "Helmholtz parameter"},
        {"k", "Manufactured solution parameter"},
        {"variant", "Operator variant(s): mmc, tpc, tpt"},
        {"solver", "Solver(s): uc, dc, bc, bt"},
        {"tol", "Relative residual reduction (default 1e-12)"},
        {"reps", "Timed repetitions"},
        {"warmup", "Discarded repetitions before timing"},
        {"max-iterations", "CG iteration limit"},
        {"out", "CSV output path"},
        {"mmc-mem-cap", "Byte limit for the stored MMC matrices"},
        {"parallel", "Element-parallel operator application (true/false)"},
        {"domain", "lo1,lo2,lo3,hi1,hi2,hi3"},
    };
    for (const auto& [name, help] : options)
        app->add_option("--" + name, f.values[name], help);
    app->add_option("--spec", f.spec_file, "Experiment spec file (key = value)")->check(CLI::ExistingFile);
    app->add_flag("--paper-scale", f.paper_scale, "Full problem sizes of the original study");
}

int run(sem::ExperimentKind kind, CLI::App* app, const Flags& f)
{
    auto spec = sem::default_spec(kind, f.paper_scale);
    if (!f.spec_file.empty())
        sem::apply_spec_file(spec, f.spec_file);
    spec.kind = kind;
    for (const auto& [key, value] : f.values)
        if (app->count("--" + key) > 0)
            sem::apply_spec_entry(spec, key, value);
    if (spec.output.empty())
        spec.output = sem::to_string(kind) + ".csv";

    const auto rows = sem::run_experiment(spec);
    sem::emit_csv(rows, spec.output);
    const auto dir   = std::filesystem::path(spec.output).parent_path().string();
    const auto plots = sem::emit_plot_data(rows, dir);

    for (const auto& r : rows)
    {
        std::cout << r.experiment << " p=" << r.p << " ne=" << r.n_elements << " alpha=" << r.alpha << " "
                  << r.variant << " " << r.status;
        if (r.status != "fit")
            std::cout << " it=" << r.iterations << " setup=" << r.setup_seconds << "s run=" << r.run_seconds
                      << "s mults=" << r.mults_total << " err=" << r.max_error;
        if (!r.note.empty())
            std::cout << " [" << r.note << "]";
        std::cout << '\n';
    }
    std::cout << "wrote " << spec.output << " and " << plots.size() << " plot file(s)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Condensed spectral-element Helmholtz solver and benchmarks"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, sem::ExperimentKind>> commands{
        {"bench-operator", sem::ExperimentKind::operator_benchmark},
        {"bench-solver", sem::ExperimentKind::solver_benchmark},
        {"bench-scaling", sem::ExperimentKind::element_scaling},
        {"solve", sem::ExperimentKind::solve},
    };
    std::vector<Flags>     flags(commands.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < commands.size(); ++i)
    {
        subs.push_back(app.add_subcommand(commands[i].first));
        add_flags(subs.back(), flags[i]);
    }
    CLI11_PARSE(app, argc, argv);

    try
    {
        for (std::size_t i = 0; i < commands.size(); ++i)
            if (subs[i]->parsed())
                return run(commands[i].second, subs[i], flags[i]);
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
