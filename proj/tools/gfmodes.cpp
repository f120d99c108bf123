#include <gfmodes/app.hpp>

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Normal modes, rigid-rotor levels and rovibrational diagnostics"};
    app.require_subcommand(1);

    gfmodes::JobSpec job;
    std::string tasks;
    std::string units;
    int jmax = -1;

    auto* analyze = app.add_subcommand("analyze", "run an input file");
    analyze->add_option("input", job.input_path, "job file")->required();
    analyze->add_option("--tasks", tasks, "comma list of modes,dynamics,rotor,watson");
    analyze->add_option("--out", job.output_dir, "output directory");
    analyze->add_option("--units", units, "natural or cm")->check(CLI::IsMember({"natural", "cm"}));
    analyze->add_option("--jmax", jmax, "highest J for rotor levels")->check(CLI::NonNegativeNumber);
    analyze->add_option("--frames", job.frames, "frames per mode in modes.xyz")->check(CLI::Range(2, 100000));
    analyze->add_option("--amplitude", job.amplitude, "largest atomic excursion in Angstrom")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!tasks.empty())
            job.tasks = gfmodes::parse_task_list(tasks);
    } catch (const gfmodes::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (!units.empty())
        job.units = units == "natural" ? gfmodes::UnitMode::Natural : gfmodes::UnitMode::Spectroscopic;
    if (jmax >= 0)
        job.jmax = jmax;
    return gfmodes::run(job);
}
