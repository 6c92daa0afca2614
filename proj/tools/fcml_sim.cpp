// Command-line front end: run, sweep, freq-profile, feasibility, gate-dump.

#include "fcml/fcml.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;

namespace {

fcml::Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fcml::ConfigError("cannot open config '" + path + "'");
    return fcml::parse_scenario(in);
}

/// Writes every file only after all contents are ready; each lands via a
/// temporary and a rename.
void commit_files(const std::vector<std::pair<fs::path, std::string>>& files) {
    for (const auto& [path, body] : files) {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        const fs::path tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
            out << body;
        }
        fs::rename(tmp, path);
    }
}

void emit(const std::string& out_path, const std::string& body) {
    if (out_path.empty() || out_path == "-") std::cout << body;
    else commit_files({{out_path, body}});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flying-capacitor multilevel converter simulator with skipped-adjacency PWM"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    std::string out;
    int grid = 199;
    unsigned jobs = 0;
    double il = 3.0;
    std::vector<double> duties;

    auto* run = app.add_subcommand("run", "Simulate one scenario; writes trace.csv, events.csv and summary.csv");
    run->add_option("config", config, "Scenario file")->required();
    run->add_option("-o,--out-dir", out_dir, "Output directory")->default_val(".");

    auto* sweep = app.add_subcommand("sweep", "Constant-duty runs from alpha to 1-alpha; one row per point");
    sweep->add_option("config", config, "Scenario file")->required();
    sweep->add_option("--grid", grid, "Number of duty points")->default_val(199)->check(CLI::PositiveNumber);
    sweep->add_option("-j,--jobs", jobs, "Worker threads (0 = hardware concurrency)")->default_val(0);
    sweep->add_option("-o,--out", out, "Output CSV (stdout if omitted)");

    auto* profile = app.add_subcommand("freq-profile", "ZVS frequency laws across the duty range");
    profile->add_option("config", config, "Scenario file")->required();
    profile->add_option("--il", il, "Inductor current magnitude [A]")->required();
    profile->add_option("--grid", grid, "Number of duty points over [0, 1]")->default_val(501)->check(CLI::PositiveNumber);
    profile->add_option("--duty", duties, "Explicit duty points (overrides --grid)");
    profile->add_option("-o,--out", out, "Output CSV (stdout if omitted)");

    auto* feas = app.add_subcommand("feasibility", "Dead-time charge check for both modes");
    feas->add_option("config", config, "Scenario file")->required();

    auto* gates = app.add_subcommand("gate-dump", "Complementary gate edges of a run");
    gates->add_option("config", config, "Scenario file")->required();
    gates->add_option("-o,--out", out, "Output CSV (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        const fcml::Scenario sc = load_scenario(config);
        const fcml::ConverterParams p = fcml::resolved_params(sc);

        if (*run) {
            const fcml::RunResult r = fcml::simulate(sc);
            std::ostringstream trace, events, summary;
            fcml::write_trace_csv(trace, r.trace, sc.trace_decimation);
            fcml::write_events_csv(events, r.events);
            const fcml::SweepRow row = fcml::classify_run(r);
            fcml::write_sweep_header(summary);
            fcml::write_sweep_row(summary, row);
            const fs::path dir(out_dir);
            commit_files({{dir / "trace.csv", trace.str()},
                          {dir / "events.csv", events.str()},
                          {dir / "summary.csv", summary.str()}});
        } else if (*sweep) {
            const auto points = fcml::sweep_grid(p, grid);
            const auto rows = fcml::run_sweep(sc, points, jobs);
            std::ostringstream csv;
            fcml::write_sweep_csv(csv, rows);
            emit(out, csv.str());
        } else if (*profile) {
            std::vector<double> points = duties;
            if (points.empty()) {
                for (int i = 0; i < grid; ++i) points.push_back(grid == 1 ? 0.5 : static_cast<double>(i) / (grid - 1));
            }
            std::ostringstream csv;
            fcml::write_profile_csv(csv, fcml::frequency_profile(p, il, points, sc.mode_policy));
            emit(out, csv.str());
        } else if (*feas) {
            fcml::write_feasibility(std::cout, p);
        } else if (*gates) {
            fcml::SimOptions opt;
            opt.record_trace = false;
            opt.record_gates = true;
            const fcml::RunResult r = fcml::simulate(sc, opt);
            std::ostringstream csv;
            fcml::write_gate_csv(csv, r.gate_edges);
            emit(out, csv.str());
        }
    } catch (const fcml::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
