#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "qtd/scenario.hpp"

namespace {

void print_validation_errors(const std::vector<qtd::scenario::ValidationError>& errors) {
    for (const auto& e : errors) {
        std::cerr << "error: " << (e.path.empty() ? "<root>" : e.path) << ": " << e.message
                  << "\n";
    }
}

void print_report(const qtd::scenario::RunReport& report) {
    if (!report.ok) {
        std::cout << report.name << ": FAILED (" << report.error << ")\n";
        return;
    }
    int violated = 0;
    for (const auto& inv : report.invariants) {
        if (inv.violations > 0) ++violated;
    }
    std::cout << report.name << ": " << report.steps << " steps, " << report.rows << " rows, "
              << violated << " invariant(s) with violations, wall " << report.wall_seconds
              << " s\n";
    for (const auto& inv : report.invariants) {
        if (inv.violations > 0) {
            std::cout << "  violated: " << inv.name << " x" << inv.violations << " (worst "
                      << inv.worst << ", first at t=" << *inv.first_violation_time << ")\n";
        }
    }
    std::cout << "  csv: " << report.csv_path.string() << "\n";
    std::cout << "  report: " << report.report_path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qtdsim - scenario runner for bipartite quantum thermodynamics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string glob;
    int jobs = 1;

    CLI::App* validate = app.add_subcommand("validate", "Check a scenario config");
    validate->add_option("file", config_path, "scenario JSON file")->required();

    CLI::App* run = app.add_subcommand("run", "Run one scenario");
    run->add_option("file", config_path, "scenario JSON file")->required();
    run->add_option("--out", out_dir, "output directory (default: $QTDSIM_OUT_DIR or cwd)");

    CLI::App* batch = app.add_subcommand("batch", "Run every scenario a glob matches");
    batch->add_option("glob", glob, "config glob, wildcards in the filename part")->required();
    batch->add_option("--jobs", jobs, "parallel workers")->default_val(1);
    batch->add_option("--out", out_dir, "output directory (default: $QTDSIM_OUT_DIR or cwd)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            const auto result = qtd::scenario::validate_file(config_path);
            for (const auto& w : result.warnings) {
                std::cerr << "warning: " << w.path << ": " << w.message << "\n";
            }
            if (!result.ok()) {
                print_validation_errors(result.errors);
                return 1;
            }
            std::cout << result.config->resolved.dump(2) << "\n";
            return 0;
        }
        if (run->parsed()) {
            const auto report = qtd::scenario::run_file(config_path, out_dir);
            print_report(report);
            return report.ok ? 0 : 2;
        }
        if (batch->parsed()) {
            const auto reports = qtd::scenario::batch(glob, jobs, out_dir);
            bool all_ok = true;
            for (const auto& r : reports) {
                print_report(r);
                all_ok = all_ok && r.ok;
            }
            std::cout << reports.size() << " scenario(s), "
                      << (all_ok ? "all ok" : "with failures") << "\n";
            return all_ok ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
