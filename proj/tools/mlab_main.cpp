// Scenario runner front end: `run` executes scenario configs and writes
// reports, `list-fixtures` prints the built-in catalogue.
#include "CLI11.hpp"

#include "metriclab/scenario.hpp"

#include <cstdio>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"metric-pair numerical laboratory"};
    app.require_subcommand(0, 1);

    std::vector<std::string> files;
    metriclab::RunOptions opts;
    CLI::App* run = app.add_subcommand("run", "execute scenario config files");
    run->add_option("files", files, "scenario configs, one scenario per file");
    run->add_option("--output-dir", opts.output_dir, "directory for reports and tables");
    run->add_option("--threads", opts.threads, "max concurrent scenarios")
        ->check(CLI::PositiveNumber);
    run->add_flag("--verbose", opts.verbose, "echo report contents to stdout");

    CLI::App* list = app.add_subcommand("list-fixtures", "print the fixture catalogue");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& fx : metriclab::fixture_catalogue())
            std::printf("%-24s  %-44s  [%s]\n", fx.name.c_str(), fx.summary.c_str(),
                        fx.oracle.c_str());
        return 0;
    }
    if (run->parsed()) {
        const metriclab::BatchResult batch = metriclab::run_batch(files, opts);
        if (!batch.message.empty()) std::printf("%s\n", batch.message.c_str());
        for (const auto& res : batch.results) {
            std::printf("%s\n", res.summary.c_str());
            if (opts.verbose && !res.report_path.empty()) {
                std::printf("  report: %s\n", res.report_path.c_str());
                for (const auto& t : res.tables) std::printf("  table:  %s\n", t.c_str());
            }
        }
        return batch.exit_code;
    }
    std::printf("%s", app.help().c_str());
    return 0;
}
