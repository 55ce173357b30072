#pragma once
// Scenario runner: sectioned key-value configs (one scenario per file), the
// built-in fixture catalogue, deterministic execution across every module
// area, and atomically written structured-text reports with companion
// comma-separated tables. Reruns with the same config and seed produce
// byte-identical reports; nothing here reads the clock.
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace metriclab {

struct Scenario {
    std::string id;
    // deviation | bismut | gradient-bound | criterion | flow | discrete |
    // full-pipeline
    std::string kind;
    std::uint64_t seed = 0;
    bool has_seed = false;   // mandatory for the stochastic kinds
    std::string output_dir;  // optional config override; CLI flag wins
    std::map<std::string, std::string> params;
    std::string label;  // source path, used in diagnostics
};

// Errors throw std::runtime_error with "<label>:<line>: message" diagnostics.
Scenario parse_scenario_text(const std::string& text, const std::string& label);
Scenario parse_scenario_file(const std::string& path);

struct Fixture {
    std::string name;
    std::string summary;
    std::string oracle;  // provenance tag of the backing oracle
};

// Stable catalogue: names and order never change within a build.
const std::vector<Fixture>& fixture_catalogue();

struct RunOptions {
    std::string output_dir;  // overrides the scenario's own setting when set
    int threads = 1;
    bool verbose = false;
};

struct ScenarioResult {
    std::string id;
    bool pass = false;        // every theorem-backed check held
    bool config_error = false;
    std::string report_path;  // machine-readable record (empty on config error)
    std::vector<std::string> tables;  // companion csv paths
    std::string summary;      // one-line human text
};

// Executes one parsed scenario and writes its artifacts. Theorem-backed check
// failures are reported through `pass`, not exceptions; configuration
// problems (unknown fixtures, bad parameters) throw std::runtime_error.
ScenarioResult run_scenario(const Scenario& sc, const RunOptions& opts);

struct BatchResult {
    int exit_code = 0;  // 0 ok, 1 check failure, 2 configuration error
    std::vector<ScenarioResult> results;  // file order
    std::string message;                  // "nothing to do" for an empty list
};

// Parses and runs each file; scenarios may run concurrently when
// opts.threads > 1 (no shared state, reports written atomically).
BatchResult run_batch(const std::vector<std::string>& files, const RunOptions& opts);

}  // namespace metriclab
