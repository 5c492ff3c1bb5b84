#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vnna::runner {

struct InstanceRow {
    std::string benchmark;
    std::string network_path;
    std::string spec_path;
    double timeout = 0;  // seconds
};

// External tool entry. run_command is invoked as
//   run_command <network> <spec> <timeout> <result_file>
// and may carry leading arguments (split on spaces, no shell).
struct ToolAdapter {
    std::string name;
    std::optional<std::string> prepare_command;
    std::string run_command;
    std::optional<double> overhead;  // measured seconds
};

enum class RunStatus { Sat, Unsat, Unknown, Timeout, Error };

std::string_view run_status_name(RunStatus s);
std::optional<RunStatus> run_status_from(std::string_view s);

struct VerdictRecord {
    std::string tool;
    std::string benchmark;
    int instance = 0;
    RunStatus status = RunStatus::Error;
    double raw_runtime = 0;
    double adjusted_runtime = 0;  // max(raw - overhead, 0)
    std::optional<std::string> witness_path;
    std::string diagnostics;
};

struct RunnerOptions {
    std::filesystem::path workdir;  // scratch root; per-instance dirs inside
    double grace = 5.0;             // termination window after the timeout
};

// `network_path,spec_path,timeout_seconds` per line, '#' comments. Paths are
// resolved relative to base_dir and must exist.
std::vector<InstanceRow> load_instances(std::string_view csv_text,
                                        const std::filesystem::path& base_dir,
                                        const std::string& benchmark_name);

// Median raw runtime of `repeats` runs on a trivial instance; stored on the
// adapter. Throws ToolFailure if any run errors or times out.
double measure_overhead(ToolAdapter& tool, const InstanceRow& trivial,
                        int repeats = 3, const RunnerOptions& opts = {});

// One instance in a fresh child process (own process group, fresh scratch
// dir in VNN_ARENA_WORKDIR). The tree is terminated within the grace window
// after the timeout. All failures become status=Error with diagnostics.
VerdictRecord run_instance(const ToolAdapter& tool, const InstanceRow& row,
                           int instance_index, const RunnerOptions& opts);

struct Benchmark {
    std::string name;
    std::vector<InstanceRow> rows;
};

// Returns witness validity for a sat record, or nullopt when undetermined.
using ValidateHook = std::function<std::optional<bool>(
    const InstanceRow& row, const std::string& witness_text)>;

// Strictly sequential execution, one tool at a time, appending to the store
// at store_path. Already recorded (tool, benchmark, instance) pairs are
// skipped, so an interrupted campaign can resume.
void run_campaign(std::vector<ToolAdapter>& tools,
                  const std::vector<Benchmark>& benchmarks,
                  const std::filesystem::path& store_path,
                  const RunnerOptions& opts, const ValidateHook& validate = {});

}  // namespace vnna::runner
