#include "vnnarena/runner.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstring>
#include <set>
#include <sstream>
#include <thread>

#include "vnnarena/errors.hpp"
#include "vnnarena/store.hpp"
#include "vnnarena/textutil.hpp"

namespace vnna::runner {

namespace fs = std::filesystem;

std::string_view run_status_name(RunStatus s) {
    switch (s) {
        case RunStatus::Sat: return "sat";
        case RunStatus::Unsat: return "unsat";
        case RunStatus::Unknown: return "unknown";
        case RunStatus::Timeout: return "timeout";
        case RunStatus::Error: return "error";
    }
    return "?";
}

std::optional<RunStatus> run_status_from(std::string_view s) {
    std::string low;
    for (char c : s) low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (low == "sat") return RunStatus::Sat;
    if (low == "unsat") return RunStatus::Unsat;
    if (low == "unknown") return RunStatus::Unknown;
    if (low == "timeout") return RunStatus::Timeout;
    if (low == "error") return RunStatus::Error;
    return std::nullopt;
}

std::vector<InstanceRow> load_instances(std::string_view csv_text,
                                        const fs::path& base_dir,
                                        const std::string& benchmark_name) {
    std::vector<InstanceRow> rows;
    int line_number = 0;
    std::istringstream in{std::string(csv_text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_number;
        std::string t = text::trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto fields = text::split(t, ',');
        if (fields.size() != 3)
            throw SyntaxError("expected network,spec,timeout", line_number, 1);
        InstanceRow row;
        row.benchmark = benchmark_name;
        fs::path net = fs::path(text::trim(fields[0]));
        fs::path prop = fs::path(text::trim(fields[1]));
        if (net.is_relative()) net = base_dir / net;
        if (prop.is_relative()) prop = base_dir / prop;
        row.network_path = net.string();
        row.spec_path = prop.string();
        double timeout;
        if (!text::try_parse_double(text::trim(fields[2]), timeout) ||
            !(timeout > 0))
            throw SyntaxError("timeout must be a positive number", line_number,
                              1);
        row.timeout = timeout;
        if (!fs::exists(net)) throw MissingFile(net.string());
        if (!fs::exists(prop)) throw MissingFile(prop.string());
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::vector<std::string> split_command(const std::string& cmd) {
    std::vector<std::string> argv;
    std::string cur;
    for (char c : cmd) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) {
                argv.push_back(cur);
                cur.clear();
            }
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) argv.push_back(cur);
    return argv;
}

double unix_now() {
    return std::chrono::duration<double>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

struct ChildResult {
    double elapsed = 0;
    bool timed_out = false;
    bool spawn_failed = false;
    int exit_code = 0;
    std::string spawn_error;
};

// Runs argv in its own process group with stdout/stderr sent to log_path and
// VNN_ARENA_WORKDIR pointing at scratch. Terminates the whole group with
// SIGTERM inside the grace window and SIGKILL at its end.
ChildResult run_child(const std::vector<std::string>& argv,
                      const fs::path& log_path, const fs::path& scratch,
                      double term_after, double kill_after) {
    ChildResult res;
    if (argv.empty()) {
        res.spawn_failed = true;
        res.spawn_error = "empty command";
        return res;
    }

    std::vector<char*> cargv;
    for (const std::string& a : argv)
        cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    auto start = std::chrono::steady_clock::now();
    pid_t pid = fork();
    if (pid < 0) {
        res.spawn_failed = true;
        res.spawn_error = std::strerror(errno);
        return res;
    }
    if (pid == 0) {
        setpgid(0, 0);
        int fd = open(log_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        if (fd >= 0) {
            dup2(fd, STDOUT_FILENO);
            dup2(fd, STDERR_FILENO);
            close(fd);
        }
        setenv("VNN_ARENA_WORKDIR", scratch.c_str(), 1);
        execvp(cargv[0], cargv.data());
        // exec failed; report through the exit code
        _exit(127);
    }

    setpgid(pid, pid);  // also from the parent side to avoid a race

    bool sent_term = false, sent_kill = false;
    int status = 0;
    while (true) {
        pid_t r = waitpid(pid, &status, WNOHANG);
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
        if (r == pid) {
            res.elapsed = elapsed;
            break;
        }
        if (r < 0 && errno != EINTR) {
            res.elapsed = elapsed;
            res.spawn_failed = true;
            res.spawn_error = std::strerror(errno);
            break;
        }
        if (!sent_term && elapsed >= term_after) {
            kill(-pid, SIGTERM);
            sent_term = true;
            res.timed_out = true;
        }
        if (!sent_kill && elapsed >= kill_after) {
            kill(-pid, SIGKILL);
            sent_kill = true;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }

    // sweep stragglers and wait for the group to drain so no orphan
    // outlives the verdict
    kill(-pid, SIGKILL);
    for (int i = 0; i < 200; ++i) {
        if (kill(-pid, 0) < 0 && errno == ESRCH) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }

    if (!res.spawn_failed && WIFEXITED(status)) {
        res.exit_code = WEXITSTATUS(status);
        if (res.exit_code == 127 && !res.timed_out) {
            res.spawn_failed = true;
            res.spawn_error = "command not found or not executable";
        }
    }
    return res;
}

std::string first_bytes(const std::string& s, std::size_t n) {
    std::string out = s.substr(0, n);
    for (char& c : out)
        if (c == '\n' || c == '\r') c = ' ';
    return out;
}

int scratch_counter = 0;

}  // namespace

VerdictRecord run_instance(const ToolAdapter& tool, const InstanceRow& row,
                           int instance_index, const RunnerOptions& opts) {
    VerdictRecord rec;
    rec.tool = tool.name;
    rec.benchmark = row.benchmark;
    rec.instance = instance_index;

    fs::path workdir =
        opts.workdir.empty() ? fs::temp_directory_path() : opts.workdir;
    fs::create_directories(workdir);
    fs::path scratch = workdir / ("scratch_" + std::to_string(getpid()) + "_" +
                                  std::to_string(scratch_counter++));
    fs::create_directories(scratch);
    fs::path result_file = scratch / "result.txt";
    fs::path log_file = scratch / "tool.log";

    std::vector<std::string> argv = split_command(tool.run_command);
    argv.push_back(row.network_path);
    argv.push_back(row.spec_path);
    argv.push_back(text::format_double(row.timeout));
    argv.push_back(result_file.string());

    ChildResult child =
        run_child(argv, log_file, scratch, row.timeout + 0.8 * opts.grace,
                  row.timeout + opts.grace);
    rec.raw_runtime = child.elapsed;
    rec.adjusted_runtime = std::max(rec.raw_runtime - tool.overhead.value_or(0.0), 0.0);

    auto finish = [&](VerdictRecord out) {
        std::error_code ec;
        fs::remove_all(scratch, ec);
        return out;
    };

    if (child.spawn_failed) {
        rec.status = RunStatus::Error;
        rec.diagnostics = "spawn failed: " + child.spawn_error;
        return finish(rec);
    }
    if (child.timed_out) {
        rec.status = RunStatus::Timeout;
        rec.diagnostics = "terminated after exceeding the timeout";
        return finish(rec);
    }

    std::string result_text;
    try {
        result_text = text::read_file(result_file);
    } catch (const Error&) {
        rec.status = RunStatus::Error;
        rec.diagnostics = "tool produced no result file (exit code " +
                          std::to_string(child.exit_code) + ")";
        return finish(rec);
    }

    std::istringstream rs(result_text);
    std::string first_line;
    std::getline(rs, first_line);
    std::istringstream ls(first_line);
    std::string token;
    ls >> token;
    auto status = run_status_from(token);
    if (!status) {
        rec.status = RunStatus::Error;
        rec.diagnostics =
            "unparseable result file: '" + first_bytes(result_text, 200) + "'";
        return finish(rec);
    }
    rec.status = *status;

    if (rec.status == RunStatus::Sat) {
        auto nl = result_text.find('\n');
        std::string witness_text =
            nl == std::string::npos ? "" : result_text.substr(nl + 1);
        if (text::trim(witness_text).empty()) {
            rec.diagnostics = "tool reported sat but provided no witness";
        } else {
            fs::path wdir = workdir / "witnesses";
            fs::create_directories(wdir);
            fs::path wpath =
                wdir / (text::sanitize_name(tool.name) + "_" +
                        text::sanitize_name(row.benchmark) + "_" +
                        std::to_string(instance_index) + ".txt");
            text::write_file(wpath, witness_text);
            rec.witness_path = wpath.string();
        }
    }
    return finish(rec);
}

double measure_overhead(ToolAdapter& tool, const InstanceRow& trivial,
                        int repeats, const RunnerOptions& opts) {
    if (repeats < 1) repeats = 1;
    std::vector<double> raws;
    for (int i = 0; i < repeats; ++i) {
        VerdictRecord rec = run_instance(tool, trivial, 0, opts);
        if (rec.status == RunStatus::Error || rec.status == RunStatus::Timeout)
            throw ToolFailure("tool '" + tool.name +
                              "' failed on the trivial instance: " +
                              rec.diagnostics);
        raws.push_back(rec.raw_runtime);
    }
    std::sort(raws.begin(), raws.end());
    double median;
    std::size_t n = raws.size();
    if (n % 2 == 1)
        median = raws[n / 2];
    else
        median = 0.5 * (raws[n / 2 - 1] + raws[n / 2]);
    tool.overhead = median;
    return median;
}

void run_campaign(std::vector<ToolAdapter>& tools,
                  const std::vector<Benchmark>& benchmarks,
                  const fs::path& store_path, const RunnerOptions& opts,
                  const ValidateHook& validate) {
    std::set<std::tuple<std::string, std::string, int>> done;
    if (fs::exists(store_path)) {
        for (const store::Entry& e : store::load(store_path))
            done.insert({e.record.tool, e.record.benchmark, e.record.instance});
    } else if (store_path.has_parent_path()) {
        fs::create_directories(store_path.parent_path());
    }

    for (ToolAdapter& tool : tools) {
        if (tool.prepare_command) {
            std::vector<std::string> argv = split_command(*tool.prepare_command);
            fs::path workdir =
                opts.workdir.empty() ? fs::temp_directory_path() : opts.workdir;
            fs::create_directories(workdir);
            fs::path scratch = workdir / ("prepare_" + text::sanitize_name(tool.name));
            fs::create_directories(scratch);
            ChildResult r = run_child(argv, scratch / "prepare.log", scratch,
                                      3600, 3660);
            if (r.spawn_failed || r.exit_code != 0)
                throw ToolFailure("prepare command failed for tool '" +
                                  tool.name + "'");
        }
        for (const Benchmark& bench : benchmarks) {
            for (std::size_t i = 0; i < bench.rows.size(); ++i) {
                int idx = static_cast<int>(i);
                if (done.count({tool.name, bench.name, idx})) continue;
                InstanceRow row = bench.rows[i];
                row.benchmark = bench.name;
                store::Entry entry;
                entry.started = unix_now();
                entry.record = run_instance(tool, row, idx, opts);
                entry.finished = unix_now();
                if (entry.record.status == RunStatus::Sat &&
                    entry.record.witness_path && validate) {
                    std::string wtext =
                        text::read_file(*entry.record.witness_path);
                    entry.witness_valid = validate(row, wtext);
                }
                store::append(store_path, entry);
            }
        }
    }
}

}  // namespace vnna::runner
