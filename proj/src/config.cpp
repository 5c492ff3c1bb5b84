#include "vnnarena/config.hpp"

#include <cmath>
#include <sstream>

#include "vnnarena/errors.hpp"
#include "vnnarena/textutil.hpp"

namespace vnna::config {

namespace fs = std::filesystem;

scoring::RuleSet HarnessConfig::rule_set() const {
    scoring::RuleSet rs = rules == scoring::RulesYear::R2021
                              ? scoring::RuleSet::r2021()
                              : scoring::RuleSet::r2022();
    if (time_bonus) rs.time_bonus_enabled = *time_bonus;
    return rs;
}

namespace {

bool parse_bool(const std::string& v, int line) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw ConfigError("expected on/off at line " + std::to_string(line));
}

double parse_num(const std::string& v, int line) {
    double d;
    if (!text::try_parse_double(v, d) || !std::isfinite(d))
        throw ConfigError("expected a number at line " + std::to_string(line));
    return d;
}

std::string resolve(const std::string& p, const fs::path& base) {
    fs::path path(p);
    if (path.is_relative()) path = base / path;
    return path.string();
}

}  // namespace

HarnessConfig parse_config(std::string_view content, const fs::path& base_dir) {
    HarnessConfig cfg;
    enum class Section { Global, Tool, Benchmark };
    Section section = Section::Global;

    std::istringstream in{std::string(content)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = text::trim(raw);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s == "[tool]") {
                section = Section::Tool;
                cfg.tools.emplace_back();
            } else if (s == "[benchmark]") {
                section = Section::Benchmark;
                cfg.benchmarks.emplace_back();
            } else {
                throw ConfigError("unknown section " + s + " at line " +
                                  std::to_string(line));
            }
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " +
                              std::to_string(line));
        std::string key = text::trim(s.substr(0, eq));
        std::string value = text::trim(s.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("empty key or value at line " +
                              std::to_string(line));

        if (section == Section::Global) {
            if (key == "workdir") {
                cfg.workdir = resolve(value, base_dir);
            } else if (key == "rules") {
                if (value == "2021")
                    cfg.rules = scoring::RulesYear::R2021;
                else if (value == "2022")
                    cfg.rules = scoring::RulesYear::R2022;
                else
                    throw ConfigError("rules must be 2021 or 2022 (line " +
                                      std::to_string(line) + ")");
            } else if (key == "time_bonus") {
                cfg.time_bonus = parse_bool(value, line);
            } else if (key == "seed") {
                cfg.seed = static_cast<std::uint64_t>(parse_num(value, line));
                cfg.verifier.seed = cfg.seed;
            } else if (key == "tol_input") {
                cfg.tol.input = parse_num(value, line);
                cfg.verifier.tol.input = cfg.tol.input;
            } else if (key == "tol_output") {
                cfg.tol.output = parse_num(value, line);
                cfg.verifier.tol.output = cfg.tol.output;
            } else if (key == "attack_steps") {
                cfg.verifier.attack.steps =
                    static_cast<int>(parse_num(value, line));
            } else if (key == "attack_restarts") {
                cfg.verifier.attack.restarts =
                    static_cast<int>(parse_num(value, line));
            } else if (key == "bab_max_depth") {
                cfg.verifier.bab.max_depth =
                    static_cast<int>(parse_num(value, line));
            } else if (key == "bab_max_subproblems") {
                cfg.verifier.bab.max_subproblems =
                    static_cast<long>(parse_num(value, line));
            } else if (key == "time_budget") {
                cfg.verifier.time_budget = parse_num(value, line);
            } else if (key == "trivial_network") {
                cfg.trivial_network = resolve(value, base_dir);
            } else if (key == "trivial_spec") {
                cfg.trivial_spec = resolve(value, base_dir);
            } else if (key == "store") {
                cfg.store = resolve(value, base_dir);
            } else {
                throw ConfigError("unknown key '" + key + "' at line " +
                                  std::to_string(line));
            }
        } else if (section == Section::Tool) {
            runner::ToolAdapter& tool = cfg.tools.back();
            if (key == "name") {
                tool.name = value;
            } else if (key == "run") {
                // first token may be a relative executable path
                auto sp = value.find(' ');
                std::string head = value.substr(0, sp);
                std::string rest =
                    sp == std::string::npos ? "" : value.substr(sp);
                if (head.find('/') != std::string::npos)
                    head = resolve(head, base_dir);
                tool.run_command = head + rest;
            } else if (key == "prepare") {
                auto sp = value.find(' ');
                std::string head = value.substr(0, sp);
                std::string rest =
                    sp == std::string::npos ? "" : value.substr(sp);
                if (head.find('/') != std::string::npos)
                    head = resolve(head, base_dir);
                tool.prepare_command = head + rest;
            } else {
                throw ConfigError("unknown tool key '" + key + "' at line " +
                                  std::to_string(line));
            }
        } else {
            HarnessConfig::BenchmarkDecl& bench = cfg.benchmarks.back();
            if (key == "name") {
                bench.name = value;
            } else if (key == "instances") {
                bench.instances_csv = resolve(value, base_dir);
            } else {
                throw ConfigError("unknown benchmark key '" + key +
                                  "' at line " + std::to_string(line));
            }
        }
    }

    for (const auto& tool : cfg.tools) {
        if (tool.name.empty())
            throw ConfigError("every [tool] needs a name");
        if (tool.run_command.empty())
            throw ConfigError("tool '" + tool.name + "' has no run command");
    }
    for (const auto& bench : cfg.benchmarks) {
        if (bench.name.empty())
            throw ConfigError("every [benchmark] needs a name");
        if (bench.instances_csv.empty())
            throw ConfigError("benchmark '" + bench.name +
                              "' has no instance list");
        if (!fs::exists(bench.instances_csv))
            throw MissingFile(bench.instances_csv);
    }
    if (cfg.trivial_network && !fs::exists(*cfg.trivial_network))
        throw MissingFile(*cfg.trivial_network);
    if (cfg.trivial_spec && !fs::exists(*cfg.trivial_spec))
        throw MissingFile(*cfg.trivial_spec);
    return cfg;
}

HarnessConfig load_config(const fs::path& path) {
    std::string content = text::read_file(path);
    fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    return parse_config(content, base);
}

}  // namespace vnna::config
