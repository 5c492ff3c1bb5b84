#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vnnarena/refverify.hpp"
#include "vnnarena/runner.hpp"
#include "vnnarena/scoring.hpp"

namespace vnna::config {

// Harness configuration: strict key=value text with [tool] / [benchmark]
// sections; unknown keys are rejected. Relative paths resolve against the
// config file's directory.
struct HarnessConfig {
    std::filesystem::path workdir;
    scoring::RulesYear rules = scoring::RulesYear::R2021;
    std::optional<bool> time_bonus;  // overrides the rule-set default
    std::uint64_t seed = 0;
    witness::Tolerances tol;
    verify::VerifierConfig verifier;
    std::optional<std::string> trivial_network;
    std::optional<std::string> trivial_spec;
    std::optional<std::string> store;
    std::vector<runner::ToolAdapter> tools;
    struct BenchmarkDecl {
        std::string name;
        std::string instances_csv;
    };
    std::vector<BenchmarkDecl> benchmarks;

    scoring::RuleSet rule_set() const;
};

HarnessConfig parse_config(std::string_view text,
                           const std::filesystem::path& base_dir);

HarnessConfig load_config(const std::filesystem::path& path);

}  // namespace vnna::config
