#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vnnarena/scoring.hpp"

namespace vnna::report {

enum class Format { Csv, Text };

// Cumulative solved-count versus adjusted runtime, per tool.
struct CactusSeries {
    std::string tool;
    std::vector<std::pair<int, double>> points;  // (solved_count, time)
};

// Correctly solved instances sorted by adjusted runtime, cumulative count.
std::vector<CactusSeries> cactus_data(
    std::span<const runner::VerdictRecord> records,
    const std::map<scoring::InstanceKey, scoring::GroundTruth>& truths,
    const scoring::RuleSet& rules,
    const std::map<scoring::InstanceKey, scoring::ValidityMap>& validity);

// Writes scores.csv and totals.csv (or .txt) only.
void emit_score_tables(const scoring::ScoreTable& table, Format format,
                       const std::filesystem::path& out_dir);

// Writes scores / totals / per-tool cactus files plus one audit file per
// benchmark into out_dir. Byte-deterministic for fixed inputs: stable
// ordering, 6-significant-digit decimals.
void emit_reports(
    const scoring::ScoreTable& table, const std::vector<CactusSeries>& cactus,
    std::span<const runner::VerdictRecord> records,
    const std::map<scoring::InstanceKey, scoring::GroundTruth>& truths,
    const std::map<scoring::InstanceKey, scoring::ValidityMap>& validity,
    Format format, const std::filesystem::path& out_dir);

}  // namespace vnna::report
