#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vnnarena/runner.hpp"

namespace vnna::scoring {

enum class RulesYear { R2021, R2022 };

struct RuleSet {
    RulesYear year = RulesYear::R2021;
    double correct_points = 10;
    double penalty_points = 100;
    double simple_sat_points = 1;  // 2021 only
    bool time_bonus_enabled = true;
    double bonus_fastest = 2;
    double bonus_second = 1;
    double equal_margin = 0.2;  // seconds
    double small_floor = 1.0;   // runtimes below this are all equal

    static RuleSet r2021();
    // Whether 2022 kept time bonuses is configurable; default on.
    static RuleSet r2022(bool time_bonus = true);
};

enum class TruthLabel { Sat, Unsat, Undetermined };
enum class TruthBasis { MajorityVote, ValidatedWitness, Oracle };

std::string_view truth_label_name(TruthLabel l);

struct GroundTruth {
    std::string benchmark;
    int instance = 0;
    TruthLabel label = TruthLabel::Undetermined;
    TruthBasis basis = TruthBasis::MajorityVote;
    bool simple_sat = false;  // harness attack found a valid witness
};

// Key for per-instance grouping.
struct InstanceKey {
    std::string benchmark;
    int instance = 0;

    auto operator<=>(const InstanceKey&) const = default;
};

// tool name -> witness validity of its sat claim on this instance
using ValidityMap = std::map<std::string, bool>;

// 2022: a validated witness makes the instance Sat regardless of dissent;
// otherwise any unsat report makes it Unsat. 2021: majority vote over
// sat/unsat reports, exact ties Undetermined. A provided oracle label
// overrides the vote (but never a validated witness).
GroundTruth derive_ground_truth(std::span<const runner::VerdictRecord> records,
                                const RuleSet& rules,
                                const ValidityMap& witness_valid,
                                std::optional<TruthLabel> oracle_label,
                                bool attack_found_sat);

// Base points for one record under the published point tables.
double score_instance(const runner::VerdictRecord& record,
                      const GroundTruth& truth, const RuleSet& rules,
                      bool witness_valid);

// Time bonuses over tools with positive base points: equivalence classes by
// the transitive closure of |ta-tb| < equal_margin or both < small_floor;
// the fastest class gets bonus_fastest each, the next bonus_second each.
// No bonuses unless at least two tools attempted the instance.
std::map<std::string, double> time_bonus(
    std::span<const runner::VerdictRecord> records,
    const std::map<std::string, double>& base_points, const RuleSet& rules);

struct ScoreTable {
    std::vector<std::string> tools;       // sorted
    std::vector<std::string> benchmarks;  // sorted
    std::map<std::pair<std::string, std::string>, double> points;   // (tool, benchmark)
    std::map<std::string, double> max_points;                       // per benchmark
    std::map<std::pair<std::string, std::string>, double> percent;  // 100*points/max
    std::map<std::string, double> totals;   // sum of percents
    std::map<std::string, int> solved;      // instances with positive base points
    std::vector<std::string> ranking;       // by total desc, solved desc, name asc
};

ScoreTable build_score_table(
    std::span<const runner::VerdictRecord> records,
    const std::map<InstanceKey, GroundTruth>& truths, const RuleSet& rules,
    const std::map<InstanceKey, ValidityMap>& validity);

// True iff the record earns positive base points (used for cactus data).
bool is_correct(const runner::VerdictRecord& record, const GroundTruth& truth,
                const RuleSet& rules, bool witness_valid);

}  // namespace vnna::scoring
