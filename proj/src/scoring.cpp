#include "vnnarena/scoring.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace vnna::scoring {

using runner::RunStatus;
using runner::VerdictRecord;

RuleSet RuleSet::r2021() {
    RuleSet r;
    r.year = RulesYear::R2021;
    r.time_bonus_enabled = true;
    return r;
}

RuleSet RuleSet::r2022(bool time_bonus) {
    RuleSet r;
    r.year = RulesYear::R2022;
    r.time_bonus_enabled = time_bonus;
    return r;
}

std::string_view truth_label_name(TruthLabel l) {
    switch (l) {
        case TruthLabel::Sat: return "sat";
        case TruthLabel::Unsat: return "unsat";
        case TruthLabel::Undetermined: return "undetermined";
    }
    return "?";
}

GroundTruth derive_ground_truth(std::span<const VerdictRecord> records,
                                const RuleSet& rules,
                                const ValidityMap& witness_valid,
                                std::optional<TruthLabel> oracle_label,
                                bool attack_found_sat) {
    GroundTruth truth;
    if (!records.empty()) {
        truth.benchmark = records.front().benchmark;
        truth.instance = records.front().instance;
    }

    // witness validity only carries evidential weight under the 2022
    // burden-of-proof rule; the 2021 vote never consults it
    bool any_valid_witness = false;
    if (rules.year == RulesYear::R2022) {
        for (const VerdictRecord& r : records) {
            if (r.status != RunStatus::Sat) continue;
            auto it = witness_valid.find(r.tool);
            if (it != witness_valid.end() && it->second)
                any_valid_witness = true;
        }
    }

    if (any_valid_witness) {
        // a concrete validated counterexample settles the instance
        truth.label = TruthLabel::Sat;
        truth.basis = TruthBasis::ValidatedWitness;
    } else if (oracle_label) {
        truth.label = *oracle_label;
        truth.basis = TruthBasis::Oracle;
    } else if (rules.year == RulesYear::R2022) {
        bool any_unsat = false;
        for (const VerdictRecord& r : records)
            if (r.status == RunStatus::Unsat) any_unsat = true;
        truth.label = any_unsat ? TruthLabel::Unsat : TruthLabel::Undetermined;
        truth.basis = TruthBasis::MajorityVote;
    } else {
        int sat_votes = 0, unsat_votes = 0;
        for (const VerdictRecord& r : records) {
            if (r.status == RunStatus::Sat) ++sat_votes;
            if (r.status == RunStatus::Unsat) ++unsat_votes;
        }
        if (sat_votes > unsat_votes)
            truth.label = TruthLabel::Sat;
        else if (unsat_votes > sat_votes)
            truth.label = TruthLabel::Unsat;
        else
            truth.label = TruthLabel::Undetermined;
        truth.basis = TruthBasis::MajorityVote;
    }

    truth.simple_sat = truth.label == TruthLabel::Sat && attack_found_sat;
    return truth;
}

double score_instance(const VerdictRecord& record, const GroundTruth& truth,
                      const RuleSet& rules, bool witness_valid) {
    if (rules.year == RulesYear::R2022) {
        if (record.status == RunStatus::Sat)
            return witness_valid ? rules.correct_points : -rules.penalty_points;
        if (record.status == RunStatus::Unsat) {
            if (truth.label == TruthLabel::Sat) return -rules.penalty_points;
            if (truth.label == TruthLabel::Unsat) return rules.correct_points;
            return 0;
        }
        return 0;
    }

    // 2021 rules: majority-vote truth, simple/complex SAT tiers
    if (truth.label == TruthLabel::Undetermined) return 0;
    if (record.status == RunStatus::Sat) {
        if (truth.label == TruthLabel::Sat)
            return truth.simple_sat ? rules.simple_sat_points
                                    : rules.correct_points;
        return -rules.penalty_points;
    }
    if (record.status == RunStatus::Unsat) {
        if (truth.label == TruthLabel::Unsat) return rules.correct_points;
        return -rules.penalty_points;
    }
    return 0;
}

bool is_correct(const VerdictRecord& record, const GroundTruth& truth,
                const RuleSet& rules, bool witness_valid) {
    return score_instance(record, truth, rules, witness_valid) > 0;
}

std::map<std::string, double> time_bonus(
    std::span<const VerdictRecord> records,
    const std::map<std::string, double>& base_points, const RuleSet& rules) {
    std::map<std::string, double> bonuses;
    if (!rules.time_bonus_enabled) return bonuses;
    if (records.size() < 2) return bonuses;  // nobody to race against

    struct Entry {
        double t;
        std::string tool;
    };
    std::vector<Entry> scored;
    for (const VerdictRecord& r : records) {
        auto it = base_points.find(r.tool);
        if (it != base_points.end() && it->second > 0)
            scored.push_back({r.adjusted_runtime, r.tool});
    }
    if (scored.empty()) return bonuses;
    std::sort(scored.begin(), scored.end(), [](const Entry& a, const Entry& b) {
        return a.t < b.t || (a.t == b.t && a.tool < b.tool);
    });

    // consecutive chaining realizes the transitive closure on sorted times
    std::vector<std::vector<std::string>> classes;
    classes.push_back({scored[0].tool});
    for (std::size_t i = 1; i < scored.size(); ++i) {
        double prev = scored[i - 1].t, cur = scored[i].t;
        bool equal = (cur - prev) < rules.equal_margin ||
                     (prev < rules.small_floor && cur < rules.small_floor);
        if (equal)
            classes.back().push_back(scored[i].tool);
        else
            classes.push_back({scored[i].tool});
    }

    for (const std::string& tool : classes[0]) bonuses[tool] = rules.bonus_fastest;
    if (classes.size() > 1)
        for (const std::string& tool : classes[1])
            bonuses[tool] = rules.bonus_second;
    return bonuses;
}

ScoreTable build_score_table(
    std::span<const VerdictRecord> records,
    const std::map<InstanceKey, GroundTruth>& truths, const RuleSet& rules,
    const std::map<InstanceKey, ValidityMap>& validity) {
    ScoreTable table;

    std::set<std::string> tool_set, bench_set;
    std::map<InstanceKey, std::vector<const VerdictRecord*>> by_instance;
    for (const VerdictRecord& r : records) {
        tool_set.insert(r.tool);
        bench_set.insert(r.benchmark);
        by_instance[{r.benchmark, r.instance}].push_back(&r);
    }
    table.tools.assign(tool_set.begin(), tool_set.end());
    table.benchmarks.assign(bench_set.begin(), bench_set.end());

    for (const std::string& t : table.tools) {
        table.solved[t] = 0;
        for (const std::string& b : table.benchmarks)
            table.points[{t, b}] = 0;
    }

    for (const auto& [key, recs] : by_instance) {
        auto truth_it = truths.find(key);
        GroundTruth truth;
        if (truth_it != truths.end()) truth = truth_it->second;
        const ValidityMap* vmap = nullptr;
        if (auto vit = validity.find(key); vit != validity.end())
            vmap = &vit->second;

        std::map<std::string, double> base;
        std::vector<VerdictRecord> recs_copy;
        for (const VerdictRecord* r : recs) {
            bool wv = false;
            if (vmap) {
                auto it = vmap->find(r->tool);
                wv = it != vmap->end() && it->second;
            }
            double pts = score_instance(*r, truth, rules, wv);
            base[r->tool] = pts;
            table.points[{r->tool, key.benchmark}] += pts;
            if (pts > 0) table.solved[r->tool] += 1;
            recs_copy.push_back(*r);
        }
        if (truth.label != TruthLabel::Undetermined) {
            for (const auto& [tool, bonus] : time_bonus(recs_copy, base, rules))
                table.points[{tool, key.benchmark}] += bonus;
        }
    }

    for (const std::string& b : table.benchmarks) {
        double mx = -std::numeric_limits<double>::infinity();
        for (const std::string& t : table.tools)
            mx = std::max(mx, table.points[{t, b}]);
        table.max_points[b] = mx;
        for (const std::string& t : table.tools) {
            double pct = 0;
            if (mx > 0) pct = 100.0 * table.points[{t, b}] / mx;
            table.percent[{t, b}] = pct;
        }
    }

    for (const std::string& t : table.tools) {
        double total = 0;
        for (const std::string& b : table.benchmarks)
            total += table.percent[{t, b}];
        table.totals[t] = total;
    }

    table.ranking = table.tools;
    std::sort(table.ranking.begin(), table.ranking.end(),
              [&](const std::string& a, const std::string& b) {
                  double ta = table.totals[a], tb = table.totals[b];
                  if (ta != tb) return ta > tb;
                  int sa = table.solved[a], sb = table.solved[b];
                  if (sa != sb) return sa > sb;
                  return a < b;
              });
    return table;
}

}  // namespace vnna::scoring
