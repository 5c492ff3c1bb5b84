#include "vnnarena/report.hpp"

#include <algorithm>
#include <sstream>

#include "vnnarena/errors.hpp"
#include "vnnarena/textutil.hpp"

namespace vnna::report {

using runner::VerdictRecord;
using scoring::GroundTruth;
using scoring::InstanceKey;
using scoring::ValidityMap;

std::vector<CactusSeries> cactus_data(
    std::span<const VerdictRecord> records,
    const std::map<InstanceKey, GroundTruth>& truths,
    const scoring::RuleSet& rules,
    const std::map<InstanceKey, ValidityMap>& validity) {
    std::map<std::string, std::vector<double>> solve_times;
    for (const VerdictRecord& r : records) {
        solve_times.try_emplace(r.tool);
        InstanceKey key{r.benchmark, r.instance};
        auto t = truths.find(key);
        if (t == truths.end()) continue;
        bool wv = false;
        if (auto v = validity.find(key); v != validity.end()) {
            auto it = v->second.find(r.tool);
            wv = it != v->second.end() && it->second;
        }
        if (scoring::is_correct(r, t->second, rules, wv))
            solve_times[r.tool].push_back(r.adjusted_runtime);
    }

    std::vector<CactusSeries> out;
    for (auto& [tool, times] : solve_times) {
        CactusSeries series;
        series.tool = tool;
        std::sort(times.begin(), times.end());
        for (std::size_t i = 0; i < times.size(); ++i)
            series.points.push_back({static_cast<int>(i) + 1, times[i]});
        out.push_back(std::move(series));
    }
    return out;
}

namespace {

std::string fmt(double v) { return text::format_sig6(v); }

void write_scores(const scoring::ScoreTable& table, Format format,
                  const std::filesystem::path& out_dir) {
    std::ostringstream out;
    if (format == Format::Csv) {
        out << "tool,benchmark,points,percent\n";
        for (const std::string& t : table.tools)
            for (const std::string& b : table.benchmarks)
                out << t << "," << b << "," << fmt(table.points.at({t, b}))
                    << "," << fmt(table.percent.at({t, b})) << "\n";
        text::write_file(out_dir / "scores.csv", out.str());
    } else {
        out << "scores\n";
        for (const std::string& t : table.tools)
            for (const std::string& b : table.benchmarks)
                out << "  " << t << " / " << b << ": "
                    << fmt(table.points.at({t, b})) << " points, "
                    << fmt(table.percent.at({t, b})) << "%\n";
        text::write_file(out_dir / "scores.txt", out.str());
    }
}

void write_totals(const scoring::ScoreTable& table, Format format,
                  const std::filesystem::path& out_dir) {
    std::ostringstream out;
    if (format == Format::Csv) {
        out << "rank,tool,total\n";
        for (std::size_t i = 0; i < table.ranking.size(); ++i)
            out << (i + 1) << "," << table.ranking[i] << ","
                << fmt(table.totals.at(table.ranking[i])) << "\n";
        text::write_file(out_dir / "totals.csv", out.str());
    } else {
        out << "ranking\n";
        for (std::size_t i = 0; i < table.ranking.size(); ++i)
            out << "  " << (i + 1) << ". " << table.ranking[i] << " ("
                << fmt(table.totals.at(table.ranking[i])) << ")\n";
        text::write_file(out_dir / "totals.txt", out.str());
    }
}

void write_cactus(const std::vector<CactusSeries>& cactus, Format format,
                  const std::filesystem::path& out_dir) {
    for (const CactusSeries& series : cactus) {
        std::ostringstream out;
        const char* ext = format == Format::Csv ? ".csv" : ".txt";
        if (format == Format::Csv)
            out << "solved,time\n";
        else
            out << "solved  time\n";
        for (const auto& [count, t] : series.points) {
            if (format == Format::Csv)
                out << count << "," << fmt(t) << "\n";
            else
                out << "  " << count << "  " << fmt(t) << "\n";
        }
        text::write_file(
            out_dir / ("cactus_" + text::sanitize_name(series.tool) + ext),
            out.str());
    }
}

void write_audits(
    std::span<const VerdictRecord> records,
    const std::map<InstanceKey, GroundTruth>& truths,
    const std::map<InstanceKey, ValidityMap>& validity,
    const std::filesystem::path& out_dir) {
    std::map<std::string, std::map<int, std::vector<const VerdictRecord*>>>
        grouped;
    for (const VerdictRecord& r : records)
        grouped[r.benchmark][r.instance].push_back(&r);

    for (auto& [bench, instances] : grouped) {
        std::ostringstream out;
        out << "benchmark " << bench << "\n";
        for (auto& [idx, recs] : instances) {
            InstanceKey key{bench, idx};
            out << "instance " << idx << "\n";
            auto t = truths.find(key);
            if (t != truths.end()) {
                out << "  truth: "
                    << scoring::truth_label_name(t->second.label);
                if (t->second.simple_sat) out << " (simple)";
                switch (t->second.basis) {
                    case scoring::TruthBasis::MajorityVote:
                        out << " [vote]";
                        break;
                    case scoring::TruthBasis::ValidatedWitness:
                        out << " [witness]";
                        break;
                    case scoring::TruthBasis::Oracle:
                        out << " [oracle]";
                        break;
                }
                out << "\n";
            } else {
                out << "  truth: unknown\n";
            }
            std::sort(recs.begin(), recs.end(),
                      [](const VerdictRecord* a, const VerdictRecord* b) {
                          return a->tool < b->tool;
                      });
            for (const VerdictRecord* r : recs) {
                out << "  " << r->tool << ": "
                    << runner::run_status_name(r->status) << " in "
                    << fmt(r->adjusted_runtime) << " s";
                if (r->status == runner::RunStatus::Sat) {
                    bool have = false, wv = false;
                    if (auto v = validity.find(key); v != validity.end()) {
                        auto it = v->second.find(r->tool);
                        if (it != v->second.end()) {
                            have = true;
                            wv = it->second;
                        }
                    }
                    out << (have ? (wv ? ", witness valid" : ", witness invalid")
                                 : ", witness unchecked");
                }
                if (!r->diagnostics.empty())
                    out << " (" << r->diagnostics << ")";
                out << "\n";
            }
        }
        text::write_file(
            out_dir / ("audit_" + text::sanitize_name(bench) + ".txt"),
            out.str());
    }
}

}  // namespace

void emit_score_tables(const scoring::ScoreTable& table, Format format,
                       const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_scores(table, format, out_dir);
    write_totals(table, format, out_dir);
}

void emit_reports(const scoring::ScoreTable& table,
                  const std::vector<CactusSeries>& cactus,
                  std::span<const VerdictRecord> records,
                  const std::map<InstanceKey, GroundTruth>& truths,
                  const std::map<InstanceKey, ValidityMap>& validity,
                  Format format, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_scores(table, format, out_dir);
    write_totals(table, format, out_dir);
    write_cactus(cactus, format, out_dir);
    write_audits(records, truths, validity, out_dir);
}

}  // namespace vnna::report
