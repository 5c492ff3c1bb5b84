// vnn-arena: competition harness CLI. The `verify` subcommand doubles as a
// tool adapter (network property timeout result_file), so the built-in
// verifier can compete like any external entrant.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "vnnarena/config.hpp"
#include "vnnarena/errors.hpp"
#include "vnnarena/netio.hpp"
#include "vnnarena/refverify.hpp"
#include "vnnarena/report.hpp"
#include "vnnarena/runner.hpp"
#include "vnnarena/scoring.hpp"
#include "vnnarena/speclang.hpp"
#include "vnnarena/store.hpp"
#include "vnnarena/textutil.hpp"
#include "vnnarena/witness.hpp"

namespace fs = std::filesystem;
using namespace vnna;

namespace {

fs::path default_workdir() {
    if (const char* env = std::getenv("VNN_ARENA_WORKDIR"))
        return fs::path(env);
    return fs::path("vnn_arena_work");
}

spec::AdversarialQuery load_query(const std::string& path) {
    return spec::parse_vnnlib(text::read_file(path));
}

// ---------------------------------------------------------------- truths ---

struct TruthHint {
    std::optional<scoring::TruthLabel> oracle;
    bool simple = false;
};

std::map<scoring::InstanceKey, TruthHint> load_truths(const fs::path& path) {
    std::map<scoring::InstanceKey, TruthHint> out;
    std::istringstream in{text::read_file(path)};
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        std::string t = text::trim(line);
        if (t.empty() || t[0] == '#') continue;
        scoring::InstanceKey key;
        TruthHint hint;
        bool have_bench = false, have_idx = false;
        for (const std::string& tok : text::split(t, ' ')) {
            if (tok.empty()) continue;
            auto eq = tok.find('=');
            if (eq == std::string::npos)
                throw SyntaxError("truths token without '='", line_number, 1);
            std::string key_name = tok.substr(0, eq);
            std::string value = tok.substr(eq + 1);
            if (key_name == "benchmark") {
                key.benchmark = text::kv_unescape(value);
                have_bench = true;
            } else if (key_name == "instance") {
                double v;
                if (!text::try_parse_double(value, v) ||
                    v != static_cast<int>(v) || v < 0)
                    throw SyntaxError("bad instance index '" + value + "'",
                                      line_number, 1);
                key.instance = static_cast<int>(v);
                have_idx = true;
            } else if (key_name == "oracle") {
                if (value == "sat")
                    hint.oracle = scoring::TruthLabel::Sat;
                else if (value == "unsat")
                    hint.oracle = scoring::TruthLabel::Unsat;
                else if (value == "undetermined")
                    hint.oracle = scoring::TruthLabel::Undetermined;
                else
                    throw SyntaxError("bad oracle label '" + value + "'",
                                      line_number, 1);
            } else if (key_name == "simple") {
                hint.simple = value == "1";
            } else {
                throw SyntaxError("unknown truths field '" + key_name + "'",
                                  line_number, 1);
            }
        }
        if (!have_bench || !have_idx)
            throw SyntaxError("truths line needs benchmark= and instance=",
                              line_number, 1);
        out[key] = hint;
    }
    return out;
}

// ------------------------------------------------------- scoring pipeline ---

struct ScoringInputs {
    std::vector<runner::VerdictRecord> records;
    std::map<scoring::InstanceKey, scoring::ValidityMap> validity;
    std::map<scoring::InstanceKey, scoring::GroundTruth> truths;
};

ScoringInputs prepare_scoring(const fs::path& store_path,
                              const scoring::RuleSet& rules,
                              const std::optional<fs::path>& truths_path,
                              const std::optional<fs::path>& config_path,
                              std::uint64_t seed) {
    ScoringInputs si;
    std::map<scoring::InstanceKey, std::vector<runner::VerdictRecord>> grouped;
    for (const store::Entry& e : store::load(store_path)) {
        si.records.push_back(e.record);
        scoring::InstanceKey key{e.record.benchmark, e.record.instance};
        grouped[key].push_back(e.record);
        if (e.witness_valid)
            si.validity[key][e.record.tool] = *e.witness_valid;
    }

    std::map<scoring::InstanceKey, TruthHint> hints;
    if (truths_path) hints = load_truths(*truths_path);

    // With a config at hand, tag "easy" SAT instances with the budgeted
    // harness attack (the 2021 simple/complex split).
    std::map<scoring::InstanceKey, bool> attack_sat;
    if (config_path && rules.year == scoring::RulesYear::R2021) {
        config::HarnessConfig cfg = config::load_config(*config_path);
        verify::VerifierConfig vc = cfg.verifier;
        vc.seed = seed;
        for (const auto& bench : cfg.benchmarks) {
            auto rows = runner::load_instances(
                text::read_file(bench.instances_csv),
                fs::path(bench.instances_csv).parent_path(), bench.name);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                scoring::InstanceKey key{bench.name, static_cast<int>(i)};
                if (!grouped.count(key)) continue;
                try {
                    auto net = net::load_network_file(rows[i].network_path);
                    auto query = load_query(rows[i].spec_path);
                    attack_sat[key] =
                        verify::pgd_attack(net, query, vc).has_value();
                } catch (const Error&) {
                    attack_sat[key] = false;
                }
            }
        }
    }

    for (const auto& [key, records] : grouped) {
        TruthHint hint;
        if (auto it = hints.find(key); it != hints.end()) hint = it->second;
        bool simple = hint.simple;
        if (auto it = attack_sat.find(key); it != attack_sat.end())
            simple = simple || it->second;
        scoring::ValidityMap vmap;
        if (auto it = si.validity.find(key); it != si.validity.end())
            vmap = it->second;
        si.truths[key] = scoring::derive_ground_truth(
            records, rules, vmap, hint.oracle, simple);
    }
    return si;
}

void print_query_summary(const spec::AdversarialQuery& q) {
    std::cout << "inputs: " << q.num_inputs << "\n";
    std::cout << "outputs: " << q.num_outputs << "\n";
    std::cout << "disjuncts: " << q.disjuncts.size() << "\n";
    for (std::size_t i = 0; i < q.disjuncts.size(); ++i) {
        const spec::Disjunct& d = q.disjuncts[i];
        std::cout << "  disjunct " << i << ": "
                  << d.output_constraints.size() << " output constraints, box";
        if (d.box.empty()) {
            std::cout << " empty";
        } else {
            for (std::size_t k = 0; k < d.box.lower.size() && k < 4; ++k)
                std::cout << " [" << text::format_double(d.box.lower[k]) << ", "
                          << text::format_double(d.box.upper[k]) << "]";
            if (d.box.lower.size() > 4) std::cout << " ...";
        }
        std::cout << "\n";
    }
}

void print_network_summary(const net::NetworkGraph& g) {
    std::cout << "d_in: " << g.d_in << "\n";
    std::cout << "d_out: " << g.d_out << "\n";
    std::cout << "nodes: " << g.nodes.size() << "\n";
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const net::OpNode& n = g.nodes[i];
        std::cout << "  " << i << ": " << net::op_kind_name(n.kind) << " <-";
        for (int ref : n.inputs)
            std::cout << " " << (ref == net::kGraphInput
                                     ? std::string("input")
                                     : std::to_string(ref));
        std::cout << " -> (";
        for (std::size_t k = 0; k < n.out_shape.size(); ++k)
            std::cout << (k ? "x" : "") << n.out_shape[k];
        std::cout << ")\n";
    }
}

int run_selfcheck() {
    auto check = [](const char* name, bool ok) {
        std::cout << (ok ? "ok " : "FAIL ") << name << "\n";
        if (!ok) throw Error(std::string("selfcheck failed: ") + name);
    };

    net::NetworkGraph ident = net::load_network_text(
        "inputs 1\noutputs 1\ndense 1 1\n1\n0\n");
    check("identity network loads", ident.d_in == 1 && ident.d_out == 1);

    auto q = spec::parse_vnnlib(
        "(declare-const X_0 Real)(declare-const Y_0 Real)"
        "(assert (>= X_0 0.0))(assert (<= X_0 1.0))(assert (>= Y_0 0.5))");
    check("property parses", q.disjuncts.size() == 1);

    auto sat = verify::verify(ident, q, {});
    check("feasible query is sat", sat.status == verify::Status::Sat &&
                                       sat.witness.has_value());

    auto q2 = spec::parse_vnnlib(
        "(declare-const X_0 Real)(declare-const Y_0 Real)"
        "(assert (>= X_0 0.0))(assert (<= X_0 1.0))(assert (>= Y_0 2.0))");
    auto unsat = verify::verify(ident, q2, {});
    check("infeasible query is unsat", unsat.status == verify::Status::Unsat);

    witness::Witness w = witness::parse_witness("((X_0 0.75))");
    auto report = witness::validate(w, q, ident);
    check("witness validates", report.verdict == witness::Verdict::Valid);

    scoring::RuleSet rules = scoring::RuleSet::r2021();
    runner::VerdictRecord rec;
    rec.tool = "t";
    rec.benchmark = "b";
    rec.status = runner::RunStatus::Sat;
    scoring::GroundTruth truth;
    truth.label = scoring::TruthLabel::Sat;
    check("scoring applies the point table",
          scoring::score_instance(rec, truth, rules, false) == 10);

    std::cout << "selfcheck passed\n";
    return 0;
}

std::optional<bool> witness_validation_hook(const runner::InstanceRow& row,
                                            const std::string& witness_text) {
    try {
        auto netg = net::load_network_file(row.network_path);
        auto query = load_query(row.spec_path);
        auto report = witness::validate_text(witness_text, query, netg);
        return report.verdict == witness::Verdict::Valid;
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vnn-arena: neural network verification competition harness"};
    app.require_subcommand(1);

    // ---- inspect ----
    std::string inspect_path;
    auto* cmd_inspect =
        app.add_subcommand("inspect", "Summarize a network, property or store");
    cmd_inspect->add_option("path", inspect_path, "file to inspect")
        ->required();

    // ---- verify ----
    std::string v_net, v_prop, v_result;
    double v_timeout = 10;
    std::uint64_t v_seed = 0;
    bool v_no_attack = false;
    int v_max_depth = 20;
    long v_max_subproblems = 10000;
    auto* cmd_verify = app.add_subcommand(
        "verify",
        "Decide a property (adapter contract: network property timeout "
        "[result_file])");
    cmd_verify->add_option("network", v_net)->required();
    cmd_verify->add_option("property", v_prop)->required();
    cmd_verify->add_option("timeout", v_timeout)->required();
    cmd_verify->add_option("result_file", v_result);
    cmd_verify->add_option("--seed", v_seed, "rng seed (default 0)");
    cmd_verify->add_flag("--no-attack", v_no_attack, "skip the attack phase");
    cmd_verify->add_option("--max-depth", v_max_depth);
    cmd_verify->add_option("--max-subproblems", v_max_subproblems);

    // ---- falsify ----
    std::string f_net, f_prop, f_result;
    std::uint64_t f_seed = 0;
    int f_steps = 30, f_restarts = 5;
    auto* cmd_falsify =
        app.add_subcommand("falsify", "Run only the projected-gradient attack");
    cmd_falsify->add_option("network", f_net)->required();
    cmd_falsify->add_option("property", f_prop)->required();
    cmd_falsify->add_option("result_file", f_result);
    cmd_falsify->add_option("--seed", f_seed);
    cmd_falsify->add_option("--steps", f_steps);
    cmd_falsify->add_option("--restarts", f_restarts);

    // ---- validate-witness ----
    std::string w_net, w_prop, w_file;
    double w_tol_in = 1e-7, w_tol_out = 0.0;
    auto* cmd_validate = app.add_subcommand(
        "validate-witness", "Check a counterexample against a property");
    cmd_validate->add_option("network", w_net)->required();
    cmd_validate->add_option("property", w_prop)->required();
    cmd_validate->add_option("witness", w_file)->required();
    cmd_validate->add_option("--tol-in", w_tol_in, "input tolerance");
    cmd_validate->add_option("--tol-out", w_tol_out, "output tolerance");

    // ---- measure-overhead ----
    std::string m_config;
    int m_repeats = 3;
    auto* cmd_overhead = app.add_subcommand(
        "measure-overhead", "Measure tool startup overhead on the trivial instance");
    cmd_overhead->add_option("config", m_config)->required();
    cmd_overhead->add_option("--repeats", m_repeats);

    // ---- run ----
    std::string r_config, r_store;
    auto* cmd_run =
        app.add_subcommand("run", "Execute a campaign over all tools/benchmarks");
    cmd_run->add_option("config", r_config)->required();
    cmd_run->add_option("--store", r_store, "override the verdict store path");

    // ---- score ----
    std::string s_store, s_rules, s_truths, s_config, s_out = ".";
    std::string s_bonus;
    std::uint64_t s_seed = 0;
    auto* cmd_score = app.add_subcommand("score", "Score a verdict store");
    cmd_score->add_option("--store", s_store)->required();
    cmd_score->add_option("--rules", s_rules, "2021 or 2022")->required();
    cmd_score->add_option("--truths", s_truths, "oracle/simple-sat sidecar");
    cmd_score->add_option("--config", s_config,
                          "harness config (enables simple-SAT attack tagging)");
    cmd_score->add_option("--out", s_out, "output directory");
    cmd_score->add_option("--time-bonus", s_bonus, "on or off");
    cmd_score->add_option("--seed", s_seed);

    // ---- report ----
    std::string p_store, p_rules, p_truths, p_config, p_out = ".";
    std::string p_bonus, p_format = "csv";
    std::uint64_t p_seed = 0;
    auto* cmd_report = app.add_subcommand(
        "report", "Emit score tables, cactus data and per-benchmark audits");
    cmd_report->add_option("--store", p_store)->required();
    cmd_report->add_option("--rules", p_rules, "2021 or 2022")->required();
    cmd_report->add_option("--truths", p_truths);
    cmd_report->add_option("--config", p_config);
    cmd_report->add_option("--out", p_out);
    cmd_report->add_option("--time-bonus", p_bonus, "on or off");
    cmd_report->add_option("--format", p_format, "csv or text");
    cmd_report->add_option("--seed", p_seed);

    // ---- selfcheck ----
    app.add_subcommand("selfcheck", "Run built-in sanity checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    auto parse_rules = [](const std::string& s, const std::string& bonus) {
        scoring::RuleSet rules;
        if (s == "2021")
            rules = scoring::RuleSet::r2021();
        else if (s == "2022")
            rules = scoring::RuleSet::r2022();
        else
            throw ConfigError("--rules must be 2021 or 2022");
        if (bonus == "on") rules.time_bonus_enabled = true;
        if (bonus == "off") rules.time_bonus_enabled = false;
        if (!bonus.empty() && bonus != "on" && bonus != "off")
            throw ConfigError("--time-bonus must be on or off");
        return rules;
    };

    try {
        if (app.got_subcommand(cmd_inspect)) {
            fs::path p(inspect_path);
            std::string ext = p.extension().string();
            if (ext == ".vnnlib") {
                print_query_summary(load_query(inspect_path));
            } else if (ext == ".onnx" || ext == ".txt" || ext == ".net") {
                print_network_summary(net::load_network_file(inspect_path));
            } else if (ext == ".kv") {
                auto entries = store::load(p);
                std::cout << "records: " << entries.size() << "\n";
            } else {
                throw Error("cannot infer file kind from extension '" + ext +
                            "'");
            }
            return 0;
        }

        if (app.got_subcommand(cmd_verify)) {
            auto netg = net::load_network_file(v_net);
            auto query = load_query(v_prop);
            verify::VerifierConfig vc;
            vc.seed = v_seed;
            vc.time_budget = v_timeout;
            vc.attack.enabled = !v_no_attack;
            vc.bab.max_depth = v_max_depth;
            vc.bab.max_subproblems = v_max_subproblems;
            auto outcome = verify::verify(netg, query, vc);

            std::ostringstream result;
            result << verify::status_name(outcome.status) << "\n";
            if (outcome.witness)
                result << witness::print_witness(*outcome.witness);
            if (!v_result.empty()) text::write_file(v_result, result.str());
            std::cout << result.str();
            std::cerr << "subproblems=" << outcome.stats.subproblems
                      << " attack_iterations="
                      << outcome.stats.attack_iterations << " elapsed="
                      << text::format_sig6(outcome.stats.elapsed_seconds)
                      << "s\n";
            return 0;
        }

        if (app.got_subcommand(cmd_falsify)) {
            auto netg = net::load_network_file(f_net);
            auto query = load_query(f_prop);
            verify::VerifierConfig vc;
            vc.seed = f_seed;
            vc.attack.steps = f_steps;
            vc.attack.restarts = f_restarts;
            auto w = verify::pgd_attack(netg, query, vc);
            std::ostringstream result;
            if (w) {
                result << "sat\n" << witness::print_witness(*w);
            } else {
                result << "unknown\n";
            }
            if (!f_result.empty()) text::write_file(f_result, result.str());
            std::cout << result.str();
            return 0;
        }

        if (app.got_subcommand(cmd_validate)) {
            auto netg = net::load_network_file(w_net);
            auto query = load_query(w_prop);
            witness::Tolerances tol{w_tol_in, w_tol_out};
            auto report =
                witness::validate_text(text::read_file(w_file), query, netg, tol);
            std::cout << witness::print_report(report);
            return report.verdict == witness::Verdict::Valid ? 0 : 1;
        }

        if (app.got_subcommand(cmd_overhead)) {
            config::HarnessConfig cfg = config::load_config(m_config);
            if (!cfg.trivial_network || !cfg.trivial_spec)
                throw ConfigError(
                    "config needs trivial_network and trivial_spec for "
                    "overhead measurement");
            runner::RunnerOptions opts;
            opts.workdir =
                cfg.workdir.empty() ? default_workdir() : cfg.workdir;
            runner::InstanceRow trivial{"trivial", *cfg.trivial_network,
                                        *cfg.trivial_spec, 60.0};
            std::ostringstream lines;
            for (runner::ToolAdapter& tool : cfg.tools) {
                double ov = runner::measure_overhead(tool, trivial, m_repeats,
                                                     opts);
                lines << "tool=" << text::kv_escape(tool.name)
                      << " overhead=" << text::format_double(ov) << "\n";
            }
            fs::create_directories(opts.workdir);
            text::write_file(opts.workdir / "overheads.kv", lines.str());
            std::cout << lines.str();
            return 0;
        }

        if (app.got_subcommand(cmd_run)) {
            config::HarnessConfig cfg = config::load_config(r_config);
            runner::RunnerOptions opts;
            opts.workdir =
                cfg.workdir.empty() ? default_workdir() : cfg.workdir;
            fs::create_directories(opts.workdir);
            fs::path store_path = !r_store.empty()
                                      ? fs::path(r_store)
                                      : (cfg.store ? fs::path(*cfg.store)
                                                   : opts.workdir / "store.kv");

            std::vector<runner::Benchmark> benchmarks;
            for (const auto& decl : cfg.benchmarks) {
                runner::Benchmark b;
                b.name = decl.name;
                b.rows = runner::load_instances(
                    text::read_file(decl.instances_csv),
                    fs::path(decl.instances_csv).parent_path(), decl.name);
                benchmarks.push_back(std::move(b));
            }

            // overheads: reuse measured values if present, else measure now
            fs::path overheads = opts.workdir / "overheads.kv";
            std::map<std::string, double> measured;
            if (fs::exists(overheads)) {
                std::istringstream in{text::read_file(overheads)};
                std::string line;
                while (std::getline(in, line)) {
                    std::string name, value;
                    for (const std::string& tok : text::split(line, ' ')) {
                        auto eq = tok.find('=');
                        if (eq == std::string::npos) continue;
                        if (tok.substr(0, eq) == "tool")
                            name = text::kv_unescape(tok.substr(eq + 1));
                        if (tok.substr(0, eq) == "overhead")
                            value = tok.substr(eq + 1);
                    }
                    double v;
                    if (!name.empty() && text::try_parse_double(value, v))
                        measured[name] = v;
                }
            }
            for (runner::ToolAdapter& tool : cfg.tools) {
                if (auto it = measured.find(tool.name); it != measured.end()) {
                    tool.overhead = it->second;
                } else if (cfg.trivial_network && cfg.trivial_spec) {
                    runner::InstanceRow trivial{"trivial",
                                                *cfg.trivial_network,
                                                *cfg.trivial_spec, 60.0};
                    runner::measure_overhead(tool, trivial, 3, opts);
                } else {
                    tool.overhead = 0.0;
                }
            }

            runner::run_campaign(cfg.tools, benchmarks, store_path, opts,
                                 witness_validation_hook);
            std::cout << "campaign complete: store at " << store_path.string()
                      << "\n";
            return 0;
        }

        if (app.got_subcommand(cmd_score)) {
            scoring::RuleSet rules = parse_rules(s_rules, s_bonus);
            auto si = prepare_scoring(
                s_store, rules,
                s_truths.empty() ? std::nullopt
                                 : std::optional<fs::path>(s_truths),
                s_config.empty() ? std::nullopt
                                 : std::optional<fs::path>(s_config),
                s_seed);
            auto table = scoring::build_score_table(si.records, si.truths,
                                                    rules, si.validity);
            report::emit_score_tables(table, report::Format::Csv, s_out);
            std::cout << "wrote " << (fs::path(s_out) / "scores.csv").string()
                      << " and totals.csv\n";
            return 0;
        }

        if (app.got_subcommand(cmd_report)) {
            scoring::RuleSet rules = parse_rules(p_rules, p_bonus);
            report::Format format = p_format == "text" ? report::Format::Text
                                                       : report::Format::Csv;
            if (p_format != "csv" && p_format != "text")
                throw ConfigError("--format must be csv or text");
            auto si = prepare_scoring(
                p_store, rules,
                p_truths.empty() ? std::nullopt
                                 : std::optional<fs::path>(p_truths),
                p_config.empty() ? std::nullopt
                                 : std::optional<fs::path>(p_config),
                p_seed);
            auto table = scoring::build_score_table(si.records, si.truths,
                                                    rules, si.validity);
            auto cactus =
                report::cactus_data(si.records, si.truths, rules, si.validity);
            report::emit_reports(table, cactus, si.records, si.truths,
                                 si.validity, format, p_out);
            std::cout << "reports written to " << p_out << "\n";
            return 0;
        }

        // selfcheck
        return run_selfcheck();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
