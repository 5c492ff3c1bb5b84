#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "support/paths.hpp"
#include "support/tmpdir.hpp"
#include "vnnarena/config.hpp"
#include "vnnarena/errors.hpp"
#include "vnnarena/textutil.hpp"

using namespace vnna;

namespace {

struct CliResult {
    int exit_code;
    std::string stdout_text;
};

CliResult run_cli(const std::string& args) {
    support::TmpDir tmp("cli_out");
    auto out_path = tmp.path() / "stdout.txt";
    std::string cmd = support::arena_binary().string() + " " + args + " > " +
                      out_path.string() + " 2> " +
                      (tmp.path() / "stderr.txt").string();
    int status = std::system(cmd.c_str());
    CliResult res;
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_path);
    res.stdout_text.assign(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
    return res;
}

}  // namespace

TEST_CASE("config parsing is strict") {
    auto good = config::parse_config(
        "workdir = scratch\n"
        "rules = 2022\n"
        "seed = 7\n"
        "tol_input = 1e-6\n"
        "time_budget = 5\n",
        "/tmp");
    CHECK(good.rules == scoring::RulesYear::R2022);
    CHECK(good.seed == 7);
    CHECK(good.verifier.seed == 7);
    CHECK(good.tol.input == 1e-6);
    CHECK(good.verifier.time_budget == 5);

    CHECK_THROWS_AS(config::parse_config("wrkdir = typo\n", "/tmp"),
                    ConfigError);
    CHECK_THROWS_AS(config::parse_config("[tool]\nname = a\n", "/tmp"),
                    ConfigError);  // missing run command
    CHECK_THROWS_AS(config::parse_config("[widget]\n", "/tmp"), ConfigError);
    CHECK_THROWS_AS(config::parse_config("rules = 2020\n", "/tmp"),
                    ConfigError);
    CHECK_THROWS_AS(
        config::parse_config("[benchmark]\nname = x\ninstances = void.csv\n",
                             "/tmp"),
        MissingFile);
}

TEST_CASE("verify subcommand honors the adapter contract") {
    support::TmpDir tmp("verify");
    auto out_file = tmp.path() / "out.txt";
    auto res = run_cli("verify " + support::fixture("nets/identity_1.txt") +
                       " " + support::fixture("vnnlib/prop_01.vnnlib") +
                       " 10 " + out_file.string());
    CHECK(res.exit_code == 0);
    auto result_text = text::read_file(out_file);
    CHECK(result_text.rfind("sat\n", 0) == 0);
    CHECK(result_text.find("X_0") != std::string::npos);  // witness follows

    // an unsatisfiable property answers unsat on line 1
    auto out2 = tmp.path() / "out2.txt";
    std::string unsat_prop =
        "(declare-const X_0 Real)(declare-const Y_0 Real)"
        "(assert (>= X_0 0.0))(assert (<= X_0 1.0))(assert (>= Y_0 2.0))";
    auto prop_path = tmp.path() / "unsat.vnnlib";
    text::write_file(prop_path, unsat_prop);
    auto res2 = run_cli("verify " + support::fixture("nets/identity_1.txt") +
                        " " + prop_path.string() + " 10 " + out2.string());
    CHECK(res2.exit_code == 0);
    CHECK(text::read_file(out2).rfind("unsat\n", 0) == 0);
}

TEST_CASE("usage errors exit with code 2, domain errors with 1") {
    CHECK(run_cli("frobnicate").exit_code == 2);
    CHECK(run_cli("verify only_one_arg").exit_code == 2);
    CHECK(run_cli("verify missing.txt missing.vnnlib 10 out.txt").exit_code ==
          1);
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("selfcheck").exit_code == 0);
}

TEST_CASE("validate-witness reports and exit codes") {
    support::TmpDir tmp("valw");
    auto witness_ok = tmp.path() / "w_ok.txt";
    text::write_file(witness_ok, "((X_0 0.75))\n");
    auto res = run_cli("validate-witness " +
                       support::fixture("nets/identity_1.txt") + " " +
                       support::fixture("vnnlib/prop_01.vnnlib") + " " +
                       witness_ok.string());
    CHECK(res.exit_code == 0);
    CHECK(res.stdout_text.find("verdict=Valid") != std::string::npos);

    auto witness_bad = tmp.path() / "w_bad.txt";
    text::write_file(witness_bad, "((X_0 0.25))\n");
    auto res2 = run_cli("validate-witness " +
                        support::fixture("nets/identity_1.txt") + " " +
                        support::fixture("vnnlib/prop_01.vnnlib") + " " +
                        witness_bad.string());
    CHECK(res2.exit_code == 1);
    CHECK(res2.stdout_text.find("verdict=InvalidOutput") != std::string::npos);
}

TEST_CASE("falsify finds witnesses for satisfiable properties") {
    auto res = run_cli("falsify " + support::fixture("nets/identity_1.txt") +
                       " " + support::fixture("vnnlib/prop_01.vnnlib"));
    CHECK(res.exit_code == 0);
    CHECK(res.stdout_text.rfind("sat\n", 0) == 0);
}

TEST_CASE("score command reproduces the golden tables from a store") {
    support::TmpDir tmp("score");
    auto res = run_cli("score --store " +
                       support::fixture("scoring/store_2021.kv") +
                       " --rules 2021 --truths " +
                       support::fixture("scoring/truths_2021.kv") + " --out " +
                       tmp.path().string());
    CHECK(res.exit_code == 0);
    CHECK(text::read_file(tmp.path() / "scores.csv") ==
          text::read_file(support::fixture("golden/scores.csv")));
    CHECK(text::read_file(tmp.path() / "totals.csv") ==
          text::read_file(support::fixture("golden/totals.csv")));
}

TEST_CASE("report command emits cactus and audit files") {
    support::TmpDir tmp("report");
    auto res = run_cli("report --store " +
                       support::fixture("scoring/store_2022.kv") +
                       " --rules 2022 --out " + tmp.path().string());
    CHECK(res.exit_code == 0);
    CHECK(std::filesystem::exists(tmp.path() / "scores.csv"));
    CHECK(std::filesystem::exists(tmp.path() / "cactus_alpha.csv"));
    CHECK(std::filesystem::exists(tmp.path() / "audit_c1.txt"));
    auto audit = text::read_file(tmp.path() / "audit_c1.txt");
    CHECK(audit.find("witness invalid") != std::string::npos);
    CHECK(audit.find("truth: sat [witness]") != std::string::npos);
}

TEST_CASE("inspect summarizes properties and networks") {
    auto res =
        run_cli("inspect " + support::fixture("vnnlib/prop_07.vnnlib"));
    CHECK(res.exit_code == 0);
    CHECK(res.stdout_text.find("disjuncts: 2") != std::string::npos);

    auto res2 = run_cli("inspect " + support::fixture("nets/relu_222.txt"));
    CHECK(res2.exit_code == 0);
    CHECK(res2.stdout_text.find("d_in: 2") != std::string::npos);

    auto res3 = run_cli("inspect " + support::fixture("onnx/residual.onnx"));
    CHECK(res3.exit_code == 0);
    CHECK(res3.stdout_text.find("add") != std::string::npos);
}
