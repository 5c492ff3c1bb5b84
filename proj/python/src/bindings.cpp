// Python bindings for the harness core: specification parsing, network
// loading/evaluation, the reference verifier, witness validation and
// scoring. Process execution (the campaign runner) stays CLI-only.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vnnarena/errors.hpp"
#include "vnnarena/netio.hpp"
#include "vnnarena/refverify.hpp"
#include "vnnarena/report.hpp"
#include "vnnarena/scoring.hpp"
#include "vnnarena/speclang.hpp"
#include "vnnarena/witness.hpp"

namespace py = pybind11;
using namespace vnna;

namespace {

spec::AdversarialQuery robustness_query(std::vector<double> center,
                                        double epsilon, std::size_t target,
                                        std::size_t d_out,
                                        std::optional<double> clip_lower,
                                        std::optional<double> clip_upper) {
    spec::RobustnessParams params;
    params.center = std::move(center);
    params.epsilon = epsilon;
    params.target = target;
    params.clip_lower = clip_lower;
    params.clip_upper = clip_upper;
    return spec::make_robustness_query(params, params.center.size(), d_out);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "vnn-arena core: property parsing, network evaluation, "
              "reference verification, witness validation and scoring";

    py::register_exception<Error>(m, "HarnessError");

    // ---- speclang ----
    py::enum_<spec::VarKind>(m, "VarKind")
        .value("Input", spec::VarKind::Input)
        .value("Output", spec::VarKind::Output);

    py::class_<spec::VariableRef>(m, "VariableRef")
        .def(py::init([](spec::VarKind kind, std::size_t index) {
                 return spec::VariableRef{kind, index};
             }),
             py::arg("kind"), py::arg("index"))
        .def_readonly("kind", &spec::VariableRef::kind)
        .def_readonly("index", &spec::VariableRef::index);

    py::enum_<spec::Relation>(m, "Relation")
        .value("LessEq", spec::Relation::LessEq)
        .value("GreaterEq", spec::Relation::GreaterEq);

    py::class_<spec::LinearTerm>(m, "LinearTerm")
        .def_readonly("coefficient", &spec::LinearTerm::coefficient)
        .def_readonly("variable", &spec::LinearTerm::variable);

    py::class_<spec::LinearConstraint>(m, "LinearConstraint")
        .def(py::init([](std::vector<std::pair<double, std::size_t>> terms,
                         spec::Relation relation, double bound) {
                 spec::LinearConstraint c;
                 for (auto& [coeff, idx] : terms)
                     c.terms.push_back({coeff, spec::output_var(idx)});
                 c.relation = relation;
                 c.bound = bound;
                 return c;
             }),
             py::arg("output_terms"), py::arg("relation"), py::arg("bound"))
        .def_readonly("terms", &spec::LinearConstraint::terms)
        .def_readonly("relation", &spec::LinearConstraint::relation)
        .def_readonly("bound", &spec::LinearConstraint::bound);

    py::class_<spec::InputBox>(m, "InputBox")
        .def(py::init([](std::vector<double> lower, std::vector<double> upper) {
                 return spec::InputBox{std::move(lower), std::move(upper)};
             }),
             py::arg("lower"), py::arg("upper"))
        .def_readonly("lower", &spec::InputBox::lower)
        .def_readonly("upper", &spec::InputBox::upper)
        .def("empty", &spec::InputBox::empty);

    py::class_<spec::Disjunct>(m, "Disjunct")
        .def_readonly("box", &spec::Disjunct::box)
        .def_readonly("output_constraints", &spec::Disjunct::output_constraints);

    py::class_<spec::AdversarialQuery>(m, "AdversarialQuery")
        .def_readonly("num_inputs", &spec::AdversarialQuery::num_inputs)
        .def_readonly("num_outputs", &spec::AdversarialQuery::num_outputs)
        .def_readonly("disjuncts", &spec::AdversarialQuery::disjuncts)
        .def("__eq__", [](const spec::AdversarialQuery& a,
                          const spec::AdversarialQuery& b) { return a == b; });

    m.def("parse_vnnlib", [](const std::string& text) {
        return spec::parse_vnnlib(text);
    });
    m.def("print_vnnlib", &spec::print_vnnlib);
    m.def("make_robustness_query", &robustness_query, py::arg("center"),
          py::arg("epsilon"), py::arg("target"), py::arg("d_out"),
          py::arg("clip_lower") = std::nullopt,
          py::arg("clip_upper") = std::nullopt);
    m.def("make_unsafe_set_query", &spec::make_unsafe_set_query,
          py::arg("box"), py::arg("unsafe_disjuncts"), py::arg("d_out"));

    // ---- netio ----
    py::class_<net::NetworkGraph>(m, "NetworkGraph")
        .def_readonly("d_in", &net::NetworkGraph::d_in)
        .def_readonly("d_out", &net::NetworkGraph::d_out)
        .def_readonly("input_shape", &net::NetworkGraph::input_shape)
        .def_readonly("output_shape", &net::NetworkGraph::output_shape)
        .def_property_readonly("num_nodes", [](const net::NetworkGraph& g) {
            return g.nodes.size();
        });

    m.def("load_onnx", [](py::bytes data) {
        std::string buf = data;
        return net::load_onnx(std::span<const std::uint8_t>(
            reinterpret_cast<const std::uint8_t*>(buf.data()), buf.size()));
    });
    m.def("load_network_file", &net::load_network_file);
    m.def("load_network_text", [](const std::string& text) {
        return net::load_network_text(text);
    });
    m.def("evaluate", [](const net::NetworkGraph& g, std::vector<double> x) {
        return net::evaluate(g, x);
    });
    m.def(
        "input_gradient",
        [](const net::NetworkGraph& g, std::vector<double> x,
           std::size_t output_index) {
            return net::input_gradient(g, x, output_index);
        },
        py::arg("network"), py::arg("x"), py::arg("output_index"));

    // ---- witness ----
    py::class_<witness::Witness>(m, "Witness")
        .def(py::init([](std::vector<double> x) {
                 witness::Witness w;
                 w.x = std::move(x);
                 return w;
             }),
             py::arg("x"))
        .def_readonly("x", &witness::Witness::x)
        .def_readonly("y_claimed", &witness::Witness::y_claimed);

    py::enum_<witness::Verdict>(m, "Verdict")
        .value("Valid", witness::Verdict::Valid)
        .value("InvalidInput", witness::Verdict::InvalidInput)
        .value("InvalidOutput", witness::Verdict::InvalidOutput)
        .value("Malformed", witness::Verdict::Malformed);

    py::class_<witness::ValidationReport>(m, "ValidationReport")
        .def_readonly("verdict", &witness::ValidationReport::verdict)
        .def_readonly("matched_disjunct",
                      &witness::ValidationReport::matched_disjunct)
        .def_readonly("y_actual", &witness::ValidationReport::y_actual)
        .def_readonly("max_box_violation",
                      &witness::ValidationReport::max_box_violation)
        .def_readonly("constraint_slacks",
                      &witness::ValidationReport::constraint_slacks);

    m.def("parse_witness", [](const std::string& text) {
        return witness::parse_witness(text);
    });
    m.def("print_witness", &witness::print_witness);
    m.def(
        "validate_witness",
        [](const witness::Witness& w, const spec::AdversarialQuery& q,
           const net::NetworkGraph& g, double tol_input, double tol_output) {
            return witness::validate(w, q, g, {tol_input, tol_output});
        },
        py::arg("witness"), py::arg("query"), py::arg("network"),
        py::arg("tol_input") = 1e-7, py::arg("tol_output") = 0.0);

    // ---- refverify ----
    py::class_<verify::VerifierConfig>(m, "VerifierConfig")
        .def(py::init<>())
        .def_property(
            "seed",
            [](const verify::VerifierConfig& c) { return c.seed; },
            [](verify::VerifierConfig& c, std::uint64_t s) { c.seed = s; })
        .def_property(
            "time_budget",
            [](const verify::VerifierConfig& c) { return c.time_budget; },
            [](verify::VerifierConfig& c, double t) { c.time_budget = t; })
        .def_property(
            "attack_enabled",
            [](const verify::VerifierConfig& c) { return c.attack.enabled; },
            [](verify::VerifierConfig& c, bool b) { c.attack.enabled = b; })
        .def_property(
            "max_depth",
            [](const verify::VerifierConfig& c) { return c.bab.max_depth; },
            [](verify::VerifierConfig& c, int d) { c.bab.max_depth = d; })
        .def_property(
            "max_subproblems",
            [](const verify::VerifierConfig& c) {
                return c.bab.max_subproblems;
            },
            [](verify::VerifierConfig& c, long n) {
                c.bab.max_subproblems = n;
            });

    py::class_<verify::VerifyStats>(m, "VerifyStats")
        .def_readonly("subproblems", &verify::VerifyStats::subproblems)
        .def_readonly("attack_iterations",
                      &verify::VerifyStats::attack_iterations)
        .def_readonly("elapsed_seconds", &verify::VerifyStats::elapsed_seconds)
        .def_readonly("note", &verify::VerifyStats::note);

    py::class_<verify::VerifyOutcome>(m, "VerifyOutcome")
        .def_property_readonly(
            "status",
            [](const verify::VerifyOutcome& o) {
                return std::string(verify::status_name(o.status));
            })
        .def_readonly("witness", &verify::VerifyOutcome::witness)
        .def_readonly("stats", &verify::VerifyOutcome::stats);

    m.def(
        "ibp_bounds",
        [](const net::NetworkGraph& g, const spec::InputBox& box) {
            auto iv = verify::ibp_bounds(g, box);
            return std::make_pair(iv.lower, iv.upper);
        },
        py::arg("network"), py::arg("box"));
    m.def("verify", &verify::verify, py::arg("network"), py::arg("query"),
          py::arg("config") = verify::VerifierConfig{});
    m.def("pgd_attack", &verify::pgd_attack, py::arg("network"),
          py::arg("query"), py::arg("config") = verify::VerifierConfig{});

    // ---- scoring ----
    py::enum_<scoring::RulesYear>(m, "RulesYear")
        .value("R2021", scoring::RulesYear::R2021)
        .value("R2022", scoring::RulesYear::R2022);

    py::class_<scoring::RuleSet>(m, "RuleSet")
        .def_static("r2021", &scoring::RuleSet::r2021)
        .def_static("r2022", &scoring::RuleSet::r2022,
                    py::arg("time_bonus") = true)
        .def_readonly("year", &scoring::RuleSet::year);

    py::enum_<runner::RunStatus>(m, "RunStatus")
        .value("Sat", runner::RunStatus::Sat)
        .value("Unsat", runner::RunStatus::Unsat)
        .value("Unknown", runner::RunStatus::Unknown)
        .value("Timeout", runner::RunStatus::Timeout)
        .value("Error", runner::RunStatus::Error);

    py::class_<runner::VerdictRecord>(m, "VerdictRecord")
        .def(py::init([](std::string tool, std::string benchmark, int instance,
                         runner::RunStatus status, double runtime) {
                 runner::VerdictRecord r;
                 r.tool = std::move(tool);
                 r.benchmark = std::move(benchmark);
                 r.instance = instance;
                 r.status = status;
                 r.raw_runtime = runtime;
                 r.adjusted_runtime = runtime;
                 return r;
             }),
             py::arg("tool"), py::arg("benchmark"), py::arg("instance"),
             py::arg("status"), py::arg("runtime"))
        .def_readonly("tool", &runner::VerdictRecord::tool)
        .def_readonly("benchmark", &runner::VerdictRecord::benchmark)
        .def_readonly("instance", &runner::VerdictRecord::instance)
        .def_readonly("status", &runner::VerdictRecord::status)
        .def_readonly("adjusted_runtime",
                      &runner::VerdictRecord::adjusted_runtime);

    py::enum_<scoring::TruthLabel>(m, "TruthLabel")
        .value("Sat", scoring::TruthLabel::Sat)
        .value("Unsat", scoring::TruthLabel::Unsat)
        .value("Undetermined", scoring::TruthLabel::Undetermined);

    py::class_<scoring::GroundTruth>(m, "GroundTruth")
        .def_readonly("benchmark", &scoring::GroundTruth::benchmark)
        .def_readonly("instance", &scoring::GroundTruth::instance)
        .def_readonly("label", &scoring::GroundTruth::label)
        .def_readonly("simple_sat", &scoring::GroundTruth::simple_sat);

    m.def(
        "derive_ground_truth",
        [](std::vector<runner::VerdictRecord> records,
           const scoring::RuleSet& rules,
           std::map<std::string, bool> witness_valid,
           std::optional<scoring::TruthLabel> oracle, bool attack_found_sat) {
            return scoring::derive_ground_truth(records, rules, witness_valid,
                                                oracle, attack_found_sat);
        },
        py::arg("records"), py::arg("rules"),
        py::arg("witness_valid") = std::map<std::string, bool>{},
        py::arg("oracle") = std::nullopt,
        py::arg("attack_found_sat") = false);
    m.def(
        "score_instance",
        [](const runner::VerdictRecord& record,
           const scoring::GroundTruth& truth, const scoring::RuleSet& rules,
           bool witness_valid) {
            return scoring::score_instance(record, truth, rules, witness_valid);
        },
        py::arg("record"), py::arg("truth"), py::arg("rules"),
        py::arg("witness_valid") = false);
    m.def(
        "build_score_table",
        [](std::vector<runner::VerdictRecord> records,
           std::vector<scoring::GroundTruth> truths,
           const scoring::RuleSet& rules,
           std::vector<std::tuple<std::string, int, std::string, bool>>
               validity) {
            std::map<scoring::InstanceKey, scoring::GroundTruth> tmap;
            for (auto& t : truths) tmap[{t.benchmark, t.instance}] = t;
            std::map<scoring::InstanceKey, scoring::ValidityMap> vmap;
            for (auto& [bench, idx, tool, valid] : validity)
                vmap[{bench, idx}][tool] = valid;
            auto table =
                scoring::build_score_table(records, tmap, rules, vmap);
            py::dict out;
            py::dict points, percent, totals;
            for (const auto& [key, v] : table.points)
                points[py::make_tuple(key.first, key.second)] = v;
            for (const auto& [key, v] : table.percent)
                percent[py::make_tuple(key.first, key.second)] = v;
            for (const auto& [tool, v] : table.totals) totals[py::str(tool)] = v;
            out["points"] = points;
            out["percent"] = percent;
            out["totals"] = totals;
            out["ranking"] = table.ranking;
            return out;
        },
        py::arg("records"), py::arg("truths"), py::arg("rules"),
        py::arg("validity") =
            std::vector<std::tuple<std::string, int, std::string, bool>>{});
}
