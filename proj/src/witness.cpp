#include "vnnarena/witness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "vnnarena/errors.hpp"
#include "vnnarena/sexpr.hpp"
#include "vnnarena/textutil.hpp"

namespace vnna::witness {

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Valid: return "Valid";
        case Verdict::InvalidInput: return "InvalidInput";
        case Verdict::InvalidOutput: return "InvalidOutput";
        case Verdict::Malformed: return "Malformed";
    }
    return "?";
}

namespace {

struct Pairs {
    std::map<std::size_t, double> x;
    std::map<std::size_t, double> y;
};

Pairs collect_pairs(std::string_view text) {
    std::vector<sexpr::Node> forms;
    try {
        forms = sexpr::parse(text);
    } catch (const SyntaxError& e) {
        throw MalformedWitness(e.what());
    }

    // accept either a single wrapped list of pairs or bare pairs
    std::vector<const sexpr::Node*> pairs;
    auto looks_like_pair = [](const sexpr::Node& n) {
        return !n.is_atom && n.size() == 2 && n.child(0).is_atom &&
               n.child(1).is_atom;
    };
    if (forms.size() == 1 && !forms[0].is_atom &&
        !looks_like_pair(forms[0])) {
        for (const sexpr::Node& n : forms[0].children) pairs.push_back(&n);
    } else {
        for (const sexpr::Node& n : forms) pairs.push_back(&n);
    }
    if (pairs.empty()) throw MalformedWitness("witness contains no assignments");

    Pairs out;
    for (const sexpr::Node* p : pairs) {
        if (!looks_like_pair(*p))
            throw MalformedWitness("expected (<variable> <value>) pair at line " +
                                   std::to_string(p->line));
        const std::string& name = p->child(0).atom;
        double value;
        if (!text::try_parse_double(p->child(1).atom, value) ||
            !std::isfinite(value))
            throw MalformedWitness("non-numeric value '" + p->child(1).atom +
                                   "' for " + name);
        bool is_input = name.rfind("X_", 0) == 0;
        bool is_output = name.rfind("Y_", 0) == 0;
        if ((!is_input && !is_output) || name.size() < 3 ||
            name.find_first_not_of("0123456789", 2) != std::string::npos)
            throw MalformedWitness("unknown variable '" + name + "'");
        std::size_t idx = std::stoull(name.substr(2));
        auto& slot = is_input ? out.x : out.y;
        if (slot.count(idx))
            throw MalformedWitness("duplicate assignment for " + name);
        slot[idx] = value;
    }
    return out;
}

std::vector<double> dense_vector(const std::map<std::size_t, double>& m,
                                 std::size_t expected, const char* what) {
    std::vector<double> v(expected, 0.0);
    if (m.size() != expected)
        throw MalformedWitness(std::string(what) + " assignment incomplete: " +
                               std::to_string(m.size()) + " of " +
                               std::to_string(expected) + " values");
    for (const auto& [idx, val] : m) {
        if (idx >= expected)
            throw MalformedWitness(std::string(what) + "_" +
                                   std::to_string(idx) + " is out of range");
        v[idx] = val;
    }
    return v;
}

}  // namespace

Witness parse_witness(std::string_view text) {
    Pairs pairs = collect_pairs(text);
    if (pairs.x.empty()) throw MalformedWitness("witness assigns no inputs");
    std::size_t d_in = pairs.x.rbegin()->first + 1;
    Witness w;
    w.x = dense_vector(pairs.x, d_in, "X");
    if (!pairs.y.empty()) {
        std::size_t d_out = pairs.y.rbegin()->first + 1;
        w.y_claimed = dense_vector(pairs.y, d_out, "Y");
    }
    return w;
}

Witness parse_witness(std::string_view text, std::size_t d_in,
                      std::size_t d_out) {
    Pairs pairs = collect_pairs(text);
    Witness w;
    w.x = dense_vector(pairs.x, d_in, "X");
    if (!pairs.y.empty()) w.y_claimed = dense_vector(pairs.y, d_out, "Y");
    return w;
}

std::string print_witness(const Witness& w) {
    std::ostringstream out;
    out << "(";
    for (std::size_t i = 0; i < w.x.size(); ++i) {
        if (i) out << "\n ";
        out << "(X_" << i << " " << text::format_double(w.x[i]) << ")";
    }
    if (w.y_claimed) {
        for (std::size_t j = 0; j < w.y_claimed->size(); ++j)
            out << "\n (Y_" << j << " "
                << text::format_double((*w.y_claimed)[j]) << ")";
    }
    out << ")\n";
    return out.str();
}

ValidationReport validate(const Witness& w, const spec::AdversarialQuery& query,
                          const net::NetworkGraph& net, Tolerances tol) {
    if (w.x.size() != query.num_inputs || query.num_inputs != net.d_in)
        throw DimensionMismatch(
            "witness, query and network input dimensions disagree");
    if (query.num_outputs != net.d_out)
        throw DimensionMismatch("query and network output dimensions disagree");

    ValidationReport report;
    report.tol = tol;

    // Per disjunct: box violation, then constraint slacks at the clamped point.
    bool any_box_ok = false;
    std::optional<std::size_t> best;  // disjunct to report on
    double best_violation = 0;
    std::vector<double> best_slacks;
    std::vector<double> best_y;

    for (std::size_t di = 0; di < query.disjuncts.size(); ++di) {
        const spec::Disjunct& d = query.disjuncts[di];
        double violation = 0;
        for (std::size_t i = 0; i < w.x.size(); ++i) {
            if (d.box.lower[i] > d.box.upper[i]) {
                violation = std::numeric_limits<double>::infinity();
                break;
            }
            double below = d.box.lower[i] - w.x[i];
            double above = w.x[i] - d.box.upper[i];
            violation = std::max({violation, below, above});
        }
        if (violation > tol.input) {
            if (!best || (!any_box_ok && violation < best_violation)) {
                if (!any_box_ok) {
                    best = di;
                    best_violation = violation;
                    best_slacks.clear();
                    best_y.clear();
                }
            }
            continue;
        }

        // clamp into the box and re-evaluate
        std::vector<double> x = w.x;
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = std::min(std::max(x[i], d.box.lower[i]), d.box.upper[i]);
        std::vector<double> y = net::evaluate(net, x);

        std::vector<double> slacks;
        slacks.reserve(d.output_constraints.size());
        bool all_ok = true;
        for (const spec::LinearConstraint& c : d.output_constraints) {
            double s = spec::constraint_slack(c, y);
            slacks.push_back(s);
            if (!(s >= -tol.output)) all_ok = false;
        }

        if (all_ok) {
            report.verdict = Verdict::Valid;
            report.matched_disjunct = di;
            report.max_box_violation = std::max(violation, 0.0);
            report.constraint_slacks = std::move(slacks);
            report.y_actual = std::move(y);
            if (w.y_claimed) {
                for (std::size_t j = 0; j < report.y_actual.size(); ++j) {
                    double a = report.y_actual[j];
                    double c = (*w.y_claimed)[j];
                    double scale = std::max(1.0, std::abs(a));
                    if (std::abs(a - c) > 1e-4 * scale)
                        report.claimed_output_warning = true;
                }
            }
            return report;
        }

        if (!any_box_ok || violation < best_violation) {
            any_box_ok = true;
            best = di;
            best_violation = std::max(violation, 0.0);
            best_slacks = std::move(slacks);
            best_y = std::move(y);
        }
    }

    report.verdict = any_box_ok ? Verdict::InvalidOutput : Verdict::InvalidInput;
    report.matched_disjunct = std::nullopt;
    if (best) {
        report.max_box_violation = best_violation;
        report.constraint_slacks = std::move(best_slacks);
        report.y_actual = std::move(best_y);
    } else {
        report.max_box_violation = std::numeric_limits<double>::infinity();
    }
    if (report.y_actual.empty()) report.y_actual = net::evaluate(net, w.x);
    return report;
}

ValidationReport validate_text(std::string_view witness_text,
                               const spec::AdversarialQuery& query,
                               const net::NetworkGraph& net, Tolerances tol) {
    try {
        Witness w =
            parse_witness(witness_text, query.num_inputs, query.num_outputs);
        return validate(w, query, net, tol);
    } catch (const MalformedWitness& e) {
        ValidationReport report;
        report.tol = tol;
        report.verdict = Verdict::Malformed;
        report.detail = e.what();
        return report;
    }
}

std::string print_report(const ValidationReport& report) {
    std::ostringstream out;
    out << "verdict=" << verdict_name(report.verdict) << "\n";
    out << "matched_disjunct=";
    if (report.matched_disjunct)
        out << *report.matched_disjunct;
    else
        out << "-";
    out << "\n";
    out << "max_box_violation=" << text::format_double(report.max_box_violation)
        << "\n";
    out << "y_actual=";
    for (std::size_t i = 0; i < report.y_actual.size(); ++i) {
        if (i) out << " ";
        out << text::format_double(report.y_actual[i]);
    }
    out << "\n";
    out << "constraint_slacks=";
    for (std::size_t i = 0; i < report.constraint_slacks.size(); ++i) {
        if (i) out << " ";
        out << text::format_double(report.constraint_slacks[i]);
    }
    out << "\n";
    out << "claimed_output_warning="
        << (report.claimed_output_warning ? "1" : "0") << "\n";
    out << "tol_input=" << text::format_double(report.tol.input) << "\n";
    out << "tol_output=" << text::format_double(report.tol.output) << "\n";
    if (!report.detail.empty())
        out << "detail=" << text::kv_escape(report.detail) << "\n";
    return out.str();
}

}  // namespace vnna::witness
