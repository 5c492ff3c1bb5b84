#include "vnnarena/speclang.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "vnnarena/errors.hpp"
#include "vnnarena/sexpr.hpp"
#include "vnnarena/textutil.hpp"

namespace vnna::spec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Linear expression over input/output variables plus a constant, built while
// folding term trees. Map keys keep variables merged and ordered.
struct LinExpr {
    std::map<VariableRef, double> coeffs;
    double constant = 0;

    void add(const LinExpr& o, double scale) {
        for (const auto& [v, c] : o.coeffs) {
            double& slot = coeffs[v];
            slot += scale * c;
            if (slot == 0.0) coeffs.erase(v);
        }
        constant += scale * o.constant;
    }

    bool is_constant() const { return coeffs.empty(); }
};

// One normalized atom: sum(coeffs) <relation> bound.
struct LinAtom {
    LinExpr lhs;  // constant folded into `bound` already
    Relation relation = Relation::LessEq;
    double bound = 0;
    int line = 0, column = 0;
};

using Conjunction = std::vector<LinAtom>;
using Dnf = std::vector<Conjunction>;

// Guards against pathological and/or nesting blowing up the cross product.
constexpr size_t kMaxDisjuncts = 65536;

struct Parser {
    std::size_t d_in = 0;
    std::size_t d_out = 0;
    bool any_input_decl = false;
    bool any_output_decl = false;

    std::optional<VariableRef> match_variable(const std::string& name) const {
        if (name.size() < 3 || name.size() > 12 || name[1] != '_')
            return std::nullopt;
        if (name[0] != 'X' && name[0] != 'Y') return std::nullopt;
        for (size_t i = 2; i < name.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(name[i])))
                return std::nullopt;
        std::size_t idx = std::stoull(name.substr(2));
        return VariableRef{name[0] == 'X' ? VarKind::Input : VarKind::Output,
                           idx};
    }

    void handle_declare(const sexpr::Node& form) {
        if (form.size() != 3 || !form.child(1).is_atom ||
            !form.child(2).is_atom)
            throw SyntaxError("malformed declare-const", form.line,
                              form.column);
        if (form.child(2).atom != "Real")
            throw UnsupportedFeature("only Real variables are supported, got sort '" +
                                     form.child(2).atom + "'");
        auto var = match_variable(form.child(1).atom);
        if (!var)
            throw UnsupportedFeature(
                "variables must be named X_<i> or Y_<j>, got '" +
                form.child(1).atom + "'");
        if (var->kind == VarKind::Input) {
            any_input_decl = true;
            d_in = std::max(d_in, var->index + 1);
        } else {
            any_output_decl = true;
            d_out = std::max(d_out, var->index + 1);
        }
    }

    LinExpr parse_term(const sexpr::Node& node) const {
        if (node.is_atom) {
            double v;
            if (text::try_parse_double(node.atom, v)) {
                if (!std::isfinite(v))
                    throw SyntaxError("non-finite literal '" + node.atom + "'",
                                      node.line, node.column);
                LinExpr e;
                e.constant = v;
                return e;
            }
            if (auto var = match_variable(node.atom)) {
                if (var->kind == VarKind::Input && var->index >= d_in)
                    throw SyntaxError("undeclared variable " + node.atom,
                                      node.line, node.column);
                if (var->kind == VarKind::Output && var->index >= d_out)
                    throw SyntaxError("undeclared variable " + node.atom,
                                      node.line, node.column);
                LinExpr e;
                e.coeffs[*var] = 1.0;
                return e;
            }
            throw SyntaxError("expected number or variable, got '" +
                                  node.atom + "'",
                              node.line, node.column);
        }
        if (node.size() == 0 || !node.child(0).is_atom)
            throw SyntaxError("malformed term", node.line, node.column);
        const std::string& op = node.child(0).atom;
        if (op == "+") {
            if (node.size() < 2)
                throw SyntaxError("'+' needs at least one operand", node.line,
                                  node.column);
            LinExpr e;
            for (size_t i = 1; i < node.size(); ++i)
                e.add(parse_term(node.child(i)), 1.0);
            return e;
        }
        if (op == "-") {
            if (node.size() < 2)
                throw SyntaxError("'-' needs at least one operand", node.line,
                                  node.column);
            LinExpr e = parse_term(node.child(1));
            if (node.size() == 2) {
                LinExpr neg;
                neg.add(e, -1.0);
                return neg;
            }
            for (size_t i = 2; i < node.size(); ++i)
                e.add(parse_term(node.child(i)), -1.0);
            return e;
        }
        if (op == "*") {
            if (node.size() < 2)
                throw SyntaxError("'*' needs at least one operand", node.line,
                                  node.column);
            LinExpr acc = parse_term(node.child(1));
            for (size_t i = 2; i < node.size(); ++i) {
                LinExpr rhs = parse_term(node.child(i));
                if (!acc.is_constant() && !rhs.is_constant())
                    throw UnsupportedFeature(
                        "non-linear term at line " + std::to_string(node.line));
                if (acc.is_constant()) {
                    LinExpr scaled;
                    scaled.add(rhs, acc.constant);
                    acc = scaled;
                } else {
                    LinExpr scaled;
                    scaled.add(acc, rhs.constant);
                    acc = scaled;
                }
            }
            return acc;
        }
        if (op == "<" || op == ">")
            throw UnsupportedFeature("strict inequality '" + op +
                                     "' is not supported");
        if (op == "/")
            throw UnsupportedFeature("division is not supported");
        throw UnsupportedFeature("unsupported term operator '" + op + "'");
    }

    LinAtom parse_atom(const sexpr::Node& node, const std::string& op) const {
        if (node.size() != 3)
            throw SyntaxError("comparison needs exactly two operands",
                              node.line, node.column);
        LinExpr lhs = parse_term(node.child(1));
        lhs.add(parse_term(node.child(2)), -1.0);
        LinAtom atom;
        atom.relation = op == "<=" ? Relation::LessEq : Relation::GreaterEq;
        atom.bound = -lhs.constant;
        lhs.constant = 0;
        atom.lhs = std::move(lhs);
        atom.line = node.line;
        atom.column = node.column;
        return atom;
    }

    Dnf to_dnf(const sexpr::Node& node) const {
        if (node.is_atom)
            throw SyntaxError("expected constraint, got atom '" + node.atom +
                                  "'",
                              node.line, node.column);
        if (node.size() == 0 || !node.child(0).is_atom)
            throw SyntaxError("malformed constraint", node.line, node.column);
        const std::string& op = node.child(0).atom;
        if (op == "<=" || op == ">=") return {{parse_atom(node, op)}};
        if (op == "<" || op == ">")
            throw UnsupportedFeature("strict inequality '" + op +
                                     "' is not supported");
        if (op == "=")
            throw UnsupportedFeature("equality atoms are not supported");
        if (op == "and") {
            if (node.size() < 2)
                throw SyntaxError("'and' needs at least one operand",
                                  node.line, node.column);
            Dnf acc = {{}};
            for (size_t i = 1; i < node.size(); ++i) {
                Dnf rhs = to_dnf(node.child(i));
                Dnf next;
                if (acc.size() * rhs.size() > kMaxDisjuncts)
                    throw UnsupportedFeature(
                        "disjunctive normal form exceeds the supported size");
                for (const auto& a : acc)
                    for (const auto& b : rhs) {
                        Conjunction c = a;
                        c.insert(c.end(), b.begin(), b.end());
                        next.push_back(std::move(c));
                    }
                acc = std::move(next);
            }
            return acc;
        }
        if (op == "or") {
            if (node.size() < 2)
                throw SyntaxError("'or' needs at least one operand", node.line,
                                  node.column);
            Dnf acc;
            for (size_t i = 1; i < node.size(); ++i) {
                Dnf rhs = to_dnf(node.child(i));
                if (acc.size() + rhs.size() > kMaxDisjuncts)
                    throw UnsupportedFeature(
                        "disjunctive normal form exceeds the supported size");
                acc.insert(acc.end(), rhs.begin(), rhs.end());
            }
            return acc;
        }
        if (op == "not" || op == "=>" || op == "ite" || op == "forall" ||
            op == "exists")
            throw UnsupportedFeature("'" + op + "' is not supported");
        throw SyntaxError("expected constraint operator, got '" + op + "'",
                          node.line, node.column);
    }
};

// Applies one pure-input atom to the box. Only single-variable input atoms
// are representable as box bounds.
void tighten_box(InputBox& box, const LinAtom& atom) {
    if (atom.lhs.coeffs.size() != 1)
        throw UnsupportedFeature(
            "input constraints must bound a single variable (line " +
            std::to_string(atom.line) + ")");
    const auto& [var, coeff] = *atom.lhs.coeffs.begin();
    double b = atom.bound / coeff;
    bool upper = (atom.relation == Relation::LessEq) == (coeff > 0);
    if (upper)
        box.upper[var.index] = std::min(box.upper[var.index], b);
    else
        box.lower[var.index] = std::max(box.lower[var.index], b);
}

// Canonical empty box used for conjunctions refuted by a constant atom.
void mark_vacuous(InputBox& box) {
    if (!box.lower.empty()) {
        box.lower[0] = 1.0;
        box.upper[0] = 0.0;
    }
}

Disjunct build_disjunct(const Conjunction& conj, std::size_t d_in) {
    Disjunct d;
    d.box.lower.assign(d_in, -kInf);
    d.box.upper.assign(d_in, kInf);
    for (const LinAtom& atom : conj) {
        bool has_input = false, has_output = false;
        for (const auto& [v, c] : atom.lhs.coeffs) {
            (v.kind == VarKind::Input ? has_input : has_output) = true;
        }
        if (has_input && has_output)
            throw UnsupportedFeature(
                "mixed input-output constraints are not supported (line " +
                std::to_string(atom.line) + ")");
        if (!has_input && !has_output) {
            // Constant atom: keep if true, refute the disjunct if false.
            bool holds = atom.relation == Relation::LessEq ? 0.0 <= atom.bound
                                                           : 0.0 >= atom.bound;
            if (!holds) mark_vacuous(d.box);
            continue;
        }
        if (has_input) {
            tighten_box(d.box, atom);
        } else {
            LinearConstraint c;
            c.relation = atom.relation;
            c.bound = atom.bound;
            for (const auto& [v, coeff] : atom.lhs.coeffs)
                c.terms.push_back({coeff, v});
            d.output_constraints.push_back(std::move(c));
        }
    }
    return d;
}

void sort_constraint(LinearConstraint& c) {
    std::sort(c.terms.begin(), c.terms.end(),
              [](const LinearTerm& a, const LinearTerm& b) {
                  return a.variable < b.variable;
              });
}

}  // namespace

bool InputBox::bounded() const {
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i])) return false;
    return true;
}

bool InputBox::contains(std::span<const double> x, double tol) const {
    if (x.size() != lower.size()) return false;
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
    return true;
}

void normalize(AdversarialQuery& query) {
    for (Disjunct& d : query.disjuncts) {
        for (LinearConstraint& c : d.output_constraints) {
            // merge duplicate variables, drop zero coefficients
            std::map<VariableRef, double> merged;
            for (const LinearTerm& t : c.terms) merged[t.variable] += t.coefficient;
            c.terms.clear();
            for (const auto& [v, coeff] : merged)
                if (coeff != 0.0) c.terms.push_back({coeff, v});
            sort_constraint(c);
        }
        std::sort(d.output_constraints.begin(), d.output_constraints.end());
    }
    std::sort(query.disjuncts.begin(), query.disjuncts.end());
}

AdversarialQuery parse_vnnlib(std::string_view input) {
    auto forms = sexpr::parse(input);
    Parser parser;
    std::vector<const sexpr::Node*> asserts;
    for (const sexpr::Node& form : forms) {
        if (form.is_atom)
            throw SyntaxError("expected a command, got atom '" + form.atom +
                                  "'",
                              form.line, form.column);
        if (form.size() == 0 || !form.child(0).is_atom)
            throw SyntaxError("malformed command", form.line, form.column);
        const std::string& head = form.child(0).atom;
        if (head == "declare-const") {
            parser.handle_declare(form);
        } else if (head == "assert") {
            if (form.size() != 2)
                throw SyntaxError("'assert' takes exactly one constraint",
                                  form.line, form.column);
            asserts.push_back(&form);
        } else {
            throw UnsupportedFeature("unsupported command '" + head + "'");
        }
    }
    if (!parser.any_input_decl || !parser.any_output_decl)
        throw UnsupportedFeature(
            "property must declare at least one input and one output variable");

    Dnf total = {{}};
    for (const sexpr::Node* form : asserts) {
        Dnf rhs = parser.to_dnf(form->child(1));
        Dnf next;
        if (total.size() * rhs.size() > kMaxDisjuncts)
            throw UnsupportedFeature(
                "disjunctive normal form exceeds the supported size");
        for (const auto& a : total)
            for (const auto& b : rhs) {
                Conjunction c = a;
                c.insert(c.end(), b.begin(), b.end());
                next.push_back(std::move(c));
            }
        total = std::move(next);
    }

    AdversarialQuery query;
    query.num_inputs = parser.d_in;
    query.num_outputs = parser.d_out;
    for (const Conjunction& conj : total)
        query.disjuncts.push_back(build_disjunct(conj, parser.d_in));
    normalize(query);
    return query;
}

AdversarialQuery make_robustness_query(const RobustnessParams& params,
                                       std::size_t d_in, std::size_t d_out) {
    if (params.center.size() != d_in)
        throw DimensionMismatch("center has dimension " +
                                std::to_string(params.center.size()) +
                                ", expected " + std::to_string(d_in));
    if (params.target >= d_out)
        throw DimensionMismatch("target class " +
                                std::to_string(params.target) +
                                " out of range for " + std::to_string(d_out) +
                                " outputs");
    if (params.epsilon < 0)
        throw InvalidQuery("epsilon must be non-negative");

    InputBox box;
    box.lower.resize(d_in);
    box.upper.resize(d_in);
    for (std::size_t i = 0; i < d_in; ++i) {
        double lo = params.center[i] - params.epsilon;
        double hi = params.center[i] + params.epsilon;
        if (params.clip_lower) lo = std::max(lo, *params.clip_lower);
        if (params.clip_upper) hi = std::min(hi, *params.clip_upper);
        box.lower[i] = lo;
        box.upper[i] = hi;
    }

    AdversarialQuery query;
    query.num_inputs = d_in;
    query.num_outputs = d_out;
    for (std::size_t i = 0; i < d_out; ++i) {
        if (i == params.target) continue;
        // negation of y_target > y_i: Y_i - Y_target >= 0
        LinearConstraint c;
        c.relation = Relation::GreaterEq;
        c.bound = 0;
        c.terms.push_back({1.0, output_var(i)});
        c.terms.push_back({-1.0, output_var(params.target)});
        Disjunct d;
        d.box = box;
        d.output_constraints.push_back(std::move(c));
        query.disjuncts.push_back(std::move(d));
    }
    normalize(query);
    return query;
}

AdversarialQuery make_unsafe_set_query(
    const InputBox& box,
    const std::vector<std::vector<LinearConstraint>>& unsafe_disjuncts,
    std::size_t d_out) {
    if (unsafe_disjuncts.empty())
        throw InvalidQuery("unsafe set must contain at least one disjunct");
    if (box.lower.size() != box.upper.size())
        throw DimensionMismatch("box bound vectors differ in length");
    AdversarialQuery query;
    query.num_inputs = box.lower.size();
    query.num_outputs = d_out;
    for (const auto& conj : unsafe_disjuncts) {
        Disjunct d;
        d.box = box;
        for (const LinearConstraint& c : conj) {
            for (const LinearTerm& t : c.terms) {
                if (t.variable.kind != VarKind::Output)
                    throw InvalidQuery(
                        "unsafe-set constraints must be over outputs");
                if (t.variable.index >= d_out)
                    throw DimensionMismatch(
                        "constraint references Y_" +
                        std::to_string(t.variable.index) + " but d_out is " +
                        std::to_string(d_out));
            }
            d.output_constraints.push_back(c);
        }
        query.disjuncts.push_back(std::move(d));
    }
    normalize(query);
    return query;
}

double constraint_lhs(const LinearConstraint& c, std::span<const double> y) {
    double acc = 0;
    for (const LinearTerm& t : c.terms) acc += t.coefficient * y[t.variable.index];
    return acc;
}

double constraint_slack(const LinearConstraint& c, std::span<const double> y) {
    double lhs = constraint_lhs(c, y);
    return c.relation == Relation::GreaterEq ? lhs - c.bound : c.bound - lhs;
}

namespace {

void print_term_sum(std::ostringstream& out, const LinearConstraint& c) {
    auto print_term = [&](const LinearTerm& t) {
        std::string var = (t.variable.kind == VarKind::Input ? "X_" : "Y_") +
                          std::to_string(t.variable.index);
        if (t.coefficient == 1.0)
            out << var;
        else
            out << "(* " << text::format_double(t.coefficient) << " " << var
                << ")";
    };
    if (c.terms.size() == 1) {
        print_term(c.terms[0]);
        return;
    }
    out << "(+";
    for (const LinearTerm& t : c.terms) {
        out << " ";
        print_term(t);
    }
    out << ")";
}

void print_constraint_atom(std::ostringstream& out, const LinearConstraint& c) {
    out << "(" << (c.relation == Relation::LessEq ? "<=" : ">=") << " ";
    print_term_sum(out, c);
    out << " " << text::format_double(c.bound) << ")";
}

void print_box_atoms(std::ostringstream& out, const InputBox& box,
                     const char* sep) {
    bool first = true;
    for (std::size_t i = 0; i < box.lower.size(); ++i) {
        if (std::isfinite(box.lower[i])) {
            if (!first) out << sep;
            out << "(>= X_" << i << " " << text::format_double(box.lower[i])
                << ")";
            first = false;
        }
        if (std::isfinite(box.upper[i])) {
            if (!first) out << sep;
            out << "(<= X_" << i << " " << text::format_double(box.upper[i])
                << ")";
            first = false;
        }
    }
}

bool box_has_atoms(const InputBox& box) {
    for (std::size_t i = 0; i < box.lower.size(); ++i)
        if (std::isfinite(box.lower[i]) || std::isfinite(box.upper[i]))
            return true;
    return false;
}

}  // namespace

std::string print_vnnlib(const AdversarialQuery& query) {
    if (query.disjuncts.empty())
        throw InvalidQuery("query has no disjuncts");
    AdversarialQuery q = query;
    normalize(q);
    std::ostringstream out;
    for (std::size_t i = 0; i < q.num_inputs; ++i)
        out << "(declare-const X_" << i << " Real)\n";
    for (std::size_t j = 0; j < q.num_outputs; ++j)
        out << "(declare-const Y_" << j << " Real)\n";

    bool shared_box = !q.disjuncts.empty();
    for (const Disjunct& d : q.disjuncts)
        if (!(d.box == q.disjuncts.front().box)) shared_box = false;

    auto print_conjunct = [&](const Disjunct& d, bool include_box) {
        std::ostringstream atoms;
        if (include_box) print_box_atoms(atoms, d.box, " ");
        for (const LinearConstraint& c : d.output_constraints) {
            if (atoms.tellp() > 0) atoms << " ";
            print_constraint_atom(atoms, c);
        }
        std::string s = atoms.str();
        if (s.empty()) s = "(<= 0.0 0.0)";  // constant-true placeholder
        out << "(and " << s << ")";
    };

    if (q.disjuncts.size() == 1 && shared_box) {
        const Disjunct& d = q.disjuncts.front();
        std::ostringstream atoms;
        print_box_atoms(atoms, d.box, "\n");
        std::string box_atoms = atoms.str();
        std::istringstream lines(box_atoms);
        std::string line;
        while (std::getline(lines, line))
            if (!line.empty()) out << "(assert " << line << ")\n";
        for (const LinearConstraint& c : d.output_constraints) {
            std::ostringstream one;
            print_constraint_atom(one, c);
            out << "(assert " << one.str() << ")\n";
        }
        return out.str();
    }

    if (shared_box && box_has_atoms(q.disjuncts.front().box)) {
        std::ostringstream atoms;
        print_box_atoms(atoms, q.disjuncts.front().box, "\n");
        std::istringstream lines(atoms.str());
        std::string line;
        while (std::getline(lines, line))
            if (!line.empty()) out << "(assert " << line << ")\n";
        out << "(assert (or";
        for (const Disjunct& d : q.disjuncts) {
            out << " ";
            print_conjunct(d, false);
        }
        out << "))\n";
        return out.str();
    }

    out << "(assert (or";
    for (const Disjunct& d : q.disjuncts) {
        out << " ";
        print_conjunct(d, true);
    }
    out << "))\n";
    return out.str();
}

}  // namespace vnna::spec
