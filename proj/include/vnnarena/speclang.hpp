#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vnna::spec {

enum class VarKind { Input, Output };

struct VariableRef {
    VarKind kind = VarKind::Input;
    std::size_t index = 0;

    auto operator<=>(const VariableRef&) const = default;
};

inline VariableRef input_var(std::size_t i) { return {VarKind::Input, i}; }
inline VariableRef output_var(std::size_t i) { return {VarKind::Output, i}; }

enum class Relation { LessEq, GreaterEq };

struct LinearTerm {
    double coefficient = 0;
    VariableRef variable;

    auto operator<=>(const LinearTerm&) const = default;
};

// sum(terms) <relation> bound, in non-strict form. Terms are kept merged
// (one per variable) and sorted by variable.
struct LinearConstraint {
    std::vector<LinearTerm> terms;
    Relation relation = Relation::LessEq;
    double bound = 0;

    auto operator<=>(const LinearConstraint&) const = default;
};

// Axis-aligned input region. lower > upper in any coordinate marks the box
// empty (a vacuously unsatisfiable disjunct), which is legal after
// constraint intersection.
struct InputBox {
    std::vector<double> lower;
    std::vector<double> upper;

    auto operator<=>(const InputBox&) const = default;

    std::size_t dim() const { return lower.size(); }
    bool empty() const {
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (lower[i] > upper[i]) return true;
        return false;
    }
    bool bounded() const;
    bool contains(std::span<const double> x, double tol) const;
};

struct RobustnessParams {
    std::vector<double> center;
    double epsilon = 0;
    std::size_t target = 0;
    std::optional<double> clip_lower;
    std::optional<double> clip_upper;
};

struct Disjunct {
    InputBox box;
    std::vector<LinearConstraint> output_constraints;  // conjunction

    auto operator<=>(const Disjunct&) const = default;
};

// Negated verification problem: SAT iff some disjunct admits a point x in
// its box with all output constraints satisfied by the network output.
struct AdversarialQuery {
    std::size_t num_inputs = 0;
    std::size_t num_outputs = 0;
    std::vector<Disjunct> disjuncts;

    auto operator<=>(const AdversarialQuery&) const = default;
};

// --- parsing / printing ---

// Parses the supported VNN-LIB subset (declare-const of X_i/Y_j as Real,
// asserts over <=/>= atoms with linear +/-/* terms, and/or combinations)
// into disjunctive normal form. Throws SyntaxError or UnsupportedFeature.
AdversarialQuery parse_vnnlib(std::string_view text);

// Emits grammar-conforming text; parse_vnnlib(print_vnnlib(q)) is
// structurally equal to normalize(q).
std::string print_vnnlib(const AdversarialQuery& query);

// --- builders ---

AdversarialQuery make_robustness_query(const RobustnessParams& params,
                                       std::size_t d_in, std::size_t d_out);

AdversarialQuery make_unsafe_set_query(
    const InputBox& box,
    const std::vector<std::vector<LinearConstraint>>& unsafe_disjuncts,
    std::size_t d_out);

// Canonical form: terms merged and sorted, constraints sorted within each
// disjunct, disjuncts sorted. parse_vnnlib and the builders return
// normalized queries; exposed for tests and hand-built queries.
void normalize(AdversarialQuery& query);

// --- evaluation helpers (used by witness checking / verification) ---

// Value of sum(c_i * y_i). Constraint must be over outputs only.
double constraint_lhs(const LinearConstraint& c, std::span<const double> y);

// Signed satisfaction margin: >= 0 iff the constraint holds at y.
double constraint_slack(const LinearConstraint& c, std::span<const double> y);

}  // namespace vnna::spec
