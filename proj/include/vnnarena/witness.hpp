#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vnnarena/netio.hpp"
#include "vnnarena/speclang.hpp"

namespace vnna::witness {

// A claimed counterexample in the standardized format: the input assignment
// plus an optional claimed output vector.
struct Witness {
    std::vector<double> x;
    std::optional<std::vector<double>> y_claimed;

    bool operator==(const Witness&) const = default;
};

enum class Verdict { Valid, InvalidInput, InvalidOutput, Malformed };

std::string_view verdict_name(Verdict v);

struct Tolerances {
    double input = 1e-7;   // absolute, per coordinate; inputs are clamped
    double output = 0.0;   // non-strict constraint check in 64-bit arithmetic
};

struct ValidationReport {
    Verdict verdict = Verdict::Malformed;
    std::optional<std::size_t> matched_disjunct;
    std::vector<double> y_actual;
    double max_box_violation = 0;
    std::vector<double> constraint_slacks;  // of the reported disjunct
    bool claimed_output_warning = false;    // y_claimed far from y_actual
    Tolerances tol;
    std::string detail;
};

// Parses `(<var> <value>)` pairs, outer parentheses optional, any order.
// X indices must form 0..max with no gaps or duplicates; y_claimed is
// present iff all Y indices 0..max are given. Throws MalformedWitness.
Witness parse_witness(std::string_view text);

// Same, but checks completeness against known dimensions: all of X_0..X_{d_in-1}
// must be present, and Y pairs must either be absent or complete.
Witness parse_witness(std::string_view text, std::size_t d_in,
                      std::size_t d_out);

std::string print_witness(const Witness& w);

// Re-evaluates the network at the witness (clamped into the matched box when
// within the input tolerance) and checks each disjunct's constraints. The
// claimed output never overrides the actual evaluation; a large mismatch is
// only reported as a warning.
ValidationReport validate(const Witness& w, const spec::AdversarialQuery& query,
                          const net::NetworkGraph& net, Tolerances tol = {});

// Convenience wrapper mapping parse failures to a Malformed report.
ValidationReport validate_text(std::string_view witness_text,
                               const spec::AdversarialQuery& query,
                               const net::NetworkGraph& net,
                               Tolerances tol = {});

// Structured key-value text for the scoring pipeline.
std::string print_report(const ValidationReport& report);

}  // namespace vnna::witness
