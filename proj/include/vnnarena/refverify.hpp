#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vnnarena/netio.hpp"
#include "vnnarena/speclang.hpp"
#include "vnnarena/witness.hpp"

namespace vnna::verify {

struct IntervalVector {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct AttackConfig {
    bool enabled = true;
    int steps = 30;
    int restarts = 5;
    double step_frac = 0.25;  // of per-dimension box width
    double decay = 0.8;
    int decay_every = 10;
};

struct BabConfig {
    int max_depth = 20;
    long max_subproblems = 10000;
};

struct VerifierConfig {
    AttackConfig attack;
    BabConfig bab;
    double time_budget = 10.0;  // seconds
    std::uint64_t seed = 0;
    witness::Tolerances tol;
};

enum class Status { Sat, Unsat, Unknown };

std::string_view status_name(Status s);

struct VerifyStats {
    long subproblems = 0;
    long attack_iterations = 0;
    double elapsed_seconds = 0;
    std::string note;
};

struct VerifyOutcome {
    Status status = Status::Unknown;
    std::optional<witness::Witness> witness;  // present iff Sat
    VerifyStats stats;
};

// Sound output intervals by interval bound propagation: dense/conv via
// sign-split interval products, monotone activations endpoint-wise,
// max-pool as elementwise interval max, avg-pool as the mean, batchnorm as
// affine, residual add as interval sum.
IntervalVector ibp_bounds(const net::NetworkGraph& net,
                          const spec::InputBox& box);

// True iff the bounds prove some constraint of the conjunction infeasible.
// True is sound; false is inconclusive.
bool decide_disjunct_unsat(const IntervalVector& bounds,
                           const std::vector<spec::LinearConstraint>& constraints);

// Branch-and-bound split: widest dimension at its midpoint. The children
// partition the parent exactly (they share the midpoint plane).
std::pair<spec::InputBox, spec::InputBox> split_widest(
    const spec::InputBox& box);

// Projected gradient attack with restarts over each disjunct. A returned
// witness is exact (post-validated at the configured tolerances); absence
// proves nothing.
std::optional<witness::Witness> pgd_attack(const net::NetworkGraph& net,
                                           const spec::AdversarialQuery& query,
                                           const VerifierConfig& config);

// Attack first, then per-disjunct IBP with input-splitting branch-and-bound
// (widest dimension, midpoint). Unsat only when every disjunct is refuted;
// Unknown on depth/subproblem/time budget exhaustion. Deterministic given
// the seed.
VerifyOutcome verify(const net::NetworkGraph& net,
                     const spec::AdversarialQuery& query,
                     const VerifierConfig& config);

}  // namespace vnna::verify
