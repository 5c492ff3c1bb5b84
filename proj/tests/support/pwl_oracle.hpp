#pragma once

// Exact-enumeration ground truth for 2-input dense/relu chains: the network
// is affine on each relu activation region, so the maximum over the input
// box of the per-disjunct "min constraint slack" is attained at a vertex of
// the region arrangement refined by slack-tie lines. Enumerating those
// vertices gives the satisfiability margin of the whole query:
//   margin > 0  => SAT (a point with positive slack on every constraint)
//   margin < 0  => UNSAT (no point of the box satisfies the disjunct)
// Instances with |margin| below a filter threshold are rejected as
// numerically ambiguous by the caller.

#include <array>
#include <limits>

#include "vnnarena/netio.hpp"
#include "vnnarena/speclang.hpp"

namespace support::pwl {

struct OracleResult {
    double margin = -std::numeric_limits<double>::infinity();
    std::array<double, 2> argmax{0, 0};
    long regions = 0;
};

// Maximum over the query of the min-slack function; net must be a
// dense/relu chain with d_in == 2.
OracleResult query_margin(const vnna::net::NetworkGraph& net,
                          const vnna::spec::AdversarialQuery& query);

}  // namespace support::pwl
