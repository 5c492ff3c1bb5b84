#pragma once

#include <algorithm>
#include <limits>
#include <random>
#include <span>

#include "vnnarena/speclang.hpp"

namespace support {

using vnna::spec::AdversarialQuery;
using vnna::spec::Disjunct;
using vnna::spec::InputBox;
using vnna::spec::LinearConstraint;
using vnna::spec::Relation;

inline LinearConstraint constraint(
    std::vector<std::pair<double, std::size_t>> output_terms, Relation rel,
    double bound) {
    LinearConstraint c;
    for (auto& [coeff, idx] : output_terms)
        c.terms.push_back({coeff, vnna::spec::output_var(idx)});
    c.relation = rel;
    c.bound = bound;
    return c;
}

inline AdversarialQuery query_of(std::size_t d_in, std::size_t d_out,
                                 std::vector<Disjunct> disjuncts) {
    AdversarialQuery q;
    q.num_inputs = d_in;
    q.num_outputs = d_out;
    q.disjuncts = std::move(disjuncts);
    vnna::spec::normalize(q);
    return q;
}

// True iff (x, y) satisfies some disjunct (non-strict, zero tolerance).
inline bool point_satisfies(const AdversarialQuery& q, std::span<const double> x,
                            std::span<const double> y) {
    for (const Disjunct& d : q.disjuncts) {
        bool in_box = true;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < d.box.lower[i] || x[i] > d.box.upper[i]) in_box = false;
        if (!in_box) continue;
        bool ok = true;
        for (const LinearConstraint& c : d.output_constraints)
            if (vnna::spec::constraint_slack(c, y) < 0) ok = false;
        if (ok) return true;
    }
    return false;
}

// Random normalized queries for the print/parse round-trip property.
inline AdversarialQuery random_query(std::mt19937_64& rng) {
    auto uni = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    auto pick = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };

    std::size_t d_in = static_cast<std::size_t>(pick(1, 3));
    std::size_t d_out = static_cast<std::size_t>(pick(1, 3));
    int n_disjuncts = pick(1, 3);
    bool shared_box = pick(0, 1) == 1;

    auto random_box = [&]() {
        InputBox box;
        box.lower.resize(d_in);
        box.upper.resize(d_in);
        for (std::size_t i = 0; i < d_in; ++i) {
            double a = uni(-2, 2), b = uni(-2, 2);
            box.lower[i] = std::min(a, b);
            box.upper[i] = std::max(a, b);
            if (pick(0, 9) == 0)
                box.lower[i] = -std::numeric_limits<double>::infinity();
            if (pick(0, 9) == 0)
                box.upper[i] = std::numeric_limits<double>::infinity();
        }
        return box;
    };

    InputBox common = random_box();
    AdversarialQuery q;
    q.num_inputs = d_in;
    q.num_outputs = d_out;
    for (int di = 0; di < n_disjuncts; ++di) {
        Disjunct d;
        d.box = shared_box ? common : random_box();
        int n_constraints = pick(0, 3);
        for (int ci = 0; ci < n_constraints; ++ci) {
            LinearConstraint c;
            int n_terms = pick(1, static_cast<int>(d_out));
            std::vector<std::size_t> vars(d_out);
            for (std::size_t k = 0; k < d_out; ++k) vars[k] = k;
            std::shuffle(vars.begin(), vars.end(), rng);
            for (int t = 0; t < n_terms; ++t) {
                double coeff = uni(0.1, 2.0) * (pick(0, 1) ? 1 : -1);
                c.terms.push_back({coeff, vnna::spec::output_var(vars[t])});
            }
            c.relation = pick(0, 1) ? Relation::GreaterEq : Relation::LessEq;
            c.bound = uni(-2, 2);
            d.output_constraints.push_back(std::move(c));
        }
        q.disjuncts.push_back(std::move(d));
    }
    vnna::spec::normalize(q);
    return q;
}

}  // namespace support
