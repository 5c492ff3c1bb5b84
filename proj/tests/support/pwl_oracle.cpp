#include "pwl_oracle.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace support::pwl {

namespace {

using vnna::net::NetworkGraph;
using vnna::net::OpKind;
using vnna::spec::AdversarialQuery;
using vnna::spec::Disjunct;
using vnna::spec::LinearConstraint;
using vnna::spec::Relation;

// One linear functional of the 2-d input: a*x0 + b*x1 + c.
struct Affine {
    double a = 0, b = 0, c = 0;

    double at(double x0, double x1) const { return a * x0 + b * x1 + c; }
};

// Half-plane a*x0 + b*x1 + c >= 0.
struct HalfPlane {
    double a, b, c;

    double at(double x0, double x1) const { return a * x0 + b * x1 + c; }
};

constexpr double kContainTol = 1e-7;

struct Candidate {
    double x0, x1;
};

// All pairwise line intersections of the boundary lines in `planes` plus
// the extra `lines`; callers filter by containment.
std::vector<Candidate> intersections(const std::vector<HalfPlane>& planes,
                                     const std::vector<Affine>& lines) {
    std::vector<std::array<double, 3>> ls;
    for (const HalfPlane& h : planes) ls.push_back({h.a, h.b, h.c});
    for (const Affine& l : lines) ls.push_back({l.a, l.b, l.c});
    std::vector<Candidate> out;
    for (std::size_t i = 0; i < ls.size(); ++i) {
        for (std::size_t j = i + 1; j < ls.size(); ++j) {
            double det = ls[i][0] * ls[j][1] - ls[j][0] * ls[i][1];
            double scale = std::abs(ls[i][0]) + std::abs(ls[i][1]) +
                           std::abs(ls[j][0]) + std::abs(ls[j][1]);
            if (std::abs(det) <= 1e-12 * std::max(1.0, scale * scale))
                continue;  // (nearly) parallel
            double x0 = (-ls[i][2] * ls[j][1] + ls[j][2] * ls[i][1]) / det;
            double x1 = (-ls[i][0] * ls[j][2] + ls[j][0] * ls[i][2]) / det;
            if (std::isfinite(x0) && std::isfinite(x1)) out.push_back({x0, x1});
        }
    }
    return out;
}

bool contained(const std::vector<HalfPlane>& planes, double x0, double x1) {
    for (const HalfPlane& h : planes)
        if (h.at(x0, x1) < -kContainTol) return false;
    return true;
}

bool region_feasible(const std::vector<HalfPlane>& planes) {
    for (const Candidate& c : intersections(planes, {}))
        if (contained(planes, c.x0, c.x1)) return true;
    return false;
}

struct Walker {
    const NetworkGraph& net;
    const Disjunct& disjunct;
    OracleResult result;

    // Slack of constraint k as an affine functional of x, given the output
    // affine forms.
    Affine slack_affine(const LinearConstraint& c,
                        const std::vector<Affine>& y) const {
        Affine s;
        for (const auto& t : c.terms) {
            const Affine& yi = y[t.variable.index];
            s.a += t.coefficient * yi.a;
            s.b += t.coefficient * yi.b;
            s.c += t.coefficient * yi.c;
        }
        s.c -= c.bound;
        if (c.relation == Relation::LessEq) {
            s.a = -s.a;
            s.b = -s.b;
            s.c = -s.c;
        }
        return s;
    }

    // Evaluate the region: maximize min_k slack_k over the polygon.
    void finish_region(const std::vector<HalfPlane>& planes,
                       const std::vector<Affine>& outputs) {
        ++result.regions;
        const auto& constraints = disjunct.output_constraints;
        if (constraints.empty()) {
            // any feasible point satisfies the disjunct
            for (const Candidate& c : intersections(planes, {})) {
                if (!contained(planes, c.x0, c.x1)) continue;
                result.margin = std::numeric_limits<double>::infinity();
                result.argmax = {c.x0, c.x1};
                return;
            }
            return;
        }
        std::vector<Affine> slacks;
        for (const LinearConstraint& c : constraints)
            slacks.push_back(slack_affine(c, outputs));

        std::vector<Affine> ties;
        for (std::size_t i = 0; i < slacks.size(); ++i)
            for (std::size_t j = i + 1; j < slacks.size(); ++j)
                ties.push_back({slacks[i].a - slacks[j].a,
                                slacks[i].b - slacks[j].b,
                                slacks[i].c - slacks[j].c});

        for (const Candidate& c : intersections(planes, ties)) {
            if (!contained(planes, c.x0, c.x1)) continue;
            double value = std::numeric_limits<double>::infinity();
            for (const Affine& s : slacks)
                value = std::min(value, s.at(c.x0, c.x1));
            if (value > result.margin) {
                result.margin = value;
                result.argmax = {c.x0, c.x1};
            }
        }
    }

    // Recurse over relu sign patterns from node `node_idx` onward; `values`
    // holds the affine form of the current tensor, `planes` the region.
    void walk(std::size_t node_idx, std::vector<Affine> values,
              std::vector<HalfPlane> planes) {
        if (node_idx == net.nodes.size()) {
            finish_region(planes, values);
            return;
        }
        const auto& node = net.nodes[node_idx];
        if (node.kind == OpKind::Dense) {
            std::size_t rows = node.weight.shape[0];
            std::size_t cols = node.weight.shape[1];
            std::vector<Affine> next(rows);
            for (std::size_t r = 0; r < rows; ++r) {
                Affine acc;
                acc.c = node.bias.data[r];
                for (std::size_t cc = 0; cc < cols; ++cc) {
                    double w = node.weight.data[r * cols + cc];
                    acc.a += w * values[cc].a;
                    acc.b += w * values[cc].b;
                    acc.c += w * values[cc].c;
                }
                next[r] = acc;
            }
            walk(node_idx + 1, std::move(next), std::move(planes));
            return;
        }
        if (node.kind == OpKind::Relu) {
            branch_relu(node_idx, 0, values, planes);
            return;
        }
        throw std::runtime_error("pwl oracle: unsupported operator");
    }

    void branch_relu(std::size_t node_idx, std::size_t neuron,
                     std::vector<Affine>& values,
                     std::vector<HalfPlane>& planes) {
        if (neuron == values.size()) {
            walk(node_idx + 1, values, planes);
            return;
        }
        Affine z = values[neuron];

        // active branch: z >= 0, value stays z
        planes.push_back({z.a, z.b, z.c});
        if (region_feasible(planes)) branch_relu(node_idx, neuron + 1, values, planes);
        planes.pop_back();

        // inactive branch: z <= 0, value becomes 0
        planes.push_back({-z.a, -z.b, -z.c});
        if (region_feasible(planes)) {
            values[neuron] = Affine{};
            branch_relu(node_idx, neuron + 1, values, planes);
            values[neuron] = z;
        }
        planes.pop_back();
    }
};

}  // namespace

OracleResult query_margin(const NetworkGraph& net,
                          const AdversarialQuery& query) {
    if (net.d_in != 2)
        throw std::runtime_error("pwl oracle handles 2-input networks only");

    OracleResult best;
    for (const Disjunct& d : query.disjuncts) {
        if (d.box.empty()) continue;
        std::vector<HalfPlane> box_planes = {
            {1, 0, -d.box.lower[0]},   // x0 >= l0
            {-1, 0, d.box.upper[0]},   // x0 <= u0
            {0, 1, -d.box.lower[1]},
            {0, -1, d.box.upper[1]},
        };
        Walker walker{net, d, {}};
        std::vector<Affine> input = {{1, 0, 0}, {0, 1, 0}};
        walker.walk(0, input, box_planes);
        if (walker.result.margin > best.margin) {
            best.margin = walker.result.margin;
            best.argmax = walker.result.argmax;
        }
        best.regions += walker.result.regions;
    }
    return best;
}

}  // namespace support::pwl
