#include "vnnarena/refverify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "vnnarena/errors.hpp"

namespace vnna::verify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Sampling surrogate for unbounded boxes; projection still uses the real
// bounds, so returned witnesses stay inside the query box.
constexpr double kSampleClamp = 1e6;

struct IntervalTensor {
    std::vector<double> lo;
    std::vector<double> hi;
};

void interval_forward(const net::NetworkGraph& net, const spec::InputBox& box,
                      std::vector<IntervalTensor>& outs) {
    using net::OpKind;
    outs.assign(net.nodes.size(), {});
    IntervalTensor input{box.lower, box.upper};

    auto of = [&](int ref) -> const IntervalTensor& {
        if (ref == net::kGraphInput) return input;
        return outs[static_cast<std::size_t>(ref)];
    };
    auto shape_of = [&](int ref) -> const std::vector<std::size_t>& {
        if (ref == net::kGraphInput) return net.input_shape;
        return net.nodes[static_cast<std::size_t>(ref)].out_shape;
    };

    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        const net::OpNode& node = net.nodes[i];
        const IntervalTensor& in = of(node.inputs[0]);
        IntervalTensor& out = outs[i];
        switch (node.kind) {
            case OpKind::Dense: {
                std::size_t rows = node.weight.shape[0];
                std::size_t cols = node.weight.shape[1];
                out.lo.resize(rows);
                out.hi.resize(rows);
                for (std::size_t r = 0; r < rows; ++r) {
                    double lo = node.bias.data[r], hi = lo;
                    const double* wrow = node.weight.data.data() + r * cols;
                    for (std::size_t c = 0; c < cols; ++c) {
                        double w = wrow[c];
                        if (w > 0) {
                            lo += w * in.lo[c];
                            hi += w * in.hi[c];
                        } else if (w < 0) {
                            lo += w * in.hi[c];
                            hi += w * in.lo[c];
                        }
                    }
                    out.lo[r] = lo;
                    out.hi[r] = hi;
                }
                break;
            }
            case OpKind::Conv2d: {
                const auto& in_shape = shape_of(node.inputs[0]);
                std::size_t ci = in_shape[0], hi_ = in_shape[1],
                            wi = in_shape[2];
                std::size_t m = node.out_shape[0], ho = node.out_shape[1],
                            wo = node.out_shape[2];
                int kh = node.kernel[0], kw = node.kernel[1];
                out.lo.resize(m * ho * wo);
                out.hi.resize(m * ho * wo);
                for (std::size_t f = 0; f < m; ++f) {
                    for (std::size_t oh = 0; oh < ho; ++oh) {
                        for (std::size_t ow = 0; ow < wo; ++ow) {
                            double lo = node.bias.data[f], hi = lo;
                            for (std::size_t c = 0; c < ci; ++c) {
                                for (int r = 0; r < kh; ++r) {
                                    long ih = static_cast<long>(oh) *
                                                  node.strides[0] -
                                              node.pads[0] + r;
                                    if (ih < 0 || ih >= static_cast<long>(hi_))
                                        continue;
                                    for (int s = 0; s < kw; ++s) {
                                        long iw = static_cast<long>(ow) *
                                                      node.strides[1] -
                                                  node.pads[1] + s;
                                        if (iw < 0 ||
                                            iw >= static_cast<long>(wi))
                                            continue;
                                        double w =
                                            node.weight.data[((f * ci + c) *
                                                                  kh +
                                                              r) *
                                                                 kw +
                                                             s];
                                        std::size_t idx =
                                            (c * hi_ +
                                             static_cast<std::size_t>(ih)) *
                                                wi +
                                            static_cast<std::size_t>(iw);
                                        if (w > 0) {
                                            lo += w * in.lo[idx];
                                            hi += w * in.hi[idx];
                                        } else if (w < 0) {
                                            lo += w * in.hi[idx];
                                            hi += w * in.lo[idx];
                                        }
                                    }
                                }
                            }
                            out.lo[(f * ho + oh) * wo + ow] = lo;
                            out.hi[(f * ho + oh) * wo + ow] = hi;
                        }
                    }
                }
                break;
            }
            case OpKind::Relu: {
                out.lo.resize(in.lo.size());
                out.hi.resize(in.hi.size());
                for (std::size_t k = 0; k < in.lo.size(); ++k) {
                    out.lo[k] = in.lo[k] > 0 ? in.lo[k] : 0.0;
                    out.hi[k] = in.hi[k] > 0 ? in.hi[k] : 0.0;
                }
                break;
            }
            case OpKind::Sigmoid: {
                out.lo.resize(in.lo.size());
                out.hi.resize(in.hi.size());
                for (std::size_t k = 0; k < in.lo.size(); ++k) {
                    out.lo[k] = 1.0 / (1.0 + std::exp(-in.lo[k]));
                    out.hi[k] = 1.0 / (1.0 + std::exp(-in.hi[k]));
                }
                break;
            }
            case OpKind::Tanh: {
                out.lo.resize(in.lo.size());
                out.hi.resize(in.hi.size());
                for (std::size_t k = 0; k < in.lo.size(); ++k) {
                    out.lo[k] = std::tanh(in.lo[k]);
                    out.hi[k] = std::tanh(in.hi[k]);
                }
                break;
            }
            case OpKind::MaxPool2d:
            case OpKind::AvgPool2d: {
                const auto& in_shape = shape_of(node.inputs[0]);
                std::size_t hi_ = in_shape[1], wi = in_shape[2];
                std::size_t cs = node.out_shape[0], ho = node.out_shape[1],
                            wo = node.out_shape[2];
                bool is_max = node.kind == OpKind::MaxPool2d;
                out.lo.resize(cs * ho * wo);
                out.hi.resize(cs * ho * wo);
                for (std::size_t c = 0; c < cs; ++c) {
                    for (std::size_t oh = 0; oh < ho; ++oh) {
                        for (std::size_t ow = 0; ow < wo; ++ow) {
                            double blo = -kInf, bhi = -kInf;
                            double slo = 0, shi = 0;
                            std::size_t count = 0;
                            for (int r = 0; r < node.kernel[0]; ++r) {
                                long ih = static_cast<long>(oh) *
                                              node.strides[0] -
                                          node.pads[0] + r;
                                if (ih < 0 || ih >= static_cast<long>(hi_))
                                    continue;
                                for (int s = 0; s < node.kernel[1]; ++s) {
                                    long iw = static_cast<long>(ow) *
                                                  node.strides[1] -
                                              node.pads[1] + s;
                                    if (iw < 0 || iw >= static_cast<long>(wi))
                                        continue;
                                    std::size_t idx =
                                        (c * hi_ +
                                         static_cast<std::size_t>(ih)) *
                                            wi +
                                        static_cast<std::size_t>(iw);
                                    blo = std::max(blo, in.lo[idx]);
                                    bhi = std::max(bhi, in.hi[idx]);
                                    slo += in.lo[idx];
                                    shi += in.hi[idx];
                                    ++count;
                                }
                            }
                            std::size_t o = (c * ho + oh) * wo + ow;
                            if (is_max) {
                                out.lo[o] = blo;
                                out.hi[o] = bhi;
                            } else {
                                out.lo[o] = slo / static_cast<double>(count);
                                out.hi[o] = shi / static_cast<double>(count);
                            }
                        }
                    }
                }
                break;
            }
            case OpKind::BatchNorm: {
                std::size_t channels = node.scale.size();
                std::size_t per = in.lo.size() / channels;
                out.lo.resize(in.lo.size());
                out.hi.resize(in.hi.size());
                for (std::size_t c = 0; c < channels; ++c) {
                    double s = node.scale.data[c], t = node.shift.data[c];
                    for (std::size_t k = 0; k < per; ++k) {
                        double a = s * in.lo[c * per + k] + t;
                        double b = s * in.hi[c * per + k] + t;
                        out.lo[c * per + k] = s >= 0 ? a : b;
                        out.hi[c * per + k] = s >= 0 ? b : a;
                    }
                }
                break;
            }
            case OpKind::Add: {
                out.lo = in.lo;
                out.hi = in.hi;
                if (node.inputs.size() == 2) {
                    const IntervalTensor& rhs = of(node.inputs[1]);
                    for (std::size_t k = 0; k < out.lo.size(); ++k) {
                        out.lo[k] += rhs.lo[k];
                        out.hi[k] += rhs.hi[k];
                    }
                } else {
                    for (std::size_t k = 0; k < out.lo.size(); ++k) {
                        out.lo[k] += node.bias.data[k];
                        out.hi[k] += node.bias.data[k];
                    }
                }
                break;
            }
            case OpKind::Flatten:
            case OpKind::Reshape:
                out.lo = in.lo;
                out.hi = in.hi;
                break;
        }
    }
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

// Deterministic gradient ascent on the most-violated constraint, starting
// from x0. Returns a point satisfying the disjunct exactly, if found.
std::optional<std::vector<double>> climb(const net::NetworkGraph& net,
                                         const spec::Disjunct& d,
                                         std::vector<double> x,
                                         const AttackConfig& cfg,
                                         long& iterations) {
    std::size_t dim = x.size();
    std::vector<double> widths(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        double lo = std::max(d.box.lower[i], -kSampleClamp);
        double hi = std::min(d.box.upper[i], kSampleClamp);
        widths[i] = std::max(hi - lo, 0.0);
    }

    double alpha = cfg.step_frac;
    for (int step = 0;; ++step) {
        std::vector<double> y = net::evaluate(net, x);
        double worst = kInf;
        std::size_t worst_idx = 0;
        for (std::size_t k = 0; k < d.output_constraints.size(); ++k) {
            double s = spec::constraint_slack(d.output_constraints[k], y);
            if (s < worst) {
                worst = s;
                worst_idx = k;
            }
        }
        if (d.output_constraints.empty() || worst >= 0) return x;
        if (step >= cfg.steps) return std::nullopt;
        ++iterations;
        if (step > 0 && step % cfg.decay_every == 0) alpha *= cfg.decay;

        std::vector<double> g =
            net::input_gradient(net, x, d.output_constraints[worst_idx]);
        for (std::size_t i = 0; i < dim; ++i) {
            double dir = g[i] > 0 ? 1.0 : (g[i] < 0 ? -1.0 : 0.0);
            x[i] += alpha * widths[i] * dir;
            x[i] = std::min(std::max(x[i], d.box.lower[i]), d.box.upper[i]);
        }
    }
}

std::optional<witness::Witness> attack_disjunct(
    const net::NetworkGraph& net, const spec::AdversarialQuery& query,
    const spec::Disjunct& d, const VerifierConfig& config, std::mt19937_64& rng,
    long& iterations, bool random_starts) {
    if (d.box.empty()) return std::nullopt;
    std::size_t dim = d.box.lower.size();

    std::vector<double> slo(dim), shi(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        slo[i] = std::max(d.box.lower[i], -kSampleClamp);
        shi[i] = std::min(d.box.upper[i], kSampleClamp);
        if (slo[i] > shi[i]) return std::nullopt;
    }

    int restarts = random_starts ? config.attack.restarts : 1;
    for (int restart = 0; restart < restarts; ++restart) {
        std::vector<double> x0(dim);
        if (restart == 0) {
            for (std::size_t i = 0; i < dim; ++i)
                x0[i] = 0.5 * (slo[i] + shi[i]);
        } else {
            for (std::size_t i = 0; i < dim; ++i) {
                std::uniform_real_distribution<double> u(slo[i], shi[i]);
                x0[i] = u(rng);
            }
        }
        auto hit = climb(net, d, std::move(x0), config.attack, iterations);
        if (hit) {
            witness::Witness w;
            w.x = std::move(*hit);
            w.y_claimed = net::evaluate(net, w.x);
            // a witness leaves this module only if it validates
            auto report = witness::validate(w, query, net, config.tol);
            if (report.verdict == witness::Verdict::Valid) return w;
        }
    }
    return std::nullopt;
}

}  // namespace

std::string_view status_name(Status s) {
    switch (s) {
        case Status::Sat: return "sat";
        case Status::Unsat: return "unsat";
        case Status::Unknown: return "unknown";
    }
    return "?";
}

IntervalVector ibp_bounds(const net::NetworkGraph& net,
                          const spec::InputBox& box) {
    if (box.lower.size() != net.d_in || box.upper.size() != net.d_in)
        throw DimensionMismatch("box dimension " +
                                std::to_string(box.lower.size()) +
                                " does not match network input " +
                                std::to_string(net.d_in));
    std::vector<IntervalTensor> outs;
    interval_forward(net, box, outs);
    const IntervalTensor& out =
        outs[static_cast<std::size_t>(net.output_node)];
    return {out.lo, out.hi};
}

bool decide_disjunct_unsat(
    const IntervalVector& bounds,
    const std::vector<spec::LinearConstraint>& constraints) {
    for (const spec::LinearConstraint& c : constraints) {
        double lo = 0, hi = 0;
        for (const spec::LinearTerm& t : c.terms) {
            double coeff = t.coefficient;
            double l = bounds.lower[t.variable.index];
            double h = bounds.upper[t.variable.index];
            if (coeff > 0) {
                lo += coeff * l;
                hi += coeff * h;
            } else if (coeff < 0) {
                lo += coeff * h;
                hi += coeff * l;
            }
        }
        if (c.relation == spec::Relation::GreaterEq) {
            if (hi < c.bound) return true;
        } else {
            if (lo > c.bound) return true;
        }
    }
    return false;
}

std::pair<spec::InputBox, spec::InputBox> split_widest(
    const spec::InputBox& box) {
    std::size_t widest = 0;
    double max_width = -kInf;
    for (std::size_t i = 0; i < box.lower.size(); ++i) {
        double w = box.upper[i] - box.lower[i];
        if (w > max_width) {
            max_width = w;
            widest = i;
        }
    }
    double mid = 0.5 * (box.lower[widest] + box.upper[widest]);
    spec::InputBox left = box, right = box;
    left.upper[widest] = mid;
    right.lower[widest] = mid;
    return {std::move(left), std::move(right)};
}

std::optional<witness::Witness> pgd_attack(const net::NetworkGraph& net,
                                           const spec::AdversarialQuery& query,
                                           const VerifierConfig& config) {
    if (!config.attack.enabled) return std::nullopt;
    std::mt19937_64 rng(config.seed);
    long iterations = 0;
    for (const spec::Disjunct& d : query.disjuncts) {
        auto w = attack_disjunct(net, query, d, config, rng, iterations, true);
        if (w) return w;
    }
    return std::nullopt;
}

VerifyOutcome verify(const net::NetworkGraph& net,
                     const spec::AdversarialQuery& query,
                     const VerifierConfig& config) {
    VerifyOutcome outcome;
    double t0 = now_seconds();
    auto elapsed = [&]() { return now_seconds() - t0; };
    auto finish = [&](Status s) {
        outcome.status = s;
        outcome.stats.elapsed_seconds = elapsed();
        return outcome;
    };

    if (query.num_inputs != net.d_in || query.num_outputs != net.d_out) {
        outcome.stats.note = "query/network dimension mismatch";
        return finish(Status::Unknown);
    }
    if (query.disjuncts.empty()) {
        outcome.stats.note = "query has no disjuncts";
        return finish(Status::Unknown);
    }

    std::mt19937_64 rng(config.seed);

    // attack phase: cheap SAT short-circuit
    if (config.attack.enabled) {
        for (const spec::Disjunct& d : query.disjuncts) {
            if (elapsed() > config.time_budget) {
                outcome.stats.note = "time budget exhausted";
                return finish(Status::Unknown);
            }
            auto w = attack_disjunct(net, query, d, config, rng,
                                     outcome.stats.attack_iterations, true);
            if (w) {
                outcome.witness = std::move(w);
                return finish(Status::Sat);
            }
        }
    }

    // branch-and-bound per disjunct
    bool complete = true;
    struct Node {
        spec::InputBox box;
        int depth;
    };
    for (const spec::Disjunct& disjunct : query.disjuncts) {
        if (disjunct.box.empty()) {
            ++outcome.stats.subproblems;
            continue;
        }
        if (!disjunct.box.bounded()) {
            complete = false;
            outcome.stats.note = "unbounded input box";
            continue;
        }
        std::vector<Node> stack;
        stack.push_back({disjunct.box, 0});
        while (!stack.empty()) {
            if (elapsed() > config.time_budget) {
                outcome.stats.note = "time budget exhausted";
                return finish(Status::Unknown);
            }
            if (outcome.stats.subproblems >= config.bab.max_subproblems) {
                outcome.stats.note = "subproblem budget exhausted";
                return finish(Status::Unknown);
            }
            Node nodebox = std::move(stack.back());
            stack.pop_back();
            ++outcome.stats.subproblems;

            IntervalVector bounds = ibp_bounds(net, nodebox.box);
            if (decide_disjunct_unsat(bounds, disjunct.output_constraints))
                continue;

            // attack inside the leaf box before splitting further
            spec::Disjunct leaf{nodebox.box, disjunct.output_constraints};
            auto w = attack_disjunct(net, query, leaf, config, rng,
                                     outcome.stats.attack_iterations, false);
            if (w) {
                outcome.witness = std::move(w);
                return finish(Status::Sat);
            }

            if (nodebox.depth >= config.bab.max_depth) {
                complete = false;
                outcome.stats.note = "depth limit reached";
                continue;
            }

            double max_width = 0;
            for (std::size_t i = 0; i < nodebox.box.lower.size(); ++i)
                max_width = std::max(
                    max_width, nodebox.box.upper[i] - nodebox.box.lower[i]);
            if (!(max_width > 0)) {
                // point box neither refuted nor falsified: tolerance knife-edge
                complete = false;
                outcome.stats.note = "undecidable point box";
                continue;
            }
            auto [left, right] = split_widest(nodebox.box);
            stack.push_back({std::move(right), nodebox.depth + 1});
            stack.push_back({std::move(left), nodebox.depth + 1});
        }
    }

    if (complete) return finish(Status::Unsat);
    return finish(Status::Unknown);
}

}  // namespace vnna::verify
