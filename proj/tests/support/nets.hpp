#pragma once

#include <random>
#include <vector>

#include "vnnarena/netio.hpp"

namespace support {

using vnna::net::NetworkGraph;
using vnna::net::OpKind;
using vnna::net::OpNode;

// Weights on a dyadic grid (k/64) keep small-net arithmetic exact in
// 64-bit floats, which the hand-style oracles rely on.
inline double dyadic(std::mt19937_64& rng) {
    return std::uniform_int_distribution<int>(-64, 64)(rng) / 64.0;
}

inline OpNode dense_node(std::size_t rows, std::size_t cols,
                         std::mt19937_64& rng, int input_ref) {
    OpNode n;
    n.kind = OpKind::Dense;
    n.inputs = {input_ref};
    n.weight.shape = {rows, cols};
    n.weight.data.resize(rows * cols);
    for (double& w : n.weight.data) w = dyadic(rng);
    n.bias.shape = {rows};
    n.bias.data.resize(rows);
    for (double& b : n.bias.data) b = dyadic(rng);
    return n;
}

inline OpNode act_node(OpKind kind, int input_ref) {
    OpNode n;
    n.kind = kind;
    n.inputs = {input_ref};
    return n;
}

// Fully-connected chain: dense/act alternating, `hidden` sizes in order,
// activation drawn from `acts` per hidden layer.
inline NetworkGraph random_fc_net(std::mt19937_64& rng, std::size_t d_in,
                                  const std::vector<std::size_t>& hidden,
                                  std::size_t d_out,
                                  const std::vector<OpKind>& acts) {
    NetworkGraph g;
    g.input_shape = {d_in};
    std::size_t prev = d_in;
    int ref = vnna::net::kGraphInput;
    for (std::size_t h : hidden) {
        g.nodes.push_back(dense_node(h, prev, rng, ref));
        ref = static_cast<int>(g.nodes.size()) - 1;
        OpKind act = acts[std::uniform_int_distribution<std::size_t>(
            0, acts.size() - 1)(rng)];
        g.nodes.push_back(act_node(act, ref));
        ref = static_cast<int>(g.nodes.size()) - 1;
        prev = h;
    }
    g.nodes.push_back(dense_node(d_out, prev, rng, ref));
    vnna::net::validate_graph(g);
    return g;
}

}  // namespace support
