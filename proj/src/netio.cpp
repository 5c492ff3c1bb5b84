#include "vnnarena/netio.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "vnnarena/errors.hpp"
#include "vnnarena/textutil.hpp"

namespace vnna::net {

std::size_t shape_product(std::span<const std::size_t> shape) {
    std::size_t p = 1;
    for (std::size_t d : shape) p *= d;
    return p;
}

std::string_view op_kind_name(OpKind kind) {
    switch (kind) {
        case OpKind::Dense: return "dense";
        case OpKind::Conv2d: return "conv";
        case OpKind::Relu: return "relu";
        case OpKind::Sigmoid: return "sigmoid";
        case OpKind::Tanh: return "tanh";
        case OpKind::MaxPool2d: return "maxpool";
        case OpKind::AvgPool2d: return "avgpool";
        case OpKind::BatchNorm: return "batchnorm";
        case OpKind::Add: return "add";
        case OpKind::Flatten: return "flatten";
        case OpKind::Reshape: return "reshape";
    }
    return "?";
}

namespace {

struct Chw {
    std::size_t c, h, w;
};

Chw as_chw(const std::vector<std::size_t>& shape, const char* what) {
    if (shape.size() != 3)
        throw ShapeError(std::string(what) +
                         " expects a (channels, height, width) input, got rank " +
                         std::to_string(shape.size()));
    return {shape[0], shape[1], shape[2]};
}

// Output extent of a strided window op, ONNX floor semantics.
std::size_t window_out(std::size_t in, int pad_lo, int pad_hi, int kernel,
                       int stride, const char* what) {
    long padded = static_cast<long>(in) + pad_lo + pad_hi;
    if (kernel <= 0 || stride <= 0)
        throw ShapeError(std::string(what) + ": kernel and stride must be positive");
    if (padded < kernel)
        throw ShapeError(std::string(what) + ": window larger than padded input");
    return static_cast<std::size_t>((padded - kernel) / stride + 1);
}

}  // namespace

void validate_graph(NetworkGraph& net) {
    if (net.input_shape.empty())
        throw ShapeError("network has no input shape");
    if (net.nodes.empty()) throw ShapeError("network has no operators");
    net.d_in = shape_product(net.input_shape);
    if (net.d_in == 0) throw ShapeError("input shape has a zero dimension");

    auto shape_of = [&](int ref) -> const std::vector<std::size_t>& {
        if (ref == kGraphInput) return net.input_shape;
        return net.nodes[static_cast<std::size_t>(ref)].out_shape;
    };

    std::vector<char> consumed(net.nodes.size(), 0);
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        OpNode& node = net.nodes[i];
        if (node.inputs.empty())
            throw ShapeError("node " + std::to_string(i) + " has no input");
        for (int ref : node.inputs) {
            if (ref != kGraphInput &&
                (ref < 0 || static_cast<std::size_t>(ref) >= i))
                throw ShapeError("node " + std::to_string(i) +
                                 " references node " + std::to_string(ref) +
                                 " out of topological order");
            if (ref != kGraphInput) consumed[static_cast<std::size_t>(ref)] = 1;
        }
        std::size_t arity = node.kind == OpKind::Add ? node.inputs.size() : 1;
        if (node.kind == OpKind::Add) {
            if (!(arity == 2 || (arity == 1 && node.bias.size() > 0)))
                throw ShapeError("add needs two operands");
        } else if (node.inputs.size() != 1) {
            throw ShapeError(std::string(op_kind_name(node.kind)) +
                             " takes exactly one input");
        }
        const auto& in_shape = shape_of(node.inputs[0]);
        std::size_t in_size = shape_product(in_shape);

        switch (node.kind) {
            case OpKind::Dense: {
                if (node.weight.shape.size() != 2)
                    throw ShapeError("dense weight must be a matrix");
                std::size_t rows = node.weight.shape[0];
                std::size_t cols = node.weight.shape[1];
                if (node.weight.size() != rows * cols)
                    throw ShapeError("dense weight data size mismatch");
                if (cols != in_size)
                    throw ShapeError("dense expects input of size " +
                                     std::to_string(cols) + ", got " +
                                     std::to_string(in_size));
                if (node.bias.size() != rows)
                    throw ShapeError("dense bias size mismatch");
                node.out_shape = {rows};
                break;
            }
            case OpKind::Conv2d: {
                Chw in = as_chw(in_shape, "conv");
                if (node.weight.shape.size() != 4)
                    throw ShapeError("conv weight must have rank 4");
                std::size_t m = node.weight.shape[0];
                if (node.weight.shape[1] != in.c)
                    throw ShapeError("conv channel mismatch");
                node.kernel = {static_cast<int>(node.weight.shape[2]),
                               static_cast<int>(node.weight.shape[3])};
                if (node.bias.size() != m)
                    throw ShapeError("conv bias size mismatch");
                std::size_t ho = window_out(in.h, node.pads[0], node.pads[2],
                                            node.kernel[0], node.strides[0],
                                            "conv");
                std::size_t wo = window_out(in.w, node.pads[1], node.pads[3],
                                            node.kernel[1], node.strides[1],
                                            "conv");
                node.out_shape = {m, ho, wo};
                break;
            }
            case OpKind::Relu:
            case OpKind::Sigmoid:
            case OpKind::Tanh:
                node.out_shape = in_shape;
                break;
            case OpKind::MaxPool2d:
            case OpKind::AvgPool2d: {
                const char* what = op_kind_name(node.kind).data();
                Chw in = as_chw(in_shape, what);
                if (node.pads[0] >= node.kernel[0] ||
                    node.pads[1] >= node.kernel[1] ||
                    node.pads[2] >= node.kernel[0] ||
                    node.pads[3] >= node.kernel[1])
                    throw ShapeError("pooling pads must be smaller than the kernel");
                std::size_t ho = window_out(in.h, node.pads[0], node.pads[2],
                                            node.kernel[0], node.strides[0],
                                            what);
                std::size_t wo = window_out(in.w, node.pads[1], node.pads[3],
                                            node.kernel[1], node.strides[1],
                                            what);
                node.out_shape = {in.c, ho, wo};
                break;
            }
            case OpKind::BatchNorm: {
                std::size_t channels = in_shape[0];
                if (node.scale.size() != channels ||
                    node.shift.size() != channels)
                    throw ShapeError("batchnorm parameter size mismatch");
                node.out_shape = in_shape;
                break;
            }
            case OpKind::Add: {
                if (node.inputs.size() == 2) {
                    const auto& other = shape_of(node.inputs[1]);
                    if (shape_product(other) != in_size)
                        throw ShapeError("add operand size mismatch");
                } else if (node.bias.size() != in_size) {
                    throw ShapeError("add constant size mismatch");
                }
                node.out_shape = in_shape;
                break;
            }
            case OpKind::Flatten:
                node.out_shape = {in_size};
                break;
            case OpKind::Reshape: {
                std::vector<std::size_t> target = node.target_shape;
                std::size_t known = 1;
                int infer = -1;
                for (std::size_t k = 0; k < target.size(); ++k) {
                    if (target[k] == 0) {
                        if (infer >= 0)
                            throw ShapeError("reshape: more than one inferred dim");
                        infer = static_cast<int>(k);
                    } else {
                        known *= target[k];
                    }
                }
                if (infer >= 0) {
                    if (known == 0 || in_size % known != 0)
                        throw ShapeError("reshape: cannot infer dimension");
                    target[static_cast<std::size_t>(infer)] = in_size / known;
                } else if (known != in_size) {
                    throw ShapeError("reshape changes element count");
                }
                node.out_shape = target;
                break;
            }
        }
    }

    net.output_node = static_cast<int>(net.nodes.size()) - 1;
    for (std::size_t i = 0; i + 1 < net.nodes.size(); ++i)
        if (!consumed[i])
            throw ShapeError("node " + std::to_string(i) +
                             " is not connected to the output");
    net.output_shape = net.nodes.back().out_shape;
    net.d_out = shape_product(net.output_shape);
    if (net.d_out == 0) throw ShapeError("output shape has a zero dimension");
}

namespace {

// Forward pass storing every node output; shared by evaluate and the
// gradient pass.
void forward(const NetworkGraph& net, std::span<const double> x,
             std::vector<std::vector<double>>& outs) {
    outs.assign(net.nodes.size(), {});
    auto value_of = [&](int ref) -> std::span<const double> {
        if (ref == kGraphInput) return x;
        return outs[static_cast<std::size_t>(ref)];
    };

    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        const OpNode& node = net.nodes[i];
        std::span<const double> in = value_of(node.inputs[0]);
        std::vector<double>& out = outs[i];
        switch (node.kind) {
            case OpKind::Dense: {
                std::size_t rows = node.weight.shape[0];
                std::size_t cols = node.weight.shape[1];
                out.resize(rows);
                for (std::size_t r = 0; r < rows; ++r) {
                    double acc = node.bias.data[r];
                    const double* wrow = node.weight.data.data() + r * cols;
                    for (std::size_t c = 0; c < cols; ++c)
                        acc += wrow[c] * in[c];
                    out[r] = acc;
                }
                break;
            }
            case OpKind::Conv2d: {
                const auto& in_shape =
                    node.inputs[0] == kGraphInput
                        ? net.input_shape
                        : net.nodes[static_cast<std::size_t>(node.inputs[0])]
                              .out_shape;
                std::size_t ci = in_shape[0], hi = in_shape[1],
                            wi = in_shape[2];
                std::size_t m = node.out_shape[0], ho = node.out_shape[1],
                            wo = node.out_shape[2];
                int kh = node.kernel[0], kw = node.kernel[1];
                out.resize(m * ho * wo);
                for (std::size_t f = 0; f < m; ++f) {
                    for (std::size_t oh = 0; oh < ho; ++oh) {
                        for (std::size_t ow = 0; ow < wo; ++ow) {
                            double acc = node.bias.data[f];
                            for (std::size_t c = 0; c < ci; ++c) {
                                for (int r = 0; r < kh; ++r) {
                                    long ih = static_cast<long>(oh) *
                                                  node.strides[0] -
                                              node.pads[0] + r;
                                    if (ih < 0 || ih >= static_cast<long>(hi))
                                        continue;
                                    for (int s = 0; s < kw; ++s) {
                                        long iw = static_cast<long>(ow) *
                                                      node.strides[1] -
                                                  node.pads[1] + s;
                                        if (iw < 0 ||
                                            iw >= static_cast<long>(wi))
                                            continue;
                                        double wv =
                                            node.weight.data[((f * ci + c) *
                                                                  kh +
                                                              r) *
                                                                 kw +
                                                             s];
                                        acc += wv *
                                               in[(c * hi + ih) * wi + iw];
                                    }
                                }
                            }
                            out[(f * ho + oh) * wo + ow] = acc;
                        }
                    }
                }
                break;
            }
            case OpKind::Relu: {
                out.resize(in.size());
                for (std::size_t k = 0; k < in.size(); ++k)
                    out[k] = in[k] > 0 ? in[k] : 0.0;
                break;
            }
            case OpKind::Sigmoid: {
                out.resize(in.size());
                for (std::size_t k = 0; k < in.size(); ++k)
                    out[k] = 1.0 / (1.0 + std::exp(-in[k]));
                break;
            }
            case OpKind::Tanh: {
                out.resize(in.size());
                for (std::size_t k = 0; k < in.size(); ++k)
                    out[k] = std::tanh(in[k]);
                break;
            }
            case OpKind::MaxPool2d:
            case OpKind::AvgPool2d: {
                const auto& in_shape =
                    node.inputs[0] == kGraphInput
                        ? net.input_shape
                        : net.nodes[static_cast<std::size_t>(node.inputs[0])]
                              .out_shape;
                std::size_t hi = in_shape[1], wi = in_shape[2];
                std::size_t cs = node.out_shape[0], ho = node.out_shape[1],
                            wo = node.out_shape[2];
                bool is_max = node.kind == OpKind::MaxPool2d;
                out.resize(cs * ho * wo);
                for (std::size_t c = 0; c < cs; ++c) {
                    for (std::size_t oh = 0; oh < ho; ++oh) {
                        for (std::size_t ow = 0; ow < wo; ++ow) {
                            double best =
                                -std::numeric_limits<double>::infinity();
                            double sum = 0;
                            std::size_t count = 0;
                            for (int r = 0; r < node.kernel[0]; ++r) {
                                long ih = static_cast<long>(oh) *
                                              node.strides[0] -
                                          node.pads[0] + r;
                                if (ih < 0 || ih >= static_cast<long>(hi))
                                    continue;
                                for (int s = 0; s < node.kernel[1]; ++s) {
                                    long iw = static_cast<long>(ow) *
                                                  node.strides[1] -
                                              node.pads[1] + s;
                                    if (iw < 0 || iw >= static_cast<long>(wi))
                                        continue;
                                    double v = in[(c * hi + ih) * wi + iw];
                                    if (v > best) best = v;
                                    sum += v;
                                    ++count;
                                }
                            }
                            out[(c * ho + oh) * wo + ow] =
                                is_max ? best : sum / static_cast<double>(count);
                        }
                    }
                }
                break;
            }
            case OpKind::BatchNorm: {
                std::size_t channels = node.scale.size();
                std::size_t per = in.size() / channels;
                out.resize(in.size());
                for (std::size_t c = 0; c < channels; ++c)
                    for (std::size_t k = 0; k < per; ++k)
                        out[c * per + k] = node.scale.data[c] * in[c * per + k] +
                                           node.shift.data[c];
                break;
            }
            case OpKind::Add: {
                out.assign(in.begin(), in.end());
                if (node.inputs.size() == 2) {
                    std::span<const double> rhs = value_of(node.inputs[1]);
                    for (std::size_t k = 0; k < out.size(); ++k)
                        out[k] += rhs[k];
                } else {
                    for (std::size_t k = 0; k < out.size(); ++k)
                        out[k] += node.bias.data[k];
                }
                break;
            }
            case OpKind::Flatten:
            case OpKind::Reshape:
                out.assign(in.begin(), in.end());
                break;
        }
    }
}

}  // namespace

std::vector<double> evaluate(const NetworkGraph& net,
                             std::span<const double> x) {
    if (x.size() != net.d_in)
        throw DimensionMismatch("input has length " + std::to_string(x.size()) +
                                ", network expects " + std::to_string(net.d_in));
    std::vector<std::vector<double>> outs;
    forward(net, x, outs);
    return outs[static_cast<std::size_t>(net.output_node)];
}

std::vector<double> input_gradient(const NetworkGraph& net,
                                   std::span<const double> x,
                                   std::span<const double> output_coeffs) {
    if (x.size() != net.d_in)
        throw DimensionMismatch("input has length " + std::to_string(x.size()) +
                                ", network expects " + std::to_string(net.d_in));
    if (output_coeffs.size() != net.d_out)
        throw DimensionMismatch("objective has length " +
                                std::to_string(output_coeffs.size()) +
                                ", network emits " + std::to_string(net.d_out));

    std::vector<std::vector<double>> outs;
    forward(net, x, outs);

    std::vector<std::vector<double>> grads(net.nodes.size());
    std::vector<double> gx(net.d_in, 0.0);
    for (std::size_t i = 0; i < net.nodes.size(); ++i)
        grads[i].assign(outs[i].size(), 0.0);
    grads[static_cast<std::size_t>(net.output_node)]
        .assign(output_coeffs.begin(), output_coeffs.end());

    auto grad_of = [&](int ref) -> std::vector<double>& {
        if (ref == kGraphInput) return gx;
        return grads[static_cast<std::size_t>(ref)];
    };
    auto value_of = [&](int ref) -> std::span<const double> {
        if (ref == kGraphInput) return x;
        return outs[static_cast<std::size_t>(ref)];
    };

    for (std::size_t ri = net.nodes.size(); ri-- > 0;) {
        const OpNode& node = net.nodes[ri];
        const std::vector<double>& g = grads[ri];
        std::vector<double>& gin = grad_of(node.inputs[0]);
        std::span<const double> in = value_of(node.inputs[0]);
        switch (node.kind) {
            case OpKind::Dense: {
                std::size_t rows = node.weight.shape[0];
                std::size_t cols = node.weight.shape[1];
                for (std::size_t r = 0; r < rows; ++r) {
                    if (g[r] == 0.0) continue;
                    const double* wrow = node.weight.data.data() + r * cols;
                    for (std::size_t c = 0; c < cols; ++c)
                        gin[c] += wrow[c] * g[r];
                }
                break;
            }
            case OpKind::Conv2d: {
                const auto& in_shape =
                    node.inputs[0] == kGraphInput
                        ? net.input_shape
                        : net.nodes[static_cast<std::size_t>(node.inputs[0])]
                              .out_shape;
                std::size_t ci = in_shape[0], hi = in_shape[1],
                            wi = in_shape[2];
                std::size_t m = node.out_shape[0], ho = node.out_shape[1],
                            wo = node.out_shape[2];
                int kh = node.kernel[0], kw = node.kernel[1];
                for (std::size_t f = 0; f < m; ++f) {
                    for (std::size_t oh = 0; oh < ho; ++oh) {
                        for (std::size_t ow = 0; ow < wo; ++ow) {
                            double go = g[(f * ho + oh) * wo + ow];
                            if (go == 0.0) continue;
                            for (std::size_t c = 0; c < ci; ++c) {
                                for (int r = 0; r < kh; ++r) {
                                    long ih = static_cast<long>(oh) *
                                                  node.strides[0] -
                                              node.pads[0] + r;
                                    if (ih < 0 || ih >= static_cast<long>(hi))
                                        continue;
                                    for (int s = 0; s < kw; ++s) {
                                        long iw = static_cast<long>(ow) *
                                                      node.strides[1] -
                                                  node.pads[1] + s;
                                        if (iw < 0 ||
                                            iw >= static_cast<long>(wi))
                                            continue;
                                        gin[(c * hi + ih) * wi + iw] +=
                                            node.weight
                                                .data[((f * ci + c) * kh + r) *
                                                          kw +
                                                      s] *
                                            go;
                                    }
                                }
                            }
                        }
                    }
                }
                break;
            }
            case OpKind::Relu:
                for (std::size_t k = 0; k < g.size(); ++k)
                    if (in[k] > 0) gin[k] += g[k];
                break;
            case OpKind::Sigmoid: {
                const std::vector<double>& out = outs[ri];
                for (std::size_t k = 0; k < g.size(); ++k)
                    gin[k] += g[k] * out[k] * (1.0 - out[k]);
                break;
            }
            case OpKind::Tanh: {
                const std::vector<double>& out = outs[ri];
                for (std::size_t k = 0; k < g.size(); ++k)
                    gin[k] += g[k] * (1.0 - out[k] * out[k]);
                break;
            }
            case OpKind::MaxPool2d:
            case OpKind::AvgPool2d: {
                const auto& in_shape =
                    node.inputs[0] == kGraphInput
                        ? net.input_shape
                        : net.nodes[static_cast<std::size_t>(node.inputs[0])]
                              .out_shape;
                std::size_t hi = in_shape[1], wi = in_shape[2];
                std::size_t cs = node.out_shape[0], ho = node.out_shape[1],
                            wo = node.out_shape[2];
                bool is_max = node.kind == OpKind::MaxPool2d;
                for (std::size_t c = 0; c < cs; ++c) {
                    for (std::size_t oh = 0; oh < ho; ++oh) {
                        for (std::size_t ow = 0; ow < wo; ++ow) {
                            double go = g[(c * ho + oh) * wo + ow];
                            if (go == 0.0) continue;
                            double best =
                                -std::numeric_limits<double>::infinity();
                            long best_idx = -1;
                            std::size_t count = 0;
                            for (int r = 0; r < node.kernel[0]; ++r) {
                                long ih = static_cast<long>(oh) *
                                              node.strides[0] -
                                          node.pads[0] + r;
                                if (ih < 0 || ih >= static_cast<long>(hi))
                                    continue;
                                for (int s = 0; s < node.kernel[1]; ++s) {
                                    long iw = static_cast<long>(ow) *
                                                  node.strides[1] -
                                              node.pads[1] + s;
                                    if (iw < 0 || iw >= static_cast<long>(wi))
                                        continue;
                                    long idx = (static_cast<long>(c) * hi + ih) *
                                                   wi +
                                               iw;
                                    double v = in[static_cast<std::size_t>(idx)];
                                    if (v > best) {
                                        best = v;
                                        best_idx = idx;
                                    }
                                    ++count;
                                }
                            }
                            if (is_max) {
                                gin[static_cast<std::size_t>(best_idx)] += go;
                            } else {
                                double share = go / static_cast<double>(count);
                                for (int r = 0; r < node.kernel[0]; ++r) {
                                    long ih = static_cast<long>(oh) *
                                                  node.strides[0] -
                                              node.pads[0] + r;
                                    if (ih < 0 ||
                                        ih >= static_cast<long>(hi))
                                        continue;
                                    for (int s = 0; s < node.kernel[1]; ++s) {
                                        long iw = static_cast<long>(ow) *
                                                      node.strides[1] -
                                                  node.pads[1] + s;
                                        if (iw < 0 ||
                                            iw >= static_cast<long>(wi))
                                            continue;
                                        gin[(c * hi +
                                             static_cast<std::size_t>(ih)) *
                                                wi +
                                            static_cast<std::size_t>(iw)] +=
                                            share;
                                    }
                                }
                            }
                        }
                    }
                }
                break;
            }
            case OpKind::BatchNorm: {
                std::size_t channels = node.scale.size();
                std::size_t per = g.size() / channels;
                for (std::size_t c = 0; c < channels; ++c)
                    for (std::size_t k = 0; k < per; ++k)
                        gin[c * per + k] += node.scale.data[c] * g[c * per + k];
                break;
            }
            case OpKind::Add: {
                for (std::size_t k = 0; k < g.size(); ++k) gin[k] += g[k];
                if (node.inputs.size() == 2) {
                    std::vector<double>& gin2 = grad_of(node.inputs[1]);
                    for (std::size_t k = 0; k < g.size(); ++k)
                        gin2[k] += g[k];
                }
                break;
            }
            case OpKind::Flatten:
            case OpKind::Reshape:
                for (std::size_t k = 0; k < g.size(); ++k) gin[k] += g[k];
                break;
        }
    }
    return gx;
}

std::vector<double> input_gradient(const NetworkGraph& net,
                                   std::span<const double> x,
                                   std::size_t output_index) {
    if (output_index >= net.d_out)
        throw DimensionMismatch("output index out of range");
    std::vector<double> coeffs(net.d_out, 0.0);
    coeffs[output_index] = 1.0;
    return input_gradient(net, x, std::span<const double>(coeffs));
}

std::vector<double> input_gradient(const NetworkGraph& net,
                                   std::span<const double> x,
                                   const spec::LinearConstraint& objective) {
    std::vector<double> coeffs(net.d_out, 0.0);
    double sign =
        objective.relation == spec::Relation::GreaterEq ? 1.0 : -1.0;
    for (const spec::LinearTerm& t : objective.terms) {
        if (t.variable.kind != spec::VarKind::Output ||
            t.variable.index >= net.d_out)
            throw DimensionMismatch("objective references an invalid output");
        coeffs[t.variable.index] += sign * t.coefficient;
    }
    return input_gradient(net, x, std::span<const double>(coeffs));
}

NetworkGraph load_network_file(const std::string& path) {
    std::filesystem::path p(path);
    if (p.extension() == ".onnx") return load_onnx_file(path);
    return load_network_text(text::read_file(p));
}

// ---------------------------------------------------------------------------
// plain-text network format

namespace {

struct Token {
    std::string s;
    int line;
};

struct TokenStream {
    std::vector<Token> tokens;
    std::size_t pos = 0;

    bool eof() const { return pos >= tokens.size(); }
    const Token& peek() const { return tokens[pos]; }
    Token next() {
        if (eof()) throw SyntaxError("unexpected end of file", last_line(), 1);
        return tokens[pos++];
    }
    int last_line() const {
        return tokens.empty() ? 1 : tokens.back().line;
    }

    double next_double(const char* what) {
        Token t = next();
        double v;
        if (!text::try_parse_double(t.s, v))
            throw ShapeError(std::string(what) + ": expected a number, got '" +
                             t.s + "' at line " + std::to_string(t.line));
        return v;
    }
    long next_long(const char* what) {
        Token t = next();
        double v;
        if (!text::try_parse_double(t.s, v) || v != std::floor(v))
            throw SyntaxError(std::string(what) + ": expected an integer, got '" +
                                  t.s + "'",
                              t.line, 1);
        return static_cast<long>(v);
    }
    void expect(const char* kw) {
        Token t = next();
        if (t.s != kw)
            throw SyntaxError("expected '" + std::string(kw) + "', got '" +
                                  t.s + "'",
                              t.line, 1);
    }
};

std::vector<Token> tokenize_text_net(std::string_view text) {
    std::vector<Token> out;
    int line = 1;
    std::string cur;
    bool comment = false;
    auto flush = [&]() {
        if (!cur.empty()) {
            out.push_back({cur, line});
            cur.clear();
        }
    };
    for (char c : text) {
        if (c == '\n') {
            flush();
            comment = false;
            ++line;
        } else if (comment) {
            // skip
        } else if (c == '#') {
            flush();
            comment = true;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            flush();
        } else {
            cur += c;
        }
    }
    flush();
    return out;
}

Tensor read_tensor(TokenStream& ts, std::vector<std::size_t> shape,
                   const char* what) {
    Tensor t;
    t.shape = std::move(shape);
    std::size_t n = shape_product(t.shape);
    t.data.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.data.push_back(ts.next_double(what));
    return t;
}

std::vector<std::size_t> read_same_line_dims(TokenStream& ts, int line,
                                             const char* what) {
    std::vector<std::size_t> dims;
    while (!ts.eof() && ts.peek().line == line) {
        long v = ts.next_long(what);
        if (v <= 0)
            throw ShapeError(std::string(what) + ": dimensions must be positive");
        dims.push_back(static_cast<std::size_t>(v));
    }
    if (dims.empty())
        throw SyntaxError(std::string(what) + ": missing dimensions", line, 1);
    return dims;
}

}  // namespace

NetworkGraph load_network_text(std::string_view textsrc) {
    TokenStream ts{tokenize_text_net(textsrc), 0};
    NetworkGraph net;
    std::vector<std::size_t> declared_out;

    if (ts.eof()) throw SyntaxError("empty network file", 1, 1);
    ts.expect("inputs");
    net.input_shape =
        read_same_line_dims(ts, ts.tokens[ts.pos - 1].line, "inputs");
    ts.expect("outputs");
    declared_out =
        read_same_line_dims(ts, ts.tokens[ts.pos - 1].line, "outputs");

    while (!ts.eof()) {
        Token kw = ts.next();
        OpNode node;
        node.inputs = {static_cast<int>(net.nodes.size()) - 1};
        if (kw.s == "dense") {
            node.kind = OpKind::Dense;
            long rows = ts.next_long("dense");
            long cols = ts.next_long("dense");
            if (rows <= 0 || cols <= 0)
                throw ShapeError("dense dimensions must be positive");
            node.weight = read_tensor(
                ts,
                {static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)},
                "dense weights");
            node.bias = read_tensor(ts, {static_cast<std::size_t>(rows)},
                                    "dense biases");
        } else if (kw.s == "conv") {
            node.kind = OpKind::Conv2d;
            long m = ts.next_long("conv");
            long c = ts.next_long("conv");
            long kh = ts.next_long("conv");
            long kwid = ts.next_long("conv");
            ts.expect("stride");
            node.strides = {static_cast<int>(ts.next_long("conv stride")),
                            static_cast<int>(ts.next_long("conv stride"))};
            ts.expect("pad");
            for (int i = 0; i < 4; ++i)
                node.pads[i] = static_cast<int>(ts.next_long("conv pad"));
            if (m <= 0 || c <= 0 || kh <= 0 || kwid <= 0)
                throw ShapeError("conv dimensions must be positive");
            node.weight = read_tensor(ts,
                                      {static_cast<std::size_t>(m),
                                       static_cast<std::size_t>(c),
                                       static_cast<std::size_t>(kh),
                                       static_cast<std::size_t>(kwid)},
                                      "conv weights");
            node.bias =
                read_tensor(ts, {static_cast<std::size_t>(m)}, "conv biases");
        } else if (kw.s == "relu") {
            node.kind = OpKind::Relu;
        } else if (kw.s == "sigmoid") {
            node.kind = OpKind::Sigmoid;
        } else if (kw.s == "tanh") {
            node.kind = OpKind::Tanh;
        } else if (kw.s == "maxpool" || kw.s == "avgpool") {
            node.kind =
                kw.s == "maxpool" ? OpKind::MaxPool2d : OpKind::AvgPool2d;
            node.kernel = {static_cast<int>(ts.next_long("pool")),
                           static_cast<int>(ts.next_long("pool"))};
            ts.expect("stride");
            node.strides = {static_cast<int>(ts.next_long("pool stride")),
                            static_cast<int>(ts.next_long("pool stride"))};
        } else if (kw.s == "batchnorm") {
            node.kind = OpKind::BatchNorm;
            double eps = ts.next_double("batchnorm epsilon");
            // channel count comes from the incoming shape, which requires
            // shape inference over the layers read so far
            std::size_t channels = 0;
            if (net.nodes.empty()) {
                channels = net.input_shape.empty() ? 0 : net.input_shape[0];
            } else {
                NetworkGraph prefix = net;
                validate_graph(prefix);
                const auto& in_shape = prefix.nodes.back().out_shape;
                channels = in_shape.empty() ? 0 : in_shape[0];
            }
            if (channels == 0)
                throw ShapeError("batchnorm cannot infer channel count");
            Tensor gamma = read_tensor(ts, {channels}, "batchnorm gamma");
            Tensor beta = read_tensor(ts, {channels}, "batchnorm beta");
            Tensor mean = read_tensor(ts, {channels}, "batchnorm mean");
            Tensor var = read_tensor(ts, {channels}, "batchnorm variance");
            node.scale.shape = {channels};
            node.shift.shape = {channels};
            node.scale.data.resize(channels);
            node.shift.data.resize(channels);
            for (std::size_t i = 0; i < channels; ++i) {
                double s = gamma.data[i] / std::sqrt(var.data[i] + eps);
                node.scale.data[i] = s;
                node.shift.data[i] = beta.data[i] - mean.data[i] * s;
            }
        } else if (kw.s == "flatten") {
            node.kind = OpKind::Flatten;
        } else if (kw.s == "reshape") {
            node.kind = OpKind::Reshape;
            node.target_shape = read_same_line_dims(ts, kw.line, "reshape");
        } else if (kw.s == "add") {
            node.kind = OpKind::Add;
            long a = ts.next_long("add");
            long b = ts.next_long("add");
            node.inputs = {static_cast<int>(a), static_cast<int>(b)};
        } else {
            throw SyntaxError("unknown layer '" + kw.s + "'", kw.line, 1);
        }
        net.nodes.push_back(std::move(node));
    }

    if (net.nodes.empty())
        throw SyntaxError("network file declares no layers", ts.last_line(), 1);

    // batchnorm channel inference above relied on prior layers' out_shape;
    // run full validation now to fill shapes and catch mismatches.
    validate_graph(net);
    if (net.output_shape != declared_out)
        throw ShapeError("declared output shape does not match the network");
    return net;
}

}  // namespace vnna::net
