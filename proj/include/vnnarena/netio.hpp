#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vnnarena/speclang.hpp"

namespace vnna::net {

struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;  // row-major

    std::size_t size() const { return data.size(); }
};

std::size_t shape_product(std::span<const std::size_t> shape);

enum class OpKind {
    Dense,
    Conv2d,
    Relu,
    Sigmoid,
    Tanh,
    MaxPool2d,
    AvgPool2d,
    BatchNorm,
    Add,
    Flatten,
    Reshape,
};

std::string_view op_kind_name(OpKind kind);

// Reference to a producing node; kGraphInput denotes the network input.
inline constexpr int kGraphInput = -1;

struct OpNode {
    OpKind kind = OpKind::Relu;
    std::vector<int> inputs;  // node indices in topological order

    // Dense: weight {rows=out, cols=in} and bias {out}.
    // Conv2d: weight {M, C, kh, kw} and bias {M}.
    // Add with a constant operand: bias holds the constant.
    Tensor weight;
    Tensor bias;

    // Conv2d / pooling attributes.
    std::array<int, 2> kernel{0, 0};
    std::array<int, 2> strides{1, 1};
    std::array<int, 4> pads{0, 0, 0, 0};  // top, left, bottom, right

    // BatchNorm folded to per-channel affine: y = scale * x + shift.
    Tensor scale;
    Tensor shift;

    // Reshape target (may contain one 0 meaning "infer").
    std::vector<std::size_t> target_shape;

    std::vector<std::size_t> out_shape;  // filled during validation
};

// Topologically ordered single-input single-output operator DAG. Immutable
// after load; evaluation and gradients use caller-local scratch only.
struct NetworkGraph {
    std::vector<OpNode> nodes;
    std::vector<std::size_t> input_shape;
    std::vector<std::size_t> output_shape;
    std::size_t d_in = 0;
    std::size_t d_out = 0;
    int output_node = -1;
};

// Shape inference + structural validation; fills out_shape / d_in / d_out.
// Throws ShapeError on inconsistencies.
void validate_graph(NetworkGraph& net);

// --- loading ---

// Decodes the supported ONNX operator subset straight from the protobuf
// wire format (Gemm, MatMul, Add, Conv, Relu, Sigmoid, Tanh, MaxPool,
// AveragePool, BatchNormalization, Flatten, Reshape). Gemm/MatMul+Add
// normalize to Dense; 32-bit weights widen to 64-bit.
NetworkGraph load_onnx(std::span<const std::uint8_t> bytes);
NetworkGraph load_onnx_file(const std::string& path);

// Line-oriented plain-text network format (see docs/formats.md).
NetworkGraph load_network_text(std::string_view text);
NetworkGraph load_network_file(const std::string& path);  // by extension

// --- evaluation ---

// Deterministic forward pass: 64-bit arithmetic, index-ascending sums.
std::vector<double> evaluate(const NetworkGraph& net,
                             std::span<const double> x);

// Gradient of sum(coeffs[j] * y_j) w.r.t. x by reverse accumulation.
// ReLU at 0 uses subgradient 0; MaxPool ties route to the lowest index.
std::vector<double> input_gradient(const NetworkGraph& net,
                                   std::span<const double> x,
                                   std::span<const double> output_coeffs);

// Gradient of output y_index.
std::vector<double> input_gradient(const NetworkGraph& net,
                                   std::span<const double> x,
                                   std::size_t output_index);

// Gradient of the constraint's satisfaction slack (see
// spec::constraint_slack); ascending along it moves toward satisfaction.
std::vector<double> input_gradient(const NetworkGraph& net,
                                   std::span<const double> x,
                                   const spec::LinearConstraint& objective);

}  // namespace vnna::net
