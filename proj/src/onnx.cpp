// ONNX loader decoding the protobuf wire format directly for the handful of
// message fields the supported operator subset needs. Unknown fields are
// skipped per wire rules; unsupported operators are reported by name.

#include <cmath>
#include <cstring>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vnnarena/errors.hpp"
#include "vnnarena/netio.hpp"
#include "vnnarena/textutil.hpp"

namespace vnna::net {

namespace {

enum WireType { kVarint = 0, kFixed64 = 1, kLenDelim = 2, kFixed32 = 5 };

struct WireReader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos = 0;

    bool eof() const { return pos >= size; }

    std::uint64_t varint() {
        std::uint64_t v = 0;
        int shift = 0;
        while (true) {
            if (pos >= size) throw DecodeError("truncated varint");
            std::uint8_t b = data[pos++];
            if (shift < 64) v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
            if (!(b & 0x80)) return v;
            shift += 7;
            if (shift > 70) throw DecodeError("varint too long");
        }
    }

    std::pair<int, int> key() {
        std::uint64_t k = varint();
        return {static_cast<int>(k >> 3), static_cast<int>(k & 7)};
    }

    std::uint32_t fixed32() {
        if (pos + 4 > size) throw DecodeError("truncated fixed32");
        std::uint32_t v;
        std::memcpy(&v, data + pos, 4);
        pos += 4;
        return v;
    }

    std::uint64_t fixed64() {
        if (pos + 8 > size) throw DecodeError("truncated fixed64");
        std::uint64_t v;
        std::memcpy(&v, data + pos, 8);
        pos += 8;
        return v;
    }

    WireReader bytes() {
        std::uint64_t len = varint();
        if (pos + len > size) throw DecodeError("truncated length-delimited field");
        WireReader sub{data + pos, static_cast<std::size_t>(len)};
        pos += len;
        return sub;
    }

    std::string str() {
        WireReader sub = bytes();
        return std::string(reinterpret_cast<const char*>(sub.data), sub.size);
    }

    void skip(int wire_type) {
        switch (wire_type) {
            case kVarint: varint(); break;
            case kFixed64: fixed64(); break;
            case kLenDelim: bytes(); break;
            case kFixed32: fixed32(); break;
            default: throw DecodeError("unsupported wire type");
        }
    }
};

double f32_bits(std::uint32_t bits) {
    float f;
    std::memcpy(&f, &bits, 4);
    return static_cast<double>(f);
}

double f64_bits(std::uint64_t bits) {
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

std::int64_t zigzag_passthrough(std::uint64_t v) {
    return static_cast<std::int64_t>(v);  // int64 fields are plain varints
}

// onnx.TensorProto.DataType
constexpr int kFloat = 1;
constexpr int kInt32 = 6;
constexpr int kInt64 = 7;
constexpr int kDouble = 11;

struct RawTensor {
    std::string name;
    std::vector<std::int64_t> dims;
    int data_type = kFloat;
    std::vector<double> values;     // widened numeric payload
    std::vector<std::int64_t> ints; // for int tensors (reshape targets)
};

RawTensor parse_tensor(WireReader r) {
    RawTensor t;
    std::string raw;
    std::vector<double> floats;
    std::vector<double> doubles;
    std::vector<std::int64_t> int64s;
    std::vector<std::int64_t> int32s;
    while (!r.eof()) {
        auto [field, wt] = r.key();
        switch (field) {
            case 1:  // dims
                if (wt == kVarint) {
                    t.dims.push_back(zigzag_passthrough(r.varint()));
                } else {
                    WireReader sub = r.bytes();
                    while (!sub.eof())
                        t.dims.push_back(zigzag_passthrough(sub.varint()));
                }
                break;
            case 2: t.data_type = static_cast<int>(r.varint()); break;
            case 4:  // float_data
                if (wt == kFixed32) {
                    floats.push_back(f32_bits(r.fixed32()));
                } else {
                    WireReader sub = r.bytes();
                    while (!sub.eof()) floats.push_back(f32_bits(sub.fixed32()));
                }
                break;
            case 5:  // int32_data
                if (wt == kVarint) {
                    int32s.push_back(zigzag_passthrough(r.varint()));
                } else {
                    WireReader sub = r.bytes();
                    while (!sub.eof())
                        int32s.push_back(zigzag_passthrough(sub.varint()));
                }
                break;
            case 7:  // int64_data
                if (wt == kVarint) {
                    int64s.push_back(zigzag_passthrough(r.varint()));
                } else {
                    WireReader sub = r.bytes();
                    while (!sub.eof())
                        int64s.push_back(zigzag_passthrough(sub.varint()));
                }
                break;
            case 8: t.name = r.str(); break;
            case 9: raw = r.str(); break;
            case 10:  // double_data
                if (wt == kFixed64) {
                    doubles.push_back(f64_bits(r.fixed64()));
                } else {
                    WireReader sub = r.bytes();
                    while (!sub.eof()) doubles.push_back(f64_bits(sub.fixed64()));
                }
                break;
            default: r.skip(wt); break;
        }
    }

    if (!raw.empty()) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(raw.data());
        if (t.data_type == kFloat) {
            if (raw.size() % 4) throw DecodeError("raw float data not 4-aligned");
            for (std::size_t i = 0; i < raw.size(); i += 4) {
                std::uint32_t bits;
                std::memcpy(&bits, p + i, 4);
                t.values.push_back(f32_bits(bits));
            }
        } else if (t.data_type == kDouble) {
            if (raw.size() % 8) throw DecodeError("raw double data not 8-aligned");
            for (std::size_t i = 0; i < raw.size(); i += 8) {
                std::uint64_t bits;
                std::memcpy(&bits, p + i, 8);
                t.values.push_back(f64_bits(bits));
            }
        } else if (t.data_type == kInt64) {
            if (raw.size() % 8) throw DecodeError("raw int64 data not 8-aligned");
            for (std::size_t i = 0; i < raw.size(); i += 8) {
                std::int64_t v;
                std::memcpy(&v, p + i, 8);
                t.ints.push_back(v);
            }
        } else if (t.data_type == kInt32) {
            if (raw.size() % 4) throw DecodeError("raw int32 data not 4-aligned");
            for (std::size_t i = 0; i < raw.size(); i += 4) {
                std::int32_t v;
                std::memcpy(&v, p + i, 4);
                t.ints.push_back(v);
            }
        } else {
            throw DecodeError("initializer has unsupported data type " +
                              std::to_string(t.data_type));
        }
    } else if (!floats.empty()) {
        t.values = std::move(floats);
    } else if (!doubles.empty()) {
        t.values = std::move(doubles);
    } else if (!int64s.empty()) {
        t.ints = std::move(int64s);
    } else if (!int32s.empty()) {
        t.ints = std::move(int32s);
    }
    return t;
}

struct RawAttr {
    std::string name;
    double f = 0;
    std::int64_t i = 0;
    std::string s;
    std::vector<std::int64_t> ints;
    std::optional<RawTensor> t;
    bool has_f = false, has_i = false, has_s = false;
};

RawAttr parse_attr(WireReader r) {
    RawAttr a;
    while (!r.eof()) {
        auto [field, wt] = r.key();
        switch (field) {
            case 1: a.name = r.str(); break;
            case 2:
                a.f = f32_bits(r.fixed32());
                a.has_f = true;
                break;
            case 3:
                a.i = zigzag_passthrough(r.varint());
                a.has_i = true;
                break;
            case 4:
                a.s = r.str();
                a.has_s = true;
                break;
            case 5: a.t = parse_tensor(r.bytes()); break;
            case 8:
                if (wt == kVarint) {
                    a.ints.push_back(zigzag_passthrough(r.varint()));
                } else {
                    WireReader sub = r.bytes();
                    while (!sub.eof())
                        a.ints.push_back(zigzag_passthrough(sub.varint()));
                }
                break;
            default: r.skip(wt); break;
        }
    }
    return a;
}

struct RawNode {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::string op_type;
    std::string name;
    std::map<std::string, RawAttr> attrs;
};

RawNode parse_node(WireReader r) {
    RawNode n;
    while (!r.eof()) {
        auto [field, wt] = r.key();
        switch (field) {
            case 1: n.inputs.push_back(r.str()); break;
            case 2: n.outputs.push_back(r.str()); break;
            case 3: n.name = r.str(); break;
            case 4: n.op_type = r.str(); break;
            case 5: {
                RawAttr a = parse_attr(r.bytes());
                n.attrs[a.name] = std::move(a);
                break;
            }
            default: r.skip(wt); break;
        }
    }
    return n;
}

struct RawValueInfo {
    std::string name;
    std::vector<std::int64_t> dims;
    bool has_shape = false;
};

RawValueInfo parse_value_info(WireReader r) {
    RawValueInfo v;
    while (!r.eof()) {
        auto [field, wt] = r.key();
        if (field == 1) {
            v.name = r.str();
        } else if (field == 2) {
            // TypeProto -> tensor_type(1) -> shape(2) -> dim(1) -> dim_value(1)
            WireReader type = r.bytes();
            while (!type.eof()) {
                auto [tf, twt] = type.key();
                if (tf == 1) {
                    WireReader tt = type.bytes();
                    while (!tt.eof()) {
                        auto [ttf, ttwt] = tt.key();
                        if (ttf == 2) {
                            v.has_shape = true;
                            WireReader sh = tt.bytes();
                            while (!sh.eof()) {
                                auto [sf, swt] = sh.key();
                                if (sf == 1) {
                                    WireReader dim = sh.bytes();
                                    std::int64_t val = 0;
                                    bool symbolic = false;
                                    while (!dim.eof()) {
                                        auto [df, dwt] = dim.key();
                                        if (df == 1) {
                                            val = zigzag_passthrough(
                                                dim.varint());
                                        } else if (df == 2) {
                                            dim.skip(dwt);
                                            symbolic = true;
                                        } else {
                                            dim.skip(dwt);
                                        }
                                    }
                                    v.dims.push_back(symbolic ? -1 : val);
                                } else {
                                    sh.skip(swt);
                                }
                            }
                        } else {
                            tt.skip(ttwt);
                        }
                    }
                } else {
                    type.skip(twt);
                }
            }
        } else {
            r.skip(wt);
        }
    }
    return v;
}

struct RawGraph {
    std::vector<RawNode> nodes;
    std::vector<RawTensor> initializers;
    std::vector<RawValueInfo> inputs;
    std::vector<RawValueInfo> outputs;
};

RawGraph parse_graph(WireReader r) {
    RawGraph g;
    while (!r.eof()) {
        auto [field, wt] = r.key();
        switch (field) {
            case 1: g.nodes.push_back(parse_node(r.bytes())); break;
            case 5: g.initializers.push_back(parse_tensor(r.bytes())); break;
            case 11: g.inputs.push_back(parse_value_info(r.bytes())); break;
            case 12: g.outputs.push_back(parse_value_info(r.bytes())); break;
            default: r.skip(wt); break;
        }
    }
    return g;
}

RawGraph parse_model(std::span<const std::uint8_t> bytes) {
    WireReader r{bytes.data(), bytes.size()};
    std::optional<RawGraph> graph;
    while (!r.eof()) {
        auto [field, wt] = r.key();
        if (field == 7 && wt == kLenDelim) {
            graph = parse_graph(r.bytes());
        } else {
            r.skip(wt);
        }
    }
    if (!graph) throw DecodeError("model has no graph");
    return std::move(*graph);
}

Tensor to_tensor(const RawTensor& raw) {
    Tensor t;
    std::size_t n = 1;
    for (std::int64_t d : raw.dims) {
        if (d <= 0) throw DecodeError("initializer has non-positive dim");
        t.shape.push_back(static_cast<std::size_t>(d));
        n *= static_cast<std::size_t>(d);
    }
    if (raw.dims.empty()) n = 1;
    if (!raw.values.empty()) {
        t.data = raw.values;
    } else if (!raw.ints.empty()) {
        t.data.reserve(raw.ints.size());
        for (std::int64_t v : raw.ints) t.data.push_back(static_cast<double>(v));
    }
    if (t.data.size() != n)
        throw DecodeError("initializer '" + raw.name + "' holds " +
                          std::to_string(t.data.size()) + " values, dims say " +
                          std::to_string(n));
    return t;
}

// Drops a leading batch dimension of size 1 (or a symbolic one).
std::vector<std::size_t> drop_batch(const std::vector<std::int64_t>& dims) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        std::int64_t d = dims[i];
        if (i == 0 && (d == 1 || d == -1) && dims.size() > 1) continue;
        if (d <= 0) throw ShapeError("graph tensor has a symbolic dimension");
        out.push_back(static_cast<std::size_t>(d));
    }
    if (out.empty()) out.push_back(1);
    return out;
}

}  // namespace

NetworkGraph load_onnx(std::span<const std::uint8_t> bytes) {
    RawGraph graph = parse_model(bytes);

    std::map<std::string, RawTensor*> init_by_name;
    for (RawTensor& t : graph.initializers) init_by_name[t.name] = &t;

    // the single graph input is the one that is not an initializer
    std::vector<const RawValueInfo*> real_inputs;
    for (const RawValueInfo& vi : graph.inputs)
        if (!init_by_name.count(vi.name)) real_inputs.push_back(&vi);
    if (real_inputs.size() != 1)
        throw ShapeError("expected exactly one graph input, found " +
                         std::to_string(real_inputs.size()));
    if (graph.outputs.size() != 1)
        throw ShapeError("expected exactly one graph output, found " +
                         std::to_string(graph.outputs.size()));
    if (!real_inputs[0]->has_shape)
        throw ShapeError("graph input has no shape");

    NetworkGraph net;
    net.input_shape = drop_batch(real_inputs[0]->dims);

    const std::string input_name = real_inputs[0]->name;
    const std::string output_name = graph.outputs[0].name;

    // producer map: tensor name -> node index (or graph input)
    std::map<std::string, int> producer;
    producer[input_name] = kGraphInput;

    // consumer counts for the MatMul+Add fusion
    std::map<std::string, int> consumers;
    for (const RawNode& rn : graph.nodes)
        for (const std::string& in : rn.inputs) consumers[in]++;

    auto resolve = [&](const RawNode& rn, const std::string& name) -> int {
        auto it = producer.find(name);
        if (it == producer.end())
            throw DecodeError("node '" + rn.op_type + "' consumes unknown tensor '" +
                              name + "'");
        return it->second;
    };
    auto initializer_of = [&](const std::string& name) -> RawTensor* {
        auto it = init_by_name.find(name);
        return it == init_by_name.end() ? nullptr : it->second;
    };
    auto attr_ints = [](const RawNode& rn, const char* name)
        -> const std::vector<std::int64_t>* {
        auto it = rn.attrs.find(name);
        return it == rn.attrs.end() ? nullptr : &it->second.ints;
    };
    auto attr_int = [](const RawNode& rn, const char* name,
                       std::int64_t fallback) {
        auto it = rn.attrs.find(name);
        return it == rn.attrs.end() || !it->second.has_i ? fallback
                                                         : it->second.i;
    };
    auto attr_float = [](const RawNode& rn, const char* name, double fallback) {
        auto it = rn.attrs.find(name);
        return it == rn.attrs.end() || !it->second.has_f ? fallback
                                                         : it->second.f;
    };

    // tracks which graph node index produced a bias-less MatMul Dense so a
    // following Add of a constant can fold into it
    std::map<std::string, int> fusable_matmul;

    for (const RawNode& rn : graph.nodes) {
        if (rn.outputs.size() != 1)
            throw UnsupportedOperator(rn.op_type + " (multiple outputs)");
        const std::string& out_name = rn.outputs[0];
        OpNode node;

        auto push = [&]() {
            net.nodes.push_back(std::move(node));
            producer[out_name] = static_cast<int>(net.nodes.size()) - 1;
        };

        if (rn.op_type == "Gemm") {
            if (rn.inputs.size() < 2)
                throw DecodeError("Gemm needs at least A and B");
            if (attr_int(rn, "transA", 0) != 0)
                throw UnsupportedOperator("Gemm with transA=1");
            double alpha = attr_float(rn, "alpha", 1.0);
            double beta = attr_float(rn, "beta", 1.0);
            bool trans_b = attr_int(rn, "transB", 0) != 0;
            RawTensor* w = initializer_of(rn.inputs[1]);
            if (!w) throw UnsupportedOperator("Gemm with non-constant weights");
            Tensor wt = to_tensor(*w);
            if (wt.shape.size() != 2) throw ShapeError("Gemm weight must be 2-D");
            std::size_t rows = trans_b ? wt.shape[0] : wt.shape[1];
            std::size_t cols = trans_b ? wt.shape[1] : wt.shape[0];
            node.kind = OpKind::Dense;
            node.weight.shape = {rows, cols};
            node.weight.data.resize(rows * cols);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c)
                    node.weight.data[r * cols + c] =
                        alpha * (trans_b ? wt.data[r * cols + c]
                                         : wt.data[c * rows + r]);
            node.bias.shape = {rows};
            node.bias.data.assign(rows, 0.0);
            if (rn.inputs.size() >= 3 && !rn.inputs[2].empty()) {
                RawTensor* b = initializer_of(rn.inputs[2]);
                if (!b) throw UnsupportedOperator("Gemm with non-constant bias");
                Tensor bt = to_tensor(*b);
                if (bt.size() != rows) throw ShapeError("Gemm bias size mismatch");
                for (std::size_t r = 0; r < rows; ++r)
                    node.bias.data[r] = beta * bt.data[r];
            }
            node.inputs = {resolve(rn, rn.inputs[0])};
            push();
        } else if (rn.op_type == "MatMul") {
            if (rn.inputs.size() != 2) throw DecodeError("MatMul needs two inputs");
            RawTensor* w = initializer_of(rn.inputs[1]);
            if (!w)
                throw UnsupportedOperator("MatMul with non-constant right operand");
            Tensor wt = to_tensor(*w);
            if (wt.shape.size() != 2)
                throw ShapeError("MatMul weight must be 2-D");
            // x(k) @ B(k,m): Dense rows=m, cols=k
            std::size_t k = wt.shape[0], m = wt.shape[1];
            node.kind = OpKind::Dense;
            node.weight.shape = {m, k};
            node.weight.data.resize(m * k);
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < k; ++c)
                    node.weight.data[r * k + c] = wt.data[c * m + r];
            node.bias.shape = {m};
            node.bias.data.assign(m, 0.0);
            node.inputs = {resolve(rn, rn.inputs[0])};
            push();
            if (consumers[out_name] == 1)
                fusable_matmul[out_name] =
                    static_cast<int>(net.nodes.size()) - 1;
        } else if (rn.op_type == "Add") {
            if (rn.inputs.size() != 2) throw DecodeError("Add needs two inputs");
            RawTensor* c0 = initializer_of(rn.inputs[0]);
            RawTensor* c1 = initializer_of(rn.inputs[1]);
            if (c0 && c1) throw UnsupportedOperator("Add of two constants");
            if (!c0 && !c1) {
                node.kind = OpKind::Add;
                node.inputs = {resolve(rn, rn.inputs[0]),
                               resolve(rn, rn.inputs[1])};
                push();
            } else {
                const std::string& var = c0 ? rn.inputs[1] : rn.inputs[0];
                Tensor ct = to_tensor(c0 ? *c0 : *c1);
                auto fuse = fusable_matmul.find(var);
                if (fuse != fusable_matmul.end()) {
                    // MatMul + Add(bias) pair becomes one Dense
                    OpNode& dense = net.nodes[static_cast<std::size_t>(
                        fuse->second)];
                    if (ct.size() != dense.weight.shape[0])
                        throw ShapeError("fused bias size mismatch");
                    dense.bias.data = ct.data;
                    producer[out_name] = fuse->second;
                    fusable_matmul.erase(fuse);
                } else {
                    node.kind = OpKind::Add;
                    node.inputs = {resolve(rn, var)};
                    node.bias = std::move(ct);
                    push();
                }
            }
        } else if (rn.op_type == "Relu" || rn.op_type == "Sigmoid" ||
                   rn.op_type == "Tanh" || rn.op_type == "Flatten") {
            node.kind = rn.op_type == "Relu"      ? OpKind::Relu
                        : rn.op_type == "Sigmoid" ? OpKind::Sigmoid
                        : rn.op_type == "Tanh"    ? OpKind::Tanh
                                                  : OpKind::Flatten;
            if (rn.inputs.empty()) throw DecodeError(rn.op_type + " has no input");
            node.inputs = {resolve(rn, rn.inputs[0])};
            push();
        } else if (rn.op_type == "Conv") {
            if (rn.inputs.size() < 2) throw DecodeError("Conv needs weights");
            if (attr_int(rn, "group", 1) != 1)
                throw UnsupportedOperator("Conv with group != 1");
            if (const auto* dil = attr_ints(rn, "dilations"))
                for (std::int64_t d : *dil)
                    if (d != 1) throw UnsupportedOperator("Conv with dilation");
            auto it_auto = rn.attrs.find("auto_pad");
            if (it_auto != rn.attrs.end() && it_auto->second.has_s &&
                it_auto->second.s != "NOTSET")
                throw UnsupportedOperator("Conv with auto_pad");
            RawTensor* w = initializer_of(rn.inputs[1]);
            if (!w) throw UnsupportedOperator("Conv with non-constant weights");
            node.kind = OpKind::Conv2d;
            node.weight = to_tensor(*w);
            if (node.weight.shape.size() != 4)
                throw ShapeError("Conv weight must have rank 4");
            std::size_t m = node.weight.shape[0];
            node.bias.shape = {m};
            node.bias.data.assign(m, 0.0);
            if (rn.inputs.size() >= 3 && !rn.inputs[2].empty()) {
                RawTensor* b = initializer_of(rn.inputs[2]);
                if (!b) throw UnsupportedOperator("Conv with non-constant bias");
                node.bias = to_tensor(*b);
            }
            if (const auto* s = attr_ints(rn, "strides"); s && s->size() == 2)
                node.strides = {static_cast<int>((*s)[0]),
                                static_cast<int>((*s)[1])};
            if (const auto* p = attr_ints(rn, "pads"); p && p->size() == 4)
                node.pads = {static_cast<int>((*p)[0]),
                             static_cast<int>((*p)[1]),
                             static_cast<int>((*p)[2]),
                             static_cast<int>((*p)[3])};
            node.inputs = {resolve(rn, rn.inputs[0])};
            push();
        } else if (rn.op_type == "MaxPool" || rn.op_type == "AveragePool") {
            node.kind = rn.op_type == "MaxPool" ? OpKind::MaxPool2d
                                                : OpKind::AvgPool2d;
            const auto* ks = attr_ints(rn, "kernel_shape");
            if (!ks || ks->size() != 2)
                throw UnsupportedOperator(rn.op_type + " without 2-D kernel_shape");
            node.kernel = {static_cast<int>((*ks)[0]),
                           static_cast<int>((*ks)[1])};
            node.strides = {1, 1};
            if (const auto* s = attr_ints(rn, "strides"); s && s->size() == 2)
                node.strides = {static_cast<int>((*s)[0]),
                                static_cast<int>((*s)[1])};
            if (const auto* p = attr_ints(rn, "pads"); p && p->size() == 4)
                node.pads = {static_cast<int>((*p)[0]),
                             static_cast<int>((*p)[1]),
                             static_cast<int>((*p)[2]),
                             static_cast<int>((*p)[3])};
            if (attr_int(rn, "ceil_mode", 0) != 0)
                throw UnsupportedOperator(rn.op_type + " with ceil_mode");
            if (rn.op_type == "AveragePool" &&
                attr_int(rn, "count_include_pad", 0) != 0)
                throw UnsupportedOperator("AveragePool with count_include_pad");
            node.inputs = {resolve(rn, rn.inputs[0])};
            push();
        } else if (rn.op_type == "BatchNormalization") {
            if (rn.inputs.size() < 5)
                throw DecodeError("BatchNormalization needs 5 inputs");
            double eps = attr_float(rn, "epsilon", 1e-5);
            RawTensor* gamma = initializer_of(rn.inputs[1]);
            RawTensor* beta = initializer_of(rn.inputs[2]);
            RawTensor* mean = initializer_of(rn.inputs[3]);
            RawTensor* var = initializer_of(rn.inputs[4]);
            if (!gamma || !beta || !mean || !var)
                throw UnsupportedOperator(
                    "BatchNormalization with non-constant parameters");
            Tensor g = to_tensor(*gamma), b = to_tensor(*beta),
                   mu = to_tensor(*mean), v = to_tensor(*var);
            std::size_t c = g.size();
            if (b.size() != c || mu.size() != c || v.size() != c)
                throw ShapeError("BatchNormalization parameter size mismatch");
            node.kind = OpKind::BatchNorm;
            node.scale.shape = {c};
            node.shift.shape = {c};
            node.scale.data.resize(c);
            node.shift.data.resize(c);
            for (std::size_t i = 0; i < c; ++i) {
                double s = g.data[i] / std::sqrt(v.data[i] + eps);
                node.scale.data[i] = s;
                node.shift.data[i] = b.data[i] - mu.data[i] * s;
            }
            node.inputs = {resolve(rn, rn.inputs[0])};
            push();
        } else if (rn.op_type == "Reshape") {
            if (rn.inputs.size() != 2)
                throw DecodeError("Reshape needs a shape input");
            RawTensor* shape = initializer_of(rn.inputs[1]);
            if (!shape)
                throw UnsupportedOperator("Reshape with non-constant shape");
            node.kind = OpKind::Reshape;
            bool leading = true;
            for (std::int64_t d : shape->ints) {
                // drop the batch dimension; -1 infers, 0 copies (unsupported)
                if (leading && (d == 1 || d == -1) && shape->ints.size() > 1) {
                    leading = false;
                    continue;
                }
                leading = false;
                if (d == -1) {
                    node.target_shape.push_back(0);
                } else if (d > 0) {
                    node.target_shape.push_back(static_cast<std::size_t>(d));
                } else {
                    throw UnsupportedOperator("Reshape with dimension 0");
                }
            }
            if (node.target_shape.empty()) node.target_shape.push_back(0);
            node.inputs = {resolve(rn, rn.inputs[0])};
            push();
        } else {
            throw UnsupportedOperator(rn.op_type);
        }
    }

    auto out_it = producer.find(output_name);
    if (out_it == producer.end())
        throw DecodeError("graph output '" + output_name + "' is never produced");
    if (out_it->second != static_cast<int>(net.nodes.size()) - 1)
        throw ShapeError("graph output is not the last operator");

    validate_graph(net);
    return net;
}

NetworkGraph load_onnx_file(const std::string& path) {
    std::string bytes = text::read_file(path);
    return load_onnx(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

}  // namespace vnna::net
