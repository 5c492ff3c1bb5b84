#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "support/nets.hpp"
#include "support/paths.hpp"
#include "vnnarena/errors.hpp"
#include "vnnarena/netio.hpp"
#include "vnnarena/textutil.hpp"

using namespace vnna;

namespace {

net::NetworkGraph load_net_fixture(const std::string& name) {
    return net::load_network_file(support::fixture("nets/" + name));
}

net::NetworkGraph load_onnx_fixture(const std::string& name) {
    return net::load_onnx_file(support::fixture("onnx/" + name));
}

// Central finite differences of output y_index at x.
std::vector<double> fd_gradient(const net::NetworkGraph& g,
                                std::vector<double> x, std::size_t y_index,
                                double h = 1e-6) {
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double keep = x[i];
        x[i] = keep + h;
        double up = net::evaluate(g, x)[y_index];
        x[i] = keep - h;
        double dn = net::evaluate(g, x)[y_index];
        x[i] = keep;
        grad[i] = (up - dn) / (2 * h);
    }
    return grad;
}

// True iff no kink lies within h of x along any coordinate (the second
// difference of a piecewise-linear map vanishes inside one region).
bool smooth_at(const net::NetworkGraph& g, const std::vector<double>& x,
               double h = 1e-6) {
    std::vector<double> probe = x;
    std::vector<double> mid = net::evaluate(g, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        std::vector<double> up = net::evaluate(g, probe);
        probe[i] = x[i] - h;
        std::vector<double> dn = net::evaluate(g, probe);
        probe[i] = x[i];
        for (std::size_t j = 0; j < mid.size(); ++j) {
            double second = up[j] + dn[j] - 2 * mid[j];
            if (std::abs(second) > 1e-9 * std::max(1.0, std::abs(mid[j])))
                return false;
        }
    }
    return true;
}

double max_rel_error(const std::vector<double>& a,
                     const std::vector<double>& b) {
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double scale = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
        worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
    }
    return worst;
}

}  // namespace

TEST_CASE("identity network evaluates to its input") {
    auto g = load_net_fixture("identity_2.txt");
    std::vector<double> x = {0.3, -0.7};
    CHECK(net::evaluate(g, x) == x);
}

TEST_CASE("2-2-2 relu fixture matches exact hand evaluation") {
    // z = (x0-x1, x0+x1-1), a = relu(z), y = (a0+0.5a1+0.25, -a0+a1-0.25);
    // all weights dyadic, so these values are exact in 64-bit floats.
    auto g = load_net_fixture("relu_222.txt");
    CHECK(net::evaluate(g, std::vector<double>{1, 1}) ==
          std::vector<double>{0.75, 0.75});
    CHECK(net::evaluate(g, std::vector<double>{0.25, -0.75}) ==
          std::vector<double>{1.25, -1.25});
    CHECK(net::evaluate(g, std::vector<double>{0.5, 0.25}) ==
          std::vector<double>{0.5, -0.5});
}

TEST_CASE("conv fixture equals brute-force window enumeration") {
    auto g = load_net_fixture("conv_small.txt");
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    const double kernel[4] = {1, 0.5, 0.25, -1};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(16);
        for (double& v : x) v = u(rng);
        auto y = net::evaluate(g, x);
        REQUIRE(y.size() == 4);
        int oi = 0;
        for (int oh = 0; oh < 2; ++oh) {
            for (int ow = 0; ow < 2; ++ow) {
                double acc = 0.5;  // bias
                for (int r = 0; r < 2; ++r)
                    for (int s = 0; s < 2; ++s)
                        acc += kernel[r * 2 + s] *
                               x[(oh * 2 + r) * 4 + (ow * 2 + s)];
                CHECK(y[oi] == doctest::Approx(acc).epsilon(1e-15));
                ++oi;
            }
        }
    }
}

TEST_CASE("text loader rejects malformed networks") {
    CHECK_THROWS_AS(net::load_network_text("inputs 2\noutputs 2\ndense 2 2\n"
                                           "1 0 0 1\n0 oops\n"),
                    ShapeError);
    // wrong row count: the weight block read runs into the next keyword
    CHECK_THROWS_AS(net::load_network_text("inputs 2\noutputs 1\ndense 3 2\n"
                                           "1 0 0 1\n0 0\nrelu\n"),
                    ShapeError);
    CHECK_THROWS_AS(net::load_network_text("inputs 2\noutputs 2\nspline\n"),
                    SyntaxError);
    CHECK_THROWS_AS(net::load_network_text("inputs 2\noutputs 3\ndense 2 2\n"
                                           "1 0 0 1\n0 0\n"),
                    ShapeError);
    CHECK_THROWS_AS(net::load_network_text(""), SyntaxError);
}

TEST_CASE("onnx fixtures load with the expected structure") {
    auto dense_relu = load_onnx_fixture("dense_relu.onnx");
    CHECK(dense_relu.d_in == 2);
    CHECK(dense_relu.d_out == 2);
    REQUIRE(dense_relu.nodes.size() == 3);
    CHECK(dense_relu.nodes[0].kind == net::OpKind::Dense);
    CHECK(dense_relu.nodes[1].kind == net::OpKind::Relu);
    CHECK(dense_relu.nodes[2].kind == net::OpKind::Dense);

    auto matmul = load_onnx_fixture("matmul_add.onnx");
    // MatMul+Add pairs fold into Dense nodes
    REQUIRE(matmul.nodes.size() == 3);
    CHECK(matmul.nodes[0].kind == net::OpKind::Dense);
    CHECK(matmul.nodes[1].kind == net::OpKind::Sigmoid);
    CHECK(matmul.nodes[2].kind == net::OpKind::Dense);

    auto residual = load_onnx_fixture("residual.onnx");
    const net::OpNode& add = residual.nodes.back();
    CHECK(add.kind == net::OpKind::Add);
    REQUIRE(add.inputs.size() == 2);  // two predecessors
    CHECK(add.inputs[0] != add.inputs[1]);

    CHECK_THROWS_AS(load_onnx_fixture("softmax_bad.onnx"),
                    UnsupportedOperator);
    try {
        load_onnx_fixture("softmax_bad.onnx");
    } catch (const UnsupportedOperator& e) {
        CHECK(e.op == "Softmax");
    }

    std::vector<std::uint8_t> garbage = {0x3A, 0x96, 0xFF, 0xFF};
    CHECK_THROWS_AS(net::load_onnx(garbage), DecodeError);
}

TEST_CASE("onnx evaluations match the generator's frozen reference values") {
    std::map<std::string, net::NetworkGraph> cache;
    std::ifstream in(support::fixture("onnx/expected_evals.kv"));
    REQUIRE(in.good());
    std::string line;
    int cases = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::string model, xs, ys;
        for (const std::string& tok : text::split(line, ' ')) {
            auto eq = tok.find('=');
            std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
            if (key == "model") model = value;
            if (key == "x") xs = value;
            if (key == "y") ys = value;
        }
        auto parse_list = [](const std::string& s) {
            std::vector<double> out;
            for (const std::string& item : text::split(s, ','))
                out.push_back(std::stod(item));
            return out;
        };
        if (!cache.count(model))
            cache.emplace(model, load_onnx_fixture(model + ".onnx"));
        auto y = net::evaluate(cache.at(model), parse_list(xs));
        auto expected = parse_list(ys);
        REQUIRE(y.size() == expected.size());
        // exp() may differ by an ulp between runtimes; everything else in
        // the fixtures is exact dyadic arithmetic
        double tol = model == "matmul_add" ? 1e-12 : 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (tol == 0.0)
                CHECK(y[i] == expected[i]);
            else
                CHECK(y[i] == doctest::Approx(expected[i]).epsilon(tol));
        }
        ++cases;
    }
    CHECK(cases == 16);
}

TEST_CASE("binary and text forms of the same network agree bitwise") {
    auto from_onnx = load_onnx_fixture("dense_relu.onnx");
    auto from_text = load_net_fixture("relu_222.txt");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x = {u(rng), u(rng)};
        auto a = net::evaluate(from_onnx, x);
        auto b = net::evaluate(from_text, x);
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
    }
}

TEST_CASE("evaluate is deterministic and checks dimensions") {
    auto g = load_net_fixture("bnpool.txt");
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> x(16);
    for (double& v : x) v = u(rng);
    auto y1 = net::evaluate(g, x);
    auto y2 = net::evaluate(g, x);
    CHECK(y1 == y2);
    CHECK_THROWS_AS(net::evaluate(g, std::vector<double>{1.0}),
                    DimensionMismatch);
}

TEST_CASE("gradient: identity and pure linear maps") {
    auto ident = load_net_fixture("identity_2.txt");
    auto g0 = net::input_gradient(ident, std::vector<double>{0.2, 0.4},
                                  std::size_t{0});
    CHECK(g0 == std::vector<double>{1, 0});

    // linear net W: gradient of c.y is W^T c
    net::NetworkGraph lin;
    lin.input_shape = {2};
    net::OpNode dense;
    dense.kind = net::OpKind::Dense;
    dense.inputs = {net::kGraphInput};
    dense.weight.shape = {2, 2};
    dense.weight.data = {2, -1, 0.5, 3};
    dense.bias.shape = {2};
    dense.bias.data = {0, 0};
    lin.nodes.push_back(dense);
    net::validate_graph(lin);
    std::vector<double> c = {1.0, -2.0};
    auto grad = net::input_gradient(lin, std::vector<double>{0.3, 0.1},
                                    std::span<const double>(c));
    CHECK(grad == std::vector<double>{2 * 1.0 + 0.5 * -2.0,
                                      -1 * 1.0 + 3 * -2.0});
}

TEST_CASE("gradients match central finite differences on fixture nets") {
    const char* names[] = {"relu_222.txt",  "sigmoid_222.txt",
                           "tanh_222.txt",  "conv_small.txt",
                           "bnpool.txt",    "residual_222.txt",
                           "acas_mini.txt"};
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1, 1);
    for (const char* name : names) {
        auto g = load_net_fixture(name);
        int accepted = 0;
        int guard = 0;
        while (accepted < 100 && guard < 3000) {
            ++guard;
            std::vector<double> x(g.d_in);
            for (double& v : x) v = u(rng);
            if (!smooth_at(g, x)) continue;
            ++accepted;
            std::size_t j = accepted % g.d_out;
            auto analytic = net::input_gradient(g, x, j);
            auto numeric = fd_gradient(g, x, j);
            REQUIRE(max_rel_error(analytic, numeric) < 1e-4);
        }
        CHECK(accepted == 100);
    }
}

TEST_CASE("random networks evaluate shape-safely") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 50; ++t) {
        std::size_t d_in = 1 + rng() % 4;
        std::size_t d_out = 1 + rng() % 4;
        std::vector<std::size_t> hidden;
        int layers = 1 + static_cast<int>(rng() % 3);
        for (int l = 0; l < layers; ++l) hidden.push_back(1 + rng() % 8);
        auto g = support::random_fc_net(
            rng, d_in, hidden, d_out,
            {net::OpKind::Relu, net::OpKind::Sigmoid, net::OpKind::Tanh});
        std::uniform_real_distribution<double> u(-3, 3);
        std::vector<double> x(d_in);
        for (double& v : x) v = u(rng);
        auto y = net::evaluate(g, x);
        CHECK(y.size() == d_out);
        for (double v : y) CHECK(std::isfinite(v));
    }
}
