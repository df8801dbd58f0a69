#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "faae/adam.hpp"
#include "faae/gradcheck.hpp"
#include "faae/layers.hpp"
#include "faae/matrix.hpp"
#include "faae/rng.hpp"
#include "test_support.hpp"

using namespace faae;
using testutil::contains;
using testutil::thrown_message;

namespace {

DenseLayer identity_layer(std::size_t n, Activation act) {
    DenseLayer layer(n, n, act);
    for (std::size_t i = 0; i < n; ++i) layer.weights(i, i) = 1.0;
    return layer;
}

FeedForward random_net(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
                       Activation hidden_act, Activation head_act, std::uint64_t seed) {
    FeedForward net = FeedForward::make(in, hidden, out, hidden_act, head_act);
    RngStream rng(seed);
    init_glorot(net, rng);
    return net;
}

/// 0.5 * ||net(x) - target||^2 as a function of the flattened parameters.
double net_loss(FeedForward net, const Vec& params, const Vec& x, const Vec& target) {
    net.set_param_vector(params);
    const Vec y = net.forward(x);
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) loss += 0.5 * (y[i] - target[i]) * (y[i] - target[i]);
    return loss;
}

Vec net_loss_grads(const FeedForward& net, const Vec& x, const Vec& target) {
    const ForwardTrace trace = net.forward_trace(x);
    Vec upstream(trace.output.size());
    for (std::size_t i = 0; i < upstream.size(); ++i) upstream[i] = trace.output[i] - target[i];
    return FeedForward::flatten_grads(net.backward(trace, upstream));
}

}  // namespace

TEST_CASE("matvec multiplies a small matrix correctly") {
    Matrix m(2, 3);
    m(0, 0) = 1.0; m(0, 1) = 2.0; m(0, 2) = 3.0;
    m(1, 0) = 4.0; m(1, 1) = 5.0; m(1, 2) = 6.0;
    const Vec y = matvec(m, {1.0, 1.0, 2.0});
    REQUIRE(y.size() == 2);
    CHECK(y[0] == doctest::Approx(9.0));
    CHECK(y[1] == doctest::Approx(21.0));

    CHECK(contains(thrown_message([&] { matvec(m, {1.0, 2.0}); }), "expected"));
}

TEST_CASE("matvec_transposed applies the transpose") {
    Matrix m(2, 3);
    m(0, 0) = 1.0; m(0, 1) = 2.0; m(0, 2) = 3.0;
    m(1, 0) = 4.0; m(1, 1) = 5.0; m(1, 2) = 6.0;
    const Vec y = matvec_transposed(m, {1.0, 2.0});
    REQUIRE(y.size() == 3);
    CHECK(y[0] == doctest::Approx(9.0));
    CHECK(y[1] == doctest::Approx(12.0));
    CHECK(y[2] == doctest::Approx(15.0));
}

TEST_CASE("add_outer accumulates a scaled outer product") {
    Matrix m(2, 2, 1.0);
    add_outer(m, {1.0, 2.0}, {3.0, 4.0}, 0.5);
    CHECK(m(0, 0) == doctest::Approx(1.0 + 0.5 * 3.0));
    CHECK(m(0, 1) == doctest::Approx(1.0 + 0.5 * 4.0));
    CHECK(m(1, 0) == doctest::Approx(1.0 + 0.5 * 6.0));
    CHECK(m(1, 1) == doctest::Approx(1.0 + 0.5 * 8.0));
}

TEST_CASE("dense_forward identity, relu, and sigmoid cases") {
    SUBCASE("identity activation passes the input through") {
        const DenseLayer layer = identity_layer(2, Activation::Identity);
        const Vec y = dense_forward(layer, {3.0, -1.0});
        CHECK(y[0] == doctest::Approx(3.0));
        CHECK(y[1] == doctest::Approx(-1.0));
    }
    SUBCASE("relu clamps negatives") {
        const DenseLayer layer = identity_layer(2, Activation::ReLU);
        const Vec y = dense_forward(layer, {3.0, -1.0});
        CHECK(y[0] == doctest::Approx(3.0));
        CHECK(y[1] == doctest::Approx(0.0));
    }
    SUBCASE("sigmoid of a zero pre-activation is one half") {
        DenseLayer layer(1, 2, Activation::Sigmoid);  // zero weights, zero bias
        const Vec y = dense_forward(layer, {42.0, -17.0});
        REQUIRE(y.size() == 1);
        CHECK(y[0] == doctest::Approx(0.5));
    }
    SUBCASE("input length mismatch is an error naming both sizes") {
        const DenseLayer layer = identity_layer(2, Activation::Identity);
        const std::string msg = thrown_message([&] { dense_forward(layer, {1.0, 2.0, 3.0}); });
        CHECK(contains(msg, "2"));
        CHECK(contains(msg, "3"));
    }
}

TEST_CASE("dense_forward is deterministic") {
    FeedForward net = random_net(4, {5}, 3, Activation::Tanh, Activation::Identity, 11);
    const Vec x = {0.3, -1.2, 0.8, 2.0};
    CHECK(net.forward(x) == net.forward(x));
}

TEST_CASE("backward of a single identity layer gives input and one as gradients") {
    FeedForward net(std::vector<DenseLayer>{identity_layer(2, Activation::Identity)});
    const Vec x = {3.0, -2.0};
    const ForwardTrace trace = net.forward_trace(x);
    // Loss = output[0], so upstream = (1, 0).
    const StackGrads grads = net.backward(trace, {1.0, 0.0});
    CHECK(grads.layers[0].dw(0, 0) == doctest::Approx(3.0));
    CHECK(grads.layers[0].dw(0, 1) == doctest::Approx(-2.0));
    CHECK(grads.layers[0].dw(1, 0) == doctest::Approx(0.0));
    CHECK(grads.layers[0].db[0] == doctest::Approx(1.0));
    CHECK(grads.layers[0].db[1] == doctest::Approx(0.0));
}

TEST_CASE("backward matches finite differences for every activation") {
    const Vec x = {0.7, -0.4, 1.1};
    const Vec target = {0.25, -0.5};
    const Activation acts[] = {Activation::Identity, Activation::ReLU, Activation::Tanh,
                               Activation::Sigmoid};
    for (Activation hidden_act : acts) {
        for (Activation head_act : {Activation::Identity, Activation::Sigmoid}) {
            FeedForward net = random_net(3, {6, 4}, 2, hidden_act, head_act,
                                         17 + static_cast<std::uint64_t>(hidden_act));
            const Vec params = net.param_vector();
            const Vec analytic = net_loss_grads(net, x, target);
            const double err = grad_check(
                [&](const Vec& p) { return net_loss(net, p, x, target); }, analytic, params, 1e-4);
            CHECK(err < 1e-4);
        }
    }
}

TEST_CASE("dead relu layer receives zero weight gradients") {
    // Layer 1 pre-activations are all negative for a positive input, so its
    // output is identically zero and no gradient reaches its weights.
    DenseLayer first(3, 2, Activation::ReLU);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 2; ++c) first.weights(r, c) = -1.0;
    DenseLayer second(1, 3, Activation::Identity);
    for (std::size_t c = 0; c < 3; ++c) second.weights(0, c) = 1.0;
    FeedForward net(std::vector<DenseLayer>{first, second});

    const ForwardTrace trace = net.forward_trace({1.0, 2.0});
    const StackGrads grads = net.backward(trace, {1.0});
    for (double g : grads.layers[0].dw.data) CHECK(g == 0.0);
    for (double g : grads.layers[0].db) CHECK(g == 0.0);
}

TEST_CASE("backward rejects a trace from a different input shape") {
    FeedForward net = random_net(3, {4}, 2, Activation::Tanh, Activation::Identity, 5);
    const ForwardTrace trace = net.forward_trace({1.0, 2.0, 3.0});
    CHECK(contains(thrown_message([&] { net.backward(trace, {1.0, 2.0, 3.0}); }), "upstream"));
    CHECK(contains(thrown_message([&] { net.backward(ForwardTrace{}, {1.0, 2.0}); }), "trace"));
}

TEST_CASE("param_vector and set_param_vector round trip") {
    FeedForward net = random_net(4, {3}, 2, Activation::Tanh, Activation::Identity, 23);
    const Vec params = net.param_vector();
    CHECK(params.size() == net.param_count());
    FeedForward other = FeedForward::make(4, {3}, 2, Activation::Tanh, Activation::Identity);
    other.set_param_vector(params);
    CHECK(other.param_vector() == params);
    CHECK(contains(thrown_message([&] { other.set_param_vector({1.0}); }), "expected"));
}

TEST_CASE("adam with zero gradients is a fixed point") {
    Vec params = {1.0, -2.0, 0.5};
    AdamState state(params.size());
    const Vec before = params;
    adam_step(params, {0.0, 0.0, 0.0}, state);
    CHECK(params == before);
    CHECK(state.t == 1);
}

TEST_CASE("adam first step moves against the gradient sign with magnitude near the rate") {
    Vec params = {0.0, 0.0};
    AdamConfig config;
    config.learning_rate = 0.1;
    AdamState state(params.size(), config);
    adam_step(params, {3.0, -0.2}, state);
    CHECK(params[0] == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(params[1] == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("adam converges on a scalar quadratic") {
    // f(x) = (x - 3)^2, gradient 2(x - 3), 200 steps at rate 0.1.
    Vec x = {0.0};
    AdamConfig config;
    config.learning_rate = 0.1;
    AdamState state(1, config);
    for (int step = 0; step < 200; ++step) adam_step(x, {2.0 * (x[0] - 3.0)}, state);
    CHECK(std::abs(x[0] - 3.0) < 0.05);
}

TEST_CASE("adam rejects non-finite gradients") {
    Vec params = {1.0};
    AdamState state(1);
    const std::string msg =
        thrown_message([&] { adam_step(params, {std::nan("")}, state); });
    CHECK(contains(msg, "non-finite"));
}

TEST_CASE("adam rejects mismatched lengths") {
    Vec params = {1.0, 2.0};
    AdamState state(1);
    CHECK(contains(thrown_message([&] { adam_step(params, {0.1, 0.2}, state); }), "length"));
}

TEST_CASE("rng streams with the same seed are identical") {
    RngStream a(123456), b(123456);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    RngStream c(123456), d(123456);
    for (int i = 0; i < 100; ++i) CHECK(c.normal() == d.normal());
    RngStream e(1), f(2);
    CHECK(e.next_u64() != f.next_u64());
}

TEST_CASE("sample_standard_normal is deterministic per seed") {
    RngStream a(77), b(77);
    CHECK(sample_standard_normal(a, 64) == sample_standard_normal(b, 64));
}

TEST_CASE("derive creates disjoint streams without advancing the parent") {
    const RngStream base(99);
    RngStream child0 = base.derive(0);
    RngStream child1 = base.derive(1);
    CHECK(child0.next_u64() != child1.next_u64());

    RngStream fresh(99);
    RngStream derived_then_used(99);
    (void)derived_then_used.derive(42);
    CHECK(fresh.next_u64() == derived_then_used.next_u64());

    // Deriving the same index twice yields the same stream.
    RngStream again = base.derive(0);
    RngStream child0b = base.derive(0);
    CHECK(again.next_u64() == child0b.next_u64());
}

TEST_CASE("standard normal draws have the right moments and tail mass") {
    RngStream rng(2024);
    const std::size_t n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum_sq += z * z;
        if (z > -1.96 && z < 1.96) ++inside;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
    CHECK(static_cast<double>(inside) / n == doctest::Approx(0.95).epsilon(0.011));
}

TEST_CASE("uniform stays in range with a central mean") {
    RngStream rng(5);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));

    RngStream rng2(5);
    const double v = rng2.uniform(10.0, 20.0);
    CHECK(v >= 10.0);
    CHECK(v < 20.0);
}

TEST_CASE("uniform_below covers its range without bias") {
    RngStream rng(31);
    std::vector<std::size_t> counts(10, 0);
    const std::size_t n = 100000;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t k = rng.uniform_below(10);
        REQUIRE(k < 10);
        ++counts[k];
    }
    // Each bucket expects 10000 with std ~95; allow six sigmas.
    for (std::size_t c : counts) CHECK(std::abs(static_cast<double>(c) - 10000.0) < 600.0);
    CHECK(contains(thrown_message([&] { rng.uniform_below(0); }), "n must be > 0"));
}

TEST_CASE("grad_check is exact on a quadratic and detects corruption") {
    const Vec params = {1.0, -2.0, 0.7};
    const auto loss = [](const Vec& p) {
        double s = 0.0;
        for (double v : p) s += v * v;
        return s;
    };
    Vec analytic = {2.0, -4.0, 1.4};
    CHECK(grad_check(loss, analytic, params, 1e-4) < 1e-8);

    Vec corrupted = analytic;
    corrupted[1] *= 2.0;  // one component doubled
    CHECK(grad_check(loss, corrupted, params, 1e-4) > 0.3);

    CHECK(contains(thrown_message([&] { grad_check(loss, analytic, params, 0.0); }),
                   "step must be > 0"));
    const auto bad_loss = [](const Vec&) { return std::nan(""); };
    CHECK(contains(thrown_message([&] { grad_check(bad_loss, analytic, params, 1e-4); }),
                   "non-finite"));
}

TEST_CASE("glorot initialization respects its bound and is seeded") {
    FeedForward net = FeedForward::make(10, {7}, 4, Activation::Tanh, Activation::Identity);
    RngStream rng(3);
    init_glorot(net, rng);
    for (const DenseLayer& layer : net.layers()) {
        const double bound =
            std::sqrt(6.0 / static_cast<double>(layer.in_dim() + layer.out_dim()));
        for (double w : layer.weights.data) {
            CHECK(w >= -bound);
            CHECK(w <= bound);
        }
        for (double b : layer.bias) CHECK(b == 0.0);
    }
    FeedForward net2 = FeedForward::make(10, {7}, 4, Activation::Tanh, Activation::Identity);
    RngStream rng2(3);
    init_glorot(net2, rng2);
    CHECK(net.param_vector() == net2.param_vector());
}

TEST_CASE("accumulate and scale_grads combine gradient holders") {
    FeedForward net = random_net(3, {2}, 1, Activation::Tanh, Activation::Identity, 9);
    const ForwardTrace trace = net.forward_trace({1.0, -1.0, 0.5});
    const StackGrads g = net.backward(trace, {1.0});
    StackGrads sum = net.zero_grads();
    accumulate(sum, g, 2.0);
    accumulate(sum, g, -1.0);
    scale_grads(sum, 3.0);
    const Vec flat_g = FeedForward::flatten_grads(g);
    const Vec flat_sum = FeedForward::flatten_grads(sum);
    for (std::size_t i = 0; i < flat_g.size(); ++i)
        CHECK(flat_sum[i] == doctest::Approx(3.0 * flat_g[i]));
}

TEST_CASE("all_finite flags nan and infinity") {
    CHECK(all_finite(Vec{1.0, 2.0}));
    CHECK_FALSE(all_finite(Vec{1.0, std::nan("")}));
    Matrix m(1, 2);
    m(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(all_finite(m));
}
