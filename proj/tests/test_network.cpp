#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "endodepth/errors.hpp"
#include "endodepth/network.hpp"

using namespace endo;

namespace {

NetworkSpec tiny_spec() {
    NetworkSpec s;
    s.patch_size = 8;
    s.in_channels = 2;
    s.conv = {{3, 3, 1, 2}, {4, 3, 2, 1}};
    s.fc = {5, 1};
    s.init_output_bias = 0.0;
    return s;
}

NetworkSpec pool_edge_spec() {
    // Kernel-1 conv with a pool window clipped at the border (5 -> 2).
    NetworkSpec s;
    s.patch_size = 5;
    s.in_channels = 1;
    s.conv = {{2, 1, 1, 3}};
    s.fc = {1};
    return s;
}

std::vector<float> random_patch(const NetworkSpec& s, std::uint64_t seed) {
    std::size_t n = static_cast<std::size_t>(s.in_channels) * s.patch_size *
                    s.patch_size;
    std::vector<float> p(n);
    Pcg32 rng = make_stream(seed, 0x70746368ULL, 1);
    for (auto& v : p) v = static_cast<float>(rng.uniform(0.1, 0.9));
    return p;
}

// Shift every bias away from zero so finite differences never straddle a
// rectifier kink.
void bias_nudge(NetworkWeights& w, double delta) {
    for (auto& layer : w.biases)
        for (auto& b : layer) b += delta;
}

double forward_value(const NetworkWeights& w, const std::vector<float>& patch) {
    ForwardCache cache;
    return forward(w, patch, cache);
}

void check_gradients(const NetworkSpec& spec, std::uint64_t seed) {
    NetworkWeights w = init_weights(spec, seed);
    bias_nudge(w, 0.05);
    std::vector<float> patch = random_patch(spec, seed + 13);
    const double upstream = 1.3;
    ForwardCache cache;
    forward(w, patch, cache);
    NetworkGrads grads = make_zero_grads(w);
    backward(w, cache, upstream, grads);

    const double eps = 1e-5;
    for (std::size_t l = 0; l < w.weights.size(); ++l) {
        auto check_param = [&](std::vector<double>& params,
                               const std::vector<double>& analytic,
                               std::size_t i) {
            double keep = params[i];
            params[i] = keep + eps;
            double up = forward_value(w, patch) * upstream;
            params[i] = keep - eps;
            double dn = forward_value(w, patch) * upstream;
            params[i] = keep;
            double fd = (up - dn) / (2.0 * eps);
            double an = analytic[i];
            double tol = 1e-4 * std::fmax(std::fabs(fd), std::fabs(an)) + 1e-7;
            REQUIRE(std::fabs(fd - an) <= tol);
        };
        for (std::size_t i = 0; i < w.weights[l].size(); ++i)
            check_param(w.weights[l], grads.weights[l], i);
        for (std::size_t i = 0; i < w.biases[l].size(); ++i)
            check_param(w.biases[l], grads.biases[l], i);
    }
}

}  // namespace

TEST_CASE("zero weights produce zero output", "[network]") {
    NetworkSpec spec = tiny_spec();
    NetworkWeights w = init_weights(spec, 0);
    for (auto& layer : w.weights)
        for (auto& v : layer) v = 0.0;
    for (auto& layer : w.biases)
        for (auto& v : layer) v = 0.0;
    std::vector<float> patch = random_patch(spec, 5);
    REQUIRE(forward_value(w, patch) == 0.0);
    // The output bias feeds straight through.
    w.biases.back()[0] = 7.25;
    REQUIRE(forward_value(w, patch) == 7.25);
}

TEST_CASE("doubling the final linear layer doubles the output", "[network]") {
    NetworkSpec spec = tiny_spec();
    NetworkWeights w = init_weights(spec, 3);
    bias_nudge(w, 0.05);
    std::vector<float> patch = random_patch(spec, 8);
    double base = forward_value(w, patch);
    for (auto& v : w.weights.back()) v *= 2.0;
    w.biases.back()[0] *= 2.0;
    double doubled = forward_value(w, patch);
    REQUIRE(doubled == Catch::Approx(2.0 * base).epsilon(1e-12));
}

TEST_CASE("initialization and forward are deterministic in the seed",
          "[network]") {
    NetworkSpec spec = tiny_spec();
    NetworkWeights a = init_weights(spec, 11);
    NetworkWeights b = init_weights(spec, 11);
    REQUIRE(a.weights == b.weights);
    REQUIRE(a.biases == b.biases);
    NetworkWeights c = init_weights(spec, 12);
    REQUIRE(a.weights != c.weights);
    std::vector<float> patch = random_patch(spec, 2);
    REQUIRE(forward_value(a, patch) == forward_value(b, patch));
    // Biases start at zero except the configured output bias.
    NetworkSpec biased = spec;
    biased.init_output_bias = 10.0;
    NetworkWeights d = init_weights(biased, 11);
    REQUIRE(d.biases.back()[0] == 10.0);
    REQUIRE(d.biases.front()[0] == 0.0);
}

TEST_CASE("analytic gradients match finite differences", "[network]") {
    check_gradients(tiny_spec(), 101);
}

TEST_CASE("gradients are exact for kernel-1 conv and clipped pooling",
          "[network]") {
    check_gradients(pool_edge_spec(), 202);
}

TEST_CASE("zero upstream gradient leaves all gradients zero", "[network]") {
    NetworkSpec spec = tiny_spec();
    NetworkWeights w = init_weights(spec, 4);
    std::vector<float> patch = random_patch(spec, 4);
    ForwardCache cache;
    forward(w, patch, cache);
    NetworkGrads g = make_zero_grads(w);
    backward(w, cache, 0.0, g);
    for (const auto& layer : g.weights)
        for (double v : layer) REQUIRE(v == 0.0);
    for (const auto& layer : g.biases)
        for (double v : layer) REQUIRE(v == 0.0);
}

TEST_CASE("frozen conv layers receive no gradients and never move",
          "[network]") {
    NetworkSpec spec = tiny_spec();
    NetworkWeights w = init_weights(spec, 9);
    bias_nudge(w, 0.05);
    std::vector<float> patch = random_patch(spec, 9);

    // Reference gradients with everything trainable.
    ForwardCache cache;
    forward(w, patch, cache);
    NetworkGrads full = make_zero_grads(w);
    backward(w, cache, 1.0, full);

    set_trainable(w, TrainablePattern::fc_only);
    NetworkGrads frozen = make_zero_grads(w);
    for (std::size_t l = 0; l < spec.conv.size(); ++l) {
        REQUIRE(frozen.weights[l].empty());
        REQUIRE(frozen.biases[l].empty());
    }
    backward(w, cache, 1.0, frozen);
    for (std::size_t l = 0; l < spec.conv.size(); ++l)
        REQUIRE(frozen.weights[l].empty());
    // The fc gradients agree with the all-trainable pass exactly.
    for (std::size_t l = spec.conv.size(); l < w.weights.size(); ++l) {
        REQUIRE(frozen.weights[l] == full.weights[l]);
        REQUIRE(frozen.biases[l] == full.biases[l]);
    }

    // Conv parameters stay bit identical through an optimizer step.
    std::vector<std::vector<double>> conv_before(w.weights.begin(),
                                                 w.weights.begin() + 2);
    TrainHyper hyper;
    hyper.lr0 = 0.05;
    hyper.epochs = 2;
    hyper.lr_decay_start_epoch = 1;
    Velocity vel = make_zero_velocity(w);
    REQUIRE(sgd_step(w, frozen, hyper, vel, 1));
    REQUIRE(std::equal(conv_before.begin(), conv_before.end(), w.weights.begin()));
}

TEST_CASE("trainable masks for the default architecture", "[network]") {
    NetworkSpec spec;  // default: 5 conv + 4 fc
    NetworkWeights w = init_weights(spec, 1);
    int n = 0;
    for (auto t : w.trainable) n += t;
    REQUIRE(n == 9);
    set_trainable(w, TrainablePattern::fc_only);
    n = 0;
    for (auto t : w.trainable) n += t;
    REQUIRE(n == 4);
    for (std::size_t l = 0; l < 5; ++l) REQUIRE(w.trainable[l] == 0);
    set_trainable(w, TrainablePattern::all);
    n = 0;
    for (auto t : w.trainable) n += t;
    REQUIRE(n == 9);
}

TEST_CASE("momentum SGD hand value", "[network]") {
    // w=0, v=0, grad=1, lr=0.1, momentum=0.8, weight_decay=0
    //   -> v = -0.1, w = -0.1; second step: v = -0.18, w = -0.28.
    NetworkSpec spec = pool_edge_spec();
    NetworkWeights w = init_weights(spec, 0);
    for (auto& layer : w.weights)
        for (auto& v : layer) v = 0.0;
    for (auto& layer : w.biases)
        for (auto& v : layer) v = 0.0;
    NetworkGrads g = make_zero_grads(w);
    for (auto& layer : g.weights)
        for (auto& v : layer) v = 1.0;
    for (auto& layer : g.biases)
        for (auto& v : layer) v = 1.0;
    TrainHyper hyper;
    hyper.lr0 = 0.1;
    hyper.momentum = 0.8;
    hyper.weight_decay = 0.0;
    hyper.epochs = 2;
    hyper.lr_decay_start_epoch = 1;
    Velocity vel = make_zero_velocity(w);
    REQUIRE(sgd_step(w, g, hyper, vel, 1));
    for (const auto& layer : w.weights)
        for (double v : layer) REQUIRE(v == Catch::Approx(-0.1).margin(1e-15));
    REQUIRE(sgd_step(w, g, hyper, vel, 1));
    for (const auto& layer : w.weights)
        for (double v : layer) REQUIRE(v == Catch::Approx(-0.28).margin(1e-15));
}

TEST_CASE("zero gradients and zero decay are a fixed point", "[network]") {
    NetworkSpec spec = tiny_spec();
    NetworkWeights w = init_weights(spec, 21);
    NetworkWeights before = w;
    NetworkGrads g = make_zero_grads(w);
    TrainHyper hyper;
    hyper.weight_decay = 0.0;
    Velocity vel = make_zero_velocity(w);
    REQUIRE(sgd_step(w, g, hyper, vel, 1));
    REQUIRE(w.weights == before.weights);
    REQUIRE(w.biases == before.biases);
}

TEST_CASE("non-finite gradients reject the whole update", "[network]") {
    NetworkSpec spec = tiny_spec();
    NetworkWeights w = init_weights(spec, 22);
    NetworkWeights before = w;
    NetworkGrads g = make_zero_grads(w);
    g.weights[0][0] = std::numeric_limits<double>::quiet_NaN();
    TrainHyper hyper;
    Velocity vel = make_zero_velocity(w);
    REQUIRE_FALSE(sgd_step(w, g, hyper, vel, 1));
    REQUIRE(w.weights == before.weights);
    REQUIRE(w.biases == before.biases);
}

TEST_CASE("learning rate schedule hand values", "[network]") {
    TrainHyper h;  // lr0 2e-4, epochs 200, decay starts after epoch 20
    REQUIRE(learning_rate(h, 1) == h.lr0);
    REQUIRE(learning_rate(h, 20) == h.lr0);
    REQUIRE(learning_rate(h, 110) == 1e-4);
    REQUIRE(learning_rate(h, 200) == Catch::Approx(0.0).margin(1e-20));
    TrainHyper bad = h;
    bad.lr_decay_start_epoch = 200;
    REQUIRE_THROWS_AS(validate_hyper(bad), ParameterError);
    bad = h;
    bad.momentum = 1.0;
    REQUIRE_THROWS_AS(validate_hyper(bad), ParameterError);
    bad = h;
    bad.epochs = 0;
    REQUIRE_THROWS_AS(validate_hyper(bad), ParameterError);
}

TEST_CASE("gradient accumulation is order independent to rounding",
          "[network]") {
    NetworkSpec spec = tiny_spec();
    NetworkWeights w = init_weights(spec, 30);
    bias_nudge(w, 0.05);
    std::vector<NetworkGrads> parts;
    for (int i = 0; i < 4; ++i) {
        std::vector<float> patch = random_patch(spec, 40 + i);
        ForwardCache cache;
        forward(w, patch, cache);
        NetworkGrads g = make_zero_grads(w);
        backward(w, cache, 0.7 + 0.1 * i, g);
        parts.push_back(std::move(g));
    }
    NetworkGrads serial = make_zero_grads(w);
    for (const auto& p : parts) accumulate_grads(serial, p);
    // Same order accumulation is bit identical.
    NetworkGrads serial2 = make_zero_grads(w);
    for (const auto& p : parts) accumulate_grads(serial2, p);
    REQUIRE(serial.weights == serial2.weights);
    // Pairwise tree accumulation agrees to rounding.
    NetworkGrads left = make_zero_grads(w);
    accumulate_grads(left, parts[0]);
    accumulate_grads(left, parts[1]);
    NetworkGrads right = make_zero_grads(w);
    accumulate_grads(right, parts[2]);
    accumulate_grads(right, parts[3]);
    accumulate_grads(left, right);
    for (std::size_t l = 0; l < serial.weights.size(); ++l)
        for (std::size_t i = 0; i < serial.weights[l].size(); ++i) {
            double a = serial.weights[l][i], b = left.weights[l][i];
            REQUIRE(std::fabs(a - b) <=
                    1e-10 * std::fmax(1.0, std::fmax(std::fabs(a), std::fabs(b))));
        }
}

TEST_CASE("shape validation of inputs and caches", "[network]") {
    NetworkSpec spec = tiny_spec();
    NetworkWeights w = init_weights(spec, 33);
    std::vector<float> small(16, 0.5f);
    ForwardCache cache;
    REQUIRE_THROWS_AS(forward(w, small, cache), ShapeError);

    std::vector<float> patch = random_patch(spec, 3);
    forward(w, patch, cache);
    NetworkWeights other = init_weights(pool_edge_spec(), 1);
    NetworkGrads g = make_zero_grads(other);
    REQUIRE_THROWS_AS(backward(other, cache, 1.0, g), ShapeError);

    NetworkSpec bad = spec;
    bad.fc.back() = 2;
    REQUIRE_THROWS_AS(validate_spec(bad), ParameterError);
    bad = spec;
    bad.conv[0].kernel = 4;
    REQUIRE_THROWS_AS(validate_spec(bad), ParameterError);
}

TEST_CASE("conv geometry hand checks", "[network]") {
    NetworkSpec spec = tiny_spec();
    auto dims = conv_geometry(spec);
    REQUIRE(dims.size() == 2);
    REQUIRE(dims[0].in_ch == 2);
    REQUIRE(dims[0].in_hw == 8);
    REQUIRE(dims[0].conv_hw == 8);  // stride 1 with same padding
    REQUIRE(dims[0].out_hw == 4);   // pool 2
    REQUIRE(dims[1].conv_hw == 2);  // stride 2
    REQUIRE(dims[1].out_hw == 2);   // pool 1
    REQUIRE(flatten_width(spec) == 4 * 2 * 2);

    NetworkSpec pe = pool_edge_spec();
    auto pd = conv_geometry(pe);
    REQUIRE(pd[0].conv_hw == 5);
    REQUIRE(pd[0].out_hw == 2);  // ceil(5/3), border window clipped
    REQUIRE(flatten_width(pe) == 2 * 2 * 2);
}
