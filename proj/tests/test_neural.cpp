#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "qcl/errors.hpp"
#include "qcl/neural.hpp"
#include "qcl/rng.hpp"

#include "oracles.hpp"

using qcl::Mlp;

namespace {

std::vector<double> random_input(qcl::Rng& rng, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (double& v : x)
        v = rng.uniform(-1.0, 1.0);
    return x;
}

} // namespace

TEST_CASE("network construction produces the declared shapes") {
    qcl::Rng rng(101);
    const Mlp net = qcl::make_mlp({3, 4, 5, 2}, rng);
    CHECK(net.n_layers() == 3);
    CHECK(net.input_size() == 3);
    CHECK(net.output_size() == 2);
    REQUIRE(net.weights.size() == 3);
    CHECK(net.weights[0].size() == 4 * 3);
    CHECK(net.weights[1].size() == 5 * 4);
    CHECK(net.weights[2].size() == 2 * 5);
    CHECK(net.biases[0].size() == 4);
    CHECK(net.biases[1].size() == 5);
    CHECK(net.biases[2].size() == 2);

    const Mlp agent = qcl::make_control_net(6, 100, rng);
    CHECK(agent.sizes == std::vector<int>{6, 64, 512, 256, 100});

    CHECK_THROWS_AS(qcl::make_mlp({3}, rng), qcl::invalid_argument);
    CHECK_THROWS_AS(qcl::make_mlp({3, 0, 2}, rng), qcl::invalid_argument);
}

TEST_CASE("initial parameters respect the fan-in bound") {
    qcl::Rng rng(103);
    const Mlp net = qcl::make_mlp({7, 11, 4}, rng);
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const double bound =
            1.0 / std::sqrt(static_cast<double>(net.sizes[l]));
        for (double w : net.weights[l])
            CHECK(std::abs(w) <= bound);
        for (double b : net.biases[l])
            CHECK(std::abs(b) <= bound);
    }
}

TEST_CASE("forward pass matches the reference loop nest") {
    qcl::Rng rng(107);
    for (int trial = 0; trial < 20; ++trial) {
        const Mlp net = qcl::make_mlp({4, 6, 5, 3}, rng);
        const auto x = random_input(rng, 4);
        const auto got = qcl::forward(net, x);
        const auto want = oracle::mlp_forward_reference(net, x);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i)
            CHECK(std::abs(got[i] - want[i]) < 1e-12);
    }
}

TEST_CASE("forward validates the input length") {
    qcl::Rng rng(109);
    const Mlp net = qcl::make_mlp({3, 4, 2}, rng);
    CHECK_THROWS_AS(qcl::forward(net, {1.0, 2.0}), qcl::invalid_argument);
}

TEST_CASE("backward matches central finite differences everywhere") {
    qcl::Rng rng(113);
    Mlp net = qcl::make_mlp({3, 4, 5, 2}, rng);
    const auto x = random_input(rng, 3);
    std::vector<double> upstream(2);
    for (double& c : upstream)
        c = rng.uniform(-1.0, 1.0);

    qcl::ForwardCache cache;
    qcl::forward(net, x, cache);
    const qcl::MlpGrads grads = qcl::backward(net, cache, upstream);

    auto loss = [&]() {
        const auto out = qcl::forward(net, x);
        double l = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i)
            l += upstream[i] * out[i];
        return l;
    };

    const double h = 1e-5;
    auto check_param = [&](double& p, double analytic) {
        const double saved = p;
        p = saved + h;
        const double lp = loss();
        p = saved - h;
        const double lm = loss();
        p = saved;
        const double fd = (lp - lm) / (2.0 * h);
        CHECK(std::abs(fd - analytic) <= 1e-7 + 1e-6 * std::abs(analytic));
    };

    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (std::size_t i = 0; i < net.weights[l].size(); ++i)
            check_param(net.weights[l][i], grads.weights[l][i]);
        for (std::size_t i = 0; i < net.biases[l].size(); ++i)
            check_param(net.biases[l][i], grads.biases[l][i]);
    }
}

TEST_CASE("accumulating backward adds gradients") {
    qcl::Rng rng(127);
    const Mlp net = qcl::make_mlp({3, 5, 2}, rng);
    const auto x = random_input(rng, 3);
    const std::vector<double> upstream{0.7, -0.4};

    qcl::ForwardCache cache;
    qcl::forward(net, x, cache);
    const qcl::MlpGrads once = qcl::backward(net, cache, upstream);

    qcl::MlpGrads acc = qcl::zero_grads(net);
    qcl::backward(net, cache, upstream, acc);
    qcl::backward(net, cache, upstream, acc);
    for (std::size_t l = 0; l < once.weights.size(); ++l) {
        for (std::size_t i = 0; i < once.weights[l].size(); ++i)
            CHECK(acc.weights[l][i] ==
                  doctest::Approx(2.0 * once.weights[l][i]).epsilon(1e-12));
        for (std::size_t i = 0; i < once.biases[l].size(); ++i)
            CHECK(acc.biases[l][i] ==
                  doctest::Approx(2.0 * once.biases[l][i]).epsilon(1e-12));
    }
}

TEST_CASE("backward rejects a missing cache and bad upstream shapes") {
    qcl::Rng rng(131);
    const Mlp net = qcl::make_mlp({3, 4, 2}, rng);
    qcl::ForwardCache stale;
    qcl::MlpGrads g = qcl::zero_grads(net);
    CHECK_THROWS_AS(qcl::backward(net, stale, {1.0, 1.0}, g),
                    qcl::contract_error);

    qcl::ForwardCache cache;
    qcl::forward(net, {0.1, 0.2, 0.3}, cache);
    CHECK_THROWS_AS(qcl::backward(net, cache, {1.0}, g),
                    qcl::invalid_argument);
}

TEST_CASE("adam steps reproduce the hand-computed sequence") {
    Mlp net;
    net.sizes = {1, 1};
    net.weights = {{0.0}};
    net.biases = {{0.0}};

    qcl::MlpGrads g = qcl::zero_grads(net);
    g.weights[0][0] = 0.5;

    qcl::AdamState state = qcl::make_adam(net);
    const double expected[3] = {-0.09999999800000003, -0.19999999599999935,
                                -0.2999999939999993};
    for (int step = 0; step < 3; ++step) {
        qcl::adam_step(net, g, state, 0.1);
        CHECK(std::abs(net.weights[0][0] - expected[step]) < 1e-12);
        CHECK(net.biases[0][0] == 0.0);
    }
    CHECK(state.step_count == 3);
}

TEST_CASE("adam rejects mismatched gradient shapes") {
    qcl::Rng rng(137);
    Mlp net = qcl::make_mlp({3, 4, 2}, rng);
    const Mlp other = qcl::make_mlp({3, 2}, rng);
    qcl::AdamState state = qcl::make_adam(net);
    CHECK_THROWS_AS(qcl::adam_step(net, qcl::zero_grads(other), state, 0.1),
                    qcl::invalid_argument);
}

TEST_CASE("replay buffer overwrites oldest entries once full") {
    qcl::ReplayBuffer buf(3);
    CHECK(buf.capacity() == 3);
    for (int i = 1; i <= 5; ++i) {
        qcl::Transition t;
        t.reward = static_cast<double>(i);
        buf.push(t);
    }
    CHECK(buf.size() == 3);
    CHECK(buf.at(0).reward == 4.0);
    CHECK(buf.at(1).reward == 5.0);
    CHECK(buf.at(2).reward == 3.0);

    CHECK_THROWS_AS(qcl::ReplayBuffer(0), qcl::invalid_argument);
}

TEST_CASE("replay sampling draws without replacement") {
    qcl::ReplayBuffer buf(8);
    for (int i = 0; i < 8; ++i) {
        qcl::Transition t;
        t.action = i;
        buf.push(t);
    }
    qcl::Rng rng(139);
    const auto batch = buf.sample(8, rng);
    REQUIRE(batch.size() == 8);
    std::vector<bool> seen(8, false);
    for (const auto& t : batch) {
        CHECK(!seen[static_cast<std::size_t>(t.action)]);
        seen[static_cast<std::size_t>(t.action)] = true;
    }

    qcl::Rng r1(7), r2(7);
    const auto s1 = buf.sample(4, r1);
    const auto s2 = buf.sample(4, r2);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(s1[i].action == s2[i].action);

    CHECK_THROWS_AS(buf.sample(9, rng), qcl::invalid_argument);
}
