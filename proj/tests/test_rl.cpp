#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qcl/errors.hpp"
#include "qcl/qdyn.hpp"
#include "qcl/rl.hpp"

using qcl::ControlEnv;
using qcl::RewardSchedule;

TEST_CASE("reward bands have closed boundaries where specified") {
    const RewardSchedule tab = RewardSchedule::tabular();
    CHECK(tab.reward_for(0.51) == -1.0);
    CHECK(tab.reward_for(0.5) == 10.0);
    CHECK(tab.reward_for(0.1) == 10.0);
    CHECK(tab.reward_for(0.05) == 100.0);
    CHECK(tab.reward_for(0.0011) == 100.0);
    CHECK(tab.reward_for(0.001) == 500.0);
    CHECK(tab.reward_for(0.0) == 500.0);

    const RewardSchedule deep = RewardSchedule::deep();
    CHECK(deep.reward_for(0.51) == 1.0);
    CHECK(deep.reward_for(0.3) == 10.0);
    CHECK(deep.reward_for(0.01) == 500.0);
    CHECK(deep.reward_for(0.0005) == 5000.0);
}

TEST_CASE("environment constructor validation") {
    CHECK_THROWS_AS(ControlEnv(0, qcl::kDefaultTotalTime),
                    qcl::invalid_argument);
    CHECK_THROWS_AS(ControlEnv(2, 0.0), qcl::invalid_argument);
    CHECK_THROWS_AS(ControlEnv(2, qcl::kDefaultTotalTime,
                               RewardSchedule::tabular(), 1),
                    qcl::invalid_argument);
}

TEST_CASE("environment exposes the declared action grid") {
    ControlEnv env(2, qcl::kDefaultTotalTime);
    CHECK(env.n_actions() == 100);
    CHECK(env.action_values() == qcl::linspace(-1.0, 1.0, 100));

    ControlEnv odd(2, qcl::kDefaultTotalTime, RewardSchedule::tabular(), 101);
    CHECK(odd.action_values()[50] == 0.0);
}

TEST_CASE("stepping requires a live episode and a valid action") {
    ControlEnv env(2, qcl::kDefaultTotalTime);
    CHECK_THROWS_AS(env.step(0), qcl::contract_error);

    env.reset();
    CHECK_THROWS_AS(env.step(-1), qcl::invalid_argument);
    CHECK_THROWS_AS(env.step(100), qcl::invalid_argument);

    env.step(0);
    env.step(0);
    CHECK(env.done());
    CHECK_THROWS_AS(env.step(0), qcl::contract_error);
}

TEST_CASE("null pulse at double the minimal duration earns the bottom band") {
    ControlEnv env(2, 2.0 * qcl::kDefaultTotalTime, RewardSchedule::tabular(),
                   101);
    const auto obs0 = env.reset();
    CHECK(obs0[0] == 1.0);
    CHECK(obs0[4] == 0.0);

    const auto s1 = env.step(50);
    CHECK(s1.reward == -1.0);
    CHECK(s1.infidelity == 1.0);
    CHECK(!s1.done);
    CHECK(s1.obs[4] == 0.5);

    const auto s2 = env.step(50);
    CHECK(s2.reward == -1.0);
    CHECK(s2.infidelity == 1.0);
    CHECK(s2.done);
    CHECK(s2.obs[4] == 1.0);

    const auto pulse = env.pulse_so_far();
    CHECK(pulse.amplitudes == std::vector<double>{0.0, 0.0});
    CHECK(pulse.total_time == 2.0 * qcl::kDefaultTotalTime);
}

TEST_CASE("partial pulses keep the per-segment duration") {
    ControlEnv env(4, qcl::kDefaultTotalTime);
    env.reset();
    env.step(10);
    env.step(20);
    const auto pulse = env.pulse_so_far();
    REQUIRE(pulse.amplitudes.size() == 2);
    CHECK(pulse.amplitudes[0] == env.action_values()[10]);
    CHECK(pulse.amplitudes[1] == env.action_values()[20]);
    CHECK(pulse.total_time ==
          doctest::Approx(qcl::kDefaultTotalTime / 2.0).epsilon(1e-15));
    CHECK(pulse.dt() == doctest::Approx(env.dt()).epsilon(1e-15));
}

TEST_CASE("state discretization lands in the expected bins") {
    using qcl::discretize_state;
    const qcl::QubitState g = qcl::ground_state();
    CHECK(discretize_state(g, 0, 20, 20) == std::array<int, 3>{0, 0, 0});

    const qcl::QubitState e = qcl::excited_state();
    CHECK(discretize_state(e, 3, 20, 20) == std::array<int, 3>{19, 0, 3});

    const double r = 1.0 / std::sqrt(2.0);
    const qcl::QubitState plus{r, r};
    CHECK(discretize_state(plus, 1, 20, 20) == std::array<int, 3>{10, 0, 1});

    const qcl::QubitState plus_i{r, qcl::cplx(0.0, r)};
    CHECK(discretize_state(plus_i, 0, 20, 20) == std::array<int, 3>{10, 5, 0});

    const qcl::QubitState minus_i{r, qcl::cplx(0.0, -r)};
    CHECK(discretize_state(minus_i, 0, 20, 20) ==
          std::array<int, 3>{10, 15, 0});
}

TEST_CASE("q-table rows appear zero-filled on first touch") {
    qcl::QTable table;
    const std::array<int, 3> key{1, 2, 3};
    CHECK(table.max_value(key, 7) == 0.0);
    auto& row = table.row(key, 7);
    REQUIRE(row.size() == 7);
    row[4] = 2.5;
    CHECK(table.max_value(key, 7) == 2.5);
    CHECK(table.values.size() == 1);
}

TEST_CASE("greedy playback follows the table and breaks ties low") {
    ControlEnv env(1, qcl::kMinFlipTime, RewardSchedule::tabular(), 101);
    qcl::QTable table;
    table.row({0, 0, 0}, 101)[50] = 5.0;
    const auto actions = qcl::greedy_actions(env, table);
    CHECK(actions == std::vector<int>{50});
    CHECK(env.done());

    ControlEnv fresh(2, qcl::kDefaultTotalTime);
    qcl::QTable empty;
    const auto lows = qcl::greedy_actions(fresh, empty);
    CHECK(lows == std::vector<int>{0, 0});
}

TEST_CASE("tabular training is deterministic per seed") {
    qcl::QlConfig cfg;
    cfg.seed = 21;
    cfg.max_episodes = 120;
    ControlEnv e1(2, qcl::kDefaultTotalTime);
    ControlEnv e2(2, qcl::kDefaultTotalTime);
    const auto a = qcl::ql_train(e1, cfg);
    const auto b = qcl::ql_train(e2, cfg);
    CHECK(a.best_pulse.amplitudes == b.best_pulse.amplitudes);
    CHECK(a.best_fidelity == b.best_fidelity);
    CHECK(a.iterations_used == b.iterations_used);
    CHECK(a.converged == b.converged);
}

TEST_CASE("tabular training validation") {
    ControlEnv env(2, qcl::kDefaultTotalTime);
    qcl::QlConfig cfg;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(qcl::ql_train(env, cfg), qcl::invalid_argument);
    cfg = qcl::QlConfig{};
    cfg.discount = 1.5;
    CHECK_THROWS_AS(qcl::ql_train(env, cfg), qcl::invalid_argument);
    cfg = qcl::QlConfig{};
    cfg.epsilon = -0.1;
    CHECK_THROWS_AS(qcl::ql_train(env, cfg), qcl::invalid_argument);
    cfg = qcl::QlConfig{};
    cfg.max_episodes = 0;
    CHECK_THROWS_AS(qcl::ql_train(env, cfg), qcl::invalid_argument);
    cfg = qcl::QlConfig{};
    cfg.theta_bins = 0;
    CHECK_THROWS_AS(qcl::ql_train(env, cfg), qcl::invalid_argument);
}

TEST_CASE("a mid-episode solve returns the truncated pulse immediately") {
    qcl::QlConfig cfg;
    cfg.epsilon = 1.0;
    cfg.seed = 0;
    ControlEnv env(2, qcl::kDefaultTotalTime, RewardSchedule::tabular(), 101);
    const auto r = qcl::ql_train(env, cfg);
    REQUIRE(r.converged);
    REQUIRE(r.best_pulse.amplitudes.size() == 1);
    CHECK(r.best_pulse.amplitudes[0] == 0.0);
    CHECK(r.best_pulse.total_time ==
          doctest::Approx(qcl::kMinFlipTime).epsilon(1e-15));
    CHECK(r.best_fidelity > 0.999);
    CHECK(r.iterations_used >= 1);
    CHECK(r.iterations_used <= cfg.max_episodes);
}

TEST_CASE("tabular agents concentrate in the high-fidelity region") {
    int good = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        qcl::QlConfig cfg;
        cfg.seed = seed;
        ControlEnv env(2, qcl::kDefaultTotalTime);
        const auto r = qcl::ql_train(env, cfg);
        if (r.best_fidelity > 0.95)
            ++good;
    }
    CHECK(good >= 15);
}

TEST_CASE("network agents are deterministic per seed") {
    qcl::DqnConfig dq;
    dq.budget_steps = 200;
    dq.seed = 5;
    ControlEnv d1(2, qcl::kDefaultTotalTime, RewardSchedule::deep());
    ControlEnv d2(2, qcl::kDefaultTotalTime, RewardSchedule::deep());
    const auto da = qcl::dqn_train(d1, dq);
    const auto db = qcl::dqn_train(d2, dq);
    CHECK(da.best_pulse.amplitudes == db.best_pulse.amplitudes);
    CHECK(da.best_fidelity == db.best_fidelity);
    CHECK(da.iterations_used == db.iterations_used);

    qcl::PpoConfig pp;
    pp.budget_steps = 256;
    pp.rollout_steps = 128;
    pp.seed = 5;
    ControlEnv p1(2, qcl::kDefaultTotalTime, RewardSchedule::deep());
    ControlEnv p2(2, qcl::kDefaultTotalTime, RewardSchedule::deep());
    const auto pa = qcl::ppo_train(p1, pp);
    const auto pb = qcl::ppo_train(p2, pp);
    CHECK(pa.best_pulse.amplitudes == pb.best_pulse.amplitudes);
    CHECK(pa.best_fidelity == pb.best_fidelity);
    CHECK(pa.iterations_used == pb.iterations_used);
}

TEST_CASE("a zero step budget still produces one played-out episode") {
    qcl::DqnConfig dq;
    dq.budget_steps = 0;
    dq.seed = 3;
    ControlEnv denv(3, qcl::kDefaultTotalTime, RewardSchedule::deep());
    const auto dr = qcl::dqn_train(denv, dq);
    CHECK(dr.best_pulse.amplitudes.size() == 3);
    CHECK(dr.best_fidelity >= 0.0);
    CHECK(dr.best_fidelity <= 1.0);

    qcl::PpoConfig pp;
    pp.budget_steps = 0;
    pp.seed = 3;
    ControlEnv penv(3, qcl::kDefaultTotalTime, RewardSchedule::deep());
    const auto pr = qcl::ppo_train(penv, pp);
    CHECK(pr.best_pulse.amplitudes.size() == 3);
    CHECK(pr.best_fidelity >= 0.0);
    CHECK(pr.best_fidelity <= 1.0);
}

TEST_CASE("network training validation") {
    ControlEnv env(2, qcl::kDefaultTotalTime, RewardSchedule::deep());
    qcl::DqnConfig dq;
    dq.batch_size = 128;
    dq.buffer_capacity = 64;
    CHECK_THROWS_AS(qcl::dqn_train(env, dq), qcl::invalid_argument);
    dq = qcl::DqnConfig{};
    dq.budget_steps = -1;
    CHECK_THROWS_AS(qcl::dqn_train(env, dq), qcl::invalid_argument);

    qcl::PpoConfig pp;
    pp.clip = 0.0;
    CHECK_THROWS_AS(qcl::ppo_train(env, pp), qcl::invalid_argument);
    pp = qcl::PpoConfig{};
    pp.discount = -0.5;
    CHECK_THROWS_AS(qcl::ppo_train(env, pp), qcl::invalid_argument);
}

TEST_CASE("deep q-learning solves the single-segment flip") {
    qcl::DqnConfig cfg;
    cfg.budget_steps = 400;
    cfg.seed = 0;
    ControlEnv env(1, qcl::kMinFlipTime, RewardSchedule::deep(), 21);
    const auto r = qcl::dqn_train(env, cfg);
    CHECK(r.converged);
    CHECK(r.best_fidelity > 0.999);
    REQUIRE(r.best_pulse.amplitudes.size() == 1);
    CHECK(r.best_pulse.amplitudes[0] == 0.0);
}

TEST_CASE("policy gradient solves the single-segment flip") {
    qcl::PpoConfig cfg;
    cfg.budget_steps = 1024;
    cfg.seed = 0;
    ControlEnv env(1, qcl::kMinFlipTime, RewardSchedule::deep(), 21);
    const auto r = qcl::ppo_train(env, cfg);
    CHECK(r.converged);
    CHECK(r.best_fidelity > 0.999);
    REQUIRE(r.best_pulse.amplitudes.size() == 1);
    CHECK(r.best_pulse.amplitudes[0] == 0.0);
}
