#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "qcl/optim.hpp"
#include "qcl/qdyn.hpp"
#include "qcl/rng.hpp"

namespace qcl {

// A run is considered solved as soon as any step evaluates at or below
// this infidelity; every agent exits immediately when the environment
// reports it.
inline constexpr double kSolvedInfidelity = 1e-3;

// Piecewise-constant reward over infidelity bands
// (0.5, 1], [0.1, 0.5], (0.001, 0.1), [0, 0.001], coarse to solved.
struct RewardSchedule {
    std::array<double, 4> rewards{-1.0, 10.0, 100.0, 500.0};

    double reward_for(double infidelity) const {
        if (infidelity > 0.5)
            return rewards[0];
        if (infidelity >= 0.1)
            return rewards[1];
        if (infidelity > 0.001)
            return rewards[2];
        return rewards[3];
    }

    static RewardSchedule tabular() { return {{-1.0, 10.0, 100.0, 500.0}}; }
    static RewardSchedule deep() { return {{1.0, 10.0, 500.0, 5000.0}}; }
};

// Observation handed to the network agents:
// [Re c0, Im c0, Re c1, Im c1, k/N].
using Observation = std::array<double, 5>;

// Episodic pulse-building environment: each of the N steps appends one
// amplitude from the action set and advances the state by one segment
// propagator. Episodes end after N steps, or earlier once the state is
// within kSolvedInfidelity of the target.
class ControlEnv {
public:
    ControlEnv(int n_params, double T,
               RewardSchedule schedule = RewardSchedule::tabular(),
               int n_actions = 100);

    int n_params() const { return n_; }
    double total_time() const { return T_; }
    double dt() const { return T_ / static_cast<double>(n_); }
    int n_actions() const { return static_cast<int>(actions_.size()); }
    const std::vector<double>& action_values() const { return actions_; }
    const RewardSchedule& schedule() const { return schedule_; }

    Observation reset();

    struct Step {
        Observation obs{};
        double reward = 0.0;
        bool done = false;
        double infidelity = 1.0;
    };
    Step step(int action_index);

    const QubitState& state() const { return state_; }
    int step_index() const { return k_; }
    bool done() const { return done_; }
    const std::vector<int>& actions_taken() const { return taken_; }

    // Pulse built so far; truncated episodes keep the per-segment
    // duration, so total_time shrinks with the segment count.
    ControlPulse pulse_so_far() const;

    Observation observe() const;

private:
    int n_;
    double T_;
    RewardSchedule schedule_;
    std::vector<double> actions_;
    std::vector<Unitary2> action_props_;
    QubitState state_;
    int k_ = 0;
    bool done_ = true; // must reset() before stepping
    std::vector<int> taken_;
};

// Tabular state key: (theta bin, phi bin, step index) over Bloch angles.
std::array<int, 3> discretize_state(const QubitState& s, int step_index,
                                    int theta_bins, int phi_bins);

struct QTable {
    std::map<std::array<int, 3>, std::vector<double>> values;

    // Row for a state, created zero-filled on first access.
    std::vector<double>& row(const std::array<int, 3>& key, int n_actions);
    double max_value(const std::array<int, 3>& key, int n_actions);
};

// One greedy episode under a fixed table, ties broken toward the lowest
// action index; no exploration, no learning. Returns the actions taken.
std::vector<int> greedy_actions(ControlEnv& env, QTable& table);

struct QlConfig {
    double learning_rate = 0.001;
    double discount = 0.9;
    double epsilon = 0.1;
    int max_episodes = 500;
    int theta_bins = 20;
    int phi_bins = 20;
    std::uint64_t seed = 0;
};

struct DqnConfig {
    double learning_rate = 1e-4;
    double discount = 1e-6;
    double exploration_fraction = 0.25;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    int buffer_capacity = 10000;
    int batch_size = 64;
    int target_update_every = 250;
    int train_every = 4;
    long long budget_steps = 20000;
    std::uint64_t seed = 0;
};

struct PpoConfig {
    double learning_rate = 1e-4;
    double discount = 1e-6;
    double clip = 0.2;
    double entropy_coef = 0.25;
    double value_coef = 0.5;
    int rollout_steps = 512;
    int epochs = 4;
    int minibatch_size = 64;
    long long budget_steps = 20000;
    std::uint64_t seed = 0;
};

// Epsilon-greedy tabular Q-learning. If any step solves the task the
// truncated pulse is returned immediately with converged=true; otherwise
// the best pulse among all completed episodes is returned.
// iterations_used counts episodes.
OptimResult ql_train(ControlEnv& env, const QlConfig& cfg);

// Deep Q-network with replay buffer and a periodically copied target
// net; epsilon anneals linearly from epsilon_start to epsilon_end over
// the first exploration_fraction of the step budget. Tracks the best
// completed episode across the whole run. iterations_used counts
// environment steps.
OptimResult dqn_train(ControlEnv& env, const DqnConfig& cfg);

// Clipped-surrogate policy gradient with an entropy bonus and a value
// head sharing the trunk (output layout: n_actions logits then the state
// value). Best completed episode across the run; iterations_used counts
// environment steps.
OptimResult ppo_train(ControlEnv& env, const PpoConfig& cfg);

} // namespace qcl
