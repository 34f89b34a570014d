#include "qcl/rl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qcl/errors.hpp"
#include "qcl/neural.hpp"

namespace qcl {

ControlEnv::ControlEnv(int n_params, double T, RewardSchedule schedule,
                       int n_actions)
    : n_(n_params), T_(T), schedule_(schedule) {
    if (n_params < 1)
        throw invalid_argument("ControlEnv: n_params must be >= 1");
    if (!(T > 0.0) || !std::isfinite(T))
        throw invalid_argument("ControlEnv: T must be positive");
    if (n_actions < 2)
        throw invalid_argument("ControlEnv: need at least 2 actions");
    actions_ = linspace(-1.0, 1.0, n_actions);
    action_props_.reserve(actions_.size());
    for (double a : actions_)
        action_props_.push_back(segment_propagator(a, dt()));
    state_ = ground_state();
}

Observation ControlEnv::reset() {
    state_ = ground_state();
    k_ = 0;
    done_ = false;
    taken_.clear();
    return observe();
}

Observation ControlEnv::observe() const {
    return {state_.c0.real(), state_.c0.imag(), state_.c1.real(),
            state_.c1.imag(),
            static_cast<double>(k_) / static_cast<double>(n_)};
}

ControlEnv::Step ControlEnv::step(int action_index) {
    if (done_)
        throw contract_error("ControlEnv: step() after the episode is done");
    if (action_index < 0 || action_index >= n_actions())
        throw invalid_argument("ControlEnv: action index out of range");

    state_ = action_props_[static_cast<std::size_t>(action_index)].apply(state_);
    taken_.push_back(action_index);
    ++k_;

    Step out;
    out.infidelity = 1.0 - fidelity(state_, excited_state());
    out.reward = schedule_.reward_for(out.infidelity);
    out.done = (k_ == n_) || (out.infidelity <= kSolvedInfidelity);
    done_ = out.done;
    out.obs = observe();
    return out;
}

ControlPulse ControlEnv::pulse_so_far() const {
    ControlPulse p;
    p.amplitudes.reserve(taken_.size());
    for (int a : taken_)
        p.amplitudes.push_back(actions_[static_cast<std::size_t>(a)]);
    p.total_time = dt() * static_cast<double>(taken_.size());
    return p;
}

std::array<int, 3> discretize_state(const QubitState& s, int step_index,
                                    int theta_bins, int phi_bins) {
    const double z = std::norm(s.c0) - std::norm(s.c1);
    const cplx cross = std::conj(s.c0) * s.c1;
    const double x = 2.0 * cross.real();
    const double y = 2.0 * cross.imag();
    const double theta = std::acos(std::clamp(z, -1.0, 1.0));
    double phi = std::atan2(y, x);
    if (phi < 0.0)
        phi += 2.0 * std::numbers::pi;

    const int tb = std::min(
        static_cast<int>(theta / std::numbers::pi *
                         static_cast<double>(theta_bins)),
        theta_bins - 1);
    const int pb = std::min(
        static_cast<int>(phi / (2.0 * std::numbers::pi) *
                         static_cast<double>(phi_bins)),
        phi_bins - 1);
    return {tb, pb, step_index};
}

std::vector<double>& QTable::row(const std::array<int, 3>& key,
                                 int n_actions) {
    auto [it, inserted] = values.try_emplace(key);
    if (inserted)
        it->second.assign(static_cast<std::size_t>(n_actions), 0.0);
    return it->second;
}

double QTable::max_value(const std::array<int, 3>& key, int n_actions) {
    const std::vector<double>& q = row(key, n_actions);
    return *std::max_element(q.begin(), q.end());
}

std::vector<int> greedy_actions(ControlEnv& env, QTable& table) {
    env.reset();
    while (!env.done()) {
        const std::vector<double>& q = table.row(
            discretize_state(env.state(), env.step_index(), 20, 20),
            env.n_actions());
        const auto best = std::max_element(q.begin(), q.end());
        env.step(static_cast<int>(best - q.begin()));
    }
    return env.actions_taken();
}

namespace {

OptimResult converged_result(const ControlEnv& env, double infidelity,
                             int iterations) {
    OptimResult r;
    r.best_pulse = env.pulse_so_far();
    r.best_fidelity = 1.0 - infidelity;
    r.iterations_used = iterations;
    r.converged = true;
    return r;
}

int argmax_first(const std::vector<double>& v, std::size_t limit) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < limit; ++i)
        if (v[i] > v[best])
            best = i;
    return static_cast<int>(best);
}

} // namespace

OptimResult ql_train(ControlEnv& env, const QlConfig& cfg) {
    if (!(cfg.learning_rate > 0.0))
        throw invalid_argument("QlConfig: learning_rate must be positive");
    if (!(cfg.discount >= 0.0 && cfg.discount <= 1.0))
        throw invalid_argument("QlConfig: discount must lie in [0,1]");
    if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0))
        throw invalid_argument("QlConfig: epsilon must lie in [0,1]");
    if (cfg.max_episodes < 1)
        throw invalid_argument("QlConfig: max_episodes must be >= 1");
    if (cfg.theta_bins < 1 || cfg.phi_bins < 1)
        throw invalid_argument("QlConfig: bin counts must be >= 1");

    Rng rng(cfg.seed);
    QTable table;
    const int n_actions = env.n_actions();
    const std::size_t a_n = static_cast<std::size_t>(n_actions);

    double best_f = -1.0;
    std::vector<int> best_actions;
    std::vector<int> tie_candidates;

    for (int ep = 0; ep < cfg.max_episodes; ++ep) {
        env.reset();
        double last_infid = 1.0;
        while (!env.done()) {
            const auto key = discretize_state(env.state(), env.step_index(),
                                              cfg.theta_bins, cfg.phi_bins);
            std::vector<double>& q = table.row(key, n_actions);

            int action;
            if (rng.uniform01() < cfg.epsilon) {
                action = static_cast<int>(rng.uniform_int(a_n));
            } else {
                const double top = *std::max_element(q.begin(), q.end());
                tie_candidates.clear();
                for (int i = 0; i < n_actions; ++i)
                    if (q[static_cast<std::size_t>(i)] == top)
                        tie_candidates.push_back(i);
                action = tie_candidates[rng.uniform_int(tie_candidates.size())];
            }

            const ControlEnv::Step st = env.step(action);
            last_infid = st.infidelity;

            const double next_max =
                st.done ? 0.0
                        : table.max_value(
                              discretize_state(env.state(), env.step_index(),
                                               cfg.theta_bins, cfg.phi_bins),
                              n_actions);
            double& qa = q[static_cast<std::size_t>(action)];
            qa += cfg.learning_rate *
                  (st.reward + cfg.discount * next_max - qa);

            if (st.infidelity <= kSolvedInfidelity)
                return converged_result(env, st.infidelity, ep + 1);
        }
        const double f = 1.0 - last_infid;
        if (f > best_f) {
            best_f = f;
            best_actions = env.actions_taken();
        }
    }

    OptimResult r;
    r.best_pulse.amplitudes.reserve(best_actions.size());
    for (int a : best_actions)
        r.best_pulse.amplitudes.push_back(
            env.action_values()[static_cast<std::size_t>(a)]);
    r.best_pulse.total_time = env.total_time();
    r.best_fidelity = best_f;
    r.iterations_used = cfg.max_episodes;
    r.converged = (1.0 - best_f) <= kSolvedInfidelity;
    return r;
}

namespace {

double annealed_epsilon(const DqnConfig& cfg, long long step) {
    const long long anneal_steps = static_cast<long long>(
        cfg.exploration_fraction * static_cast<double>(cfg.budget_steps));
    if (anneal_steps <= 0 || step >= anneal_steps)
        return cfg.epsilon_end;
    const double progress =
        static_cast<double>(step) / static_cast<double>(anneal_steps);
    return cfg.epsilon_start +
           (cfg.epsilon_end - cfg.epsilon_start) * progress;
}

std::vector<double> obs_vec(const Observation& o) {
    return std::vector<double>(o.begin(), o.end());
}

struct EpisodeBest {
    double fidelity = -1.0;
    std::vector<int> actions;

    void offer(double f, const std::vector<int>& acts) {
        if (f > fidelity) {
            fidelity = f;
            actions = acts;
        }
    }

    OptimResult to_result(const ControlEnv& env, long long steps) const {
        OptimResult r;
        r.best_pulse.amplitudes.reserve(actions.size());
        for (int a : actions)
            r.best_pulse.amplitudes.push_back(
                env.action_values()[static_cast<std::size_t>(a)]);
        r.best_pulse.total_time = env.total_time();
        r.best_fidelity = fidelity;
        r.iterations_used = static_cast<int>(steps);
        r.converged = false;
        return r;
    }
};

} // namespace

OptimResult dqn_train(ControlEnv& env, const DqnConfig& cfg) {
    if (!(cfg.learning_rate > 0.0))
        throw invalid_argument("DqnConfig: learning_rate must be positive");
    if (!(cfg.discount >= 0.0 && cfg.discount <= 1.0))
        throw invalid_argument("DqnConfig: discount must lie in [0,1]");
    if (cfg.batch_size < 1 || cfg.buffer_capacity < cfg.batch_size)
        throw invalid_argument("DqnConfig: buffer must hold at least a batch");
    if (cfg.target_update_every < 1 || cfg.train_every < 1)
        throw invalid_argument("DqnConfig: update cadences must be >= 1");
    if (cfg.budget_steps < 0)
        throw invalid_argument("DqnConfig: budget_steps must be >= 0");

    Rng rng(cfg.seed);
    const int n_actions = env.n_actions();
    Mlp online = make_control_net(5, n_actions, rng);
    Mlp target = online;
    AdamState adam = make_adam(online);
    ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
    MlpGrads grads = zero_grads(online);
    ForwardCache cache;

    EpisodeBest best;
    long long steps = 0;
    Observation obs = env.reset();

    // One extra pass after the budget guarantees a result even when the
    // budget is too small to finish a single episode.
    bool bonus_pass = false;
    while (true) {
        if (steps >= cfg.budget_steps && !bonus_pass) {
            if (best.fidelity >= 0.0)
                break;
            bonus_pass = true;
            if (env.done() || env.step_index() > 0)
                obs = env.reset();
        }

        const double eps = annealed_epsilon(cfg, steps);
        int action;
        if (rng.uniform01() < eps) {
            action = static_cast<int>(
                rng.uniform_int(static_cast<std::size_t>(n_actions)));
        } else {
            action = argmax_first(forward(online, obs_vec(obs)),
                                  static_cast<std::size_t>(n_actions));
        }

        const ControlEnv::Step st = env.step(action);
        ++steps;
        buffer.push({obs, action, st.reward, st.obs, st.done});
        obs = st.obs;

        if (st.done) {
            if (st.infidelity <= kSolvedInfidelity)
                return converged_result(env, st.infidelity,
                                        static_cast<int>(steps));
            best.offer(1.0 - st.infidelity, env.actions_taken());
            if (bonus_pass)
                break;
            obs = env.reset();
        }

        if (bonus_pass)
            continue;

        if (buffer.size() >= static_cast<std::size_t>(cfg.batch_size) &&
            steps % cfg.train_every == 0) {
            const auto batch =
                buffer.sample(static_cast<std::size_t>(cfg.batch_size), rng);
            grads = zero_grads(online);
            std::vector<double> upstream(
                static_cast<std::size_t>(n_actions), 0.0);
            for (const Transition& t : batch) {
                double target_q = t.reward;
                if (!t.done) {
                    const auto next_q = forward(target, obs_vec(t.next_state));
                    target_q +=
                        cfg.discount *
                        *std::max_element(next_q.begin(), next_q.end());
                }
                const auto q = forward(online, obs_vec(t.state), cache);
                std::fill(upstream.begin(), upstream.end(), 0.0);
                upstream[static_cast<std::size_t>(t.action)] =
                    2.0 *
                    (q[static_cast<std::size_t>(t.action)] - target_q) /
                    static_cast<double>(batch.size());
                backward(online, cache, upstream, grads);
            }
            adam_step(online, grads, adam, cfg.learning_rate);
        }

        if (steps % cfg.target_update_every == 0)
            target = online;
    }

    return best.to_result(env, steps);
}

namespace {

struct PolicyEval {
    std::vector<double> probs;
    double value = 0.0;
    double log_z = 0.0;
    double max_logit = 0.0;

    double logp(int action) const {
        return std::log(
            std::max(probs[static_cast<std::size_t>(action)], 1e-300));
    }
};

PolicyEval eval_policy(const std::vector<double>& out, int n_actions) {
    PolicyEval pe;
    const std::size_t a_n = static_cast<std::size_t>(n_actions);
    pe.value = out[a_n];
    pe.max_logit = *std::max_element(out.begin(), out.begin() + n_actions);
    double z = 0.0;
    pe.probs.resize(a_n);
    for (std::size_t i = 0; i < a_n; ++i) {
        pe.probs[i] = std::exp(out[i] - pe.max_logit);
        z += pe.probs[i];
    }
    for (std::size_t i = 0; i < a_n; ++i)
        pe.probs[i] /= z;
    pe.log_z = std::log(z);
    return pe;
}

int sample_action(const PolicyEval& pe, Rng& rng) {
    const double u = rng.uniform01();
    double cum = 0.0;
    for (std::size_t i = 0; i < pe.probs.size(); ++i) {
        cum += pe.probs[i];
        if (u < cum)
            return static_cast<int>(i);
    }
    return static_cast<int>(pe.probs.size()) - 1;
}

struct RolloutStep {
    Observation obs{};
    int action = 0;
    double logp_old = 0.0;
    double reward = 0.0;
    double value = 0.0;
    double next_value = 0.0;
};

} // namespace

OptimResult ppo_train(ControlEnv& env, const PpoConfig& cfg) {
    if (!(cfg.learning_rate > 0.0))
        throw invalid_argument("PpoConfig: learning_rate must be positive");
    if (!(cfg.discount >= 0.0 && cfg.discount <= 1.0))
        throw invalid_argument("PpoConfig: discount must lie in [0,1]");
    if (!(cfg.clip > 0.0 && cfg.clip < 1.0))
        throw invalid_argument("PpoConfig: clip must lie in (0,1)");
    if (cfg.rollout_steps < 1 || cfg.epochs < 1 || cfg.minibatch_size < 1)
        throw invalid_argument("PpoConfig: rollout, epochs and minibatch "
                               "must be >= 1");
    if (cfg.budget_steps < 0)
        throw invalid_argument("PpoConfig: budget_steps must be >= 0");

    Rng rng(cfg.seed);
    const int n_actions = env.n_actions();
    const std::size_t a_n = static_cast<std::size_t>(n_actions);
    Mlp net = make_control_net(5, n_actions + 1, rng);
    AdamState adam = make_adam(net);
    MlpGrads grads = zero_grads(net);
    ForwardCache cache;

    EpisodeBest best;
    long long steps = 0;
    Observation obs = env.reset();
    std::vector<RolloutStep> rollout;
    rollout.reserve(static_cast<std::size_t>(cfg.rollout_steps));

    const bool budget_exhausted_at_start = cfg.budget_steps == 0;
    bool bonus_pass = budget_exhausted_at_start;

    while (steps < cfg.budget_steps || (bonus_pass && best.fidelity < 0.0)) {
        rollout.clear();
        const long long rollout_cap =
            bonus_pass ? static_cast<long long>(env.n_params())
                       : std::min<long long>(cfg.rollout_steps,
                                             cfg.budget_steps - steps);
        while (static_cast<long long>(rollout.size()) < rollout_cap) {
            const PolicyEval pe =
                eval_policy(forward(net, obs_vec(obs)), n_actions);
            const int action = sample_action(pe, rng);
            const ControlEnv::Step st = env.step(action);
            ++steps;

            RolloutStep rs;
            rs.obs = obs;
            rs.action = action;
            rs.logp_old = pe.logp(action);
            rs.reward = st.reward;
            rs.value = pe.value;
            if (st.done) {
                rs.next_value = 0.0;
            } else {
                const auto next_out = forward(net, obs_vec(st.obs));
                rs.next_value = next_out[a_n];
            }
            rollout.push_back(rs);
            obs = st.obs;

            if (st.done) {
                if (st.infidelity <= kSolvedInfidelity)
                    return converged_result(env, st.infidelity,
                                            static_cast<int>(steps));
                best.offer(1.0 - st.infidelity, env.actions_taken());
                if (bonus_pass)
                    break;
                obs = env.reset();
            }
        }
        if (bonus_pass)
            break;
        if (rollout.empty())
            continue;

        // One-step advantages; the tiny discount makes them nearly the
        // immediate TD error by design.
        const std::size_t n = rollout.size();
        std::vector<double> adv(n), ret(n);
        for (std::size_t i = 0; i < n; ++i) {
            ret[i] = rollout[i].reward + cfg.discount * rollout[i].next_value;
            adv[i] = ret[i] - rollout[i].value;
        }
        double mean = 0.0;
        for (double a : adv)
            mean += a;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double a : adv)
            var += (a - mean) * (a - mean);
        const double stdev = std::sqrt(var / static_cast<double>(n)) + 1e-8;
        for (double& a : adv)
            a = (a - mean) / stdev;

        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i)
            perm[i] = i;

        std::vector<double> upstream(a_n + 1, 0.0);
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            for (std::size_t i = n; i > 1; --i)
                std::swap(perm[i - 1], perm[rng.uniform_int(i)]);

            for (std::size_t start = 0; start < n;
                 start += static_cast<std::size_t>(cfg.minibatch_size)) {
                const std::size_t stop =
                    std::min(n, start +
                                    static_cast<std::size_t>(
                                        cfg.minibatch_size));
                const double mb = static_cast<double>(stop - start);
                grads = zero_grads(net);

                for (std::size_t s = start; s < stop; ++s) {
                    const RolloutStep& rs = rollout[perm[s]];
                    const auto out = forward(net, obs_vec(rs.obs), cache);
                    const PolicyEval pe = eval_policy(out, n_actions);
                    const double logp = pe.logp(rs.action);
                    const double ratio = std::exp(logp - rs.logp_old);
                    const double a = adv[perm[s]];
                    const double unclipped = ratio * a;
                    const double clipped =
                        std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * a;

                    // min(unclipped, clipped): gradient flows through the
                    // ratio only when the unclipped branch is active.
                    const bool pass_gradient = unclipped <= clipped;

                    double entropy = 0.0;
                    for (std::size_t j = 0; j < a_n; ++j)
                        if (pe.probs[j] > 0.0)
                            entropy -= pe.probs[j] * std::log(pe.probs[j]);

                    for (std::size_t j = 0; j < a_n; ++j) {
                        double g = 0.0;
                        const double pj = pe.probs[j];
                        if (pass_gradient) {
                            const double indicator =
                                (j == static_cast<std::size_t>(rs.action))
                                    ? 1.0
                                    : 0.0;
                            g -= a * ratio * (indicator - pj);
                        }
                        if (pj > 0.0)
                            g += cfg.entropy_coef * pj *
                                 (std::log(pj) + entropy);
                        upstream[j] = g / mb;
                    }
                    upstream[a_n] = cfg.value_coef *
                                    (pe.value - ret[perm[s]]) / mb;
                    backward(net, cache, upstream, grads);
                }
                adam_step(net, grads, adam, cfg.learning_rate);
            }
        }
    }

    if (best.fidelity < 0.0 && !budget_exhausted_at_start) {
        // Budget spent with no completed episode; play one out as-is.
        bonus_pass = true;
        obs = env.done() || env.step_index() > 0 ? env.reset() : obs;
        while (!env.done()) {
            const PolicyEval pe =
                eval_policy(forward(net, obs_vec(obs)), n_actions);
            const int action = sample_action(pe, rng);
            const ControlEnv::Step st = env.step(action);
            ++steps;
            obs = st.obs;
            if (st.done) {
                if (st.infidelity <= kSolvedInfidelity)
                    return converged_result(env, st.infidelity,
                                            static_cast<int>(steps));
                best.offer(1.0 - st.infidelity, env.actions_taken());
            }
        }
    }

    return best.to_result(env, steps);
}

} // namespace qcl
