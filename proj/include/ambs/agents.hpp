#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ambs/formula.hpp"
#include "ambs/learner.hpp"
#include "ambs/markov.hpp"

namespace ambs {

/// 0 when the labels satisfy the formula, C otherwise.
double cost_target(const LabelSet& labels, const Formula& formula, double cost_value);

/// Per-state cost c(s) in {0, C} and safety discount in {0, gamma}; zero discount exactly at cost C.
class CostModel {
public:
    /// `violating[s]` nonzero marks s as violating.
    CostModel(std::vector<char> violating, double cost_value, double gamma);
    static CostModel from_labels(const Formula& formula, const std::vector<LabelSet>& labels, double cost_value,
                                 double gamma);

    std::size_t num_states() const { return _cost.size(); }
    double cost_value() const { return _cost_value; }
    double gamma() const { return _gamma; }
    double cost(State s) const { return _cost[s]; }
    double safety_discount(State s) const { return _cost[s] > 0.0 ? 0.0 : _gamma; }
    const std::vector<double>& costs() const { return _cost; }
    void set_violating(State s, bool violating);

private:
    double _cost_value;
    double _gamma;
    std::vector<double> _cost;
};

struct ActorCriticConfig {
    double actor_lr = 0.05;
    double critic_lr = 0.1;
    double lambda = 0.95;
    double entropy_scale = 3e-4;
    double gamma = 0.99;

    std::vector<std::string> violations() const;
};

/// Softmax actor over per-(s,a) preferences plus a per-state value table.
class ActorCriticAgent {
public:
    ActorCriticAgent(std::size_t num_states, std::size_t num_actions, ActorCriticConfig config = {});

    std::size_t num_states() const { return _prefs.rows(); }
    std::size_t num_actions() const { return _prefs.cols(); }
    const ActorCriticConfig& config() const { return _config; }
    /// Replaces the learning parameters (for annealing schedules).
    void set_config(const ActorCriticConfig& config);

    TabularPolicy policy() const;
    /// softmax(prefs(s, .)) into `out` (size |A|).
    void action_probs(State s, std::span<double> out) const;
    double preference(State s, Action a) const { return _prefs(s, a); }
    double value(State s) const { return _values[s]; }
    const std::vector<double>& values() const { return _values; }

    void set_preference(State s, Action a, double x) { _prefs(s, a) = x; }
    void set_value(State s, double v) { _values[s] = v; }

    /// theta(s,b) += actor_lr (advantage (1[b=a] - pi_b) + entropy_scale dH/dtheta_b).
    void actor_step(State s, Action a, double advantage);
    void critic_step(State s, double target);

private:
    ActorCriticConfig _config;
    Matrix _prefs;
    std::vector<double> _values;
};

/// Rollout schedule for one training phase: one imagined trajectory per start state.
struct ImaginationBatch {
    std::span<const State> starts;
    std::size_t horizon = 15;
    std::uint64_t seed = 0;
    std::uint64_t iteration = 0;
};

/// TD(lambda) actor-critic on trajectories imagined in `model` under the agent's own
/// policy. Per-step reward is the learned R(s,a); observed terminal states end the return.
void train_task_policy(ActorCriticAgent& agent, const LearnedModel& model, const ImaginationBatch& batch);

/// Same machinery on per-state cost with the safety discount, minimizing.
void train_safe_policy(ActorCriticAgent& agent, const LearnedModel& model, const CostModel& costs,
                       const ImaginationBatch& batch);

/// Twin cost critics with slow-moving targets. Values satisfy
/// V(s) = c(s) + gamma_safe(s) E[V(s')] and are clamped to [0, C].
class SafetyCriticPair {
public:
    SafetyCriticPair(std::size_t num_states, double cost_value, double update_fraction = 0.02);

    std::size_t num_states() const { return _v1.size(); }
    double cost_value() const { return _cost_value; }
    double update_fraction() const { return _tau; }
    const std::vector<double>& v1() const { return _v1; }
    const std::vector<double>& v2() const { return _v2; }
    const std::vector<double>& target1() const { return _t1; }
    const std::vector<double>& target2() const { return _t2; }
    std::vector<double>& critic(int which) { return which == 0 ? _v1 : _v2; }
    double min_target(State s) const { return std::min(_t1[s], _t2[s]); }

    /// Moves critic `which` at s toward `target` at rate lr, clamped to [0, C].
    void regress(int which, State s, double target, double lr);
    /// target_i <- (1 - tau) target_i + tau v_i.
    void blend_targets();
    /// Throws std::logic_error if any critic or target value leaves [0, C].
    void check_bounds() const;

private:
    double _cost_value;
    double _tau;
    std::vector<double> _v1, _v2, _t1, _t2;
};

/// Each critic regresses on its own imagined task-policy trajectories toward
/// c(s_t) + gamma_safe(s_t) min(target1, target2)(s_{t+1}); targets blend after every
/// trajectory. `on_update` runs after each single critic update.
void train_safety_critics(SafetyCriticPair& pair, const LearnedModel& model, const CostModel& costs,
                          const TabularPolicy& task_policy, const ImaginationBatch& batch, double critic_lr,
                          const std::function<void(const SafetyCriticPair&)>& on_update = {});

/// `pref S A X` for every cell, then `value S V` per state.
void write_agent(std::ostream& out, const ActorCriticAgent& agent);
/// Reads the write_agent format into an agent of matching size; throws FormatError.
void read_agent(std::istream& in, const std::string& source, ActorCriticAgent& agent);
/// `value S V` per state.
void write_values(std::ostream& out, std::span<const double> values);

}  // namespace ambs
