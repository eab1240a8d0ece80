#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ambs/kernels.hpp"
#include "ambs/markov.hpp"

namespace ambs {

/// Shield parameters: Delta 0.1, epsilon 0.09, m 512, delta 0.01, T 30, C 10, H 15 by default.
struct ShieldConfig {
    double delta = 0.1;
    double epsilon = 0.09;
    std::size_t num_samples = 512;
    std::size_t imagination_horizon = 15;
    std::size_t lookahead_horizon = 30;
    double cost_value = 10.0;
    bool use_critic_bootstrap = true;
    double gamma = 0.99;
    /// PAC failure probability; informational, the shield itself only uses m.
    double failure_prob = 0.01;

    /// Every violated constraint, empty when valid. 0 < epsilon < Delta <= 1 keeps the
    /// acceptance interval [1 - Delta + epsilon, 1] nonempty.
    std::vector<std::string> violations() const;
    /// Throws std::invalid_argument with all violations joined.
    void validate() const;

    /// gamma^{T-1} C with critic bootstrapping, gamma^{H-1} C without.
    double cost_threshold() const;
    /// estimate in [1 - Delta + epsilon, 1].
    bool accepts(double estimate) const;
};

struct ShieldDecision {
    Action proposed = 0;
    Action action_taken = 0;
    bool overridden = false;
    /// satisfying_count / num_samples.
    double estimate = 0.0;
    std::size_t satisfying_count = 0;
    std::size_t num_samples = 0;
};

struct SafetyEstimate {
    double estimate = 0.0;
    std::size_t satisfying_count = 0;
    std::size_t num_samples = 0;
};

/// sum_{t=1..H} gamma_t^{t-1} c_t. gamma_t is the safety discount reaching step t
/// (0 once an earlier step violated), so costs after the first violation vanish.
double trace_cost(std::span<const double> costs, std::span<const double> gammas);

/// sum_{t=1..H-1} gamma_t^{t-1} c_t + min(v1, v2), where `costs` covers t = 1..H-1 and
/// `gammas` covers t = 1..H. A zero gamma_H (violation before H) drops the critic term.
double trace_cost_with_critic(std::span<const double> costs, std::span<const double> gammas, double v1, double v2);

/// cost < config.cost_threshold(); boundary traces are unsatisfying.
bool trace_satisfies(double cost, const ShieldConfig& config);

/// Immutable sampling snapshot of a learned model: cumulative rows for the
/// action-conditioned first step and for the policy-induced chain, per-state costs,
/// and optional twin critic tables.
class ShieldModel {
public:
    ShieldModel(const TransitionTable& dynamics, const TabularPolicy& task_policy, std::vector<double> state_cost,
                std::vector<double> critic1 = {}, std::vector<double> critic2 = {});
    /// Chain-only snapshot; estimates cannot force a first action.
    ShieldModel(const TransitionSystem& ts, std::vector<double> state_cost, std::vector<double> critic1 = {},
                std::vector<double> critic2 = {});

    std::size_t num_states() const { return _states; }
    std::size_t num_actions() const { return _actions; }
    bool has_critics() const { return !_critic1.empty(); }

    /// Kernel input for traces from `start`, optionally forcing `first_action`.
    kernels::TraceBatch batch(State start, std::optional<Action> first_action, std::uint64_t seed,
                              std::uint64_t step) const;

private:
    void init_costs(std::vector<double> state_cost, std::vector<double> critic1, std::vector<double> critic2);

    std::size_t _states = 0;
    std::size_t _actions = 0;
    std::vector<double> _action_cdf;
    std::vector<double> _chain_cdf;
    std::vector<double> _cost;
    std::vector<double> _critic1;
    std::vector<double> _critic2;
};

enum class Execution { Serial, Parallel };

/// Samples num_samples traces of length H from `start` (after `first_action`, when given)
/// and returns the fraction whose cost passes trace_satisfies. A start state with positive
/// cost fails every trace. Deterministic in (seed, step).
SafetyEstimate estimate_bounded_safety(const ShieldModel& model, State start, std::optional<Action> first_action,
                                       const ShieldConfig& config, std::uint64_t seed, std::uint64_t step,
                                       Execution execution = Execution::Parallel);

/// Keeps `proposed` when the estimate after playing it lies in [1 - Delta + epsilon, 1],
/// otherwise draws from `safe_policy` with stream (seed, SafeAction, step).
ShieldDecision shield_action(Action proposed, State state, const ShieldModel& model, const TabularPolicy& safe_policy,
                             const ShieldConfig& config, std::uint64_t seed, std::uint64_t step);

/// CSV decision log: step,state,proposed,taken,overridden,estimate,satisfying_count
void write_decision_log_header(std::ostream& out);
void write_decision_log_row(std::ostream& out, std::uint64_t step, State state, const ShieldDecision& decision);

}  // namespace ambs
