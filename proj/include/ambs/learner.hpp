#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "ambs/formula.hpp"
#include "ambs/markov.hpp"

namespace ambs {

/// One real environment step, with the cost and safety discount derived from the
/// labels of the state it entered.
struct Transition {
    State state = 0;
    Action action = 0;
    State next_state = 0;
    double reward = 0.0;
    LabelSet labels_next;
    double cost = 0.0;
    double safety_discount = 1.0;
    /// The episode ended in next_state because it is absorbing.
    bool terminal = false;
};

enum class UnvisitedFallback { Uniform, SelfLoop };

struct MleOptions {
    UnvisitedFallback fallback = UnvisitedFallback::Uniform;
    /// Pseudo-count added to every c(s',s,a); 0 is the plain ratio c/v.
    double smoothing = 0.0;
};

/// Visit counts c(s',s,a) and v(s,a). Counts only grow.
class CountsModel {
public:
    CountsModel(std::size_t num_states, std::size_t num_actions);

    std::size_t num_states() const { return _states; }
    std::size_t num_actions() const { return _actions; }

    void update(State s, Action a, State next);
    /// Same as `n` calls of update(s, a, next).
    void add(State s, Action a, State next, std::uint64_t n);
    /// Counts the transition; a terminal transition also marks next_state terminal.
    void update(const Transition& t);
    void mark_terminal(State s);

    std::uint64_t count(State s, Action a, State next) const { return _triple[(s * _actions + a) * _states + next]; }
    std::uint64_t visits(State s, Action a) const { return _pair[s * _actions + a]; }
    bool is_terminal(State s) const { return _terminal[s] != 0; }
    const std::vector<char>& terminal() const { return _terminal; }

    friend bool operator==(const CountsModel&, const CountsModel&) = default;

private:
    void check(State s, Action a, State next) const;

    std::size_t _states;
    std::size_t _actions;
    std::vector<std::uint64_t> _triple;
    std::vector<std::uint64_t> _pair;
    std::vector<char> _terminal;
};

/// p_hat(s'|s,a) = c(s',s,a) / v(s,a). Unvisited rows of an observed terminal state
/// are self-loops; other unvisited rows follow `options.fallback`.
TransitionTable mle_dynamics(const CountsModel& model, const MleOptions& options = {});

/// T_hat(s'|s) = sum_a pi(a|s) p_hat(s'|s,a), tagged LearnedFromCounts.
TransitionSystem learned_transition_system(const CountsModel& model, const TabularPolicy& policy,
                                           const MleOptions& options = {});

/// Running mean of observed rewards per (s,a); unvisited pairs read 0.
class RewardModel {
public:
    RewardModel(std::size_t num_states, std::size_t num_actions);
    void update(State s, Action a, double reward);
    double mean(State s, Action a) const;
    Matrix table() const;

private:
    std::size_t _actions;
    std::vector<double> _sum;
    std::vector<std::uint64_t> _n;
};

/// Snapshot consumed by imagination training and the shield.
struct LearnedModel {
    TransitionTable dynamics;
    Matrix reward;
    std::vector<char> terminal;
};

LearnedModel snapshot(const CountsModel& counts, const RewardModel& rewards, const MleOptions& options = {});

/// `count S A S' N` per nonzero cell, then `terminal S` per terminal state.
void write_counts(std::ostream& out, const CountsModel& model);
/// Inverse of write_counts; throws FormatError (see mdp_io.hpp) with the line number.
CountsModel read_counts(std::istream& in, const std::string& source, std::size_t num_states, std::size_t num_actions);

}  // namespace ambs
