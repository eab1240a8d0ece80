#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ambs/formula.hpp"
#include "ambs/random.hpp"

namespace ambs {

using State = std::size_t;
using Action = std::size_t;

/// Tolerance on every stochasticity check.
inline constexpr double kProbabilityTolerance = 1e-9;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : _rows{rows}, _cols{cols}, _data(rows * cols, fill) {}

    std::size_t rows() const { return _rows; }
    std::size_t cols() const { return _cols; }

    double& operator()(std::size_t r, std::size_t c) { return _data[r * _cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return _data[r * _cols + c]; }

    std::span<double> row(std::size_t r) { return {_data.data() + r * _cols, _cols}; }
    std::span<const double> row(std::size_t r) const { return {_data.data() + r * _cols, _cols}; }

    std::span<const double> data() const { return _data; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t _rows = 0;
    std::size_t _cols = 0;
    std::vector<double> _data;
};

/// p(s'|s,a) stored as |S|·|A| rows of length |S|.
class TransitionTable {
public:
    TransitionTable() = default;
    TransitionTable(std::size_t num_states, std::size_t num_actions)
        : _states{num_states}, _actions{num_actions}, _table(num_states * num_actions, num_states) {}

    std::size_t num_states() const { return _states; }
    std::size_t num_actions() const { return _actions; }

    double& operator()(State s, Action a, State next) { return _table(s * _actions + a, next); }
    double operator()(State s, Action a, State next) const { return _table(s * _actions + a, next); }

    std::span<double> row(State s, Action a) { return _table.row(s * _actions + a); }
    std::span<const double> row(State s, Action a) const { return _table.row(s * _actions + a); }

    /// Throws std::invalid_argument naming the first (s,a) row that is not a distribution.
    void validate(double tolerance = kProbabilityTolerance) const;

    friend bool operator==(const TransitionTable&, const TransitionTable&) = default;

private:
    std::size_t _states = 0;
    std::size_t _actions = 0;
    Matrix _table;
};

/// Finite labeled MDP (S, A, p, init, R, gamma, AP, L). Validated on construction, immutable after.
class LabeledMdp {
public:
    LabeledMdp(TransitionTable transition, std::vector<double> initial, Matrix reward, double gamma,
               std::vector<std::string> atoms, std::vector<LabelSet> labels);

    std::size_t num_states() const { return _transition.num_states(); }
    std::size_t num_actions() const { return _transition.num_actions(); }
    const TransitionTable& transition() const { return _transition; }
    std::span<const double> initial() const { return _initial; }
    const Matrix& reward() const { return _reward; }
    double gamma() const { return _gamma; }
    const std::vector<std::string>& atoms() const { return _atoms; }
    const std::vector<LabelSet>& labels() const { return _labels; }
    const LabelSet& labels(State s) const { return _labels.at(s); }

    /// p(s|s,a) = 1 for every action.
    bool is_absorbing(State s) const;

private:
    TransitionTable _transition;
    std::vector<double> _initial;
    Matrix _reward;
    double _gamma;
    std::vector<std::string> _atoms;
    std::vector<LabelSet> _labels;
};

/// pi(a|s) as an |S|x|A| row-stochastic table.
class TabularPolicy {
public:
    explicit TabularPolicy(Matrix probs);

    static TabularPolicy uniform(std::size_t num_states, std::size_t num_actions);
    static TabularPolicy deterministic(const std::vector<Action>& choice, std::size_t num_actions);

    std::size_t num_states() const { return _probs.rows(); }
    std::size_t num_actions() const { return _probs.cols(); }
    double operator()(State s, Action a) const { return _probs(s, a); }
    std::span<const double> row(State s) const { return _probs.row(s); }
    const Matrix& probs() const { return _probs; }

private:
    Matrix _probs;
};

enum class Provenance { ExactFromMdp, LearnedFromCounts, Explicit };

/// Policy-induced Markov chain T(s'|s).
class TransitionSystem {
public:
    explicit TransitionSystem(Matrix chain, Provenance source = Provenance::Explicit);

    std::size_t num_states() const { return _chain.rows(); }
    double operator()(State s, State next) const { return _chain(s, next); }
    std::span<const double> row(State s) const { return _chain.row(s); }
    const Matrix& chain() const { return _chain; }
    Provenance source() const { return _source; }

private:
    Matrix _chain;
    Provenance _source;
};

/// States tau[0..n]; length() is the number of transitions n.
struct Trace {
    std::vector<State> states;
    std::size_t length() const { return states.empty() ? 0 : states.size() - 1; }
};

/// T(s'|s) = sum_a pi(a|s) p(s'|s,a).
TransitionSystem induce_transition_system(const LabeledMdp& mdp, const TabularPolicy& policy);
TransitionSystem induce_transition_system(const TransitionTable& dynamics, const TabularPolicy& policy,
                                          Provenance source);

Trace sample_trace(const TransitionSystem& ts, State start, std::size_t n, SplitMix64& rng);

/// init left-multiplied by the chain t times.
std::vector<double> marginal_distribution(const TransitionSystem& ts, std::span<const double> init, std::size_t t);

/// Half the L1 distance.
double tv_distance(std::span<const double> p, std::span<const double> q);

/// Throws std::invalid_argument unless `v` sums to 1 within `tolerance` with entries in [0,1].
void require_distribution(std::span<const double> v, const std::string& what, double tolerance = kProbabilityTolerance);

// --- Gridworld -----------------------------------------------------------

enum class Direction : std::size_t { Up = 0, Down = 1, Left = 2, Right = 3 };

struct Cell {
    std::size_t x = 0;
    std::size_t y = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct GridworldSpec {
    std::size_t width = 1;
    std::size_t height = 1;
    Cell start;
    Cell goal;
    std::vector<Cell> hazards;
    std::vector<std::pair<Cell, Direction>> conveyors;
    /// Probability that a voluntary move slips to a perpendicular direction.
    double slip_prob = 0.0;
    double step_reward = -0.01;
    double goal_reward = 1.0;
    double gamma = 0.99;

    /// Throws std::invalid_argument listing the first violated constraint.
    void validate() const;
    State index(Cell c) const { return c.y * width + c.x; }
};

/// Four-action grid: off-grid moves stay put, conveyors force their direction
/// (without slip), hazard and goal cells are absorbing. Atoms: hazard, goal, conveyor.
/// R(s,a) is goal_reward when the intended (or forced) move enters the goal, else step_reward.
LabeledMdp build_gridworld(const GridworldSpec& spec);

/// 7x7, start (0,3), goal (6,3). Open hazard at (3,1); a conveyor along the bottom row
/// from (2,6) to (4,6) carries the agent right into the hazard at (5,6).
GridworldSpec default_gridworld();

}  // namespace ambs
