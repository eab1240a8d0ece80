#include "ambs/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ambs {

void require_distribution(std::span<const double> v, const std::string& what, double tolerance) {
    double sum = 0.0;
    for (double x : v) {
        if (!(x >= 0.0 && x <= 1.0 + tolerance)) {
            throw std::invalid_argument(what + ": entry " + std::to_string(x) + " outside [0,1]");
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > tolerance) {
        throw std::invalid_argument(what + ": sums to " + std::to_string(sum) + ", not 1");
    }
}

void TransitionTable::validate(double tolerance) const {
    for (State s = 0; s < _states; ++s) {
        for (Action a = 0; a < _actions; ++a) {
            require_distribution(row(s, a), "p(.|" + std::to_string(s) + "," + std::to_string(a) + ")", tolerance);
        }
    }
}

LabeledMdp::LabeledMdp(TransitionTable transition, std::vector<double> initial, Matrix reward, double gamma,
                       std::vector<std::string> atoms, std::vector<LabelSet> labels)
    : _transition{std::move(transition)},
      _initial{std::move(initial)},
      _reward{std::move(reward)},
      _gamma{gamma},
      _atoms{std::move(atoms)},
      _labels{std::move(labels)} {
    const std::size_t n = _transition.num_states();
    if (n == 0 || _transition.num_actions() == 0) throw std::invalid_argument("MDP needs at least one state and action");
    if (_initial.size() != n) throw std::invalid_argument("initial distribution has wrong length");
    if (_reward.rows() != n || _reward.cols() != _transition.num_actions()) {
        throw std::invalid_argument("reward table has wrong shape");
    }
    if (!(_gamma > 0.0 && _gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0,1]");
    if (_labels.size() != n) throw std::invalid_argument("label table has wrong length");
    _transition.validate();
    require_distribution(_initial, "initial distribution");
    for (const auto& a : _atoms) {
        if (!is_valid_atom_name(a)) throw std::invalid_argument("invalid atom name '" + a + "'");
    }
    for (State s = 0; s < n; ++s) {
        for (const auto& l : _labels[s]) {
            if (std::find(_atoms.begin(), _atoms.end(), l) == _atoms.end()) {
                throw std::invalid_argument("state " + std::to_string(s) + " carries undeclared atom '" + l + "'");
            }
        }
    }
}

bool LabeledMdp::is_absorbing(State s) const {
    for (Action a = 0; a < num_actions(); ++a) {
        if (_transition(s, a, s) < 1.0 - kProbabilityTolerance) return false;
    }
    return true;
}

TabularPolicy::TabularPolicy(Matrix probs) : _probs{std::move(probs)} {
    for (State s = 0; s < _probs.rows(); ++s) {
        require_distribution(_probs.row(s), "pi(.|" + std::to_string(s) + ")");
    }
}

TabularPolicy TabularPolicy::uniform(std::size_t num_states, std::size_t num_actions) {
    return TabularPolicy{Matrix(num_states, num_actions, 1.0 / static_cast<double>(num_actions))};
}

TabularPolicy TabularPolicy::deterministic(const std::vector<Action>& choice, std::size_t num_actions) {
    Matrix m(choice.size(), num_actions);
    for (State s = 0; s < choice.size(); ++s) {
        if (choice[s] >= num_actions) throw std::invalid_argument("action index out of range");
        m(s, choice[s]) = 1.0;
    }
    return TabularPolicy{std::move(m)};
}

TransitionSystem::TransitionSystem(Matrix chain, Provenance source) : _chain{std::move(chain)}, _source{source} {
    if (_chain.rows() != _chain.cols()) throw std::invalid_argument("transition system must be square");
    for (State s = 0; s < _chain.rows(); ++s) {
        require_distribution(_chain.row(s), "T(.|" + std::to_string(s) + ")");
    }
}

TransitionSystem induce_transition_system(const TransitionTable& dynamics, const TabularPolicy& policy,
                                          Provenance source) {
    const std::size_t n = dynamics.num_states();
    if (policy.num_states() != n || policy.num_actions() != dynamics.num_actions()) {
        throw std::invalid_argument("policy dimensions do not match the dynamics");
    }
    Matrix chain(n, n);
    for (State s = 0; s < n; ++s) {
        auto out = chain.row(s);
        for (Action a = 0; a < dynamics.num_actions(); ++a) {
            const double w = policy(s, a);
            if (w == 0.0) continue;
            auto p = dynamics.row(s, a);
            for (State t = 0; t < n; ++t) out[t] += w * p[t];
        }
    }
    return TransitionSystem{std::move(chain), source};
}

TransitionSystem induce_transition_system(const LabeledMdp& mdp, const TabularPolicy& policy) {
    return induce_transition_system(mdp.transition(), policy, Provenance::ExactFromMdp);
}

Trace sample_trace(const TransitionSystem& ts, State start, std::size_t n, SplitMix64& rng) {
    if (start >= ts.num_states()) throw std::out_of_range("start state out of range");
    Trace trace;
    trace.states.reserve(n + 1);
    trace.states.push_back(start);
    State s = start;
    for (std::size_t i = 0; i < n; ++i) {
        s = sample_categorical(ts.row(s), rng.uniform());
        trace.states.push_back(s);
    }
    return trace;
}

std::vector<double> marginal_distribution(const TransitionSystem& ts, std::span<const double> init, std::size_t t) {
    const std::size_t n = ts.num_states();
    if (init.size() != n) throw std::invalid_argument("initial vector has wrong length");
    std::vector<double> cur(init.begin(), init.end());
    std::vector<double> next(n);
    for (std::size_t step = 0; step < t; ++step) {
        std::fill(next.begin(), next.end(), 0.0);
        for (State s = 0; s < n; ++s) {
            if (cur[s] == 0.0) continue;
            auto row = ts.row(s);
            for (State u = 0; u < n; ++u) next[u] += cur[s] * row[u];
        }
        cur.swap(next);
    }
    return cur;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("tv_distance: length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
    return 0.5 * sum;
}

// --- Gridworld -----------------------------------------------------------

void GridworldSpec::validate() const {
    auto in_bounds = [&](Cell c) { return c.x < width && c.y < height; };
    if (width == 0 || height == 0) throw std::invalid_argument("gridworld: width and height must be positive");
    if (!in_bounds(start)) throw std::invalid_argument("gridworld: start out of bounds");
    if (!in_bounds(goal)) throw std::invalid_argument("gridworld: goal out of bounds");
    for (const auto& h : hazards) {
        if (!in_bounds(h)) throw std::invalid_argument("gridworld: hazard out of bounds");
        if (h == start) throw std::invalid_argument("gridworld: start cell is a hazard");
        if (h == goal) throw std::invalid_argument("gridworld: goal cell is a hazard");
    }
    for (const auto& [c, d] : conveyors) {
        if (!in_bounds(c)) throw std::invalid_argument("gridworld: conveyor out of bounds");
        if (c == goal || std::find(hazards.begin(), hazards.end(), c) != hazards.end()) {
            throw std::invalid_argument("gridworld: conveyor on an absorbing cell");
        }
        if (static_cast<std::size_t>(d) > 3) throw std::invalid_argument("gridworld: bad conveyor direction");
    }
    if (!(slip_prob >= 0.0 && slip_prob < 1.0)) throw std::invalid_argument("gridworld: slip_prob must lie in [0,1)");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gridworld: gamma must lie in (0,1]");
}

namespace {

Cell move(const GridworldSpec& g, Cell c, Direction d) {
    switch (d) {
        case Direction::Up: return c.y == 0 ? c : Cell{c.x, c.y - 1};
        case Direction::Down: return c.y + 1 >= g.height ? c : Cell{c.x, c.y + 1};
        case Direction::Left: return c.x == 0 ? c : Cell{c.x - 1, c.y};
        case Direction::Right: return c.x + 1 >= g.width ? c : Cell{c.x + 1, c.y};
    }
    return c;
}

std::pair<Direction, Direction> perpendicular(Direction d) {
    if (d == Direction::Up || d == Direction::Down) return {Direction::Left, Direction::Right};
    return {Direction::Up, Direction::Down};
}

}  // namespace

LabeledMdp build_gridworld(const GridworldSpec& g) {
    g.validate();
    const std::size_t n = g.width * g.height;
    constexpr std::size_t kActions = 4;
    TransitionTable p(n, kActions);
    Matrix reward(n, kActions);
    std::vector<LabelSet> labels(n);
    std::vector<char> absorbing(n, 0);
    for (const auto& h : g.hazards) {
        labels[g.index(h)].insert("hazard");
        absorbing[g.index(h)] = 1;
    }
    labels[g.index(g.goal)].insert("goal");
    absorbing[g.index(g.goal)] = 1;
    std::vector<int> forced(n, -1);
    for (const auto& [c, d] : g.conveyors) {
        labels[g.index(c)].insert("conveyor");
        forced[g.index(c)] = static_cast<int>(d);
    }

    for (std::size_t y = 0; y < g.height; ++y) {
        for (std::size_t x = 0; x < g.width; ++x) {
            const Cell c{x, y};
            const State s = g.index(c);
            for (Action a = 0; a < kActions; ++a) {
                auto row = p.row(s, a);
                if (absorbing[s]) {
                    row[s] = 1.0;
                    continue;
                }
                const State goal = g.index(g.goal);
                if (forced[s] >= 0) {
                    const State to = g.index(move(g, c, static_cast<Direction>(forced[s])));
                    row[to] += 1.0;
                    reward(s, a) = to == goal ? g.goal_reward : g.step_reward;
                } else {
                    const auto d = static_cast<Direction>(a);
                    const auto [side1, side2] = perpendicular(d);
                    row[g.index(move(g, c, d))] += 1.0 - g.slip_prob;
                    row[g.index(move(g, c, side1))] += 0.5 * g.slip_prob;
                    row[g.index(move(g, c, side2))] += 0.5 * g.slip_prob;
                    // Paid on the intended move. An expected-value reward would pay a slip's
                    // share of the goal reward on every step spent next to the goal.
                    reward(s, a) = g.index(move(g, c, d)) == goal ? g.goal_reward : g.step_reward;
                }
            }
        }
    }
    std::vector<double> init(n, 0.0);
    init[g.index(g.start)] = 1.0;
    return LabeledMdp{std::move(p), std::move(init), std::move(reward), g.gamma, {"hazard", "goal", "conveyor"},
                      std::move(labels)};
}

GridworldSpec default_gridworld() {
    GridworldSpec g;
    g.width = 7;
    g.height = 7;
    g.start = {0, 3};
    g.goal = {6, 3};
    g.hazards = {{3, 1}, {5, 6}};
    g.conveyors = {{{2, 6}, Direction::Right}, {{3, 6}, Direction::Right}, {{4, 6}, Direction::Right}};
    g.slip_prob = 0.0;
    return g;
}

}  // namespace ambs
