#include "ambs/learner.hpp"

#include <sstream>
#include <stdexcept>

#include "ambs/mdp_io.hpp"

namespace ambs {

CountsModel::CountsModel(std::size_t num_states, std::size_t num_actions)
    : _states{num_states},
      _actions{num_actions},
      _triple(num_states * num_actions * num_states, 0),
      _pair(num_states * num_actions, 0),
      _terminal(num_states, 0) {
    if (num_states == 0 || num_actions == 0) throw std::invalid_argument("counts model needs states and actions");
}

void CountsModel::check(State s, Action a, State next) const {
    if (s >= _states || next >= _states || a >= _actions) throw std::out_of_range("counts update: index out of range");
}

void CountsModel::update(State s, Action a, State next) { add(s, a, next, 1); }

void CountsModel::add(State s, Action a, State next, std::uint64_t n) {
    check(s, a, next);
    _triple[(s * _actions + a) * _states + next] += n;
    _pair[s * _actions + a] += n;
}

void CountsModel::update(const Transition& t) {
    update(t.state, t.action, t.next_state);
    if (t.terminal) mark_terminal(t.next_state);
}

void CountsModel::mark_terminal(State s) {
    if (s >= _states) throw std::out_of_range("terminal state out of range");
    _terminal[s] = 1;
}

TransitionTable mle_dynamics(const CountsModel& model, const MleOptions& options) {
    if (!(options.smoothing >= 0.0)) throw std::invalid_argument("smoothing must be >= 0");
    const std::size_t ns = model.num_states();
    TransitionTable p(ns, model.num_actions());
    for (State s = 0; s < ns; ++s) {
        for (Action a = 0; a < model.num_actions(); ++a) {
            auto row = p.row(s, a);
            const auto v = model.visits(s, a);
            if (v == 0 && (model.is_terminal(s) || options.fallback == UnvisitedFallback::SelfLoop)) {
                row[s] = 1.0;
            } else if (v == 0 && options.smoothing == 0.0) {
                for (auto& x : row) x = 1.0 / static_cast<double>(ns);
            } else {
                const double denom = static_cast<double>(v) + options.smoothing * static_cast<double>(ns);
                for (State n = 0; n < ns; ++n) {
                    row[n] = (static_cast<double>(model.count(s, a, n)) + options.smoothing) / denom;
                }
            }
        }
    }
    return p;
}

TransitionSystem learned_transition_system(const CountsModel& model, const TabularPolicy& policy,
                                           const MleOptions& options) {
    if (policy.num_states() != model.num_states() || policy.num_actions() != model.num_actions()) {
        throw std::invalid_argument("policy does not match the counts model");
    }
    return induce_transition_system(mle_dynamics(model, options), policy, Provenance::LearnedFromCounts);
}

RewardModel::RewardModel(std::size_t num_states, std::size_t num_actions)
    : _actions{num_actions}, _sum(num_states * num_actions, 0.0), _n(num_states * num_actions, 0) {}

void RewardModel::update(State s, Action a, double reward) {
    const std::size_t i = s * _actions + a;
    if (a >= _actions || i >= _sum.size()) throw std::out_of_range("reward update: index out of range");
    _sum[i] += reward;
    ++_n[i];
}

double RewardModel::mean(State s, Action a) const {
    const std::size_t i = s * _actions + a;
    return _n[i] == 0 ? 0.0 : _sum[i] / static_cast<double>(_n[i]);
}

Matrix RewardModel::table() const {
    const std::size_t ns = _actions == 0 ? 0 : _sum.size() / _actions;
    Matrix r(ns, _actions);
    for (State s = 0; s < ns; ++s) {
        for (Action a = 0; a < _actions; ++a) r(s, a) = mean(s, a);
    }
    return r;
}

LearnedModel snapshot(const CountsModel& counts, const RewardModel& rewards, const MleOptions& options) {
    return {mle_dynamics(counts, options), rewards.table(), counts.terminal()};
}

void write_counts(std::ostream& out, const CountsModel& model) {
    const std::size_t ns = model.num_states();
    for (State s = 0; s < ns; ++s) {
        for (Action a = 0; a < model.num_actions(); ++a) {
            for (State n = 0; n < ns; ++n) {
                if (const auto c = model.count(s, a, n)) out << "count " << s << ' ' << a << ' ' << n << ' ' << c << '\n';
            }
        }
    }
    for (State s = 0; s < ns; ++s) {
        if (model.is_terminal(s)) out << "terminal " << s << '\n';
    }
}

CountsModel read_counts(std::istream& in, const std::string& source, std::size_t num_states, std::size_t num_actions) {
    CountsModel model(num_states, num_actions);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key) || key[0] == '#') continue;
        if (key == "count") {
            State s, n;
            Action a;
            std::uint64_t c;
            if (!(ls >> s >> a >> n >> c)) throw FormatError(source, lineno, "expected `count S A S' N`");
            if (s >= num_states || a >= num_actions || n >= num_states) {
                throw FormatError(source, lineno, "count index out of range");
            }
            model.add(s, a, n, c);
        } else if (key == "terminal") {
            State s;
            if (!(ls >> s) || s >= num_states) throw FormatError(source, lineno, "expected `terminal S` with S in range");
            model.mark_terminal(s);
        } else {
            throw FormatError(source, lineno, "unknown record `" + key + "`");
        }
        std::string extra;
        if (ls >> extra) throw FormatError(source, lineno, "trailing token `" + extra + "`");
    }
    return model;
}

}  // namespace ambs
