#include "ambs/agents.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "ambs/mdp_io.hpp"
#include "ambs/random.hpp"

namespace ambs {

double cost_target(const LabelSet& labels, const Formula& formula, double cost_value) {
    if (!(cost_value > 0.0)) throw std::invalid_argument("cost value must be > 0");
    return evaluate(formula, labels) ? 0.0 : cost_value;
}

CostModel::CostModel(std::vector<char> violating, double cost_value, double gamma)
    : _cost_value{cost_value}, _gamma{gamma}, _cost(violating.size(), 0.0) {
    if (!(cost_value > 0.0)) throw std::invalid_argument("cost value must be > 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0,1]");
    for (State s = 0; s < violating.size(); ++s) _cost[s] = violating[s] ? cost_value : 0.0;
}

CostModel CostModel::from_labels(const Formula& formula, const std::vector<LabelSet>& labels, double cost_value,
                                 double gamma) {
    std::vector<char> bad(labels.size());
    for (State s = 0; s < labels.size(); ++s) bad[s] = cost_target(labels[s], formula, cost_value) > 0.0;
    return CostModel(std::move(bad), cost_value, gamma);
}

void CostModel::set_violating(State s, bool violating) { _cost.at(s) = violating ? _cost_value : 0.0; }

std::vector<std::string> ActorCriticConfig::violations() const {
    std::vector<std::string> out;
    if (!(actor_lr >= 0.0)) out.emplace_back("agent.actor_lr must be >= 0");
    if (!(critic_lr > 0.0 && critic_lr <= 1.0)) out.emplace_back("agent.critic_lr must lie in (0,1]");
    if (!(lambda >= 0.0 && lambda <= 1.0)) out.emplace_back("agent.lambda must lie in [0,1]");
    if (!(entropy_scale >= 0.0)) out.emplace_back("agent.entropy_scale must be >= 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) out.emplace_back("gamma must lie in (0,1]");
    return out;
}

ActorCriticAgent::ActorCriticAgent(std::size_t num_states, std::size_t num_actions, ActorCriticConfig config)
    : _prefs(num_states, num_actions, 0.0), _values(num_states, 0.0) {
    if (num_states == 0 || num_actions == 0) throw std::invalid_argument("agent needs states and actions");
    set_config(config);
}

void ActorCriticAgent::set_config(const ActorCriticConfig& config) {
    const auto v = config.violations();
    if (!v.empty()) throw std::invalid_argument(v.front());
    _config = config;
}

void ActorCriticAgent::action_probs(State s, std::span<double> out) const {
    const auto row = _prefs.row(s);
    const double top = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (Action a = 0; a < row.size(); ++a) z += out[a] = std::exp(row[a] - top);
    for (auto& p : out) p /= z;
}

TabularPolicy ActorCriticAgent::policy() const {
    Matrix probs(num_states(), num_actions());
    for (State s = 0; s < num_states(); ++s) action_probs(s, probs.row(s));
    return TabularPolicy(std::move(probs));
}

void ActorCriticAgent::actor_step(State s, Action a, double advantage) {
    std::vector<double> pi(num_actions());
    action_probs(s, pi);
    double entropy = 0.0;
    for (double p : pi) {
        if (p > 0.0) entropy -= p * std::log(p);
    }
    auto row = _prefs.row(s);
    for (Action b = 0; b < row.size(); ++b) {
        const double log_p = pi[b] > 0.0 ? std::log(pi[b]) : 0.0;
        const double grad_entropy = -pi[b] * (log_p + entropy);
        const double grad_logp = (b == a ? 1.0 : 0.0) - pi[b];
        row[b] += _config.actor_lr * (advantage * grad_logp + _config.entropy_scale * grad_entropy);
    }
}

void ActorCriticAgent::critic_step(State s, double target) { _values[s] += _config.critic_lr * (target - _values[s]); }

namespace {

struct Rollout {
    std::vector<State> states;
    std::vector<Action> actions;
};

void check_model(const LearnedModel& model, std::size_t ns, std::size_t na) {
    if (model.dynamics.num_states() != ns || model.dynamics.num_actions() != na || model.reward.rows() != ns ||
        model.reward.cols() != na || model.terminal.size() != ns) {
        throw std::invalid_argument("learned model does not match the agent");
    }
}

/// Imagines up to `horizon` steps; stops early at states where `stop` holds.
template <typename Policy, typename Stop>
void imagine(Rollout& r, const LearnedModel& model, State start, std::size_t horizon, SplitMix64& rng, Policy&& policy,
             Stop&& stop) {
    r.states.assign(1, start);
    r.actions.clear();
    State s = start;
    for (std::size_t t = 0; t < horizon && !stop(s); ++t) {
        const Action a = policy(s, rng.uniform());
        s = sample_categorical(model.dynamics.row(s, a), rng.uniform());
        r.actions.push_back(a);
        r.states.push_back(s);
    }
}

/// lambda-returns G_t = u_t + k_t ((1-lambda) V(s_{t+1}) + lambda G_{t+1}), with G_L = V(s_L).
template <typename Reward, typename Discount, typename Value>
void lambda_returns(const Rollout& r, double lambda, std::vector<double>& g, Reward&& u, Discount&& k, Value&& v) {
    const std::size_t len = r.actions.size();
    g.resize(len + 1);
    g[len] = v(r.states[len]);
    for (std::size_t t = len; t-- > 0;) {
        const State s = r.states[t];
        g[t] = u(s, r.actions[t]) + k(s) * ((1.0 - lambda) * v(r.states[t + 1]) + lambda * g[t + 1]);
    }
}

}  // namespace

void train_task_policy(ActorCriticAgent& agent, const LearnedModel& model, const ImaginationBatch& batch) {
    check_model(model, agent.num_states(), agent.num_actions());
    const auto& cfg = agent.config();
    const auto terminal = [&](State s) { return model.terminal[s] != 0; };
    const auto value = [&](State s) { return terminal(s) ? 0.0 : agent.value(s); };
    std::vector<double> pi(agent.num_actions()), g;
    const auto act = [&](State s, double u) {
        agent.action_probs(s, pi);
        return sample_categorical(pi, u);
    };
    Rollout r;
    for (std::size_t i = 0; i < batch.starts.size(); ++i) {
        SplitMix64 rng = make_stream(batch.seed, Stream::TaskImagination, batch.iteration, i);
        imagine(r, model, batch.starts[i], batch.horizon, rng, act, terminal);
        lambda_returns(
            r, cfg.lambda, g, [&](State s, Action a) { return model.reward(s, a); },
            [&](State) { return cfg.gamma; }, value);
        for (std::size_t t = 0; t < r.actions.size(); ++t) {
            const State s = r.states[t];
            const double advantage = g[t] - agent.value(s);
            agent.critic_step(s, g[t]);
            agent.actor_step(s, r.actions[t], advantage);
        }
    }
}

void train_safe_policy(ActorCriticAgent& agent, const LearnedModel& model, const CostModel& costs,
                       const ImaginationBatch& batch) {
    check_model(model, agent.num_states(), agent.num_actions());
    if (costs.num_states() != agent.num_states()) throw std::invalid_argument("cost model does not match the agent");
    const auto& cfg = agent.config();
    const auto stop = [&](State s) { return costs.cost(s) > 0.0 || model.terminal[s] != 0; };
    const auto value = [&](State s) {
        if (costs.cost(s) > 0.0) return costs.cost(s);
        return model.terminal[s] ? 0.0 : agent.value(s);
    };
    // A violating state is terminal with immediate cost C, so its value is known exactly.
    for (State s = 0; s < agent.num_states(); ++s) {
        if (costs.cost(s) > 0.0) agent.set_value(s, costs.cost(s));
    }
    std::vector<double> pi(agent.num_actions()), g;
    const auto act = [&](State s, double u) {
        agent.action_probs(s, pi);
        return sample_categorical(pi, u);
    };
    Rollout r;
    for (std::size_t i = 0; i < batch.starts.size(); ++i) {
        SplitMix64 rng = make_stream(batch.seed, Stream::SafeImagination, batch.iteration, i);
        imagine(r, model, batch.starts[i], batch.horizon, rng, act, stop);
        lambda_returns(
            r, cfg.lambda, g, [&](State s, Action) { return costs.cost(s); },
            [&](State s) { return costs.safety_discount(s); }, value);
        for (std::size_t t = 0; t < r.actions.size(); ++t) {
            const State s = r.states[t];
            const double advantage = agent.value(s) - g[t];
            agent.critic_step(s, g[t]);
            agent.actor_step(s, r.actions[t], advantage);
        }
    }
}

SafetyCriticPair::SafetyCriticPair(std::size_t num_states, double cost_value, double update_fraction)
    : _cost_value{cost_value},
      _tau{update_fraction},
      _v1(num_states, 0.0),
      _v2(num_states, 0.0),
      _t1(num_states, 0.0),
      _t2(num_states, 0.0) {
    if (!(cost_value > 0.0)) throw std::invalid_argument("cost value must be > 0");
    if (!(update_fraction > 0.0 && update_fraction <= 1.0)) {
        throw std::invalid_argument("critic update fraction must lie in (0,1]");
    }
}

void SafetyCriticPair::regress(int which, State s, double target, double lr) {
    auto& v = critic(which);
    v[s] = std::clamp(v[s] + lr * (target - v[s]), 0.0, _cost_value);
}

void SafetyCriticPair::blend_targets() {
    for (State s = 0; s < _v1.size(); ++s) {
        _t1[s] = std::clamp((1.0 - _tau) * _t1[s] + _tau * _v1[s], 0.0, _cost_value);
        _t2[s] = std::clamp((1.0 - _tau) * _t2[s] + _tau * _v2[s], 0.0, _cost_value);
    }
}

void SafetyCriticPair::check_bounds() const {
    for (const auto* table : {&_v1, &_v2, &_t1, &_t2}) {
        for (double x : *table) {
            if (!(x >= 0.0 && x <= _cost_value)) throw std::logic_error("safety critic left [0, C]");
        }
    }
}

void train_safety_critics(SafetyCriticPair& pair, const LearnedModel& model, const CostModel& costs,
                          const TabularPolicy& task_policy, const ImaginationBatch& batch, double critic_lr,
                          const std::function<void(const SafetyCriticPair&)>& on_update) {
    const std::size_t ns = pair.num_states();
    if (model.dynamics.num_states() != ns || costs.num_states() != ns || task_policy.num_states() != ns ||
        task_policy.num_actions() != model.dynamics.num_actions()) {
        throw std::invalid_argument("safety critic inputs disagree in size");
    }
    const auto stop = [&](State s) { return costs.cost(s) > 0.0 || model.terminal[s] != 0; };
    const auto act = [&](State s, double u) { return sample_categorical(task_policy.row(s), u); };
    Rollout r;
    for (std::size_t i = 0; i < batch.starts.size(); ++i) {
        for (int which = 0; which < 2; ++which) {
            SplitMix64 rng = make_stream(batch.seed, Stream::CriticImagination, batch.iteration,
                                         2 * i + static_cast<std::size_t>(which));
            imagine(r, model, batch.starts[i], batch.horizon, rng, act, stop);
            for (std::size_t t = 0; t < r.states.size(); ++t) {
                const State s = r.states[t];
                double target;
                if (costs.cost(s) > 0.0) {
                    target = costs.cost(s);
                } else if (model.terminal[s]) {
                    target = 0.0;
                } else if (t + 1 < r.states.size()) {
                    target = costs.safety_discount(s) * pair.min_target(r.states[t + 1]);
                } else {
                    break;  // horizon reached without a successor
                }
                pair.regress(which, s, target, critic_lr);
                pair.check_bounds();
                if (on_update) on_update(pair);
            }
            pair.blend_targets();
        }
    }
}

void write_values(std::ostream& out, std::span<const double> values) {
    out << std::setprecision(17);
    for (State s = 0; s < values.size(); ++s) out << "value " << s << ' ' << values[s] << '\n';
}

void write_agent(std::ostream& out, const ActorCriticAgent& agent) {
    out << std::setprecision(17);
    for (State s = 0; s < agent.num_states(); ++s) {
        for (Action a = 0; a < agent.num_actions(); ++a) {
            out << "pref " << s << ' ' << a << ' ' << agent.preference(s, a) << '\n';
        }
    }
    write_values(out, agent.values());
}

void read_agent(std::istream& in, const std::string& source, ActorCriticAgent& agent) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key) || key[0] == '#') continue;
        State s;
        if (key == "pref") {
            Action a;
            double x;
            if (!(ls >> s >> a >> x)) throw FormatError(source, lineno, "expected `pref S A X`");
            if (s >= agent.num_states() || a >= agent.num_actions()) throw FormatError(source, lineno, "index out of range");
            agent.set_preference(s, a, x);
        } else if (key == "value") {
            double v;
            if (!(ls >> s >> v)) throw FormatError(source, lineno, "expected `value S V`");
            if (s >= agent.num_states()) throw FormatError(source, lineno, "index out of range");
            agent.set_value(s, v);
        } else {
            throw FormatError(source, lineno, "unknown record `" + key + "`");
        }
    }
}

}  // namespace ambs
