#include "ambs/shield.hpp"

#include <cmath>
#include <iomanip>
#include <stdexcept>

#include "ambs/random.hpp"

namespace ambs {

std::vector<std::string> ShieldConfig::violations() const {
    std::vector<std::string> out;
    if (!(epsilon > 0.0)) out.emplace_back("shield.epsilon must be > 0");
    if (!(delta <= 1.0)) out.emplace_back("shield.delta must be <= 1");
    if (!(epsilon < delta)) out.emplace_back("shield.epsilon must be < shield.delta (acceptance interval would be empty)");
    if (num_samples < 1) out.emplace_back("shield.samples must be >= 1");
    if (imagination_horizon < 1) out.emplace_back("shield.imagination_horizon must be >= 1");
    if (lookahead_horizon < imagination_horizon) {
        out.emplace_back("shield.lookahead_horizon must be >= shield.imagination_horizon");
    }
    if (use_critic_bootstrap && imagination_horizon < 2) {
        out.emplace_back("shield.imagination_horizon must be >= 2 with critic bootstrapping");
    }
    if (!(cost_value > 0.0)) out.emplace_back("shield.cost_value must be > 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) out.emplace_back("gamma must lie in (0,1]");
    if (!(failure_prob > 0.0 && failure_prob < 1.0)) out.emplace_back("shield.failure_prob must lie in (0,1)");
    return out;
}

void ShieldConfig::validate() const {
    const auto v = violations();
    if (v.empty()) return;
    std::string msg = "invalid shield config:";
    for (const auto& s : v) msg += "\n  " + s;
    throw std::invalid_argument(msg);
}

double ShieldConfig::cost_threshold() const {
    const double exponent = use_critic_bootstrap ? static_cast<double>(lookahead_horizon) - 1.0
                                                 : static_cast<double>(imagination_horizon) - 1.0;
    return std::pow(gamma, exponent) * cost_value;
}

bool ShieldConfig::accepts(double estimate) const { return estimate >= 1.0 - delta + epsilon && estimate <= 1.0; }

double trace_cost(std::span<const double> costs, std::span<const double> gammas) {
    if (costs.size() != gammas.size()) throw std::invalid_argument("trace_cost: sequence length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < costs.size(); ++i) {
        if (costs[i] != 0.0) total += std::pow(gammas[i], static_cast<double>(i)) * costs[i];
    }
    return total;
}

double trace_cost_with_critic(std::span<const double> costs, std::span<const double> gammas, double v1, double v2) {
    if (gammas.size() < 2 || gammas.size() != costs.size() + 1) {
        throw std::invalid_argument("trace_cost_with_critic: need H >= 2 with H-1 costs and H discounts");
    }
    const double partial = trace_cost(costs, gammas.first(costs.size()));
    const double bootstrap = gammas.back() > 0.0 ? std::min(v1, v2) : 0.0;
    return partial + bootstrap;
}

bool trace_satisfies(double cost, const ShieldConfig& config) { return cost < config.cost_threshold(); }

namespace {

void cumulative_rows(std::span<const double> probs, std::size_t width, std::vector<double>& out) {
    out.resize(probs.size());
    for (std::size_t base = 0; base < probs.size(); base += width) {
        double acc = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
            acc += probs[base + j];
            out[base + j] = acc;
        }
    }
}

}  // namespace

ShieldModel::ShieldModel(const TransitionTable& dynamics, const TabularPolicy& task_policy,
                         std::vector<double> state_cost, std::vector<double> critic1, std::vector<double> critic2)
    : _states{dynamics.num_states()}, _actions{dynamics.num_actions()} {
    std::vector<double> flat;
    flat.reserve(_states * _actions * _states);
    for (State s = 0; s < _states; ++s) {
        for (Action a = 0; a < _actions; ++a) {
            auto r = dynamics.row(s, a);
            flat.insert(flat.end(), r.begin(), r.end());
        }
    }
    cumulative_rows(flat, _states, _action_cdf);
    const auto ts = induce_transition_system(dynamics, task_policy, Provenance::LearnedFromCounts);
    cumulative_rows(ts.chain().data(), _states, _chain_cdf);
    init_costs(std::move(state_cost), std::move(critic1), std::move(critic2));
}

ShieldModel::ShieldModel(const TransitionSystem& ts, std::vector<double> state_cost, std::vector<double> critic1,
                         std::vector<double> critic2)
    : _states{ts.num_states()}, _actions{0} {
    cumulative_rows(ts.chain().data(), _states, _chain_cdf);
    init_costs(std::move(state_cost), std::move(critic1), std::move(critic2));
}

void ShieldModel::init_costs(std::vector<double> state_cost, std::vector<double> critic1, std::vector<double> critic2) {
    if (state_cost.size() != _states) throw std::invalid_argument("shield model: cost table has wrong length");
    if (critic1.size() != critic2.size() || (!critic1.empty() && critic1.size() != _states)) {
        throw std::invalid_argument("shield model: critic tables have wrong length");
    }
    _cost = std::move(state_cost);
    _critic1 = std::move(critic1);
    _critic2 = std::move(critic2);
}

kernels::TraceBatch ShieldModel::batch(State start, std::optional<Action> first_action, std::uint64_t seed,
                                       std::uint64_t step) const {
    if (start >= _states) throw std::out_of_range("shield model: start out of range");
    kernels::TraceBatch b;
    if (first_action) {
        if (*first_action >= _actions) throw std::out_of_range("shield model: action out of range");
        b.first_step_cdf = std::span<const double>(_action_cdf).subspan((start * _actions + *first_action) * _states,
                                                                        _states);
    }
    b.chain_cdf = _chain_cdf;
    b.num_states = _states;
    b.state_cost = _cost;
    b.critic1 = _critic1;
    b.critic2 = _critic2;
    b.start = start;
    b.seed = seed;
    b.step = step;
    return b;
}

SafetyEstimate estimate_bounded_safety(const ShieldModel& model, State start, std::optional<Action> first_action,
                                       const ShieldConfig& config, std::uint64_t seed, std::uint64_t step,
                                       Execution execution) {
    if (config.num_samples == 0) throw std::invalid_argument("estimate needs at least one sample");
    const auto batch = model.batch(start, first_action, seed, step);
    SafetyEstimate out;
    out.num_samples = config.num_samples;
    if (batch.state_cost[start] > 0.0) {
        out.satisfying_count = 0;
    } else if (execution == Execution::Serial) {
        out.satisfying_count = kernels::count_satisfying_traces_serial(batch, config, config.num_samples);
    } else {
        out.satisfying_count = kernels::count_satisfying_traces_parallel(batch, config, config.num_samples);
    }
    out.estimate = static_cast<double>(out.satisfying_count) / static_cast<double>(out.num_samples);
    return out;
}

ShieldDecision shield_action(Action proposed, State state, const ShieldModel& model, const TabularPolicy& safe_policy,
                             const ShieldConfig& config, std::uint64_t seed, std::uint64_t step) {
    const auto est = estimate_bounded_safety(model, state, proposed, config, seed, step);
    ShieldDecision d;
    d.proposed = proposed;
    d.estimate = est.estimate;
    d.satisfying_count = est.satisfying_count;
    d.num_samples = est.num_samples;
    if (config.accepts(est.estimate)) {
        d.action_taken = proposed;
        d.overridden = false;
    } else {
        SplitMix64 rng = make_stream(seed, Stream::SafeAction, step);
        d.action_taken = sample_categorical(safe_policy.row(state), rng.uniform());
        d.overridden = true;
    }
    return d;
}

void write_decision_log_header(std::ostream& out) {
    out << "step,state,proposed,taken,overridden,estimate,satisfying_count\n";
}

void write_decision_log_row(std::ostream& out, std::uint64_t step, State state, const ShieldDecision& d) {
    out << step << ',' << state << ',' << d.proposed << ',' << d.action_taken << ',' << (d.overridden ? 1 : 0) << ','
        << std::fixed << std::setprecision(6) << d.estimate << std::defaultfloat << ',' << d.satisfying_count << '\n';
}

}  // namespace ambs
