#include "ambs/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

#include "ambs/pctl_check.hpp"
#include "ambs/random.hpp"

namespace ambs {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : _capacity{capacity} {
    if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be >= 1");
}

void ReplayBuffer::push(Transition t) {
    if (_entries.size() == _capacity) _entries.pop_front();
    _entries.push_back(std::move(t));
    ++_pushed;
}

std::string_view variant_name(Variant v) {
    switch (v) {
        case Variant::Unshielded: return "unshielded";
        case Variant::Shielded: return "shielded";
        case Variant::SafeOnly: return "safe-only";
    }
    return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
    for (Variant v : {Variant::Unshielded, Variant::Shielded, Variant::SafeOnly}) {
        if (name == variant_name(v)) return v;
    }
    return std::nullopt;
}

std::vector<std::string> TrainingConfig::violations() const {
    auto out = shield.violations();
    for (auto& v : task_agent.violations()) out.push_back("task " + v);
    for (auto& v : safe_agent.violations()) out.push_back("safe " + v);
    if (!(critic_lr > 0.0 && critic_lr <= 1.0)) out.emplace_back("critic.lr must lie in (0,1]");
    if (!(critic_update_fraction > 0.0 && critic_update_fraction <= 1.0)) {
        out.emplace_back("critic.update_fraction must lie in (0,1]");
    }
    if (!(mle.smoothing >= 0.0)) out.emplace_back("model.smoothing must be >= 0");
    if (schedule.total_steps == 0) out.emplace_back("schedule.total_steps must be >= 1");
    if (schedule.steps_per_iteration == 0) out.emplace_back("schedule.steps_per_iteration must be >= 1");
    if (schedule.rollouts == 0) out.emplace_back("schedule.rollouts must be >= 1");
    if (schedule.max_episode_steps == 0) out.emplace_back("schedule.max_episode_steps must be >= 1");
    if (schedule.buffer_capacity == 0) out.emplace_back("schedule.buffer_capacity must be >= 1");
    return out;
}

double RunMetrics::mean_episode_return() const {
    if (episodes.empty()) return 0.0;
    double total = 0.0;
    for (const auto& e : episodes) total += e.ret;
    return total / static_cast<double>(episodes.size());
}

double RunMetrics::best_episode_return() const {
    if (episodes.empty()) return 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& e : episodes) best = std::max(best, e.ret);
    return best;
}

namespace {

class Trainer {
public:
    Trainer(const LabeledMdp& env, const Formula& formula, const TrainingConfig& cfg, const TrainingObserver& obs)
        : _env{env},
          _cfg{cfg},
          _obs{obs},
          _ns{env.num_states()},
          _na{env.num_actions()},
          _safe_states{satisfying_states(formula, env.labels())},
          _buffer{cfg.schedule.buffer_capacity},
          _counts{_ns, _na},
          _rewards{_ns, _na},
          _costs{std::vector<char>(_ns, 0), cfg.shield.cost_value, cfg.shield.gamma},
          _task{_ns, _na, cfg.task_agent},
          _safe{_ns, _na, cfg.safe_agent},
          _critics{_ns, cfg.shield.cost_value, cfg.critic_update_fraction},
          _task_policy{TabularPolicy::uniform(_ns, _na)},
          _safe_policy{TabularPolicy::uniform(_ns, _na)} {}

    RunResult run() {
        const auto& sch = _cfg.schedule;
        _metrics.episode_return.reserve(sch.total_steps);
        _metrics.cum_violations.reserve(sch.total_steps);
        _metrics.cum_overrides.reserve(sch.total_steps);
        reset_episode();
        for (std::size_t step = 0; step < sch.total_steps; ++step) {
            if (step % sch.steps_per_iteration == 0) train_iteration(step / sch.steps_per_iteration);
            env_step(step);
        }
        ingest();
        return {std::move(_metrics), std::move(_counts), std::move(_task), std::move(_safe), std::move(_critics)};
    }

private:
    void observe_state(State s) { _costs.set_violating(s, !_safe_states[s]); }

    void reset_episode() {
        SplitMix64 rng = make_stream(_cfg.seed, Stream::EpisodeReset, _episode);
        _state = sample_categorical(_env.initial(), rng.uniform());
        observe_state(_state);
        _ep_return = 0.0;
        _ep_length = 0;
        _ep_violations = 0;
        _ep_estimate_sum = 0.0;
        _ep_decisions = 0;
    }

    /// Each real transition enters the counts exactly once.
    void ingest() {
        const std::uint64_t fresh = _buffer.total_pushed() - _ingested;
        for (std::size_t i = _buffer.size() - std::min<std::uint64_t>(fresh, _buffer.size()); i < _buffer.size(); ++i) {
            const auto& t = _buffer[i];
            _counts.update(t);
            _rewards.update(t.state, t.action, t.reward);
        }
        _ingested = _buffer.total_pushed();
    }

    void train_iteration(std::uint64_t iteration) {
        ingest();
        if (_buffer.empty()) return;

        const LearnedModel model = snapshot(_counts, _rewards, _cfg.mle);
        std::vector<State> starts(_cfg.schedule.rollouts);
        SplitMix64 rng = make_stream(_cfg.seed, Stream::ReplaySample, iteration);
        for (auto& s : starts) s = _buffer[rng.below(_buffer.size())].state;
        const ImaginationBatch batch{starts, _cfg.shield.imagination_horizon, _cfg.seed, iteration};

        train_task_policy(_task, model, batch);
        _task_policy = _task.policy();
        if (_cfg.variant != Variant::Unshielded) {
            if (_cfg.variant == Variant::Shielded) {
                train_safety_critics(_critics, model, _costs, _task_policy, batch, _cfg.critic_lr, _obs.on_critic_update);
            }
            train_safe_policy(_safe, model, _costs, batch);
            _safe_policy = _safe.policy();
        }
        if (_cfg.variant == Variant::Shielded) {
            _shield_model.emplace(model.dynamics, _task_policy, _costs.costs(), _critics.v1(), _critics.v2());
        }
    }

    void env_step(std::size_t step) {
        const bool warm = step < _cfg.schedule.warmup_steps;
        Action action;
        bool overridden = false;
        if (_cfg.variant == Variant::SafeOnly && !warm) {
            SplitMix64 rng = make_stream(_cfg.seed, Stream::SafeAction, step);
            action = sample_categorical(_safe_policy.row(_state), rng.uniform());
        } else {
            SplitMix64 rng = make_stream(_cfg.seed, Stream::TaskAction, step);
            action = sample_categorical(_task_policy.row(_state), rng.uniform());
            if (_cfg.variant == Variant::Shielded && !warm && _shield_model) {
                const auto d = shield_action(action, _state, *_shield_model, _safe_policy, _cfg.shield, _cfg.seed, step);
                if (_obs.on_decision) _obs.on_decision({step, _state, d, _task_policy, *_shield_model});
                if (_obs.decision_log) write_decision_log_row(*_obs.decision_log, step, _state, d);
                ++_metrics.shield_decisions;
                _ep_estimate_sum += d.estimate;
                ++_ep_decisions;
                action = d.action_taken;
                overridden = d.overridden;
            }
        }

        SplitMix64 rng = make_stream(_cfg.seed, Stream::Environment, step);
        const State next = sample_categorical(_env.transition().row(_state, action), rng.uniform());
        observe_state(next);
        const bool violation = !_safe_states[next];
        const bool absorbing = _env.is_absorbing(next);
        Transition t{_state,  action, next, _env.reward()(_state, action), _env.labels(next),
                     _costs.cost(next), _costs.safety_discount(next), absorbing};
        _buffer.push(std::move(t));

        _ep_return += _env.reward()(_state, action);
        ++_ep_length;
        _ep_violations += violation;
        _violations += violation;
        _overrides += overridden;
        _metrics.episode_return.push_back(_ep_return);
        _metrics.cum_violations.push_back(static_cast<std::uint32_t>(_violations));
        _metrics.cum_overrides.push_back(static_cast<std::uint32_t>(_overrides));

        _state = next;
        if (absorbing || _ep_length >= _cfg.schedule.max_episode_steps) {
            EpisodeRecord rec;
            rec.step = step + 1;
            rec.episode = _episode;
            rec.ret = _ep_return;
            rec.length = _ep_length;
            rec.violations = _ep_violations;
            rec.cum_violations = _violations;
            rec.cum_overrides = _overrides;
            if (_ep_decisions > 0) rec.estimate_mean = _ep_estimate_sum / static_cast<double>(_ep_decisions);
            _metrics.episodes.push_back(rec);
            ++_episode;
            reset_episode();
        }
    }

    const LabeledMdp& _env;
    const TrainingConfig& _cfg;
    const TrainingObserver& _obs;
    std::size_t _ns;
    std::size_t _na;
    std::vector<char> _safe_states;
    ReplayBuffer _buffer;
    std::uint64_t _ingested = 0;
    CountsModel _counts;
    RewardModel _rewards;
    CostModel _costs;
    ActorCriticAgent _task;
    ActorCriticAgent _safe;
    SafetyCriticPair _critics;
    TabularPolicy _task_policy;
    TabularPolicy _safe_policy;
    std::optional<ShieldModel> _shield_model;
    RunMetrics _metrics;

    State _state = 0;
    std::size_t _episode = 0;
    double _ep_return = 0.0;
    std::size_t _ep_length = 0;
    std::size_t _ep_violations = 0;
    double _ep_estimate_sum = 0.0;
    std::size_t _ep_decisions = 0;
    std::size_t _violations = 0;
    std::size_t _overrides = 0;
};

}  // namespace

RunResult run_training(const LabeledMdp& env, const Formula& formula, const TrainingConfig& config,
                       const TrainingObserver& observer) {
    const auto v = config.violations();
    if (!v.empty()) {
        std::string msg = "invalid training config:";
        for (const auto& s : v) msg += "\n  " + s;
        throw std::invalid_argument(msg);
    }
    const auto missing = undeclared_atoms(formula, env.atoms());
    if (!missing.empty()) throw std::invalid_argument("formula uses atom `" + missing.front() + "` unknown to the environment");
    return Trainer(env, formula, config, observer).run();
}

void write_metrics_csv(std::ostream& out, const RunMetrics& metrics) {
    out << "step,episode,return,cum_violations,cum_overrides,estimate_mean\n";
    for (const auto& e : metrics.episodes) {
        out << e.step << ',' << e.episode << ',' << std::fixed << std::setprecision(6) << e.ret << ','
            << e.cum_violations << ',' << e.cum_overrides << ',';
        if (e.estimate_mean) out << *e.estimate_mean;
        out << std::defaultfloat << '\n';
    }
}

void write_checkpoint(const std::filesystem::path& dir, const RunResult& result) {
    std::filesystem::create_directories(dir);
    const auto open = [&](const char* name) {
        std::ofstream f(dir / name);
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
        return f;
    };
    auto counts = open("counts.txt");
    write_counts(counts, result.counts);
    auto task = open("task_agent.txt");
    write_agent(task, result.task_agent);
    auto safe = open("safe_agent.txt");
    write_agent(safe, result.safe_agent);
    auto c1 = open("critic1.txt");
    write_values(c1, result.critics.v1());
    auto c2 = open("critic2.txt");
    write_values(c2, result.critics.v2());
}

RunSummary summarize(Variant variant, std::uint64_t seed, const RunMetrics& m) {
    return {variant,
            seed,
            m.cum_violations.size(),
            m.episodes.size(),
            m.total_violations(),
            m.total_overrides(),
            m.mean_episode_return(),
            m.best_episode_return()};
}

ComparisonTable run_comparison(const LabeledMdp& env, const Formula& formula, const TrainingConfig& base,
                               const std::vector<Variant>& variants, const std::vector<std::uint64_t>& seeds,
                               const std::function<void(Variant, std::uint64_t, const RunResult&)>& on_run) {
    if (seeds.empty()) throw std::invalid_argument("comparison needs at least one seed");
    ComparisonTable table;
    for (Variant v : variants) {
        for (std::uint64_t seed : seeds) {
            TrainingConfig cfg = base;
            cfg.variant = v;
            cfg.seed = seed;
            const auto result = run_training(env, formula, cfg);
            table.runs.push_back(summarize(v, seed, result.metrics));
            if (on_run) on_run(v, seed, result);
        }
    }
    return table;
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table) {
    out << "variant,seed,steps,episodes,violations,overrides,mean_return,best_return\n";
    out << std::fixed << std::setprecision(6);
    for (const auto& r : table.runs) {
        out << variant_name(r.variant) << ',' << r.seed << ',' << r.steps << ',' << r.episodes << ',' << r.violations
            << ',' << r.overrides << ',' << r.mean_return << ',' << r.best_return << '\n';
    }
    std::vector<Variant> order;
    for (const auto& r : table.runs) {
        if (std::find(order.begin(), order.end(), r.variant) == order.end()) order.push_back(r.variant);
    }
    for (Variant v : order) {
        std::vector<const RunSummary*> rows;
        for (const auto& r : table.runs) {
            if (r.variant == v) rows.push_back(&r);
        }
        const auto column = [&](auto get) {
            std::vector<double> xs;
            for (const auto* r : rows) xs.push_back(static_cast<double>(get(*r)));
            return xs;
        };
        const std::vector<std::vector<double>> cols = {
            column([](const RunSummary& r) { return r.steps; }),
            column([](const RunSummary& r) { return r.episodes; }),
            column([](const RunSummary& r) { return r.violations; }),
            column([](const RunSummary& r) { return r.overrides; }),
            column([](const RunSummary& r) { return r.mean_return; }),
            column([](const RunSummary& r) { return r.best_return; }),
        };
        for (const char* agg : {"mean", "min", "max"}) {
            out << variant_name(v) << ',' << agg;
            for (const auto& xs : cols) {
                double x;
                if (agg[1] == 'e') {
                    x = 0.0;
                    for (double y : xs) x += y;
                    x /= static_cast<double>(xs.size());
                } else if (agg[1] == 'i') {
                    x = *std::min_element(xs.begin(), xs.end());
                } else {
                    x = *std::max_element(xs.begin(), xs.end());
                }
                out << ',' << x;
            }
            out << '\n';
        }
    }
    out << std::defaultfloat;
}

}  // namespace ambs
