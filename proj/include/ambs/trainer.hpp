#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ambs/agents.hpp"
#include "ambs/formula.hpp"
#include "ambs/learner.hpp"
#include "ambs/markov.hpp"
#include "ambs/shield.hpp"

namespace ambs {

/// Bounded FIFO of real transitions.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return _entries.size(); }
    std::size_t capacity() const { return _capacity; }
    bool empty() const { return _entries.empty(); }
    /// Oldest entry first.
    const Transition& operator[](std::size_t i) const { return _entries[i]; }
    /// Every push ever made, evicted or not.
    std::uint64_t total_pushed() const { return _pushed; }

private:
    std::size_t _capacity;
    std::deque<Transition> _entries;
    std::uint64_t _pushed = 0;
};

enum class Variant { Unshielded, Shielded, SafeOnly };

std::string_view variant_name(Variant v);
/// Accepts "unshielded", "shielded", "safe-only".
std::optional<Variant> parse_variant(std::string_view name);

struct Schedule {
    std::size_t total_steps = 50000;
    /// K: environment steps between training iterations.
    std::size_t steps_per_iteration = 16;
    /// Imagined trajectories per training phase.
    std::size_t rollouts = 8;
    /// The task policy acts unshielded for this many initial steps in every variant.
    std::size_t warmup_steps = 1000;
    std::size_t max_episode_steps = 200;
    std::size_t buffer_capacity = 100000;
};

struct TrainingConfig {
    ShieldConfig shield;
    ActorCriticConfig task_agent;
    ActorCriticConfig safe_agent;
    double critic_lr = 0.1;
    double critic_update_fraction = 0.02;
    MleOptions mle;
    Schedule schedule;
    Variant variant = Variant::Shielded;
    std::uint64_t seed = 1;

    /// Every violated constraint across all nested configs.
    std::vector<std::string> violations() const;
};

struct EpisodeRecord {
    /// Global step count when the episode ended.
    std::size_t step = 0;
    std::size_t episode = 0;
    double ret = 0.0;
    std::size_t length = 0;
    std::size_t violations = 0;
    std::size_t cum_violations = 0;
    std::size_t cum_overrides = 0;
    /// Mean shield estimate over the episode's shield decisions; empty if none ran.
    std::optional<double> estimate_mean;
};

struct RunMetrics {
    std::vector<EpisodeRecord> episodes;
    /// Per environment step, after the step.
    std::vector<double> episode_return;
    std::vector<std::uint32_t> cum_violations;
    std::vector<std::uint32_t> cum_overrides;
    std::size_t shield_decisions = 0;

    std::size_t total_violations() const { return cum_violations.empty() ? 0 : cum_violations.back(); }
    std::size_t total_overrides() const { return cum_overrides.empty() ? 0 : cum_overrides.back(); }
    /// Over completed episodes; 0 when there are none.
    double mean_episode_return() const;
    double best_episode_return() const;
};

/// What an observer sees at each shield decision, before the environment steps.
struct DecisionContext {
    std::size_t step;
    State state;
    const ShieldDecision& decision;
    const TabularPolicy& task_policy;
    const ShieldModel& model;
};

struct TrainingObserver {
    std::function<void(const DecisionContext&)> on_decision;
    std::function<void(const SafetyCriticPair&)> on_critic_update;
    /// When set, one CSV row per shield decision.
    std::ostream* decision_log = nullptr;
};

struct RunResult {
    RunMetrics metrics;
    CountsModel counts;
    ActorCriticAgent task_agent;
    ActorCriticAgent safe_agent;
    SafetyCriticPair critics;
};

/// Interleaves model learning, imagination training, and (shielded) interaction for
/// schedule.total_steps real steps. Deterministic in config.seed.
RunResult run_training(const LabeledMdp& env, const Formula& formula, const TrainingConfig& config,
                       const TrainingObserver& observer = {});

/// `step,episode,return,cum_violations,cum_overrides,estimate_mean`, one row per completed episode.
void write_metrics_csv(std::ostream& out, const RunMetrics& metrics);

/// counts.txt, task_agent.txt, safe_agent.txt, critic1.txt, critic2.txt under `dir`.
void write_checkpoint(const std::filesystem::path& dir, const RunResult& result);

struct RunSummary {
    Variant variant;
    std::uint64_t seed;
    std::size_t steps;
    std::size_t episodes;
    std::size_t violations;
    std::size_t overrides;
    double mean_return;
    double best_return;
};

RunSummary summarize(Variant variant, std::uint64_t seed, const RunMetrics& metrics);

struct ComparisonTable {
    std::vector<RunSummary> runs;
};

/// Every (variant, seed) pair from `base` with the variant and seed overridden.
/// `on_run` sees each finished run (for per-run files).
ComparisonTable run_comparison(const LabeledMdp& env, const Formula& formula, const TrainingConfig& base,
                               const std::vector<Variant>& variants, const std::vector<std::uint64_t>& seeds,
                               const std::function<void(Variant, std::uint64_t, const RunResult&)>& on_run = {});

/// Per-run rows, then mean/min/max rows per variant (seed column holds the aggregate name).
void write_comparison_csv(std::ostream& out, const ComparisonTable& table);

}  // namespace ambs
