#include "ambs/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "ambs/bounds.hpp"
#include "ambs/config.hpp"
#include "ambs/mdp_io.hpp"
#include "ambs/pctl_check.hpp"
#include "ambs/shield.hpp"
#include "ambs/trainer.hpp"

namespace ambs {

namespace {

struct Globals {
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::string out_dir;
    bool quiet = false;
};

struct ModelArgs {
    std::string mdp;
    std::string policy = "uniform";
    std::string formula = "!hazard";
    std::size_t horizon = 10;
    std::size_t start = 0;
};

void add_model_args(CLI::App* cmd, ModelArgs& a) {
    cmd->add_option("--mdp", a.mdp, "MDP file")->required();
    cmd->add_option("--policy", a.policy, "policy file, or `uniform`");
    cmd->add_option("--formula", a.formula, "propositional safety formula");
    cmd->add_option("--horizon,-n", a.horizon, "bounded-safety horizon n");
    cmd->add_option("--start", a.start, "start state");
}

struct Loaded {
    LabeledMdp mdp;
    TransitionSystem ts;
    Formula formula;
};

Loaded load_model(const ModelArgs& a) {
    auto mdp = read_mdp_file(a.mdp);
    const auto policy = read_policy_file(a.policy, mdp.num_states(), mdp.num_actions());
    auto formula = parse_formula(a.formula);
    const auto missing = undeclared_atoms(formula, mdp.atoms());
    if (!missing.empty()) throw std::invalid_argument("formula atom `" + missing.front() + "` is not declared in " + a.mdp);
    if (a.start >= mdp.num_states()) throw std::out_of_range("start state out of range");
    auto ts = induce_transition_system(mdp, policy);
    return {std::move(mdp), std::move(ts), std::move(formula)};
}

int cmd_check(const ModelArgs& a, double delta, std::ostream& out) {
    const auto m = load_model(a);
    const BoundedSafetyQuery q{m.formula, a.horizon, delta};
    const double mu = exact_measure(m.ts, m.mdp.labels(), q, a.start);
    const bool sat = mu >= 1.0 - delta;
    out << "mu = " << std::fixed << std::setprecision(12) << mu << '\n' << (sat ? "SAT" : "UNSAT") << '\n';
    return sat ? kExitOk : kExitUnsat;
}

int cmd_estimate(const ModelArgs& a, std::size_t samples, const Globals& g, std::ostream& out) {
    const auto m = load_model(a);
    const auto safe = satisfying_states(m.formula, m.mdp.labels());
    std::size_t count = 0;
    if (a.horizon == 0) {
        count = safe[a.start] ? samples : 0;
    } else {
        ShieldConfig cfg;
        cfg.num_samples = samples;
        cfg.imagination_horizon = a.horizon;
        cfg.lookahead_horizon = a.horizon;
        cfg.use_critic_bootstrap = false;
        cfg.validate();
        std::vector<double> cost(safe.size());
        for (State s = 0; s < safe.size(); ++s) cost[s] = safe[s] ? 0.0 : cfg.cost_value;
        const ShieldModel model(m.ts, std::move(cost));
        count = estimate_bounded_safety(model, a.start, std::nullopt, cfg, g.seed, 0).satisfying_count;
    }
    out << "estimate = " << std::fixed << std::setprecision(12)
        << static_cast<double>(count) / static_cast<double>(samples) << '\n'
        << "samples = " << samples << '\n'
        << "count = " << count << '\n';
    return kExitOk;
}

struct BoundsArgs {
    double epsilon = 0.09;
    double delta = 0.01;
    std::optional<double> alpha;
    std::optional<std::size_t> states;
    std::optional<std::size_t> actions;
    std::optional<std::size_t> horizon;
};

int cmd_bounds(const BoundsArgs& b, std::ostream& out) {
    if (b.alpha || b.states || b.actions) {
        if (!(b.alpha && b.states && b.actions)) {
            throw std::invalid_argument("visit-count bound needs --alpha, --states and --actions together");
        }
    }
    // Evaluate everything before printing so an invalid parameter prints nothing.
    std::ostringstream text;
    text << "m_exact = " << sample_size_exact_model(b.epsilon, b.delta) << '\n';
    text << "m_learned = " << sample_size_learned_model(b.epsilon, b.delta) << '\n';
    text << std::setprecision(12);
    if (b.horizon) text << "alpha_required = " << required_alpha(b.epsilon, *b.horizon) << '\n';
    if (b.alpha) {
        text << "visit_count = " << visit_count_bound(*b.alpha, b.delta, *b.states, *b.actions) << '\n';
        text << "eta = " << negligibility_threshold(*b.alpha, *b.states, *b.actions) << '\n';
    }
    out << text.str();
    return kExitOk;
}

std::string run_name(Variant v, std::uint64_t seed) {
    return std::string(variant_name(v)) + "_seed" + std::to_string(seed);
}

int cmd_train(const std::string& config_path, bool compare, const Globals& g, std::ostream& out) {
    auto cfg = load_config_file(config_path);
    if (g.seed_given) cfg.seeds = {g.seed};
    if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
    if (compare) cfg.variants = {Variant::Unshielded, Variant::Shielded, Variant::SafeOnly};
    const auto env = cfg.environment();
    const auto formula = cfg.formula();
    const std::filesystem::path dir = cfg.out_dir;
    std::filesystem::create_directories(dir);

    ComparisonTable table;
    for (Variant v : cfg.variants) {
        for (std::uint64_t seed : cfg.seeds) {
            TrainingConfig tc = cfg.training;
            tc.variant = v;
            tc.seed = seed;
            const auto name = run_name(v, seed);
            std::ofstream log;
            TrainingObserver obs;
            if (cfg.decision_log && v == Variant::Shielded) {
                log.open(dir / (name + "_decisions.csv"));
                write_decision_log_header(log);
                obs.decision_log = &log;
            }
            const auto result = run_training(env, formula, tc, obs);
            if (!compare) {
                std::ofstream csv(dir / (name + ".csv"));
                write_metrics_csv(csv, result.metrics);
                if (cfg.checkpoints) write_checkpoint(dir / name, result);
            }
            table.runs.push_back(summarize(v, seed, result.metrics));
            if (!g.quiet) {
                const auto& r = table.runs.back();
                out << name << ": violations " << r.violations << ", overrides " << r.overrides << ", best return "
                    << std::fixed << std::setprecision(4) << r.best_return << std::defaultfloat << '\n';
            }
        }
    }
    std::ofstream agg(dir / (compare ? "comparison.csv" : "aggregate.csv"));
    write_comparison_csv(agg, table);

    std::map<std::string, std::pair<double, double>> per_variant;  // mean final violations, best return
    for (Variant v : cfg.variants) {
        double viol = 0.0, best = -1e300;
        for (const auto& r : table.runs) {
            if (r.variant != v) continue;
            viol += static_cast<double>(r.violations) / static_cast<double>(cfg.seeds.size());
            best = std::max(best, r.best_return);
        }
        out << variant_name(v) << ": final cum_violations (mean over seeds) " << std::fixed << std::setprecision(2)
            << viol << ", best episode return " << std::setprecision(4) << best << std::defaultfloat << '\n';
    }
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Model-based shielding for bounded safety in tabular MDPs", "ambs"};
    Globals g;
    auto* seed_opt = app.add_option("--seed", g.seed, "random seed (overrides the config seed list)");
    app.add_option("--out-dir", g.out_dir, "output directory for train/compare");
    app.add_flag("--quiet,-q", g.quiet, "suppress per-run progress lines");
    app.require_subcommand(1);
    app.fallthrough();

    ModelArgs check_args, estimate_args;
    double delta = 0.1;
    auto* check = app.add_subcommand("check", "exact bounded-safety measure of a policy-induced chain");
    add_model_args(check, check_args);
    check->add_option("--delta", delta, "violation budget Delta")->check(CLI::Range(0.0, 1.0));

    std::size_t samples = 512;
    auto* estimate = app.add_subcommand("estimate", "Monte-Carlo estimate of the bounded-safety measure");
    add_model_args(estimate, estimate_args);
    estimate->add_option("--samples,-m", samples, "number of sampled traces")->check(CLI::PositiveNumber);

    BoundsArgs b;
    double alpha = 0.0;
    std::size_t states = 0, actions = 0, horizon = 0;
    auto* bounds = app.add_subcommand("bounds", "PAC sample-size bounds");
    bounds->add_option("--epsilon", b.epsilon, "accuracy epsilon");
    bounds->add_option("--delta", b.delta, "failure probability delta");
    auto* alpha_opt = bounds->add_option("--alpha", alpha, "per-row TV accuracy alpha");
    auto* states_opt = bounds->add_option("--states", states, "number of states");
    auto* actions_opt = bounds->add_option("--actions", actions, "number of actions");
    auto* horizon_opt = bounds->add_option("--horizon,-n", horizon, "bounded-safety horizon");

    std::string train_config, compare_config;
    auto* train = app.add_subcommand("train", "train the configured variants and write metrics");
    train->add_option("config", train_config, "experiment config file")->required();
    auto* compare = app.add_subcommand("compare", "run unshielded, shielded and safe-only side by side");
    compare->add_option("config", compare_config, "experiment config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    g.seed_given = seed_opt->count() > 0;

    try {
        if (*check) return cmd_check(check_args, delta, out);
        if (*estimate) return cmd_estimate(estimate_args, samples, g, out);
        if (*bounds) {
            if (alpha_opt->count()) b.alpha = alpha;
            if (states_opt->count()) b.states = states;
            if (actions_opt->count()) b.actions = actions;
            if (horizon_opt->count()) b.horizon = horizon;
            return cmd_bounds(b, out);
        }
        if (*train) return cmd_train(train_config, false, g, out);
        if (*compare) return cmd_train(compare_config, true, g, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace ambs
