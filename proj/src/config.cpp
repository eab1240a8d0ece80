#include "ambs/config.hpp"

#include <boost/program_options.hpp>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ambs/mdp_io.hpp"

namespace po = boost::program_options;

namespace ambs {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  " + p;
    return msg;
}

std::optional<Cell> parse_cell(const std::string& text) {
    std::size_t x, y;
    char comma;
    std::istringstream in(text);
    if (!(in >> x >> comma >> y) || comma != ',') return std::nullopt;
    std::string rest;
    if (in >> rest) return std::nullopt;
    return Cell{x, y};
}

std::optional<Direction> parse_direction(const std::string& text) {
    if (text == "up") return Direction::Up;
    if (text == "down") return Direction::Down;
    if (text == "left") return Direction::Left;
    if (text == "right") return Direction::Right;
    return std::nullopt;
}

std::vector<std::string> words(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

bool parse_bool(const std::string& text, bool& out) {
    if (text == "true" || text == "1" || text == "yes") return out = true, true;
    if (text == "false" || text == "0" || text == "no") return out = false, true;
    return false;
}

/// Keys bound to size_t fields.
const std::set<std::string> kCountKeys{
    "environment.width",        "environment.height",           "shield.samples",
    "shield.imagination_horizon", "shield.lookahead_horizon",   "schedule.total_steps",
    "schedule.steps_per_iteration", "schedule.rollouts",         "schedule.warmup_steps",
    "schedule.max_episode_steps", "schedule.buffer_capacity",
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), _problems{std::move(problems)} {}

LabeledMdp ExperimentConfig::environment() const {
    if (!mdp_path.empty()) return read_mdp_file(mdp_path);
    return build_gridworld(gridworld);
}

Formula ExperimentConfig::formula() const { return parse_formula(formula_text); }

ExperimentConfig load_config(std::istream& in, const std::string& source, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    auto& t = cfg.training;
    auto& sh = t.shield;
    auto& sch = t.schedule;
    std::string hazards, conveyors, start, goal, seeds, variants, fallback, critic_bootstrap, decision_log,
        checkpoints;

    po::options_description d;
    // clang-format off
    d.add_options()
        ("environment.mdp", po::value(&cfg.mdp_path))
        ("environment.width", po::value(&cfg.gridworld.width))
        ("environment.height", po::value(&cfg.gridworld.height))
        ("environment.start", po::value(&start))
        ("environment.goal", po::value(&goal))
        ("environment.hazards", po::value(&hazards))
        ("environment.conveyors", po::value(&conveyors))
        ("environment.slip", po::value(&cfg.gridworld.slip_prob))
        ("environment.step_reward", po::value(&cfg.gridworld.step_reward))
        ("environment.goal_reward", po::value(&cfg.gridworld.goal_reward))
        ("safety.formula", po::value(&cfg.formula_text))
        ("shield.delta", po::value(&sh.delta))
        ("shield.epsilon", po::value(&sh.epsilon))
        ("shield.samples", po::value(&sh.num_samples))
        ("shield.imagination_horizon", po::value(&sh.imagination_horizon))
        ("shield.lookahead_horizon", po::value(&sh.lookahead_horizon))
        ("shield.cost_value", po::value(&sh.cost_value))
        ("shield.critic_bootstrap", po::value(&critic_bootstrap))
        ("shield.failure_prob", po::value(&sh.failure_prob))
        ("agent.gamma", po::value(&sh.gamma))
        ("agent.actor_lr", po::value(&t.task_agent.actor_lr))
        ("agent.critic_lr", po::value(&t.task_agent.critic_lr))
        ("agent.lambda", po::value(&t.task_agent.lambda))
        ("agent.entropy_scale", po::value(&t.task_agent.entropy_scale))
        ("critic.lr", po::value(&t.critic_lr))
        ("critic.update_fraction", po::value(&t.critic_update_fraction))
        ("model.fallback", po::value(&fallback))
        ("model.smoothing", po::value(&t.mle.smoothing))
        ("schedule.total_steps", po::value(&sch.total_steps))
        ("schedule.steps_per_iteration", po::value(&sch.steps_per_iteration))
        ("schedule.rollouts", po::value(&sch.rollouts))
        ("schedule.warmup_steps", po::value(&sch.warmup_steps))
        ("schedule.max_episode_steps", po::value(&sch.max_episode_steps))
        ("schedule.buffer_capacity", po::value(&sch.buffer_capacity))
        ("experiment.seeds", po::value(&seeds))
        ("experiment.variants", po::value(&variants))
        ("experiment.out_dir", po::value(&cfg.out_dir))
        ("experiment.decision_log", po::value(&decision_log))
        ("experiment.checkpoints", po::value(&checkpoints));
    // clang-format on

    std::vector<std::string> problems;
    po::parsed_options parsed(&d);
    try {
        parsed = po::parse_config_file(in, d, true);
    } catch (const po::error& e) {
        throw ConfigError({source + ": " + e.what()});
    }
    // One option at a time, so a bad value does not hide the problems after it.
    po::variables_map vm;
    for (const auto& opt : parsed.options) {
        if (opt.unregistered) {
            problems.push_back("unknown key `" + opt.string_key + "`");
            continue;
        }
        // lexical_cast wraps "-3" into a huge size_t instead of failing.
        if (kCountKeys.contains(opt.string_key) && !opt.value.empty() && opt.value.front().find('-') != std::string::npos) {
            problems.push_back(opt.string_key + ": expected a nonnegative integer, got `" + opt.value.front() + "`");
            continue;
        }
        po::parsed_options one(&d);
        one.options.push_back(opt);
        try {
            po::store(one, vm);
        } catch (const po::error& e) {
            problems.push_back(opt.string_key + ": " + e.what());
        }
    }
    po::notify(vm);

    if (!cfg.mdp_path.empty() && std::filesystem::path(cfg.mdp_path).is_relative()) {
        cfg.mdp_path = (base_dir / cfg.mdp_path).string();
    }

    if (!start.empty()) {
        if (auto c = parse_cell(start)) cfg.gridworld.start = *c;
        else problems.push_back("environment.start: expected `x,y`, got `" + start + "`");
    }
    if (!goal.empty()) {
        if (auto c = parse_cell(goal)) cfg.gridworld.goal = *c;
        else problems.push_back("environment.goal: expected `x,y`, got `" + goal + "`");
    }
    if (!hazards.empty()) {
        cfg.gridworld.hazards.clear();
        for (const auto& w : words(hazards)) {
            if (w == "none") continue;
            if (auto c = parse_cell(w)) cfg.gridworld.hazards.push_back(*c);
            else problems.push_back("environment.hazards: bad cell `" + w + "`");
        }
    }
    if (!conveyors.empty()) {
        cfg.gridworld.conveyors.clear();
        for (const auto& w : words(conveyors)) {
            if (w == "none") continue;
            const auto colon = w.find(':');
            const auto c = colon == std::string::npos ? std::nullopt : parse_cell(w.substr(0, colon));
            const auto dir = colon == std::string::npos ? std::nullopt : parse_direction(w.substr(colon + 1));
            if (c && dir) cfg.gridworld.conveyors.emplace_back(*c, *dir);
            else problems.push_back("environment.conveyors: expected `x,y:direction`, got `" + w + "`");
        }
    }
    if (!critic_bootstrap.empty() && !parse_bool(critic_bootstrap, sh.use_critic_bootstrap)) {
        problems.push_back("shield.critic_bootstrap: expected true/false");
    }
    if (!decision_log.empty() && !parse_bool(decision_log, cfg.decision_log)) {
        problems.push_back("experiment.decision_log: expected true/false");
    }
    if (!checkpoints.empty() && !parse_bool(checkpoints, cfg.checkpoints)) {
        problems.push_back("experiment.checkpoints: expected true/false");
    }
    if (!fallback.empty()) {
        if (fallback == "uniform") t.mle.fallback = UnvisitedFallback::Uniform;
        else if (fallback == "self-loop") t.mle.fallback = UnvisitedFallback::SelfLoop;
        else problems.push_back("model.fallback: expected uniform or self-loop");
    }
    if (!seeds.empty()) {
        cfg.seeds.clear();
        for (const auto& w : words(seeds)) {
            try {
                std::size_t used = 0;
                const auto v = std::stoull(w, &used);
                if (used != w.size()) throw std::invalid_argument(w);
                cfg.seeds.push_back(v);
            } catch (const std::exception&) {
                problems.push_back("experiment.seeds: bad seed `" + w + "`");
            }
        }
    }
    if (cfg.seeds.empty()) problems.emplace_back("experiment.seeds must list at least one seed");
    if (!variants.empty()) {
        cfg.variants.clear();
        for (const auto& w : words(variants)) {
            if (auto v = parse_variant(w)) cfg.variants.push_back(*v);
            else problems.push_back("experiment.variants: unknown variant `" + w + "`");
        }
    }
    if (cfg.variants.empty()) problems.emplace_back("experiment.variants must list at least one variant");

    // Reward and cost share one discount.
    t.task_agent.gamma = sh.gamma;
    cfg.gridworld.gamma = sh.gamma;
    t.safe_agent = t.task_agent;
    for (auto& v : t.violations()) problems.push_back(std::move(v));

    std::optional<Formula> formula;
    try {
        formula = parse_formula(cfg.formula_text);
    } catch (const std::exception& e) {
        problems.push_back(std::string("safety.formula: ") + e.what());
    }
    if (cfg.mdp_path.empty()) {
        try {
            cfg.gridworld.validate();
        } catch (const std::exception& e) {
            problems.push_back(std::string("environment: ") + e.what());
        }
    }
    if (problems.empty()) {
        try {
            const auto env = cfg.environment();
            for (const auto& a : undeclared_atoms(*formula, env.atoms())) {
                problems.push_back("safety.formula: atom `" + a + "` is not declared by the environment");
            }
        } catch (const std::exception& e) {
            problems.push_back(std::string("environment: ") + e.what());
        }
    }
    if (!problems.empty()) {
        for (auto& p : problems) p = source + ": " + p;
        throw ConfigError(std::move(problems));
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path + ": cannot open config file"});
    return load_config(in, path, std::filesystem::path(path).parent_path());
}

}  // namespace ambs
