// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ambs/bounds.hpp"
#include "ambs/cli.hpp"
#include "ambs/learner.hpp"
#include "ambs/pctl_check.hpp"
#include "ambs/shield.hpp"
#include "ambs/trainer.hpp"
#include "oracles.hpp"

using namespace ambs;
namespace fs = std::filesystem;

namespace {

const Formula kSafe = parse_formula("!hazard");

struct Outcome {
    bool pass;
    std::string detail;
};

std::vector<LabelSet> labels_of(const std::vector<char>& bad) {
    std::vector<LabelSet> out(bad.size());
    for (State s = 0; s < bad.size(); ++s) {
        if (bad[s]) out[s].insert("hazard");
    }
    return out;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(1001);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t ns = 1 + rng() % 6, n = rng() % 7;
        const TransitionSystem ts(oracle::to_matrix(oracle::random_chain(rng, ns, 0.3)));
        std::vector<char> bad(ns);
        for (auto& b : bad) b = rng() % 3 == 0;
        const auto labels = labels_of(bad);
        const BoundedSafetyQuery q{kSafe, n, 0.1};
        for (State s = 0; s < ns; ++s) {
            worst = std::max(worst, std::abs(exact_measure(ts, labels, q, s) - enumerate_measure(ts, labels, q, s)));
        }
    }
    return {worst <= 1e-12, fmt("200 instances, max |DP - enumeration| = %.3g (tol 1e-12)", worst)};
}

/// Safe states 0 and 1 mix with weight `a` and both leak into the hazard at rate q,
/// so the n-step measure from either is (1-q)^n.
TransitionSystem leaky_pair(double q, double a) {
    Matrix m(3, 3);
    m(0, 0) = (1 - q) * a;
    m(0, 1) = (1 - q) * (1 - a);
    m(1, 0) = (1 - q) * (1 - a);
    m(1, 1) = (1 - q) * a;
    m(0, 2) = m(1, 2) = q;
    m(2, 2) = 1.0;
    return TransitionSystem(m);
}

Outcome hoeffding_pac() {
    const double eps = 0.1, delta = 0.05;
    const auto m = sample_size_exact_model(eps, delta);
    const std::size_t n = 10, rounds = 400;
    const double limit = oracle::binomial_slack(delta, rounds);
    const std::vector<double> targets{0.2, 0.4, 0.6, 0.8, 0.95};
    const std::vector<char> bad{0, 0, 1};
    ShieldConfig cfg;
    cfg.use_critic_bootstrap = false;
    cfg.imagination_horizon = cfg.lookahead_horizon = n;
    cfg.num_samples = m;
    bool pass = true;
    std::string per;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        const auto ts = leaky_pair(1.0 - std::pow(targets[k], 1.0 / static_cast<double>(n)), 0.3 + 0.1 * k);
        const double mu = exact_measure(ts, labels_of(bad), {kSafe, n, delta}, 0);
        const ShieldModel model(ts, {0.0, 0.0, 10.0});
        std::size_t misses = 0;
        for (std::size_t r = 0; r < rounds; ++r) {
            misses += std::abs(estimate_bounded_safety(model, 0, std::nullopt, cfg, 2000 + k, r).estimate - mu) > eps;
        }
        const double frac = static_cast<double>(misses) / rounds;
        pass = pass && frac <= limit;
        per += fmt(" mu=%.2f:%.4f", mu, frac);
    }
    return {pass, fmt("m = %llu, miss fraction per chain%s (limit %.4f)", static_cast<unsigned long long>(m),
                      per.c_str(), limit)};
}

Outcome visit_count_pac() {
    const double alpha = 0.3, delta = 0.1;
    const std::size_t ns = 4, na = 2, trials = 200;
    const auto m = visit_count_bound(alpha, delta, ns, na);
    const double eta = negligibility_threshold(alpha, ns, na);
    std::mt19937_64 rng(1003);
    std::size_t misses = 0;
    double worst_all = 0.0, worst_eta = 0.0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const auto p = oracle::random_dynamics(rng, ns, na);
        const auto pi = oracle::random_policy(rng, ns, na);
        CountsModel counts(ns, na);
        for (State s = 0; s < ns; ++s) {
            for (Action a = 0; a < na; ++a) {
                const auto row = p.row(s, a);
                std::discrete_distribution<std::size_t> next(row.begin(), row.end());
                for (std::uint64_t i = 0; i < m; ++i) counts.update(s, a, next(rng));
            }
        }
        const auto p_hat = mle_dynamics(counts);
        const auto t = oracle::mixture(p, pi);
        const auto t_hat = oracle::to_rows(learned_transition_system(counts, pi).chain());
        bool bad = false;
        for (State s = 0; s < ns; ++s) {
            bad = bad || oracle::tv(t[s], t_hat[s]) > alpha;
            for (Action a = 0; a < na; ++a) {
                const double d = tv_distance(p.row(s, a), p_hat.row(s, a));
                worst_all = std::max(worst_all, d);
                if (pi(s, a) >= eta) worst_eta = std::max(worst_eta, d);
            }
        }
        misses += bad;
    }
    const double frac = static_cast<double>(misses) / trials, limit = oracle::binomial_slack(delta, trials);
    return {frac <= limit, fmt("m = %llu per pair, miss fraction %.4f (limit %.4f); max per-action TV %.4f, "
                               "with pi >= eta=%.4f: %.4f",
                               static_cast<unsigned long long>(m), frac, limit, worst_all, eta, worst_eta)};
}

Outcome error_amplification() {
    std::mt19937_64 rng(1004);
    std::size_t violations = 0, checks = 0;
    double worst_ratio = 0.0;
    for (double alpha : {0.01, 0.05}) {
        for (int pair = 0; pair < 50; ++pair) {
            const std::size_t ns = 2 + rng() % 7;
            const auto t = oracle::random_chain(rng, ns, 0.3);
            const auto q = oracle::random_chain(rng, ns);
            auto t_hat = t;
            for (State s = 0; s < ns; ++s) {
                for (State n = 0; n < ns; ++n) t_hat[s][n] = (1 - alpha) * t[s][n] + alpha * q[s][n];
            }
            double row_tv = 0.0;
            for (State s = 0; s < ns; ++s) row_tv = std::max(row_tv, oracle::tv(t[s], t_hat[s]));
            if (row_tv > alpha + 1e-15) ++violations;
            const auto init = oracle::random_distribution(rng, ns);
            const TransitionSystem a(oracle::to_matrix(t)), b(oracle::to_matrix(t_hat));
            for (std::size_t step = 1; step <= 20; ++step) {
                const double d = tv_distance(marginal_distribution(a, init, step), marginal_distribution(b, init, step));
                ++checks;
                if (d > alpha * static_cast<double>(step) + 1e-9) ++violations;
                worst_ratio = std::max(worst_ratio, d / (alpha * static_cast<double>(step)));
            }
        }
    }
    return {violations == 0, fmt("100 pairs, %zu (pair, t) checks, %zu violations, max TV_t/(alpha t) = %.4f", checks,
                                 violations, worst_ratio)};
}

Outcome trace_equivalence() {
    std::mt19937_64 rng(1005);
    std::size_t traces = 0, counterexamples = 0;
    const std::vector<std::pair<std::size_t, std::size_t>> shapes{{4, 3}, {5, 4}, {3, 4}};
    for (const auto& [ns, h] : shapes) {
        const auto chain = oracle::random_chain(rng, ns, 0.2);
        std::vector<char> bad(ns, 0);
        bad[ns - 1] = 1;
        bad[1] = 1;
        ShieldConfig cfg;
        cfg.use_critic_bootstrap = false;
        cfg.imagination_horizon = cfg.lookahead_horizon = h;
        // Every state sequence of length H that the chain can produce from any start.
        std::vector<State> seq(h + 1, 0);
        std::function<void(std::size_t)> walk = [&](std::size_t depth) {
            if (depth > h) {
                std::vector<double> costs(h), gammas(h);
                bool alive = true, all_safe = true;
                for (std::size_t t = 1; t <= h; ++t) {
                    gammas[t - 1] = alive ? cfg.gamma : 0.0;
                    costs[t - 1] = alive && bad[seq[t]] ? cfg.cost_value : 0.0;
                    if (bad[seq[t]]) alive = all_safe = false;
                }
                ++traces;
                counterexamples += trace_satisfies(trace_cost(costs, gammas), cfg) != all_safe;
                return;
            }
            for (State s = 0; s < ns; ++s) {
                if (depth > 0 && chain[seq[depth - 1]][s] == 0.0) continue;
                seq[depth] = s;
                walk(depth + 1);
            }
        };
        walk(0);
    }
    return {counterexamples == 0 && traces > 0, fmt("%zu traces over 3 chains, %zu counterexamples", traces, counterexamples)};
}

TrainingConfig gridworld_config(std::uint64_t seed, std::size_t steps) {
    TrainingConfig cfg;
    cfg.seed = seed;
    cfg.schedule.total_steps = steps;
    cfg.shield.num_samples = 128;
    return cfg;
}

Outcome instrumented_soundness() {
    const auto mdp = build_gridworld(default_gridworld());
    std::size_t decisions = 0, close = 0, accepted_close = 0, unsound = 0;
    for (std::uint64_t seed : {1, 2}) {
        auto cfg = gridworld_config(seed, 7000);
        // Plain trace costs, so the estimate targets the exact H-step measure.
        cfg.shield.use_critic_bootstrap = false;
        const BoundedSafetyQuery q{kSafe, cfg.shield.imagination_horizon, cfg.shield.delta};
        TrainingObserver obs;
        obs.on_decision = [&](const DecisionContext& ctx) {
            const auto ts = induce_transition_system(mdp, ctx.task_policy);
            const double mu = exact_measure_after_action(mdp.transition(), ts, mdp.labels(), q, ctx.state,
                                                         ctx.decision.proposed);
            ++decisions;
            if (std::abs(ctx.decision.estimate - mu) > cfg.shield.epsilon) return;
            ++close;
            if (!cfg.shield.accepts(ctx.decision.estimate)) return;
            ++accepted_close;
            unsound += mu < 1.0 - cfg.shield.delta;
        };
        run_training(mdp, kSafe, cfg, obs);
    }
    return {decisions >= 10000 && unsound == 0,
            fmt("%zu decisions, %zu within epsilon, %zu of those accepted, %zu with mu_exact < 1 - Delta", decisions,
                close, accepted_close, unsound)};
}

Outcome critic_bounds() {
    const auto mdp = build_gridworld(default_gridworld());
    const auto cfg = gridworld_config(3, 50000);
    const double c = cfg.shield.cost_value;
    std::size_t updates = 0, outside = 0;
    TrainingObserver obs;
    obs.on_critic_update = [&](const SafetyCriticPair& pair) {
        ++updates;
        for (const auto* v : {&pair.v1(), &pair.v2(), &pair.target1(), &pair.target2()}) {
            for (double x : *v) outside += !(x >= 0.0 && x <= c);
        }
    };
    const auto r = run_training(mdp, kSafe, cfg, obs);
    const double top = std::max(*std::max_element(r.critics.v1().begin(), r.critics.v1().end()),
                                *std::max_element(r.critics.v2().begin(), r.critics.v2().end()));
    return {updates > 0 && outside == 0,
            fmt("%zu critic updates over 50000 steps, %zu values outside [0, C]; final max %.4f", updates, outside, top)};
}

Outcome end_to_end() {
    const auto mdp = build_gridworld(default_gridworld());
    std::vector<std::uint64_t> seeds(10);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i + 1;
    const auto table = run_comparison(mdp, kSafe, gridworld_config(0, 50000), {Variant::Shielded, Variant::Unshielded}, seeds);
    double viol[2] = {}, ret[2] = {};
    for (const auto& r : table.runs) {
        const int k = r.variant == Variant::Shielded ? 0 : 1;
        viol[k] += static_cast<double>(r.violations) / seeds.size();
        ret[k] += r.mean_return / seeds.size();
    }
    const bool pass = viol[0] <= 0.5 * viol[1] && ret[0] >= 0.9 * ret[1];
    return {pass, fmt("10 seeds: violations shielded %.2f vs unshielded %.2f (ratio %.3f, limit 0.5); "
                      "mean return %.4f vs %.4f (ratio %.3f, limit 0.9)",
                      viol[0], viol[1], viol[0] / viol[1], ret[0], ret[1], ret[0] / ret[1])};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism(const std::string& config) {
    const auto base = fs::temp_directory_path() / "ambs_acceptance_determinism";
    fs::remove_all(base);
    const std::string a = (base / "a").string(), b = (base / "b").string();
    std::ostringstream sink;
    const auto run = [&](const std::string& out) {
        std::vector<std::string> args{"ambs", "train", config, "--seed", "11", "--out-dir", out, "--quiet"};
        std::vector<const char*> argv;
        for (const auto& s : args) argv.push_back(s.c_str());
        return run_cli(static_cast<int>(argv.size()), argv.data(), sink, sink);
    };
    if (run(a) != kExitOk || run(b) != kExitOk) return {false, "train failed: " + sink.str()};
    std::size_t files = 0, csvs = 0, differ = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        ++files;
        csvs += e.path().extension() == ".csv";
        differ += slurp(e.path()) != slurp(fs::path(b) / fs::relative(e.path(), a));
    }
    fs::remove_all(base);
    return {csvs > 0 && differ == 0, fmt("%zu files (%zu CSVs) compared byte for byte, %zu differ", files, csvs, differ)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::string config = argc > 1 ? argv[1] : "configs/gridworld.ini";
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"oracle equivalence", 10, oracle_equivalence},
        {"Hoeffding PAC estimate", 30, hoeffding_pac},
        {"visit-count PAC model", 60, visit_count_pac},
        {"error amplification", 10, error_amplification},
        {"trace cost equivalence", 0, trace_equivalence},
        {"instrumented soundness", 0, instrumented_soundness},
        {"critic boundedness", 0, critic_bounds},
        {"end-to-end gridworld", 900, end_to_end},
        {"determinism", 0, [&] { return determinism(config); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0 && secs > c.budget_s) {
            o.pass = false;
            o.detail += fmt(" [over the %.0f s budget]", c.budget_s);
        }
        failed += !o.pass;
        std::printf("%s %zu %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
