#include "ambs/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "ambs/pctl_check.hpp"
#include "ambs/random.hpp"
#include "ambs/shield.hpp"

namespace ambs::kernels {

namespace {

void check_dp_inputs(const Matrix& chain, std::span<const char> safe) {
    if (chain.rows() != chain.cols() || safe.size() != chain.rows()) {
        throw std::invalid_argument("bounded_safety: chain and safe set sizes disagree");
    }
}

}  // namespace

std::vector<double> bounded_safety_serial(const Matrix& chain, std::span<const char> safe, std::size_t n) {
    check_dp_inputs(chain, safe);
    const std::size_t ns = chain.rows();
    std::vector<double> cur(ns), next(ns);
    for (State s = 0; s < ns; ++s) cur[s] = safe[s] ? 1.0 : 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        for (State s = 0; s < ns; ++s) {
            double acc = 0.0;
            if (safe[s]) {
                auto row = chain.row(s);
                for (State u = 0; u < ns; ++u) acc += row[u] * cur[u];
            }
            next[s] = acc;
        }
        cur.swap(next);
    }
    return cur;
}

std::vector<double> bounded_safety_parallel(const Matrix& chain, std::span<const char> safe, std::size_t n) {
    check_dp_inputs(chain, safe);
    const std::size_t ns = chain.rows();
    std::vector<double> cur(ns), next(ns);
    for (State s = 0; s < ns; ++s) cur[s] = safe[s] ? 1.0 : 0.0;
    const auto count = static_cast<std::ptrdiff_t>(ns);
    for (std::size_t k = 0; k < n; ++k) {
        // Each row reduces in the same order as the serial loop.
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            const auto s = static_cast<State>(i);
            double acc = 0.0;
            if (safe[s]) {
                auto row = chain.row(s);
                for (State u = 0; u < ns; ++u) acc += row[u] * cur[u];
            }
            next[s] = acc;
        }
        cur.swap(next);
    }
    return cur;
}

namespace {

/// Odometer over every sequence s_{first_depth+1..n} with the first `prefix` fixed.
double enumerate_from(const Matrix& chain, std::span<const char> safe, const std::vector<State>& prefix, std::size_t n) {
    const std::size_t ns = chain.rows();
    std::vector<State> seq(n + 1, 0);
    for (std::size_t i = 0; i < prefix.size(); ++i) seq[i] = prefix[i];
    const std::size_t free_from = prefix.size();
    double total = 0.0;
    while (true) {
        double w = 1.0;
        bool ok = true;
        for (std::size_t i = 0; i <= n; ++i) {
            if (!safe[seq[i]]) {
                ok = false;
                break;
            }
            if (i > 0) w *= chain(seq[i - 1], seq[i]);
        }
        if (ok) total += w;
        // Advance the odometer over positions free_from..n.
        std::size_t pos = n + 1;
        while (pos > free_from) {
            --pos;
            if (++seq[pos] < ns) break;
            seq[pos] = 0;
            if (pos == free_from) return total;
        }
        if (free_from > n) return total;
    }
}

void check_enumeration(const Matrix& chain, std::span<const char> safe, State start, std::size_t n) {
    check_dp_inputs(chain, safe);
    if (start >= chain.rows()) throw std::out_of_range("enumeration start out of range");
    if (std::pow(static_cast<double>(chain.rows()), static_cast<double>(n)) > kEnumerationLimit) {
        throw std::length_error("enumeration guard: |S|^n exceeds 1e7");
    }
}

}  // namespace

double enumerate_safe_mass_serial(const Matrix& chain, std::span<const char> safe, State start, std::size_t n) {
    check_enumeration(chain, safe, start, n);
    return enumerate_from(chain, safe, {start}, n);
}

double enumerate_safe_mass_parallel(const Matrix& chain, std::span<const char> safe, State start, std::size_t n) {
    check_enumeration(chain, safe, start, n);
    if (n == 0) return enumerate_from(chain, safe, {start}, 0);
    const std::size_t ns = chain.rows();
    std::vector<double> partial(ns, 0.0);
    const auto count = static_cast<std::ptrdiff_t>(ns);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        partial[static_cast<std::size_t>(i)] = enumerate_from(chain, safe, {start, static_cast<State>(i)}, n);
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

namespace {

class TraceScorer {
public:
    TraceScorer(const TraceBatch& batch, const ShieldConfig& config)
        : _b{batch}, _cfg{config}, _h{config.imagination_horizon}, _costs(_h), _gammas(_h) {}

    bool satisfied(std::size_t sample) {
        if (_h == 0) return trace_satisfies(0.0, _cfg);
        SplitMix64 rng = make_stream(_b.seed, Stream::ShieldTrace, _b.step, sample);
        const std::size_t ns = _b.num_states;
        State s = _b.start;
        bool alive = true;
        std::size_t t = 0;
        for (; t < _h && alive; ++t) {
            if (t == 0 && !_b.first_step_cdf.empty()) {
                s = sample_cumulative(_b.first_step_cdf, rng.uniform());
            } else {
                s = sample_cumulative(_b.chain_cdf.subspan(s * ns, ns), rng.uniform());
            }
            _gammas[t] = _cfg.gamma;
            _costs[t] = _b.state_cost[s];
            if (_costs[t] > 0.0) alive = false;
        }
        // Past the first violation the discount is 0; sampling further cannot change the cost.
        for (; t < _h; ++t) {
            _gammas[t] = 0.0;
            _costs[t] = 0.0;
        }
        double cost;
        if (_cfg.use_critic_bootstrap) {
            // A violation before H zeroes gamma_H and drops the critic term. A violation
            // exactly at H is a known terminal cost, so it stands in for both critics.
            double v1 = 0.0, v2 = 0.0;
            if (alive) {
                v1 = _b.critic1[s];
                v2 = _b.critic2[s];
            } else if (_gammas[_h - 1] > 0.0) {
                v1 = v2 = _b.state_cost[s];
            }
            cost = trace_cost_with_critic(std::span<const double>(_costs).first(_h - 1), _gammas, v1, v2);
        } else {
            cost = trace_cost(_costs, _gammas);
        }
        return trace_satisfies(cost, _cfg);
    }

private:
    const TraceBatch& _b;
    const ShieldConfig& _cfg;
    std::size_t _h;
    std::vector<double> _costs;
    std::vector<double> _gammas;
};

void check_batch(const TraceBatch& b, const ShieldConfig& cfg) {
    if (b.num_states == 0 || b.chain_cdf.size() != b.num_states * b.num_states || b.state_cost.size() != b.num_states) {
        throw std::invalid_argument("trace batch: inconsistent sizes");
    }
    if (b.start >= b.num_states) throw std::out_of_range("trace batch: start out of range");
    if (cfg.use_critic_bootstrap) {
        if (cfg.imagination_horizon < 2) throw std::invalid_argument("critic bootstrapping needs H >= 2");
        if (b.critic1.size() != b.num_states || b.critic2.size() != b.num_states) throw std::invalid_argument("critic bootstrapping needs critic tables");
    }
}

}  // namespace

std::size_t count_satisfying_traces_serial(const TraceBatch& batch, const ShieldConfig& config, std::size_t m) {
    check_batch(batch, config);
    TraceScorer scorer(batch, config);
    std::size_t count = 0;
    for (std::size_t i = 0; i < m; ++i) count += scorer.satisfied(i) ? 1 : 0;
    return count;
}

std::size_t count_satisfying_traces_parallel(const TraceBatch& batch, const ShieldConfig& config, std::size_t m) {
    check_batch(batch, config);
    const auto total = static_cast<std::ptrdiff_t>(m);
    std::size_t count = 0;
#pragma omp parallel reduction(+ : count)
    {
        TraceScorer scorer(batch, config);
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < total; ++i) {
            count += scorer.satisfied(static_cast<std::size_t>(i)) ? 1 : 0;
        }
    }
    return count;
}

}  // namespace ambs::kernels
