#pragma once

// Data-parallel kernels. Every kernel has a serial reference implementation
// kept for tests and benchmarks, and an OpenMP implementation used by the
// library. Both produce bitwise-identical results except where noted.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ambs/markov.hpp"

namespace ambs {
struct ShieldConfig;
}

namespace ambs::kernels {

/// P_n(s) for every s, where P_0 = safe and P_k(s) = safe[s] * sum_s' chain(s,s') P_{k-1}(s').
std::vector<double> bounded_safety_serial(const Matrix& chain, std::span<const char> safe, std::size_t n);
std::vector<double> bounded_safety_parallel(const Matrix& chain, std::span<const char> safe, std::size_t n);

/// Probability mass of all length-n sequences from `start` that stay in `safe`,
/// by explicit enumeration of all |S|^n sequences. The parallel version splits on
/// the first successor and agrees with the serial one to rounding (summation order differs).
double enumerate_safe_mass_serial(const Matrix& chain, std::span<const char> safe, State start, std::size_t n);
double enumerate_safe_mass_parallel(const Matrix& chain, std::span<const char> safe, State start, std::size_t n);

/// Everything one batch of Monte-Carlo shield traces needs. Spans must outlive the call.
struct TraceBatch {
    /// Cumulative p(.|s0,a0) for a forced first action; empty draws the first step from the chain.
    std::span<const double> first_step_cdf;
    /// Row-major |S|x|S| cumulative rows of the chain that drives the trace.
    std::span<const double> chain_cdf;
    std::size_t num_states = 0;
    /// c(s) per state.
    std::span<const double> state_cost;
    /// Twin safety-critic tables; read only when the config bootstraps with critics.
    std::span<const double> critic1;
    std::span<const double> critic2;
    State start = 0;
    std::uint64_t seed = 0;
    /// Counter component of the per-sample stream ids.
    std::uint64_t step = 0;
};

/// Number of the first `m` sampled traces (sample i uses stream (seed, ShieldTrace, step, i))
/// whose cost passes trace_satisfies. Identical between the two implementations.
std::size_t count_satisfying_traces_serial(const TraceBatch& batch, const ShieldConfig& config, std::size_t m);
std::size_t count_satisfying_traces_parallel(const TraceBatch& batch, const ShieldConfig& config, std::size_t m);

}  // namespace ambs::kernels
