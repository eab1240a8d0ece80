#pragma once

#include <cstddef>
#include <vector>

#include "ambs/formula.hpp"
#include "ambs/markov.hpp"

namespace ambs {

/// P_{>=1-delta}( always_{<=horizon} formula ).
struct BoundedSafetyQuery {
    Formula formula;
    std::size_t horizon = 0;
    double delta = 0.0;

    void validate() const;
};

/// Largest |S|^n that enumerate_measure accepts.
inline constexpr double kEnumerationLimit = 1e7;

/// Per-state indicator s |= formula (1/0).
std::vector<char> satisfying_states(const Formula& formula, const std::vector<LabelSet>& labels);

/// mu_{s |= always_{<=n} formula}: P_0(s) = [s|=formula], P_k(s) = [s|=formula] sum_s' T(s'|s) P_{k-1}(s').
/// O(n |S|^2).
double exact_measure(const TransitionSystem& ts, const std::vector<LabelSet>& labels, const BoundedSafetyQuery& query,
                     State start);

/// The same recursion, returned for every start state.
std::vector<double> exact_measure_all(const TransitionSystem& ts, const std::vector<LabelSet>& labels,
                                      const BoundedSafetyQuery& query);

/// True iff the exact measure lies in the closed interval [1 - delta, 1].
bool check_delta_bounded_safety(const TransitionSystem& ts, const std::vector<LabelSet>& labels,
                                const BoundedSafetyQuery& query, State start);

/// Brute-force oracle: sums the probability of every length-n state sequence from
/// `start` whose states all satisfy the formula. Throws std::length_error when
/// |S|^n exceeds kEnumerationLimit.
double enumerate_measure(const TransitionSystem& ts, const std::vector<LabelSet>& labels,
                         const BoundedSafetyQuery& query, State start);

/// Measure of always_{<=n} when the first transition is forced through action `a`
/// of the MDP and the chain `ts` drives the remaining n-1 steps.
double exact_measure_after_action(const TransitionTable& dynamics, const TransitionSystem& ts,
                                  const std::vector<LabelSet>& labels, const BoundedSafetyQuery& query, State start,
                                  Action a);

}  // namespace ambs
