#include "ambs/pctl_check.hpp"

#include <stdexcept>

#include "ambs/kernels.hpp"

namespace ambs {

void BoundedSafetyQuery::validate() const {
    if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("query delta must lie in [0,1]");
}

std::vector<char> satisfying_states(const Formula& formula, const std::vector<LabelSet>& labels) {
    std::vector<char> safe(labels.size());
    for (State s = 0; s < labels.size(); ++s) safe[s] = evaluate(formula, labels[s]) ? 1 : 0;
    return safe;
}

namespace {

void check_labels(const TransitionSystem& ts, const std::vector<LabelSet>& labels) {
    if (labels.size() != ts.num_states()) throw std::invalid_argument("label table does not match the chain");
}

}  // namespace

std::vector<double> exact_measure_all(const TransitionSystem& ts, const std::vector<LabelSet>& labels,
                                      const BoundedSafetyQuery& query) {
    query.validate();
    check_labels(ts, labels);
    return kernels::bounded_safety_parallel(ts.chain(), satisfying_states(query.formula, labels), query.horizon);
}

double exact_measure(const TransitionSystem& ts, const std::vector<LabelSet>& labels, const BoundedSafetyQuery& query,
                     State start) {
    if (start >= ts.num_states()) throw std::out_of_range("start state out of range");
    return exact_measure_all(ts, labels, query)[start];
}

bool check_delta_bounded_safety(const TransitionSystem& ts, const std::vector<LabelSet>& labels,
                                const BoundedSafetyQuery& query, State start) {
    return exact_measure(ts, labels, query, start) >= 1.0 - query.delta;
}

double enumerate_measure(const TransitionSystem& ts, const std::vector<LabelSet>& labels,
                         const BoundedSafetyQuery& query, State start) {
    query.validate();
    check_labels(ts, labels);
    return kernels::enumerate_safe_mass_serial(ts.chain(), satisfying_states(query.formula, labels), start,
                                               query.horizon);
}

double exact_measure_after_action(const TransitionTable& dynamics, const TransitionSystem& ts,
                                  const std::vector<LabelSet>& labels, const BoundedSafetyQuery& query, State start,
                                  Action a) {
    check_labels(ts, labels);
    if (dynamics.num_states() != ts.num_states()) throw std::invalid_argument("dynamics do not match the chain");
    if (start >= ts.num_states() || a >= dynamics.num_actions()) throw std::out_of_range("state or action out of range");
    const auto safe = satisfying_states(query.formula, labels);
    if (!safe[start]) return 0.0;
    if (query.horizon == 0) return 1.0;
    const auto rest = kernels::bounded_safety_parallel(ts.chain(), safe, query.horizon - 1);
    const auto row = dynamics.row(start, a);
    double mu = 0.0;
    for (State s = 0; s < row.size(); ++s) mu += row[s] * rest[s];
    return mu;
}

}  // namespace ambs
