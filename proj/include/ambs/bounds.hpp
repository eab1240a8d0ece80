#pragma once

#include <cstddef>
#include <cstdint>

namespace ambs {

/// Accuracy/confidence parameters shared by the sample-size bounds.
struct PacParams {
    double epsilon = 0.09;
    double delta = 0.01;
    double alpha = 0.0;
    double eta = 0.0;

    /// Throws std::invalid_argument unless eps > 0, 0 < delta < 1, alpha > 0 and eta >= 0.
    void validate() const;
};

/// Smallest m with m >= (1/(2 eps^2)) ln(2/delta): traces needed when sampling the true chain.
std::uint64_t sample_size_exact_model(double epsilon, double delta);

/// Smallest m with m >= (2/eps^2) ln(2/delta): traces needed when sampling a learned chain
/// whose rows are within eps/n of the truth.
std::uint64_t sample_size_learned_model(double epsilon, double delta);

/// eps / n, the per-row TV accuracy the learned chain needs over horizon n.
double required_alpha(double epsilon, std::size_t horizon);

/// Smallest m with m >= (|S|^2/alpha^2) ln(2|S||A|/delta): visits per (s,a) that make every
/// row of the learned chain alpha-close with probability 1 - delta.
std::uint64_t visit_count_bound(double alpha, double delta, std::size_t num_states, std::size_t num_actions);

/// alpha / (|A||S|): actions picked less often than this are outside the visit guarantee.
double negligibility_threshold(double alpha, std::size_t num_states, std::size_t num_actions);

}  // namespace ambs
