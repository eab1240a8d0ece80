#include "ambs/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace ambs {

namespace {

void require_epsilon_delta(double epsilon, double delta) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
}

// The bound is evaluated in extended precision. A value within 1e-12 (relative) of an
// integer is taken to be that integer, so inputs built to make the log term exact
// (delta = 2/e and the like) do not pick up a spurious +1 from rounding.
std::uint64_t conservative_ceil(long double x) {
    if (!std::isfinite(static_cast<double>(x)) || x > 1.8e19L) throw std::overflow_error("sample bound does not fit");
    const long double nearest = std::round(x);
    if (std::fabs(x - nearest) <= 1e-12L * std::max(1.0L, std::fabs(x))) return static_cast<std::uint64_t>(nearest);
    return static_cast<std::uint64_t>(std::ceil(x));
}

}  // namespace

void PacParams::validate() const {
    require_epsilon_delta(epsilon, delta);
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    if (!(eta >= 0.0)) throw std::invalid_argument("eta must be >= 0");
}

std::uint64_t sample_size_exact_model(double epsilon, double delta) {
    require_epsilon_delta(epsilon, delta);
    const long double e = epsilon;
    return conservative_ceil(std::log(2.0L / delta) / (2.0L * e * e));
}

std::uint64_t sample_size_learned_model(double epsilon, double delta) {
    require_epsilon_delta(epsilon, delta);
    const long double e = epsilon;
    return conservative_ceil(2.0L * std::log(2.0L / delta) / (e * e));
}

double required_alpha(double epsilon, std::size_t horizon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (horizon == 0) throw std::invalid_argument("horizon must be >= 1");
    return epsilon / static_cast<double>(horizon);
}

std::uint64_t visit_count_bound(double alpha, double delta, std::size_t num_states, std::size_t num_actions) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be > 0");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
    if (num_states == 0 || num_actions == 0) throw std::invalid_argument("state and action counts must be >= 1");
    const long double s = static_cast<long double>(num_states);
    const long double a = static_cast<long double>(num_actions);
    const long double al = alpha;
    const long double x = (s * s / (al * al)) * std::log(2.0L * s * a / delta);
    return x <= 0.0L ? 0 : conservative_ceil(x);
}

double negligibility_threshold(double alpha, std::size_t num_states, std::size_t num_actions) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    if (num_states == 0 || num_actions == 0) throw std::invalid_argument("state and action counts must be >= 1");
    return alpha / (static_cast<double>(num_actions) * static_cast<double>(num_states));
}

}  // namespace ambs
