#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "ambs/bounds.hpp"

using namespace ambs;

namespace {

// The bounds written out with long double and the log identity ln(x) = log2(x) ln 2,
// independent of the library's direct evaluation.
long double exact_raw(long double eps, long double delta) {
    return std::log2(2.0L / delta) * 0.693147180559945309417232121458L / (2.0L * eps * eps);
}

}  // namespace

TEST_SUITE("bounds") {
    TEST_CASE("exact-model sample size") {
        CHECK(sample_size_exact_model(0.09, 0.01) == 328);
        CHECK(sample_size_exact_model(0.1, 0.05) == 185);
        // ln(2/delta) = 1 by construction: m = 1/(2 * 0.25) = 2.
        CHECK(sample_size_exact_model(0.5, 2.0 * std::exp(-1.0)) == 2);
        CHECK(static_cast<long double>(sample_size_exact_model(0.09, 0.01)) >= exact_raw(0.09L, 0.01L));
    }

    TEST_CASE("doubling epsilon quarters the bound up to ceiling") {
        std::mt19937_64 rng(51);
        std::uniform_real_distribution<double> u(0.01, 0.4);
        for (int i = 0; i < 20; ++i) {
            const double eps = u(rng);
            const double small = static_cast<double>(sample_size_exact_model(eps, 0.05));
            const double large = static_cast<double>(sample_size_exact_model(2 * eps, 0.05));
            // m(e) = ceil(4x) and m(2e) = ceil(x) for the same x.
            CHECK(small <= 4 * large);
            CHECK(small > 4 * (large - 1));
            CHECK(small / large == doctest::Approx(4.0).epsilon(1.0 / large + 1e-9));
        }
    }

    TEST_CASE("learned-model sample size") {
        CHECK(sample_size_learned_model(0.09, 0.01) == 1309);
        CHECK(sample_size_learned_model(1.0, 2.0 * std::exp(-2.0)) == 4);
        std::mt19937_64 rng(52);
        std::uniform_real_distribution<double> u(0.02, 0.5);
        for (int i = 0; i < 20; ++i) {
            const double eps = u(rng), delta = u(rng);
            const long double raw = exact_raw(eps, delta);
            CHECK(sample_size_learned_model(eps, delta) == static_cast<std::uint64_t>(std::ceil(4.0L * raw)));
        }
    }

    TEST_CASE("required alpha") {
        CHECK(required_alpha(0.09, 30) == doctest::Approx(0.003).epsilon(1e-15));
        CHECK(required_alpha(0.37, 1) == 0.37);
        CHECK(required_alpha(0.1, 10) == doctest::Approx(0.01).epsilon(1e-15));
        CHECK_THROWS_AS(required_alpha(0.1, 0), std::invalid_argument);
    }

    TEST_CASE("visit count bound") {
        // (|S|^2/alpha^2) ln(2|S||A|/delta) = 1600 ln 160 at delta 0.1.
        CHECK(visit_count_bound(0.1, 0.1, 4, 2) == 8121);
        // ... and 1600 ln 320 at delta 0.05.
        CHECK(visit_count_bound(0.1, 0.05, 4, 2) == 9230);
        CHECK(visit_count_bound(0.3, 0.1, 4, 2) == 903);
        // alpha = |S| and delta = 2|S||A|/e make both factors 1.
        CHECK(visit_count_bound(4.0, 16.0 * std::exp(-1.0), 4, 2) == 1);
    }

    TEST_CASE("negligibility threshold") {
        CHECK(negligibility_threshold(0.1, 4, 2) == doctest::Approx(0.0125).epsilon(1e-15));
        CHECK(negligibility_threshold(0.25, 1, 1) == 0.25);
        CHECK(negligibility_threshold(0.003, 25, 4) == doctest::Approx(0.00003).epsilon(1e-12));
    }

    TEST_CASE("monotonicity") {
        double prev_eps = 0;
        for (double eps = 0.3; eps > 0.02; eps *= 0.8) {
            const auto m = static_cast<double>(sample_size_exact_model(eps, 0.05));
            CHECK(m >= prev_eps);
            prev_eps = m;
        }
        std::uint64_t prev = 0;
        for (double delta = 0.5; delta > 1e-6; delta /= 3) {
            const auto m = sample_size_learned_model(0.1, delta);
            CHECK(m >= prev);
            prev = m;
        }
        prev = 0;
        for (std::size_t s = 1; s < 20; ++s) {
            const auto m = visit_count_bound(0.2, 0.1, s, 2);
            CHECK(m >= prev);
            CHECK(visit_count_bound(0.2, 0.1, s, 3) >= m);
            CHECK(visit_count_bound(0.1, 0.1, s, 2) >= m);
            prev = m;
        }
    }

    TEST_CASE("invalid parameters") {
        CHECK_THROWS_AS(sample_size_exact_model(0.0, 0.1), std::invalid_argument);
        CHECK_THROWS_AS(sample_size_exact_model(0.1, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(sample_size_learned_model(-1.0, 0.1), std::invalid_argument);
        CHECK_THROWS_AS(visit_count_bound(0.0, 0.1, 4, 2), std::invalid_argument);
        CHECK_THROWS_AS(visit_count_bound(0.1, 0.1, 0, 2), std::invalid_argument);
        CHECK_THROWS_AS(negligibility_threshold(0.1, 4, 0), std::invalid_argument);
        PacParams p;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
        p.alpha = 0.01;
        CHECK_NOTHROW(p.validate());
    }
}
