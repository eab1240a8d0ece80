#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ambs/bounds.hpp"
#include "ambs/learner.hpp"
#include "ambs/mdp_io.hpp"
#include "oracles.hpp"

using namespace ambs;

namespace {

/// Draws `n` successors of (s,a) from the true row with std::discrete_distribution.
void feed(CountsModel& model, const TransitionTable& truth, State s, Action a, std::size_t n, std::mt19937_64& rng) {
    const auto row = truth.row(s, a);
    std::discrete_distribution<std::size_t> next(row.begin(), row.end());
    for (std::size_t i = 0; i < n; ++i) model.update(s, a, next(rng));
}

double max_row_tv(const TransitionSystem& a, const TransitionSystem& b) {
    const auto ra = oracle::to_rows(a.chain()), rb = oracle::to_rows(b.chain());
    double worst = 0.0;
    for (std::size_t s = 0; s < ra.size(); ++s) worst = std::max(worst, oracle::tv(ra[s], rb[s]));
    return worst;
}

}  // namespace

TEST_SUITE("learner") {
    TEST_CASE("single and repeated updates") {
        CountsModel m(3, 2);
        m.update(0, 1, 2);
        CHECK(m.count(0, 1, 2) == 1);
        CHECK(m.visits(0, 1) == 1);
        CHECK(m.visits(0, 0) == 0);
        m.update(0, 1, 2);
        CHECK(m.count(0, 1, 2) == 2);
        CHECK(m.visits(0, 1) == 2);
        CHECK_THROWS_AS(m.update(3, 0, 0), std::out_of_range);
        CHECK_THROWS_AS(m.update(0, 2, 0), std::out_of_range);
        CHECK_THROWS_AS(m.update(0, 0, 5), std::out_of_range);
    }

    TEST_CASE("transition updates mark terminal successors") {
        CountsModel m(3, 1);
        Transition t;
        t.state = 0;
        t.next_state = 2;
        m.update(t);
        CHECK_FALSE(m.is_terminal(2));
        t.terminal = true;
        m.update(t);
        CHECK(m.is_terminal(2));
        CHECK(m.count(0, 0, 2) == 2);
    }

    TEST_CASE("empirical ratios concentrate around the true row") {
        std::mt19937_64 rng(61);
        const auto truth = oracle::random_dynamics(rng, 5, 2);
        CountsModel m(5, 2);
        for (State s = 0; s < 5; ++s) {
            for (Action a = 0; a < 2; ++a) feed(m, truth, s, a, 10000, rng);
        }
        const auto p = mle_dynamics(m);
        for (State s = 0; s < 5; ++s) {
            for (Action a = 0; a < 2; ++a) {
                for (State n = 0; n < 5; ++n) {
                    const double q = truth(s, a, n);
                    CHECK(std::abs(p(s, a, n) - q) <= 3.0 * std::sqrt(q * (1.0 - q) / 10000.0) + 1e-12);
                }
            }
        }
    }

    TEST_CASE("maximum likelihood rows") {
        CountsModel m(3, 2);
        m.add(0, 0, 0, 3);
        m.add(0, 0, 1, 1);
        m.add(1, 1, 2, 7);
        const auto p = mle_dynamics(m);
        CHECK(p(0, 0, 0) == 0.75);
        CHECK(p(0, 0, 1) == 0.25);
        CHECK(p(0, 0, 2) == 0.0);
        // Deterministic data gives 0/1 rows.
        CHECK(p(1, 1, 2) == 1.0);
        CHECK(p(1, 1, 0) == 0.0);
        // Unvisited pairs are uniform.
        for (State n = 0; n < 3; ++n) CHECK(p(2, 0, n) == doctest::Approx(1.0 / 3.0));
    }

    TEST_CASE("unvisited rows: self-loop fallback and terminal states") {
        CountsModel m(3, 2);
        m.update(0, 0, 2);
        MleOptions opt;
        opt.fallback = UnvisitedFallback::SelfLoop;
        const auto p = mle_dynamics(m, opt);
        CHECK(p(1, 0, 1) == 1.0);
        CHECK(p(0, 1, 0) == 1.0);
        CHECK(p(0, 0, 2) == 1.0);

        m.mark_terminal(2);
        const auto q = mle_dynamics(m);
        CHECK(q(2, 0, 2) == 1.0);
        CHECK(q(2, 1, 2) == 1.0);
        CHECK(q(1, 0, 0) == doctest::Approx(1.0 / 3.0));
    }

    TEST_CASE("smoothing adds a pseudo-count to every cell") {
        CountsModel m(2, 1);
        m.add(0, 0, 0, 2);
        MleOptions opt;
        opt.smoothing = 1.0;
        const auto p = mle_dynamics(m, opt);
        CHECK(p(0, 0, 0) == doctest::Approx(0.75));
        CHECK(p(0, 0, 1) == doctest::Approx(0.25));
        CHECK(p(1, 0, 0) == doctest::Approx(0.5));
        opt.smoothing = -1.0;
        CHECK_THROWS_AS(mle_dynamics(m, opt), std::invalid_argument);
    }

    TEST_CASE("rows are distributions and counts are consistent for random histories") {
        std::mt19937_64 rng(62);
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t ns = 1 + rng() % 7, na = 1 + rng() % 3;
            CountsModel m(ns, na);
            const std::size_t steps = rng() % 200;
            for (std::size_t i = 0; i < steps; ++i) {
                const auto before = m;
                const State s = rng() % ns, n = rng() % ns;
                const Action a = rng() % na;
                m.update(s, a, n);
                REQUIRE(m.count(s, a, n) == before.count(s, a, n) + 1);
                REQUIRE(m.visits(s, a) == before.visits(s, a) + 1);
            }
            if (rng() % 2) m.mark_terminal(rng() % ns);
            const auto p = mle_dynamics(m);
            for (State s = 0; s < ns; ++s) {
                for (Action a = 0; a < na; ++a) {
                    std::uint64_t total = 0;
                    double mass = 0.0;
                    for (State n = 0; n < ns; ++n) {
                        total += m.count(s, a, n);
                        REQUIRE(p(s, a, n) >= 0.0);
                        mass += p(s, a, n);
                    }
                    REQUIRE(total == m.visits(s, a));
                    REQUIRE(mass == doctest::Approx(1.0).epsilon(1e-12));
                }
            }
            CHECK_NOTHROW(p.validate());
        }
    }

    TEST_CASE("update order does not matter") {
        std::mt19937_64 rng(63);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<Transition> batch(100);
            for (auto& t : batch) {
                t.state = rng() % 4;
                t.action = rng() % 2;
                t.next_state = rng() % 4;
                t.terminal = rng() % 10 == 0;
            }
            CountsModel a(4, 2), b(4, 2);
            for (const auto& t : batch) a.update(t);
            std::shuffle(batch.begin(), batch.end(), rng);
            for (const auto& t : batch) b.update(t);
            REQUIRE(a == b);
        }
    }

    TEST_CASE("learned transition system") {
        std::mt19937_64 rng(64);
        const auto pi = oracle::random_policy(rng, 4, 3);

        // Known counts; the expected chain is mixed from their ratios by the oracle.
        TransitionTable ratios(4, 3);
        CountsModel m(4, 3);
        for (State s = 0; s < 4; ++s) {
            for (Action a = 0; a < 3; ++a) {
                for (State n = 0; n < 4; ++n) {
                    const std::uint64_t c = 1 + (s + 2 * a + 3 * n) % 4;
                    m.add(s, a, n, c);
                }
                for (State n = 0; n < 4; ++n) {
                    ratios(s, a, n) = static_cast<double>(m.count(s, a, n)) / static_cast<double>(m.visits(s, a));
                }
            }
        }
        const auto learned = learned_transition_system(m, pi);
        CHECK(learned.source() == Provenance::LearnedFromCounts);
        const auto expected = oracle::mixture(ratios, pi);
        for (State s = 0; s < 4; ++s) {
            for (State n = 0; n < 4; ++n) CHECK(std::abs(learned(s, n) - expected[s][n]) <= 1e-12);
        }

        const auto empty = learned_transition_system(CountsModel(4, 3), TabularPolicy::uniform(4, 3));
        for (State s = 0; s < 4; ++s) {
            for (State n = 0; n < 4; ++n) CHECK(empty(s, n) == doctest::Approx(0.25).epsilon(1e-15));
        }
        CHECK_THROWS_AS(learned_transition_system(m, TabularPolicy::uniform(4, 2)), std::invalid_argument);
    }

    TEST_CASE("visit-count bound delivers alpha-accurate chains") {
        // With N samples per pair, every row of the learned chain should be within alpha of
        // the true chain in at least a (1 - delta) fraction of trials.
        const double alpha = 0.3, delta = 0.1;
        const std::size_t ns = 4, na = 2;
        const auto n = visit_count_bound(alpha, delta, ns, na);
        REQUIRE(n == 903);
        std::mt19937_64 rng(65);
        const auto truth = oracle::random_dynamics(rng, ns, na);
        const auto pi = oracle::random_policy(rng, ns, na);
        const auto exact = induce_transition_system(truth, pi, Provenance::ExactFromMdp);
        int good = 0;
        const int trials = 100;
        for (int trial = 0; trial < trials; ++trial) {
            CountsModel m(ns, na);
            for (State s = 0; s < ns; ++s) {
                for (Action a = 0; a < na; ++a) feed(m, truth, s, a, n, rng);
            }
            good += max_row_tv(exact, learned_transition_system(m, pi)) <= alpha ? 1 : 0;
        }
        CHECK(good >= static_cast<int>((1.0 - delta) * trials));
    }

    TEST_CASE("more data gives a closer model") {
        std::mt19937_64 rng(66);
        int closer = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const auto truth = oracle::random_dynamics(rng, 4, 2);
            const auto pi = TabularPolicy::uniform(4, 2);
            const auto exact = induce_transition_system(truth, pi, Provenance::ExactFromMdp);
            CountsModel few(4, 2), many(4, 2);
            for (State s = 0; s < 4; ++s) {
                for (Action a = 0; a < 2; ++a) {
                    feed(few, truth, s, a, 100, rng);
                    feed(many, truth, s, a, 10000, rng);
                }
            }
            closer += max_row_tv(exact, learned_transition_system(many, pi)) <
                              max_row_tv(exact, learned_transition_system(few, pi))
                          ? 1
                          : 0;
        }
        CHECK(closer >= 95);
    }

    TEST_CASE("reward model keeps running means") {
        RewardModel r(2, 2);
        r.update(0, 1, 1.0);
        r.update(0, 1, 0.0);
        r.update(1, 0, -2.5);
        CHECK(r.mean(0, 1) == 0.5);
        CHECK(r.mean(1, 0) == -2.5);
        CHECK(r.mean(0, 0) == 0.0);
        const auto t = r.table();
        CHECK(t(0, 1) == 0.5);
        CHECK_THROWS_AS(r.update(0, 2, 1.0), std::out_of_range);

        CountsModel c(2, 2);
        c.update(0, 1, 1);
        c.mark_terminal(1);
        const auto snap = snapshot(c, r);
        CHECK(snap.dynamics(0, 1, 1) == 1.0);
        CHECK(snap.reward(0, 1) == 0.5);
        CHECK(snap.terminal == std::vector<char>{0, 1});
    }

    TEST_CASE("counts round-trip through the line format") {
        std::mt19937_64 rng(67);
        CountsModel m(5, 3);
        for (int i = 0; i < 300; ++i) m.update(rng() % 5, rng() % 3, rng() % 5);
        m.mark_terminal(4);
        std::stringstream ss;
        write_counts(ss, m);
        CHECK(read_counts(ss, "mem", 5, 3) == m);

        std::istringstream single("count 0 1 2 5\nterminal 2\n");
        const auto r = read_counts(single, "mem", 3, 2);
        CHECK(r.count(0, 1, 2) == 5);
        CHECK(r.visits(0, 1) == 5);
        CHECK(r.is_terminal(2));

        std::istringstream bad_index("count 0 1 9 5\n");
        CHECK_THROWS_AS(read_counts(bad_index, "mem", 3, 2), FormatError);
        std::istringstream bad_record("counts 0 1 2 5\n");
        CHECK_THROWS_AS(read_counts(bad_record, "mem", 3, 2), FormatError);
        std::istringstream truncated("count 0 1 2\n");
        CHECK_THROWS_AS(read_counts(truncated, "mem", 3, 2), FormatError);
    }
}
