#include <doctest.h>

#include <sstream>

#include "ambs/mdp_io.hpp"

using namespace ambs;

namespace {

LabeledMdp parse(const std::string& text, MdpReadOptions opts = {}) {
    std::istringstream in(text);
    return read_mdp(in, "test.mdp", opts);
}

std::size_t error_line(const std::string& text) {
    try {
        parse(text);
    } catch (const FormatError& e) {
        return e.line();
    }
    return 0;
}

const char* kChain = R"(# chain
states 2
actions 1
gamma 0.9
atoms hazard goal
label 1 hazard
init 0 1
trans 0 0 0 0.9
trans 0 0 1 0.1
trans 1 0 1 1
reward 0 0 -0.5
)";

}  // namespace

TEST_SUITE("mdp_io") {
    TEST_CASE("reads every record kind") {
        const auto m = parse(kChain);
        CHECK(m.num_states() == 2);
        CHECK(m.num_actions() == 1);
        CHECK(m.gamma() == 0.9);
        CHECK(m.atoms() == std::vector<std::string>{"hazard", "goal"});
        CHECK(m.labels(1).count("hazard") == 1);
        CHECK(m.labels(0).empty());
        CHECK(m.transition()(0, 0, 1) == 0.1);
        CHECK(m.reward()(0, 0) == -0.5);
        CHECK(m.reward()(1, 0) == 0.0);
        CHECK(m.is_absorbing(1));
    }

    TEST_CASE("write then read is the identity") {
        const auto m = parse(kChain);
        std::stringstream ss;
        write_mdp(ss, m);
        const auto back = read_mdp(ss, "roundtrip");
        CHECK(back.transition() == m.transition());
        CHECK(back.reward() == m.reward());
        CHECK(back.labels() == m.labels());
        CHECK(back.atoms() == m.atoms());
        CHECK(back.gamma() == m.gamma());
    }

    TEST_CASE("defaults: init on state 0 and gamma 0.99") {
        const auto m = parse("states 1\nactions 1\ntrans 0 0 0 1\n");
        CHECK(m.initial()[0] == 1.0);
        CHECK(m.gamma() == 0.99);
    }

    TEST_CASE("errors carry the offending line") {
        CHECK(error_line("states 2\nactions 1\ntrans 0 0 5 1\n") == 3);
        CHECK(error_line("states 2\nactions 1\nbogus 1\n") == 3);
        CHECK(error_line("states 1\nactions 1\nlabel 0 nope\n") == 3);
        CHECK(error_line("states 1\nactions 1\ntrans 0 0 0 x\n") == 3);
        CHECK(error_line("trans 0 0 0 1\n") == 1);
        CHECK(error_line("states 1\nactions 1\ngamma 0\n") == 3);
        CHECK(error_line("states 1\nactions 1\ntrans 0 0 0 -0.5\n") == 3);
        // Incomplete rows are reported at end of input.
        CHECK(error_line("states 2\nactions 1\ntrans 0 0 0 0.5\ntrans 1 0 1 1\n") == 4);
    }

    TEST_CASE("normalize rescales rows only when asked") {
        const std::string text = "states 1\nactions 1\ntrans 0 0 0 0.5\n";
        CHECK_THROWS_AS(parse(text), FormatError);
        MdpReadOptions opts;
        opts.normalize = true;
        CHECK(parse(text, opts).transition()(0, 0, 0) == 1.0);
    }

    TEST_CASE("rows within the file tolerance are accepted") {
        const auto m = parse("states 2\nactions 1\ntrans 0 0 0 0.3333333\ntrans 0 0 1 0.6666667\ntrans 1 0 1 1\n");
        CHECK(m.transition()(0, 0, 0) + m.transition()(0, 0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("policies") {
        std::istringstream uniform("uniform\n");
        const auto u = read_policy(uniform, "p", 2, 4);
        CHECK(u(1, 3) == 0.25);
        std::istringstream det("policy 0 1 1\npolicy 1 0 0.5\npolicy 1 1 0.5\n");
        const auto d = read_policy(det, "p", 2, 2);
        CHECK(d(0, 1) == 1.0);
        CHECK(d(1, 0) == 0.5);
        std::stringstream ss;
        write_policy(ss, d);
        CHECK(read_policy(ss, "p", 2, 2).probs() == d.probs());
        std::istringstream partial("policy 0 0 1\n");
        CHECK_THROWS_AS(read_policy(partial, "p", 2, 2), FormatError);
        CHECK(read_policy_file("uniform", 3, 3)(2, 2) == doctest::Approx(1.0 / 3));
    }

    TEST_CASE("missing file") { CHECK_THROWS_AS(read_mdp_file("/nonexistent/x.mdp"), FormatError); }
}
