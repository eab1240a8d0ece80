#include "ambs/mdp_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <vector>

namespace ambs {

namespace {

constexpr double kFileTolerance = 1e-6;

std::vector<std::string> tokenize(const std::string& line) {
    std::string body = line.substr(0, line.find('#'));
    std::istringstream ss(body);
    std::vector<std::string> out;
    for (std::string w; ss >> w;) out.push_back(w);
    return out;
}

class LineReader {
public:
    LineReader(const std::string& source, std::size_t line) : _source{source}, _line{line} {}

    [[noreturn]] void fail(const std::string& msg) const { throw FormatError(_source, _line, msg); }

    std::size_t index(const std::string& tok, std::size_t bound, const char* what) const {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(tok, &pos);
        } catch (const std::exception&) {
            fail(std::string("expected ") + what + ", got '" + tok + "'");
        }
        if (pos != tok.size() || tok.front() == '-') fail(std::string("expected ") + what + ", got '" + tok + "'");
        if (v >= bound) fail(std::string(what) + " " + tok + " out of range (< " + std::to_string(bound) + ")");
        return static_cast<std::size_t>(v);
    }

    std::size_t count(const std::string& tok, const char* what) const {
        return index(tok, static_cast<std::size_t>(-1), what);
    }

    double real(const std::string& tok, const char* what) const {
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(tok, &pos);
        } catch (const std::exception&) {
            fail(std::string("expected ") + what + ", got '" + tok + "'");
        }
        if (pos != tok.size() || !std::isfinite(v)) fail(std::string("expected ") + what + ", got '" + tok + "'");
        return v;
    }

    void arity(const std::vector<std::string>& t, std::size_t n) const {
        if (t.size() != n) fail("'" + t[0] + "' takes " + std::to_string(n - 1) + " arguments");
    }

private:
    const std::string& _source;
    std::size_t _line;
};

std::string fmt(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

}  // namespace

LabeledMdp read_mdp(std::istream& in, const std::string& source, const MdpReadOptions& options) {
    std::optional<std::size_t> states;
    std::optional<std::size_t> actions;
    double gamma = 0.99;
    std::vector<std::string> atoms;
    std::optional<TransitionTable> p;
    std::optional<Matrix> reward;
    std::vector<double> init;
    bool has_init = false;
    std::vector<LabelSet> labels;
    std::size_t last_line = 0;

    auto ensure_tables = [&](const LineReader& r) {
        if (!states || !actions) r.fail("'states' and 'actions' must precede model entries");
        if (!p) {
            p.emplace(*states, *actions);
            reward.emplace(*states, *actions);
            init.assign(*states, 0.0);
            labels.assign(*states, {});
        }
    };

    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        last_line = lineno;
        const auto t = tokenize(line);
        if (t.empty()) continue;
        const LineReader r(source, lineno);
        const std::string& key = t[0];
        if (key == "states" || key == "actions") {
            r.arity(t, 2);
            if (p) r.fail("'" + key + "' must precede model entries");
            auto& slot = key == "states" ? states : actions;
            if (slot) r.fail("duplicate '" + key + "'");
            slot = r.count(t[1], "count");
            if (*slot == 0) r.fail("'" + key + "' must be positive");
        } else if (key == "gamma") {
            r.arity(t, 2);
            gamma = r.real(t[1], "discount");
            if (!(gamma > 0.0 && gamma <= 1.0)) r.fail("gamma must lie in (0,1]");
        } else if (key == "atoms") {
            for (std::size_t i = 1; i < t.size(); ++i) {
                if (!is_valid_atom_name(t[i])) r.fail("invalid atom name '" + t[i] + "'");
                atoms.push_back(t[i]);
            }
        } else if (key == "label") {
            if (t.size() < 2) r.fail("'label' needs a state");
            ensure_tables(r);
            const State s = r.index(t[1], *states, "state");
            for (std::size_t i = 2; i < t.size(); ++i) {
                if (std::find(atoms.begin(), atoms.end(), t[i]) == atoms.end()) r.fail("undeclared atom '" + t[i] + "'");
                labels[s].insert(t[i]);
            }
        } else if (key == "init") {
            r.arity(t, 3);
            ensure_tables(r);
            init[r.index(t[1], *states, "state")] = r.real(t[2], "probability");
            has_init = true;
        } else if (key == "trans") {
            r.arity(t, 5);
            ensure_tables(r);
            const State s = r.index(t[1], *states, "state");
            const Action a = r.index(t[2], *actions, "action");
            const State s2 = r.index(t[3], *states, "state");
            const double prob = r.real(t[4], "probability");
            if (prob < 0.0 || prob > 1.0) r.fail("probability outside [0,1]");
            (*p)(s, a, s2) = prob;
        } else if (key == "reward") {
            r.arity(t, 4);
            ensure_tables(r);
            const State s = r.index(t[1], *states, "state");
            const Action a = r.index(t[2], *actions, "action");
            (*reward)(s, a) = r.real(t[3], "reward");
        } else {
            r.fail("unknown keyword '" + key + "'");
        }
    }

    const LineReader end(source, last_line);
    if (!states || !actions) end.fail("missing 'states' or 'actions'");
    ensure_tables(end);
    if (!has_init) init[0] = 1.0;

    auto settle = [&](std::span<double> row, const std::string& what) {
        double sum = 0.0;
        for (double x : row) sum += x;
        if (options.normalize && sum > 0.0) {
            for (double& x : row) x /= sum;
        } else if (std::abs(sum - 1.0) > kFileTolerance) {
            end.fail(what + " sums to " + fmt(sum) + ", not 1");
        } else {
            // Within the file tolerance: fold the residue into the rows so the
            // tighter in-memory invariant holds.
            for (double& x : row) x /= sum;
        }
    };
    for (State s = 0; s < *states; ++s) {
        for (Action a = 0; a < *actions; ++a) {
            settle(p->row(s, a), "row (" + std::to_string(s) + "," + std::to_string(a) + ")");
        }
    }
    settle(init, "initial distribution");

    try {
        return LabeledMdp{std::move(*p), std::move(init), std::move(*reward), gamma, std::move(atoms), std::move(labels)};
    } catch (const std::invalid_argument& e) {
        end.fail(e.what());
    }
}

LabeledMdp read_mdp_file(const std::string& path, const MdpReadOptions& options) {
    std::ifstream in(path);
    if (!in) throw FormatError(path, 0, "cannot open file");
    return read_mdp(in, path, options);
}

void write_mdp(std::ostream& out, const LabeledMdp& mdp) {
    out << "states " << mdp.num_states() << "\n";
    out << "actions " << mdp.num_actions() << "\n";
    out << "gamma " << fmt(mdp.gamma()) << "\n";
    if (!mdp.atoms().empty()) {
        out << "atoms";
        for (const auto& a : mdp.atoms()) out << ' ' << a;
        out << "\n";
    }
    for (State s = 0; s < mdp.num_states(); ++s) {
        if (mdp.labels(s).empty()) continue;
        out << "label " << s;
        for (const auto& l : mdp.labels(s)) out << ' ' << l;
        out << "\n";
    }
    for (State s = 0; s < mdp.num_states(); ++s) {
        if (mdp.initial()[s] > 0.0) out << "init " << s << ' ' << fmt(mdp.initial()[s]) << "\n";
    }
    for (State s = 0; s < mdp.num_states(); ++s) {
        for (Action a = 0; a < mdp.num_actions(); ++a) {
            for (State s2 = 0; s2 < mdp.num_states(); ++s2) {
                const double v = mdp.transition()(s, a, s2);
                if (v > 0.0) out << "trans " << s << ' ' << a << ' ' << s2 << ' ' << fmt(v) << "\n";
            }
        }
    }
    for (State s = 0; s < mdp.num_states(); ++s) {
        for (Action a = 0; a < mdp.num_actions(); ++a) {
            if (mdp.reward()(s, a) != 0.0) out << "reward " << s << ' ' << a << ' ' << fmt(mdp.reward()(s, a)) << "\n";
        }
    }
}

TabularPolicy read_policy(std::istream& in, const std::string& source, std::size_t num_states, std::size_t num_actions) {
    Matrix probs(num_states, num_actions);
    std::vector<char> seen(num_states, 0);
    bool uniform = false;
    std::size_t last_line = 0;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        last_line = lineno;
        const auto t = tokenize(line);
        if (t.empty()) continue;
        const LineReader r(source, lineno);
        if (t[0] == "uniform") {
            r.arity(t, 1);
            uniform = true;
        } else if (t[0] == "policy") {
            r.arity(t, 4);
            const State s = r.index(t[1], num_states, "state");
            const Action a = r.index(t[2], num_actions, "action");
            const double v = r.real(t[3], "probability");
            if (v < 0.0 || v > 1.0) r.fail("probability outside [0,1]");
            probs(s, a) = v;
            seen[s] = 1;
        } else {
            r.fail("unknown keyword '" + t[0] + "'");
        }
    }
    if (uniform) return TabularPolicy::uniform(num_states, num_actions);
    const LineReader end(source, last_line);
    for (State s = 0; s < num_states; ++s) {
        if (!seen[s]) end.fail("no policy entries for state " + std::to_string(s));
        double sum = 0.0;
        for (double v : probs.row(s)) sum += v;
        if (std::abs(sum - 1.0) > kFileTolerance) end.fail("policy row " + std::to_string(s) + " sums to " + fmt(sum));
        for (double& v : probs.row(s)) v /= sum;
    }
    return TabularPolicy{std::move(probs)};
}

TabularPolicy read_policy_file(const std::string& path, std::size_t num_states, std::size_t num_actions) {
    if (path == "uniform") return TabularPolicy::uniform(num_states, num_actions);
    std::ifstream in(path);
    if (!in) throw FormatError(path, 0, "cannot open file");
    return read_policy(in, path, num_states, num_actions);
}

void write_policy(std::ostream& out, const TabularPolicy& policy) {
    for (State s = 0; s < policy.num_states(); ++s) {
        for (Action a = 0; a < policy.num_actions(); ++a) {
            out << "policy " << s << ' ' << a << ' ' << fmt(policy(s, a)) << "\n";
        }
    }
}

}  // namespace ambs
