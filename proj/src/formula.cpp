#include "ambs/formula.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

namespace ambs {

struct Formula::Node {
    Kind kind;
    std::string name;
    Formula left;
    Formula right;
};

namespace {

const std::string kEmptyName;

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    return out;
}

bool is_atom_char(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-'; }

}  // namespace

Formula::Formula() : Formula(constant(true)) {}

Formula::Formula(std::shared_ptr<const Node> node) : _node{std::move(node)} {}

Formula Formula::constant(bool value) {
    static const auto t = std::make_shared<const Node>(Node{Kind::True, {}, Formula{nullptr}, Formula{nullptr}});
    static const auto f = std::make_shared<const Node>(Node{Kind::False, {}, Formula{nullptr}, Formula{nullptr}});
    return Formula{value ? t : f};
}

Formula Formula::atom(std::string name) {
    if (!is_valid_atom_name(name)) throw std::invalid_argument("invalid atom name '" + name + "'");
    return Formula{std::make_shared<const Node>(Node{Kind::Atom, std::move(name), Formula{nullptr}, Formula{nullptr}})};
}

Formula Formula::negation(Formula child) {
    return Formula{std::make_shared<const Node>(Node{Kind::Not, {}, std::move(child), Formula{nullptr}})};
}

Formula Formula::conjunction(Formula left, Formula right) {
    return Formula{std::make_shared<const Node>(Node{Kind::And, {}, std::move(left), std::move(right)})};
}

Formula Formula::disjunction(Formula left, Formula right) {
    return Formula{std::make_shared<const Node>(Node{Kind::Or, {}, std::move(left), std::move(right)})};
}

Formula Formula::implication(Formula premise, Formula conclusion) {
    return Formula{std::make_shared<const Node>(Node{Kind::Implies, {}, std::move(premise), std::move(conclusion)})};
}

Formula::Kind Formula::kind() const { return _node->kind; }

const std::string& Formula::name() const { return _node->kind == Kind::Atom ? _node->name : kEmptyName; }

const Formula& Formula::left() const {
    if (!_node->left._node) throw std::logic_error("formula node has no operand");
    return _node->left;
}

const Formula& Formula::right() const {
    if (!_node->right._node) throw std::logic_error("formula node has no right operand");
    return _node->right;
}

bool operator==(const Formula& a, const Formula& b) {
    if (a._node == b._node) return true;
    if (!a._node || !b._node) return false;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case Formula::Kind::True:
        case Formula::Kind::False: return true;
        case Formula::Kind::Atom: return a.name() == b.name();
        case Formula::Kind::Not: return a.left() == b.left();
        default: return a.left() == b.left() && a.right() == b.right();
    }
}

FormulaParseError::FormulaParseError(std::size_t offset, std::vector<std::string> expected, const std::string& found)
    : std::runtime_error("syntax error at byte " + std::to_string(offset) + ": expected one of {" + join(expected) +
                         "}, found " + found),
      _offset{offset},
      _expected{std::move(expected)} {}

bool is_valid_atom_name(std::string_view name) {
    if (name.empty() || name == "true" || name == "false") return false;
    return std::all_of(name.begin(), name.end(), is_atom_char);
}

namespace {

enum class Tok { Atom, True, False, Not, And, Or, Arrow, LParen, RParen, End };

struct Token {
    Tok kind;
    std::size_t offset;
    std::string text;
};

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::End: return "end of input";
        case Tok::Atom: return "atom '" + t.text + "'";
        default: return "'" + t.text + "'";
    }
}

class Parser {
public:
    explicit Parser(std::string_view text) : _text{text} { advance(); }

    Formula parse() {
        Formula f = expr();
        if (_tok.kind != Tok::End) {
            fail({"&", "|", "->", "end of input"});
        }
        return f;
    }

private:
    [[noreturn]] void fail(std::vector<std::string> expected) const {
        throw FormulaParseError(_tok.offset, std::move(expected), describe(_tok));
    }

    void advance() {
        while (_pos < _text.size() && (_text[_pos] == ' ' || _text[_pos] == '\t' || _text[_pos] == '\n' || _text[_pos] == '\r')) {
            ++_pos;
        }
        const std::size_t start = _pos;
        if (_pos >= _text.size()) {
            _tok = {Tok::End, start, ""};
            return;
        }
        const char c = _text[_pos];
        auto single = [&](Tok k) {
            ++_pos;
            _tok = {k, start, std::string(1, c)};
        };
        switch (c) {
            case '!': return single(Tok::Not);
            case '&': return single(Tok::And);
            case '|': return single(Tok::Or);
            case '(': return single(Tok::LParen);
            case ')': return single(Tok::RParen);
            default: break;
        }
        if (c == '-' && _pos + 1 < _text.size() && _text[_pos + 1] == '>') {
            _pos += 2;
            _tok = {Tok::Arrow, start, "->"};
            return;
        }
        if (is_atom_char(c)) {
            // '-' belongs to the identifier unless it starts an arrow.
            while (_pos < _text.size() && is_atom_char(_text[_pos]) &&
                   !(_text[_pos] == '-' && _pos + 1 < _text.size() && _text[_pos + 1] == '>')) {
                ++_pos;
            }
            std::string word{_text.substr(start, _pos - start)};
            if (word == "true") {
                _tok = {Tok::True, start, word};
            } else if (word == "false") {
                _tok = {Tok::False, start, word};
            } else {
                _tok = {Tok::Atom, start, std::move(word)};
            }
            return;
        }
        throw FormulaParseError(start, {"!", "(", "atom", "true", "false"}, "character '" + std::string(1, c) + "'");
    }

    Formula expr() {
        Formula lhs = disjunction();
        if (_tok.kind == Tok::Arrow) {
            advance();
            return Formula::implication(std::move(lhs), expr());
        }
        return lhs;
    }

    Formula disjunction() {
        Formula lhs = conjunction();
        while (_tok.kind == Tok::Or) {
            advance();
            lhs = Formula::disjunction(std::move(lhs), conjunction());
        }
        return lhs;
    }

    Formula conjunction() {
        Formula lhs = unary();
        while (_tok.kind == Tok::And) {
            advance();
            lhs = Formula::conjunction(std::move(lhs), unary());
        }
        return lhs;
    }

    Formula unary() {
        switch (_tok.kind) {
            case Tok::Not:
                advance();
                return Formula::negation(unary());
            case Tok::LParen: {
                advance();
                Formula inner = expr();
                if (_tok.kind != Tok::RParen) fail({")", "&", "|", "->"});
                advance();
                return inner;
            }
            case Tok::True: advance(); return Formula::constant(true);
            case Tok::False: advance(); return Formula::constant(false);
            case Tok::Atom: {
                Formula a = Formula::atom(_tok.text);
                advance();
                return a;
            }
            default: fail({"!", "(", "atom", "true", "false"});
        }
    }

    std::string_view _text;
    std::size_t _pos = 0;
    Token _tok{Tok::End, 0, ""};
};

int precedence(Formula::Kind k) {
    switch (k) {
        case Formula::Kind::Implies: return 1;
        case Formula::Kind::Or: return 2;
        case Formula::Kind::And: return 3;
        default: return 4;
    }
}

void render(const Formula& f, int min_prec, std::string& out) {
    const int prec = precedence(f.kind());
    const bool parens = prec < min_prec;
    if (parens) out += '(';
    switch (f.kind()) {
        case Formula::Kind::True: out += "true"; break;
        case Formula::Kind::False: out += "false"; break;
        case Formula::Kind::Atom: out += f.name(); break;
        case Formula::Kind::Not:
            out += '!';
            render(f.left(), 4, out);
            break;
        case Formula::Kind::And:
            render(f.left(), 3, out);
            out += " & ";
            render(f.right(), 4, out);
            break;
        case Formula::Kind::Or:
            render(f.left(), 2, out);
            out += " | ";
            render(f.right(), 3, out);
            break;
        case Formula::Kind::Implies:
            render(f.left(), 2, out);
            out += " -> ";
            render(f.right(), 1, out);
            break;
    }
    if (parens) out += ')';
}

void collect_atoms(const Formula& f, std::set<std::string>& out) {
    switch (f.kind()) {
        case Formula::Kind::Atom: out.insert(f.name()); break;
        case Formula::Kind::Not: collect_atoms(f.left(), out); break;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            collect_atoms(f.left(), out);
            collect_atoms(f.right(), out);
            break;
        default: break;
    }
}

}  // namespace

Formula parse_formula(std::string_view text) { return Parser{text}.parse(); }

std::string to_string(const Formula& formula) {
    std::string out;
    render(formula, 1, out);
    return out;
}

bool evaluate(const Formula& f, const LabelSet& labels) {
    switch (f.kind()) {
        case Formula::Kind::True: return true;
        case Formula::Kind::False: return false;
        case Formula::Kind::Atom: return labels.contains(f.name());
        case Formula::Kind::Not: return !evaluate(f.left(), labels);
        case Formula::Kind::And: return evaluate(f.left(), labels) && evaluate(f.right(), labels);
        case Formula::Kind::Or: return evaluate(f.left(), labels) || evaluate(f.right(), labels);
        case Formula::Kind::Implies: return !evaluate(f.left(), labels) || evaluate(f.right(), labels);
    }
    return false;
}

std::set<std::string> atoms_of(const Formula& formula) {
    std::set<std::string> out;
    collect_atoms(formula, out);
    return out;
}

std::vector<std::string> undeclared_atoms(const Formula& formula, const std::vector<std::string>& universe) {
    std::vector<std::string> missing;
    for (const auto& a : atoms_of(formula)) {
        if (std::find(universe.begin(), universe.end(), a) == universe.end()) missing.push_back(a);
    }
    return missing;
}

}  // namespace ambs
