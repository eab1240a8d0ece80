#pragma once

#include <cstddef>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ambs {

/// Atoms holding in a state, L(s).
using LabelSet = std::set<std::string, std::less<>>;

/// Immutable propositional formula over named atoms. Copies share structure,
/// so a formula can be handed to concurrent evaluators freely.
class Formula {
public:
    enum class Kind { True, False, Atom, Not, And, Or, Implies };

    /// The constant `true`.
    Formula();

    static Formula constant(bool value);
    static Formula atom(std::string name);
    static Formula negation(Formula child);
    static Formula conjunction(Formula left, Formula right);
    static Formula disjunction(Formula left, Formula right);
    static Formula implication(Formula premise, Formula conclusion);

    Kind kind() const;
    /// Atom name; empty for every other kind.
    const std::string& name() const;
    /// Operand of Not, left operand of a binary node.
    const Formula& left() const;
    const Formula& right() const;

    /// Structural equality.
    friend bool operator==(const Formula& a, const Formula& b);

private:
    struct Node;
    explicit Formula(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> _node;
};

class FormulaParseError : public std::runtime_error {
public:
    FormulaParseError(std::size_t offset, std::vector<std::string> expected, const std::string& found);

    /// Byte offset into the input where parsing stopped.
    std::size_t offset() const { return _offset; }
    const std::vector<std::string>& expected() const { return _expected; }

private:
    std::size_t _offset;
    std::vector<std::string> _expected;
};

/// True when `name` is a legal atom identifier: nonempty, characters from [a-z0-9_-],
/// not a keyword.
bool is_valid_atom_name(std::string_view name);

/// Parses the surface syntax
///   expr := or ("->" expr)?          (right associative)
///   or   := and ("|" and)*
///   and  := unary ("&" unary)*
///   unary:= "!" unary | "(" expr ")" | atom | "true" | "false"
Formula parse_formula(std::string_view text);

/// Minimal-parenthesis rendering that parses back to the same tree.
std::string to_string(const Formula& formula);

/// Classical semantics; an atom holds iff it is in `labels`.
bool evaluate(const Formula& formula, const LabelSet& labels);

/// Every atom mentioned by the formula.
std::set<std::string> atoms_of(const Formula& formula);

/// Atoms of the formula missing from `universe` (they always evaluate false).
std::vector<std::string> undeclared_atoms(const Formula& formula, const std::vector<std::string>& universe);

}  // namespace ambs
