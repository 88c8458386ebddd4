#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pags/rational.hpp"

namespace pags {

enum class FormulaKind { Prop, NegProp, And, Or, Enforce, ProbSum, Mix, Var, Mu, Nu };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Immutable formula node. Subtrees may be shared between formulas.
struct Formula
{
    FormulaKind kind = FormulaKind::And;
    /// Proposition name for literals, variable name for Var/Mu/Nu.
    std::string name;
    /// Operands; Enforce, Mu and Nu have exactly one.
    std::vector<FormulaPtr> children;
    /// ProbSum only: one positive weight per child, summing to one.
    std::vector<Rational> weights;
};

namespace fml {

FormulaPtr prop(std::string p);
FormulaPtr neg(std::string p);
/// A single operand is returned unchanged; no operands gives true.
FormulaPtr conj(std::vector<FormulaPtr> parts);
/// A single operand is returned unchanged; no operands gives false.
FormulaPtr disj(std::vector<FormulaPtr> parts);
FormulaPtr top();
FormulaPtr bottom();
FormulaPtr enforce(FormulaPtr body);
/// Throws PreconditionError unless weights are positive and sum to one.
FormulaPtr sum(std::vector<std::pair<Rational, FormulaPtr>> parts);
/// Throws PreconditionError on an empty list.
FormulaPtr mix(std::vector<FormulaPtr> parts);
/// Sugar for sum{alpha: body, 1-alpha: true}; alpha must lie in (0,1].
FormulaPtr frag(const Rational& alpha, FormulaPtr body);
FormulaPtr var(std::string name);
FormulaPtr mu(std::string name, FormulaPtr body);
FormulaPtr nu(std::string name, FormulaPtr body);

} // namespace fml

/// Parses the formula language. Variables are an uppercase letter optionally
/// followed by digits. With `closed` set, unbound variables are an error.
FormulaPtr parse_formula(std::string_view text, bool closed = true);

/// Text that parses back to a structurally equal formula.
std::string to_string(const Formula& f);
inline std::string to_string(const FormulaPtr& f) { return to_string(*f); }

bool structurally_equal(const Formula& a, const Formula& b);

std::set<std::string> free_variables(const Formula& f);
inline bool is_closed(const Formula& f) { return free_variables(f).empty(); }

/// Replaces free occurrences of `name` by `replacement`, sharing untouched subtrees.
FormulaPtr substitute(const FormulaPtr& f, const std::string& name, const FormulaPtr& replacement);

/// The m-th approximant of a Mu or Nu formula, starting from false / true.
FormulaPtr unfold_fixpoint(const FormulaPtr& f, unsigned m);

/// Built only from literals, And, ProbSum and Mix.
bool convex_safe(const Formula& f);

/// Number of nested Enforce operators along the deepest path.
unsigned modal_depth(const Formula& f);

} // namespace pags
