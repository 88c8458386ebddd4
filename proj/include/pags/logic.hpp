#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pags/distribution.hpp"
#include "pags/formula.hpp"
#include "pags/model.hpp"

namespace pags {

enum class Verdict { Holds, Fails, Unknown };

std::string to_string(Verdict v);

struct EvalOptions
{
    unsigned unfold_bound = 4;      ///< m: fixpoints are unfolded to this depth
    unsigned pi1_grid = 2;          ///< K: player-1 lotteries searched on this grid
    unsigned split_denominator = 6; ///< Q: fallback split search denominators
    /// Report the certified flag. Certification is always computed; when
    /// this is off the reported flag is false.
    bool certify = true;
    /// Cap on candidates per grid search before giving up with unknown.
    std::size_t budget = 200000;
};

struct EvalResult
{
    Verdict verdict = Verdict::Unknown;
    bool certified = false;
    /// For holds: the witness (strategy, split, approximant). For fails: the
    /// counterexample. Empty for unknown.
    std::string witness;
    /// Why the verdict is unknown, or a short note otherwise.
    std::string message;
    unsigned bound_used = 0;
};

/// Decides `d` |= `phi` for a closed formula with three-valued, certified
/// verdicts. Throws PreconditionError for open formulas and ModelError for
/// propositions the model does not declare.
EvalResult eval(const GameStructure& g, const Distribution& d, const FormulaPtr& phi, const EvalOptions& opts = {});

/// `d` |= sum{p_j: phi_j}.
EvalResult split_check(const GameStructure& g, const Distribution& d,
                       const std::vector<std::pair<Rational, FormulaPtr>>& parts, const EvalOptions& opts = {});

/// `d` |= mix{phi_j}.
EvalResult mix_check(const GameStructure& g, const Distribution& d, const std::vector<FormulaPtr>& parts,
                     const EvalOptions& opts = {});

/// `d` |= <1> body.
EvalResult enforce_check(const GameStructure& g, const Distribution& d, const FormulaPtr& body,
                         const EvalOptions& opts = {});

/// Depth-n characteristic formula of a state, with the conjunction over
/// player-1 lotteries restricted to the K-grid. Every level keeps the
/// propositional part of the state.
FormulaPtr char_formula_state(const GameStructure& g, StateId s, unsigned n, unsigned k);

/// sum over the support of d(t) times the characteristic formula of t.
FormulaPtr char_formula_dist(const GameStructure& g, const Distribution& d, unsigned n, unsigned k);

/// Evaluates the point distribution on `t` against the characteristic formula of `s`.
EvalResult logic_preorder(const GameStructure& g, StateId s, StateId t, unsigned n, unsigned k,
                          const EvalOptions& opts = {});

} // namespace pags
