#pragma once

#include <cstddef>
#include <cstdint>

#include "pags/distribution.hpp"
#include "pags/formula.hpp"
#include "pags/logic.hpp"
#include "pags/model.hpp"
#include "pags/prob.hpp"

namespace pags {

/// Lifting by integer max-flow after scaling both distributions by a common
/// denominator. `scale_hint` of 0 means the least common denominator. Throws
/// OracleBudgetExceeded when the scale exceeds 10^6 and PreconditionError when
/// the hint is not a common denominator.
bool brute_lift(const Distribution& d, const Distribution& th, const Relation& r, std::uint64_t scale_hint = 0);

/// Greatest fixpoint of the simulation step with the player-1 test lottery,
/// the answering lottery and the player-2 interpolation all taken from the
/// K-grid. Throws OracleBudgetExceeded past `budget` lifting checks.
Relation brute_sim(const GameStructure& g, unsigned k, std::size_t budget = 20'000'000);

struct OracleGrids
{
    unsigned pi1 = 2;     ///< player-1 lottery grid
    unsigned pi2 = 2;     ///< player-2 lottery grid
    unsigned split = 6;   ///< split denominator
    unsigned unfold = 4;  ///< fixpoint unfolding depth
    std::size_t budget = 5'000'000;
};

/// Evaluation with every quantifier enumerated on a grid. Holds is certified
/// only with an explicit witness; fails only where the refutation is exact.
EvalResult brute_eval(const GameStructure& g, const Distribution& d, const FormulaPtr& phi,
                      const OracleGrids& grids = {});

} // namespace pags
