#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pags/model.hpp"
#include "pags/prob.hpp"

namespace pags {

/// How the universal player-1 quantifier of a simulation step is resolved.
struct QuantStrategy
{
    enum class Kind { Pure, Grid, SmtExport };

    Kind kind = Kind::Pure;
    unsigned grid = 1;                 ///< K for Grid
    std::filesystem::path directory;   ///< output directory for SmtExport

    static QuantStrategy pure() { return {}; }
    static QuantStrategy grid_of(unsigned k);
    static QuantStrategy smt_export(std::filesystem::path dir);

    /// `pure`, `grid=K` or `smt=DIR`.
    static QuantStrategy parse(const std::string& text);
    [[nodiscard]] std::string to_string() const;
};

/// All lotteries over `n` actions whose entries are multiples of 1/k, ordered
/// lexicographically with the first action's share descending. For k = 1 this
/// is the list of pure lotteries in declaration order.
std::vector<ActionLottery> grid_lotteries(std::size_t n, unsigned k);

/// Pairs with identical label sets.
Relation initial_relation(const GameStructure& g);

/// Decides whether some player-1 lottery at `t` answers `pi1_at_s` at `s`
/// under `r`. The witness is returned as a mixed action that plays the found
/// lottery everywhere; only its entry at `t` is meaningful.
std::optional<MixedAction> exists_pi2_check(const GameStructure& g, StateId s, StateId t,
                                            const ActionLottery& pi1_at_s, const Relation& r);

struct PairWitness
{
    ActionLottery pi1;   ///< tested lottery at s
    ActionLottery pi2;   ///< answering lottery at t
};

struct RefineOutcome
{
    Relation relation;
    std::map<Relation::Pair, std::vector<PairWitness>> witnesses;
    std::set<Relation::Pair> deferred;
};

/// One refinement round with full bookkeeping.
RefineOutcome refine_step(const GameStructure& g, const Relation& r, const QuantStrategy& strat);

/// One refinement round: keeps (s,t) iff every tested lottery at s is answered.
Relation refine_once(const GameStructure& g, const Relation& r, const QuantStrategy& strat);

struct SimReport
{
    Relation relation;
    /// Refinement rounds run, counting the final one that changed nothing.
    int iterations = 0;
    QuantStrategy strategy;
    /// Witnesses recorded in the final round.
    std::map<Relation::Pair, std::vector<PairWitness>> witnesses;
    std::set<Relation::Pair> deferred;
};

SimReport pa_simulation(const GameStructure& g, const QuantStrategy& strat);

/// Greatest alternating simulation of a deterministic game structure. Throws
/// PreconditionError("model is probabilistic") when some row is not a point.
Relation a_simulation(const GameStructure& g);

/// SMT-LIB 2 sentence (logic NRA) that is satisfiable iff the exact step
/// condition holds for (s,t) under `r`.
std::string export_smt(const GameStructure& g, StateId s, StateId t, const Relation& r);

} // namespace pags
