#pragma once

#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <utility>
#include <vector>

#include "pags/distribution.hpp"
#include "pags/lp.hpp"
#include "pags/model.hpp"

namespace pags {

/// Dense lottery over one player's actions, indexed by action declaration order.
using ActionLottery = std::vector<Rational>;

/// Point lottery on `a` over `n` actions.
ActionLottery pure_lottery(std::size_t n, ActionId a);
ActionLottery uniform_lottery(std::size_t n);
/// Nonnegative entries summing to exactly one.
bool is_lottery(const ActionLottery& l);

/// A per-state lottery over one player's actions.
class MixedAction
{
public:
    /// Throws PreconditionError unless every entry is a lottery of equal width.
    MixedAction(Player owner, std::vector<ActionLottery> per_state);

    /// The deterministic mixed action that always plays `a`.
    static MixedAction pure(const GameStructure& g, Player owner, ActionId a);
    /// The same lottery in every state.
    static MixedAction constant(const GameStructure& g, Player owner, ActionLottery l);

    [[nodiscard]] Player owner() const { return _owner; }
    [[nodiscard]] const ActionLottery& at(StateId s) const { return _choice.at(s.index); }
    [[nodiscard]] std::size_t num_states() const { return _choice.size(); }
    [[nodiscard]] std::size_t num_actions() const { return _choice.empty() ? 0 : _choice.front().size(); }

    friend bool operator==(const MixedAction&, const MixedAction&) = default;

private:
    Player _owner;
    std::vector<ActionLottery> _choice;
};

/// A set of state pairs.
class Relation
{
public:
    using Pair = std::pair<StateId, StateId>;

    Relation() = default;
    explicit Relation(std::set<Pair> pairs) : _pairs(std::move(pairs)) {}

    static Relation identity(std::size_t n);
    static Relation full(std::size_t n);

    void insert(StateId s, StateId t) { _pairs.emplace(s, t); }
    void erase(StateId s, StateId t) { _pairs.erase({s, t}); }
    [[nodiscard]] bool contains(StateId s, StateId t) const { return _pairs.contains({s, t}); }
    [[nodiscard]] std::size_t size() const { return _pairs.size(); }
    [[nodiscard]] bool empty() const { return _pairs.empty(); }
    [[nodiscard]] auto begin() const { return _pairs.begin(); }
    [[nodiscard]] auto end() const { return _pairs.end(); }
    [[nodiscard]] const std::set<Pair>& pairs() const { return _pairs; }

    [[nodiscard]] Relation inverse() const;
    [[nodiscard]] bool subset_of(const Relation& other) const;
    [[nodiscard]] bool is_transitive() const;

    friend bool operator==(const Relation&, const Relation&) = default;

private:
    std::set<Pair> _pairs;
};

/// One `s t` pair per line; `#` starts a comment. Names are resolved in
/// `names`, declaring unknown ones when `intern` is set.
Relation parse_relation(std::string_view text, StateTable& names, bool intern = false);
std::string format_relation(const Relation& r, const StateTable& names);

/// Lifting witness: weights w(s,t) > 0 on related pairs.
struct WeightWitness
{
    std::map<Relation::Pair, Rational> weights;

    friend bool operator==(const WeightWitness&, const WeightWitness&) = default;
};

/// Checks the three lifting clauses exactly: row sums equal `d`, column sums
/// equal `th`, and every weighted pair lies in `r`.
bool is_lifting_witness(const WeightWitness& w, const Distribution& d, const Distribution& th, const Relation& r);

/// Pointwise weighted sum. Throws PreconditionError unless weights are
/// nonnegative and sum to exactly one.
Distribution combine_dists(const std::vector<std::pair<Rational, Distribution>>& parts);

/// Pointwise weighted sum of mixed actions of one owner.
MixedAction combine_mixed_actions(const std::vector<std::pair<Rational, MixedAction>>& parts);

/// Outcome at `s` when both players use the given lotteries at `s`.
Distribution step_lotteries(const GameStructure& g, StateId s, const ActionLottery& l1, const ActionLottery& l2);

/// Generalised transition function from a state.
Distribution step_mixed_state(const GameStructure& g, StateId s, const MixedAction& pi1, const MixedAction& pi2);

/// Generalised transition function from a distribution.
Distribution step_mixed_dist(const GameStructure& g, const Distribution& d, const MixedAction& pi1,
                             const MixedAction& pi2);

/// Decides `d` lift(r) `th` exactly; returns a witness iff one exists.
std::optional<WeightWitness> lift_check(const Distribution& d, const Distribution& th, const Relation& r);

struct SmythMatch
{
    std::size_t from_index; ///< index into the dominating list
    WeightWitness witness;
};

struct SmythResult
{
    bool holds = false;
    /// One entry per element of the dominated list, absent when unmatched.
    std::vector<std::optional<SmythMatch>> matches;
};

/// `p` is below `q` in the Smyth order of lift(r): every element of `q` is
/// lift-related from some element of `p`. Lists must be nonempty.
SmythResult smyth_check(const std::vector<Distribution>& p, const std::vector<Distribution>& q, const Relation& r);

struct MatchedPart
{
    Rational weight;
    Distribution theta;
    WeightWitness witness;
};

/// Given `d` lift(r) `th` and `d = sum p_i d_i`, builds `th = sum p_i th_i` with
/// every `d_i` lift(r) `th_i`. For the other direction call with swapped
/// arguments and `r.inverse()`. Weights must be positive.
std::vector<MatchedPart> split_match(const Distribution& d, const Distribution& th, const Relation& r,
                                     const std::vector<std::pair<Rational, Distribution>>& parts);

/// As above, splitting along a caller-supplied witness.
std::vector<MatchedPart> split_match(const Distribution& d, const Distribution& th, const Relation& r,
                                     const WeightWitness& w,
                                     const std::vector<std::pair<Rational, Distribution>>& parts);

} // namespace pags
