#include "pags/prob.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "pags/error.hpp"

namespace pags {

ActionLottery pure_lottery(std::size_t n, ActionId a)
{
    ActionLottery l(n, Rational(0));
    l.at(a.index) = Rational(1);
    return l;
}

ActionLottery uniform_lottery(std::size_t n)
{
    return ActionLottery(n, Rational(1, static_cast<long>(n)));
}

bool is_lottery(const ActionLottery& l)
{
    Rational total;
    for (const auto& p : l) {
        if (p.sign() < 0)
            return false;
        total += p;
    }
    return !l.empty() && total == Rational(1);
}

MixedAction::MixedAction(Player owner, std::vector<ActionLottery> per_state)
    : _owner(owner), _choice(std::move(per_state))
{
    for (const auto& l : _choice) {
        if (!is_lottery(l))
            throw PreconditionError("mixed action entry is not a lottery");
        if (l.size() != _choice.front().size())
            throw PreconditionError("mixed action lotteries have different widths");
    }
}

MixedAction MixedAction::pure(const GameStructure& g, Player owner, ActionId a)
{
    return constant(g, owner, pure_lottery(g.num_actions(owner), a));
}

MixedAction MixedAction::constant(const GameStructure& g, Player owner, ActionLottery l)
{
    if (l.size() != g.num_actions(owner))
        throw PreconditionError("lottery width does not match the action set");
    return MixedAction(owner, std::vector<ActionLottery>(g.num_states(), std::move(l)));
}

Relation Relation::identity(std::size_t n)
{
    Relation r;
    for (std::uint32_t i = 0; i < n; ++i)
        r.insert(StateId{i}, StateId{i});
    return r;
}

Relation Relation::full(std::size_t n)
{
    Relation r;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            r.insert(StateId{i}, StateId{j});
    return r;
}

Relation Relation::inverse() const
{
    Relation out;
    for (const auto& [s, t] : _pairs)
        out.insert(t, s);
    return out;
}

bool Relation::subset_of(const Relation& other) const
{
    return std::includes(other._pairs.begin(), other._pairs.end(), _pairs.begin(), _pairs.end());
}

bool Relation::is_transitive() const
{
    for (const auto& [a, b] : _pairs) {
        auto it = _pairs.lower_bound({b, StateId{0}});
        for (; it != _pairs.end() && it->first == b; ++it)
            if (!contains(a, it->second))
                return false;
    }
    return true;
}

Relation parse_relation(std::string_view text, StateTable& names, bool intern)
{
    Relation r;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        std::istringstream words(line);
        std::vector<std::string> parts;
        for (std::string w; words >> w;)
            parts.push_back(w);
        if (parts.empty())
            continue;
        if (parts.size() != 2)
            throw ParseError("expected a pair 's t'", lineno, 1);
        auto resolve = [&](const std::string& n) {
            if (intern)
                return names.intern(n);
            auto id = names.find(n);
            if (!id)
                throw ParseError("unknown state '" + n + "'", lineno, 1);
            return *id;
        };
        const StateId s = resolve(parts[0]);
        const StateId t = resolve(parts[1]);
        r.insert(s, t);
    }
    return r;
}

std::string format_relation(const Relation& r, const StateTable& names)
{
    std::string out;
    for (const auto& [s, t] : r)
        out += names.name(s) + " " + names.name(t) + "\n";
    return out;
}

bool is_lifting_witness(const WeightWitness& w, const Distribution& d, const Distribution& th, const Relation& r)
{
    std::map<StateId, Rational> rows;
    std::map<StateId, Rational> cols;
    for (const auto& [pair, weight] : w.weights) {
        if (weight.sign() <= 0 || !r.contains(pair.first, pair.second))
            return false;
        rows[pair.first] += weight;
        cols[pair.second] += weight;
    }
    auto marginal_matches = [](const std::map<StateId, Rational>& sums, const Distribution& dist) {
        if (sums.size() != dist.size())
            return false;
        for (const auto& [s, p] : dist.entries()) {
            auto it = sums.find(s);
            if (it == sums.end() || it->second != p)
                return false;
        }
        return true;
    };
    return marginal_matches(rows, d) && marginal_matches(cols, th);
}

Distribution combine_dists(const std::vector<std::pair<Rational, Distribution>>& parts)
{
    Rational total;
    std::vector<Distribution::Entry> acc;
    for (const auto& [p, d] : parts) {
        if (p.sign() < 0)
            throw PreconditionError("negative combination weight " + p.to_string());
        total += p;
        if (p.is_zero())
            continue;
        for (const auto& [s, q] : d.entries())
            acc.emplace_back(s, p * q);
    }
    if (total != Rational(1))
        throw PreconditionError("combination weights sum to " + total.to_string() + ", not 1");
    return Distribution::unchecked(std::move(acc));
}

MixedAction combine_mixed_actions(const std::vector<std::pair<Rational, MixedAction>>& parts)
{
    if (parts.empty())
        throw PreconditionError("combination of no mixed actions");
    const Player owner = parts.front().second.owner();
    const std::size_t ns = parts.front().second.num_states();
    const std::size_t na = parts.front().second.num_actions();
    Rational total;
    std::vector<ActionLottery> out(ns, ActionLottery(na, Rational(0)));
    for (const auto& [p, pi] : parts) {
        if (pi.owner() != owner)
            throw PreconditionError("cannot combine mixed actions of different players");
        if (pi.num_states() != ns || pi.num_actions() != na)
            throw PreconditionError("mixed actions have different shapes");
        if (p.sign() < 0)
            throw PreconditionError("negative combination weight " + p.to_string());
        total += p;
        for (std::uint32_t s = 0; s < ns; ++s)
            for (std::size_t a = 0; a < na; ++a)
                out[s][a] += p * pi.at(StateId{s})[a];
    }
    if (total != Rational(1))
        throw PreconditionError("combination weights sum to " + total.to_string() + ", not 1");
    return MixedAction(owner, std::move(out));
}

Distribution step_lotteries(const GameStructure& g, StateId s, const ActionLottery& l1, const ActionLottery& l2)
{
    if (l1.size() != g.num_actions(Player::One) || l2.size() != g.num_actions(Player::Two))
        throw PreconditionError("lottery width does not match the action set");
    std::vector<Distribution::Entry> acc;
    for (std::uint32_t a = 0; a < l1.size(); ++a) {
        if (l1[a].is_zero())
            continue;
        for (std::uint32_t b = 0; b < l2.size(); ++b) {
            if (l2[b].is_zero())
                continue;
            const Rational joint = l1[a] * l2[b];
            for (const auto& [t, p] : step_state(g, s, ActionId{a}, ActionId{b}).entries())
                acc.emplace_back(t, joint * p);
        }
    }
    return Distribution::unchecked(std::move(acc));
}

Distribution step_mixed_state(const GameStructure& g, StateId s, const MixedAction& pi1, const MixedAction& pi2)
{
    if (pi1.owner() != Player::One || pi2.owner() != Player::Two)
        throw PreconditionError("step_mixed_state expects (player 1, player 2) mixed actions");
    return step_lotteries(g, s, pi1.at(s), pi2.at(s));
}

Distribution step_mixed_dist(const GameStructure& g, const Distribution& d, const MixedAction& pi1,
                             const MixedAction& pi2)
{
    std::vector<std::pair<Rational, Distribution>> parts;
    for (const auto& [s, p] : d.entries())
        parts.emplace_back(p, step_mixed_state(g, s, pi1, pi2));
    return combine_dists(parts);
}

std::optional<WeightWitness> lift_check(const Distribution& d, const Distribution& th, const Relation& r)
{
    LinearProblem lp;
    std::vector<Relation::Pair> pairs;
    std::map<StateId, std::vector<LinearProblem::Term>> rows;
    std::map<StateId, std::vector<LinearProblem::Term>> cols;
    for (const auto& [s, ps] : d.entries()) {
        for (const auto& [t, pt] : th.entries()) {
            if (!r.contains(s, t))
                continue;
            const std::size_t v = lp.add_variable("w");
            pairs.emplace_back(s, t);
            rows[s].emplace_back(v, Rational(1));
            cols[t].emplace_back(v, Rational(1));
        }
    }
    // A state with mass but no related partner rules out any witness.
    if (rows.size() != d.size() || cols.size() != th.size())
        return std::nullopt;
    for (const auto& [s, p] : d.entries())
        lp.add_constraint(rows[s], LinearProblem::Sense::Eq, p);
    for (const auto& [t, p] : th.entries())
        lp.add_constraint(cols[t], LinearProblem::Sense::Eq, p);
    auto x = lp_feasible(lp);
    if (!x)
        return std::nullopt;
    WeightWitness w;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (!(*x)[i].is_zero())
            w.weights.emplace(pairs[i], (*x)[i]);
    return w;
}

SmythResult smyth_check(const std::vector<Distribution>& p, const std::vector<Distribution>& q, const Relation& r)
{
    if (p.empty() || q.empty())
        throw PreconditionError("smyth_check needs nonempty lists");
    SmythResult out;
    out.holds = true;
    for (const Distribution& theta : q) {
        std::optional<SmythMatch> match;
        for (std::size_t i = 0; i < p.size() && !match; ++i)
            if (auto w = lift_check(p[i], theta, r))
                match = SmythMatch{i, std::move(*w)};
        out.holds = out.holds && match.has_value();
        out.matches.push_back(std::move(match));
    }
    return out;
}

std::vector<MatchedPart> split_match(const Distribution& d, const Distribution& th, const Relation& r,
                                     const std::vector<std::pair<Rational, Distribution>>& parts)
{
    auto w = lift_check(d, th, r);
    if (!w)
        throw PreconditionError("split_match: the distributions are not lift-related");
    return split_match(d, th, r, *w, parts);
}

std::vector<MatchedPart> split_match(const Distribution& d, const Distribution& th, const Relation& r,
                                     const WeightWitness& w,
                                     const std::vector<std::pair<Rational, Distribution>>& parts)
{
    if (!is_lifting_witness(w, d, th, r))
        throw PreconditionError("split_match: witness does not lift the relation");
    for (const auto& [p, di] : parts) {
        if (p.sign() <= 0)
            throw PreconditionError("split_match: part weights must be positive");
        if (!di.is_valid())
            throw PreconditionError("split_match: part is not a distribution");
    }
    if (combine_dists(parts) != d)
        throw PreconditionError("split_match: parts do not recombine to the source distribution");

    // Each part takes, from every source state, the share of that state's
    // weight row proportional to its own mass there.
    std::vector<MatchedPart> out;
    for (const auto& [p, di] : parts) {
        MatchedPart part{p, {}, {}};
        std::vector<Distribution::Entry> theta;
        for (const auto& [pair, weight] : w.weights) {
            const Rational share = di(pair.first) / d(pair.first);
            if (share.is_zero())
                continue;
            const Rational wi = share * weight;
            part.witness.weights.emplace(pair, wi);
            theta.emplace_back(pair.second, wi);
        }
        part.theta = Distribution::unchecked(std::move(theta));
        out.push_back(std::move(part));
    }
    return out;
}

} // namespace pags
