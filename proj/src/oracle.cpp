#include "pags/oracle.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <map>

#include "pags/error.hpp"
#include "pags/sim.hpp"

namespace pags {

namespace {

constexpr std::uint64_t kMaxScale = 1'000'000;

// Edmonds-Karp on a dense capacity matrix.
std::int64_t max_flow(std::vector<std::vector<std::int64_t>> cap, std::size_t source, std::size_t sink)
{
    const std::size_t n = cap.size();
    std::int64_t total = 0;
    while (true) {
        std::vector<std::size_t> parent(n, n);
        parent[source] = source;
        std::deque<std::size_t> queue{source};
        while (!queue.empty() && parent[sink] == n) {
            const std::size_t u = queue.front();
            queue.pop_front();
            for (std::size_t v = 0; v < n; ++v)
                if (parent[v] == n && cap[u][v] > 0) {
                    parent[v] = u;
                    queue.push_back(v);
                }
        }
        if (parent[sink] == n)
            return total;
        std::int64_t push = std::numeric_limits<std::int64_t>::max();
        for (std::size_t v = sink; v != source; v = parent[v])
            push = std::min(push, cap[parent[v]][v]);
        for (std::size_t v = sink; v != source; v = parent[v]) {
            cap[parent[v]][v] -= push;
            cap[v][parent[v]] += push;
        }
        total += push;
    }
}

std::int64_t scaled(const Rational& p, std::uint64_t scale)
{
    mpq_class v = p.raw() * mpq_class(static_cast<unsigned long>(scale));
    if (v.get_den() != 1)
        throw PreconditionError("scale " + std::to_string(scale) + " is not a common denominator");
    return v.get_num().get_si();
}

} // namespace

bool brute_lift(const Distribution& d, const Distribution& th, const Relation& r, std::uint64_t scale_hint)
{
    std::uint64_t scale = scale_hint;
    if (scale == 0) {
        std::vector<Rational> values;
        for (const auto& [s, p] : d.entries())
            values.push_back(p);
        for (const auto& [t, p] : th.entries())
            values.push_back(p);
        mpz_class l = common_denominator(values);
        if (l > kMaxScale)
            throw OracleBudgetExceeded("oracle budget exceeded: scale " + l.get_str() + " exceeds 1000000");
        scale = l.get_ui();
    }
    if (scale > kMaxScale)
        throw OracleBudgetExceeded("oracle budget exceeded: scale " + std::to_string(scale) + " exceeds 1000000");

    // Nodes: source, one per support state of d, one per support state of th, sink.
    const auto& left = d.entries();
    const auto& right = th.entries();
    const std::size_t source = 0;
    const std::size_t sink = left.size() + right.size() + 1;
    std::vector<std::vector<std::int64_t>> cap(sink + 1, std::vector<std::int64_t>(sink + 1, 0));
    std::int64_t left_total = 0;
    std::int64_t right_total = 0;
    for (std::size_t i = 0; i < left.size(); ++i) {
        cap[source][1 + i] = scaled(left[i].second, scale);
        left_total += cap[source][1 + i];
    }
    for (std::size_t j = 0; j < right.size(); ++j) {
        cap[1 + left.size() + j][sink] = scaled(right[j].second, scale);
        right_total += cap[1 + left.size() + j][sink];
    }
    const auto full = static_cast<std::int64_t>(scale);
    if (left_total != full || right_total != full)
        return false;
    for (std::size_t i = 0; i < left.size(); ++i)
        for (std::size_t j = 0; j < right.size(); ++j)
            if (r.contains(left[i].first, right[j].first))
                cap[1 + i][1 + left.size() + j] = full;
    return max_flow(std::move(cap), source, sink) == full;
}

Relation brute_sim(const GameStructure& g, unsigned k, std::size_t budget)
{
    const std::size_t n1 = g.num_actions(Player::One);
    const std::size_t n2 = g.num_actions(Player::Two);
    const auto lot1 = grid_lotteries(n1, k);
    const auto lot2 = grid_lotteries(n2, k);
    std::size_t spent = 0;

    Relation r;
    for (StateId s : g.states().ids())
        for (StateId t : g.states().ids())
            if (g.labels(s) == g.labels(t))
                r.insert(s, t);

    while (true) {
        Relation next;
        for (const auto& [s, t] : r) {
            bool kept = true;
            for (const auto& test : lot1) {
                // Outcomes at s for every player-2 interpolation on the grid.
                std::vector<Distribution> at_s;
                for (const auto& lambda : lot2)
                    at_s.push_back(step_lotteries(g, s, test, lambda));
                bool answered = false;
                for (const auto& x : lot1) {
                    bool all = true;
                    for (std::uint32_t b = 0; b < n2 && all; ++b) {
                        const Distribution at_t = step_lotteries(g, t, x, pure_lottery(n2, ActionId{b}));
                        bool dominated = false;
                        for (const auto& from : at_s) {
                            if (++spent > budget)
                                throw OracleBudgetExceeded("oracle budget exceeded in brute_sim");
                            if (brute_lift(from, at_t, r)) {
                                dominated = true;
                                break;
                            }
                        }
                        all = dominated;
                    }
                    if (all) {
                        answered = true;
                        break;
                    }
                }
                if (!answered) {
                    kept = false;
                    break;
                }
            }
            if (kept)
                next.insert(s, t);
        }
        if (next == r)
            return r;
        r = std::move(next);
    }
}

namespace {

class BruteEvaluator
{
public:
    BruteEvaluator(const GameStructure& g, const OracleGrids& grids) : _g(g), _k(grids)
    {
        if (_k.pi1 == 0 || _k.pi2 == 0 || _k.split == 0)
            throw PreconditionError("oracle grids must be positive");
    }

    EvalResult run(const Distribution& d, const FormulaPtr& f)
    {
        auto key = std::make_pair(f.get(), d.key());
        if (auto it = _memo.find(key); it != _memo.end())
            return it->second;
        _alive.push_back(f);
        EvalResult r = compute(d, f);
        _memo.emplace(key, r);
        return r;
    }

private:
    void spend()
    {
        if (++_spent > _k.budget)
            throw OracleBudgetExceeded("oracle budget exceeded in brute_eval");
    }

    bool satisfies_literal(const Formula& f, StateId s) const
    {
        const bool has = _g.has_label(s, prop_named(_g, f.name));
        return f.kind == FormulaKind::Prop ? has : !has;
    }

    EvalResult compute(const Distribution& d, const FormulaPtr& f)
    {
        switch (f->kind) {
        case FormulaKind::Prop:
        case FormulaKind::NegProp:
            for (StateId s : d.support())
                if (!satisfies_literal(*f, s))
                    return {Verdict::Fails, true, "literal violated at " + _g.states().name(s), {}, 0};
            return {Verdict::Holds, true, "literal", {}, 0};
        case FormulaKind::And: {
            bool undecided = false;
            bool certified = true;
            std::optional<EvalResult> failed;
            for (const auto& c : f->children) {
                EvalResult r = run(d, c);
                if (r.verdict == Verdict::Fails && (!failed || (r.certified && !failed->certified)))
                    failed = r;
                undecided = undecided || r.verdict == Verdict::Unknown;
                certified = certified && r.certified;
            }
            if (failed)
                return {Verdict::Fails, failed->certified, failed->witness, {}, 0};
            if (undecided)
                return {Verdict::Unknown, false, {}, "conjunct undecided", 0};
            return {Verdict::Holds, certified, "all conjuncts", {}, 0};
        }
        case FormulaKind::Or: {
            bool undecided = false;
            bool certified = true;
            std::optional<EvalResult> held;
            for (const auto& c : f->children) {
                EvalResult r = run(d, c);
                if (r.verdict == Verdict::Holds && (!held || (r.certified && !held->certified)))
                    held = r;
                undecided = undecided || r.verdict == Verdict::Unknown;
                certified = certified && r.certified;
            }
            if (held)
                return {Verdict::Holds, held->certified, held->witness, {}, 0};
            if (undecided)
                return {Verdict::Unknown, false, {}, "disjunct undecided", 0};
            return {Verdict::Fails, certified, "all disjuncts fail", {}, 0};
        }
        case FormulaKind::Enforce:
            return enforce(d, f->children.front());
        case FormulaKind::ProbSum:
        case FormulaKind::Mix:
            return split(d, *f);
        case FormulaKind::Mu:
        case FormulaKind::Nu: {
            FormulaPtr approx = f->kind == FormulaKind::Mu ? fml::bottom() : fml::top();
            for (unsigned i = 1; i <= _k.unfold; ++i) {
                approx = substitute(f->children.front(), f->name, approx);
                _alive.push_back(approx);
                EvalResult r = run(d, approx);
                if (f->kind == FormulaKind::Mu && r.verdict == Verdict::Holds)
                    return {Verdict::Holds, r.certified, r.witness, {}, i};
                if (f->kind == FormulaKind::Nu && r.verdict == Verdict::Fails)
                    return {Verdict::Fails, r.certified, r.witness, {}, i};
            }
            return {Verdict::Unknown, false, {}, "bound reached", _k.unfold};
        }
        case FormulaKind::Var:
            throw PreconditionError("cannot evaluate an open formula (free variable " + f->name + ")");
        }
        return {};
    }

    // Every per-state assignment of grid lotteries over the support.
    template <typename Visit>
    void assignments(const std::vector<ActionLottery>& grid, std::size_t states, Visit visit)
    {
        std::vector<std::size_t> pick(states, 0);
        while (true) {
            spend();
            if (!visit(pick))
                return;
            std::size_t i = 0;
            while (i < states && ++pick[i] == grid.size())
                pick[i++] = 0;
            if (i == states)
                return;
        }
    }

    std::string render_pi1(const std::vector<Distribution::Entry>& entries, const std::vector<ActionLottery>& grid,
                           const std::vector<std::size_t>& pick) const
    {
        std::string out = "pi1:";
        for (std::size_t i = 0; i < entries.size(); ++i) {
            out += " " + _g.states().name(entries[i].first) + "->[";
            const ActionLottery& l = grid[pick[i]];
            bool first = true;
            for (std::uint32_t a = 0; a < l.size(); ++a) {
                if (l[a].is_zero())
                    continue;
                out += (first ? "" : ",") + _g.actions(Player::One).name(ActionId{a}) + ":" + l[a].to_string();
                first = false;
            }
            out += "]";
        }
        return out;
    }

    EvalResult enforce(const Distribution& d, const FormulaPtr& body)
    {
        const auto grid1 = grid_lotteries(_g.num_actions(Player::One), _k.pi1);
        const auto grid2 = grid_lotteries(_g.num_actions(Player::Two), _k.pi2);
        const auto& entries = d.entries();
        const bool convex = convex_safe(*body);
        const bool single = _g.num_actions(Player::One) == 1;

        std::optional<EvalResult> found;
        std::optional<EvalResult> refuted;
        assignments(grid1, entries.size(), [&](const std::vector<std::size_t>& p1) {
            bool all_hold = true;
            bool certified = convex;
            assignments(grid2, entries.size(), [&](const std::vector<std::size_t>& p2) {
                std::vector<std::pair<Rational, Distribution>> parts;
                for (std::size_t i = 0; i < entries.size(); ++i)
                    parts.emplace_back(entries[i].second,
                                       step_lotteries(_g, entries[i].first, grid1[p1[i]], grid2[p2[i]]));
                EvalResult r = run(combine_dists(parts), body);
                if (r.verdict != Verdict::Holds) {
                    all_hold = false;
                    if (single && r.verdict == Verdict::Fails && r.certified)
                        refuted = EvalResult{Verdict::Fails, true, "player-2 response defeats the only action",
                                             {}, 0};
                    return false;
                }
                certified = certified && r.certified;
                return true;
            });
            if (all_hold && (!found || (certified && !found->certified)))
                found = EvalResult{Verdict::Holds, certified, render_pi1(entries, grid1, p1), {}, 0};
            return !(found && found->certified);
        });
        if (found)
            return *found;
        if (refuted)
            return *refuted;
        return {Verdict::Unknown, false, {}, "no grid lottery enforces the body", 0};
    }

    EvalResult split(const Distribution& d, const Formula& f)
    {
        const std::size_t parts = f.children.size();
        const bool weighted = f.kind == FormulaKind::ProbSum;
        const auto shares = grid_lotteries(parts, _k.split);
        const auto& entries = d.entries();

        std::optional<EvalResult> found;
        assignments(shares, entries.size(), [&](const std::vector<std::size_t>& pick) {
            std::vector<Rational> mass(parts, Rational(0));
            for (std::size_t i = 0; i < entries.size(); ++i)
                for (std::size_t j = 0; j < parts; ++j)
                    mass[j] += entries[i].second * shares[pick[i]][j];
            if (weighted && mass != f.weights)
                return true;
            bool certified = true;
            for (std::size_t j = 0; j < parts; ++j) {
                EvalResult r;
                if (mass[j].is_zero()) {
                    r = some_point(f.children[j]);
                } else {
                    std::vector<Distribution::Entry> part;
                    for (std::size_t i = 0; i < entries.size(); ++i)
                        if (!shares[pick[i]][j].is_zero())
                            part.emplace_back(entries[i].first, entries[i].second * shares[pick[i]][j] / mass[j]);
                    r = run(Distribution::unchecked(std::move(part)), f.children[j]);
                }
                if (r.verdict != Verdict::Holds)
                    return true;
                certified = certified && r.certified;
            }
            if (!found || (certified && !found->certified))
                found = EvalResult{Verdict::Holds, certified, "grid split", {}, 0};
            return !certified;
        });
        if (found)
            return *found;
        return {Verdict::Unknown, false, {}, "no grid split", 0};
    }

    EvalResult some_point(const FormulaPtr& f)
    {
        for (StateId t : _g.states().ids()) {
            EvalResult r = run(Distribution::point(t), f);
            if (r.verdict == Verdict::Holds)
                return r;
        }
        return {Verdict::Unknown, false, {}, "no point witness", 0};
    }

    const GameStructure& _g;
    OracleGrids _k;
    std::size_t _spent = 0;
    std::map<std::pair<const Formula*, std::string>, EvalResult> _memo;
    std::vector<FormulaPtr> _alive;
};

} // namespace

EvalResult brute_eval(const GameStructure& g, const Distribution& d, const FormulaPtr& phi, const OracleGrids& grids)
{
    if (!is_closed(*phi))
        throw PreconditionError("cannot evaluate an open formula");
    return BruteEvaluator(g, grids).run(d, phi);
}

} // namespace pags
