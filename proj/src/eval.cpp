#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>

#include "pags/error.hpp"
#include "pags/logic.hpp"
#include "pags/lp.hpp"
#include "pags/prob.hpp"
#include "pags/sim.hpp"

namespace pags {

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::Holds:
        return "holds";
    case Verdict::Fails:
        return "fails";
    case Verdict::Unknown:
        return "unknown";
    }
    return {};
}

namespace {

const std::string kMu = "\xC2\xB5";
const std::string kNu = "\xCE\xBD";

struct BudgetExhausted
{
    std::string what;
};

// ---------------------------------------------------------------------------
// Linear encoding of formulas built from literals, And, Or, ProbSum and Mix.
//
// A distribution is represented homogeneously by a mass vector m over a fixed
// list of positions together with its total mass mu. The encoding of phi
// constrains (m, mu) so that m/mu satisfies phi whenever mu > 0.

struct LinExpr
{
    std::vector<LinearProblem::Term> terms;
    Rational constant;

    static LinExpr of(Rational c) { return LinExpr{{}, std::move(c)}; }
    static LinExpr var(std::size_t v) { return LinExpr{{{v, Rational(1)}}, Rational(0)}; }

    [[nodiscard]] LinExpr scaled(const Rational& c) const
    {
        LinExpr out{terms, constant * c};
        for (auto& t : out.terms)
            t.second *= c;
        return out;
    }

    [[nodiscard]] Rational value(const std::vector<Rational>& x) const
    {
        Rational v = constant;
        for (const auto& [i, c] : terms)
            v += c * x[i];
        return v;
    }

    [[nodiscard]] std::string key() const
    {
        std::map<std::size_t, Rational> merged;
        for (const auto& [i, c] : terms)
            merged[i] += c;
        std::string k = constant.to_string();
        for (const auto& [i, c] : merged)
            if (!c.is_zero())
                k += "+" + c.to_string() + "*v" + std::to_string(i);
        return k;
    }
};

void add_equal(LinearProblem& lp, const LinExpr& lhs, const LinExpr& rhs)
{
    std::vector<LinearProblem::Term> terms = lhs.terms;
    for (const auto& [i, c] : rhs.terms)
        terms.emplace_back(i, -c);
    lp.add_constraint(std::move(terms), LinearProblem::Sense::Eq, rhs.constant - lhs.constant);
}

LinExpr sum_of(const std::vector<LinExpr>& parts)
{
    LinExpr out;
    for (const auto& p : parts) {
        out.terms.insert(out.terms.end(), p.terms.begin(), p.terms.end());
        out.constant += p.constant;
    }
    return out;
}

enum class LeafMode { Relax, Restrict };

struct LeafUse
{
    FormulaPtr leaf;
    std::vector<LinExpr> m;
    LinExpr mu;
};

struct MixUse
{
    FormulaPtr component;
    LinExpr node_mu;
    LinExpr comp_mu;
};

struct RootPart
{
    LinExpr mu;
    std::vector<LinExpr> m;
};

class Generator
{
public:
    using LiteralTest = std::function<bool(const Formula&, StateId)>;
    using LeafStates = std::function<const std::set<StateId>&(const FormulaPtr&)>;

    Generator(LinearProblem& lp, const std::vector<StateId>& positions, LeafMode mode, LiteralTest literal,
              LeafStates leaf_states = {})
        : _lp(lp), _pos(positions), _mode(mode), _literal(std::move(literal)), _leaf_states(std::move(leaf_states))
    {
    }

    void run(const FormulaPtr& f, const std::vector<LinExpr>& m, const LinExpr& mu, bool root)
    {
        switch (f->kind) {
        case FormulaKind::Prop:
        case FormulaKind::NegProp:
            for (std::size_t i = 0; i < _pos.size(); ++i)
                if (!_literal(*f, _pos[i]))
                    add_equal(_lp, m[i], LinExpr::of(0));
            return;
        case FormulaKind::And:
            for (const auto& c : f->children)
                run(c, m, mu, false);
            return;
        case FormulaKind::Or:
        case FormulaKind::Mix:
        case FormulaKind::ProbSum: {
            const bool weighted = f->kind == FormulaKind::ProbSum;
            std::vector<std::vector<LinExpr>> parts(f->children.size());
            std::vector<LinExpr> masses;
            for (std::size_t k = 0; k < f->children.size(); ++k) {
                for (std::size_t i = 0; i < _pos.size(); ++i)
                    parts[k].push_back(LinExpr::var(_lp.add_variable("m")));
                masses.push_back(weighted ? mu.scaled(f->weights[k]) : LinExpr::var(_lp.add_variable("mu")));
                add_equal(_lp, sum_of(parts[k]), masses[k]);
            }
            for (std::size_t i = 0; i < _pos.size(); ++i) {
                std::vector<LinExpr> column;
                for (const auto& p : parts)
                    column.push_back(p[i]);
                add_equal(_lp, sum_of(column), m[i]);
            }
            for (std::size_t k = 0; k < f->children.size(); ++k) {
                if (f->kind == FormulaKind::Mix)
                    mixes.push_back({f->children[k], mu, masses[k]});
                if (root)
                    root_parts.push_back({masses[k], parts[k]});
                run(f->children[k], parts[k], masses[k], false);
            }
            return;
        }
        case FormulaKind::Enforce:
        case FormulaKind::Mu:
        case FormulaKind::Nu:
            if (_mode == LeafMode::Relax)
                return;
            {
                const std::set<StateId>& allowed = _leaf_states(f);
                for (std::size_t i = 0; i < _pos.size(); ++i)
                    if (!allowed.contains(_pos[i]))
                        add_equal(_lp, m[i], LinExpr::of(0));
                leaves.push_back({f, m, mu});
            }
            return;
        case FormulaKind::Var:
            throw PreconditionError("cannot evaluate an open formula (free variable " + f->name + ")");
        }
    }

    std::vector<LeafUse> leaves;
    std::vector<MixUse> mixes;
    std::vector<RootPart> root_parts;

private:
    LinearProblem& _lp;
    const std::vector<StateId>& _pos;
    LeafMode _mode;
    LiteralTest _literal;
    LeafStates _leaf_states;
};

// ---------------------------------------------------------------------------

EvalResult holds(bool certified, std::string witness, unsigned bound = 0)
{
    return {Verdict::Holds, certified, std::move(witness), {}, bound};
}

EvalResult fails(bool certified, std::string counterexample, unsigned bound = 0)
{
    return {Verdict::Fails, certified, std::move(counterexample), {}, bound};
}

EvalResult unknown(std::string message, unsigned bound = 0)
{
    return {Verdict::Unknown, false, {}, std::move(message), bound};
}

class Evaluator
{
public:
    Evaluator(const GameStructure& g, const EvalOptions& opts) : _g(g), _o(opts)
    {
        if (_o.pi1_grid == 0 || _o.split_denominator == 0)
            throw PreconditionError("grid resolution and split denominator must be positive");
    }

    EvalResult eval(const Distribution& d, const FormulaPtr& f)
    {
        auto key = std::make_pair(f.get(), d.key());
        if (auto it = _memo.find(key); it != _memo.end())
            return it->second;
        _alive.push_back(f);
        EvalResult r = compute(d, f);
        _memo.emplace(std::move(key), r);
        return r;
    }

    EvalResult enforce(const Distribution& d, const FormulaPtr& body);
    EvalResult combination(const Distribution& d, const FormulaPtr& node);

private:
    EvalResult compute(const Distribution& d, const FormulaPtr& f);
    EvalResult literal(const Distribution& d, const Formula& f);
    EvalResult conjunction(const Distribution& d, const Formula& f);
    EvalResult disjunction(const Distribution& d, const Formula& f);
    EvalResult fixpoint(const Distribution& d, const FormulaPtr& f);
    EvalResult combination_grid(const Distribution& d, const FormulaPtr& node);
    EvalResult enforce_grid(const Distribution& d, const FormulaPtr& body, const std::vector<StateId>& sens1,
                            const std::vector<std::vector<std::uint32_t>>& vertices);

    bool literal_holds(const Formula& lit, StateId s)
    {
        auto it = _props.find(lit.name);
        if (it == _props.end())
            it = _props.emplace(lit.name, prop_named(_g, lit.name)).first;
        const bool has = _g.has_label(s, it->second);
        return lit.kind == FormulaKind::Prop ? has : !has;
    }

    Generator::LiteralTest literal_test()
    {
        return [this](const Formula& lit, StateId s) { return literal_holds(lit, s); };
    }

    bool opaque(const FormulaPtr& f)
    {
        if (auto it = _opaque.find(f.get()); it != _opaque.end())
            return it->second;
        bool out = f->kind == FormulaKind::Enforce || f->kind == FormulaKind::Mu || f->kind == FormulaKind::Nu ||
                   f->kind == FormulaKind::Var;
        for (const auto& c : f->children)
            out = opaque(c) || out;
        _opaque.emplace(f.get(), out);
        return out;
    }

    bool has_or(const FormulaPtr& f)
    {
        if (f->kind == FormulaKind::Or)
            return true;
        if (f->kind == FormulaKind::Enforce || f->kind == FormulaKind::Mu || f->kind == FormulaKind::Nu)
            return false;
        return std::any_of(f->children.begin(), f->children.end(), [this](const FormulaPtr& c) { return has_or(c); });
    }

    const std::vector<FormulaPtr>& dnf(const FormulaPtr& f);
    bool components_nonempty(const FormulaPtr& branch);
    bool nonempty_exact(const FormulaPtr& f);
    std::optional<bool> nonempty_any(const FormulaPtr& f);
    const FormulaPtr& approximant(const FormulaPtr& f, unsigned i);

    std::string fmt(const Distribution& d) const { return "{" + format_distribution(d, _g.states()) + "}"; }
    std::string fmt(const ActionLottery& l) const
    {
        std::string out = "[";
        bool first = true;
        for (std::uint32_t a = 0; a < l.size(); ++a) {
            if (l[a].is_zero())
                continue;
            out += (first ? "" : ",") + _g.actions(Player::One).name(ActionId{a}) + ":" + l[a].to_string();
            first = false;
        }
        return out + "]";
    }
    std::string render_split(const FormulaPtr& node, const std::vector<RootPart>& parts,
                             const std::vector<StateId>& positions, const std::vector<Rational>& x) const;

    Distribution normalise(const std::vector<LinExpr>& m, const Rational& mu, const std::vector<StateId>& positions,
                           const std::vector<Rational>& x) const
    {
        std::vector<Distribution::Entry> entries;
        for (std::size_t i = 0; i < positions.size(); ++i) {
            Rational v = m[i].value(x);
            if (!v.is_zero())
                entries.emplace_back(positions[i], v / mu);
        }
        return Distribution::unchecked(std::move(entries));
    }

    const GameStructure& _g;
    EvalOptions _o;
    std::map<std::pair<const Formula*, std::string>, EvalResult> _memo;
    std::vector<FormulaPtr> _alive;
    std::map<std::string, PropId> _props;
    std::map<const Formula*, bool> _opaque;
    std::map<const Formula*, std::vector<FormulaPtr>> _dnf;
    std::map<const Formula*, bool> _nonempty;
    std::map<const Formula*, std::vector<FormulaPtr>> _approx;
};

EvalResult Evaluator::compute(const Distribution& d, const FormulaPtr& f)
{
    switch (f->kind) {
    case FormulaKind::Prop:
    case FormulaKind::NegProp:
        return literal(d, *f);
    case FormulaKind::And:
        return conjunction(d, *f);
    case FormulaKind::Or:
        return disjunction(d, *f);
    case FormulaKind::Enforce:
        return enforce(d, f->children.front());
    case FormulaKind::ProbSum:
    case FormulaKind::Mix:
        return combination(d, f);
    case FormulaKind::Mu:
    case FormulaKind::Nu:
        return fixpoint(d, f);
    case FormulaKind::Var:
        throw PreconditionError("cannot evaluate an open formula (free variable " + f->name + ")");
    }
    return unknown("unreachable");
}

EvalResult Evaluator::literal(const Distribution& d, const Formula& f)
{
    const std::string text = (f.kind == FormulaKind::NegProp ? "!" : "") + f.name;
    for (StateId s : d.support())
        if (!literal_holds(f, s))
            return fails(true, "state " + _g.states().name(s) + " does not satisfy " + text);
    return holds(true, "every support state satisfies " + text);
}

EvalResult Evaluator::conjunction(const Distribution& d, const Formula& f)
{
    bool all_certified = true;
    bool all_hold = true;
    unsigned bound = 0;
    std::optional<EvalResult> failure;
    std::vector<std::string> witnesses;
    for (std::size_t i = 0; i < f.children.size(); ++i) {
        EvalResult r = eval(d, f.children[i]);
        bound = std::max(bound, r.bound_used);
        if (r.verdict == Verdict::Fails) {
            if (!failure || (r.certified && !failure->certified))
                failure = r;
            if (r.certified)
                break;
        }
        if (r.verdict != Verdict::Holds) {
            all_hold = false;
            continue;
        }
        all_certified = all_certified && r.certified;
        witnesses.push_back(r.witness);
    }
    if (failure)
        return fails(failure->certified, "conjunct fails: " + failure->witness, bound);
    if (all_hold) {
        std::string w;
        for (std::size_t i = 0; i < witnesses.size(); ++i)
            w += (i ? "; " : "") + witnesses[i];
        return holds(all_certified, f.children.empty() ? "true" : w, bound);
    }
    return unknown("some conjunct is undecided", bound);
}

EvalResult Evaluator::disjunction(const Distribution& d, const Formula& f)
{
    bool all_fail = true;
    bool all_certified = true;
    unsigned bound = 0;
    std::optional<EvalResult> success;
    for (std::size_t i = 0; i < f.children.size(); ++i) {
        EvalResult r = eval(d, f.children[i]);
        bound = std::max(bound, r.bound_used);
        if (r.verdict == Verdict::Holds) {
            if (!success || (r.certified && !success->certified))
                success = r;
            if (r.certified)
                break;
        }
        if (r.verdict != Verdict::Fails) {
            all_fail = false;
            continue;
        }
        all_certified = all_certified && r.certified;
    }
    if (success)
        return holds(success->certified, "disjunct holds: " + success->witness, bound);
    if (all_fail)
        return fails(all_certified, f.children.empty() ? "false" : "every disjunct fails", bound);
    return unknown("some disjunct is undecided", bound);
}

const FormulaPtr& Evaluator::approximant(const FormulaPtr& f, unsigned i)
{
    auto& list = _approx[f.get()];
    if (list.empty()) {
        _alive.push_back(f);
        list.push_back(f->kind == FormulaKind::Mu ? fml::bottom() : fml::top());
    }
    while (list.size() <= i)
        list.push_back(substitute(f->children.front(), f->name, list.back()));
    return list[i];
}

EvalResult Evaluator::fixpoint(const Distribution& d, const FormulaPtr& f)
{
    const unsigned m = _o.unfold_bound;
    const bool least = f->kind == FormulaKind::Mu;
    const std::string sym = least ? kMu : kNu;
    for (unsigned i = 1; i <= m; ++i) {
        EvalResult r = eval(d, approximant(f, i));
        if (least && r.verdict == Verdict::Holds)
            return holds(r.certified, sym + "^" + std::to_string(i) + " holds: " + r.witness, i);
        if (!least && r.verdict == Verdict::Fails)
            return fails(r.certified, sym + "^" + std::to_string(i) + " fails: " + r.witness, i);
    }
    return unknown(least ? kMu + " not established at bound " + std::to_string(m)
                         : kNu + " not refuted at bound " + std::to_string(m),
                   m);
}

const std::vector<FormulaPtr>& Evaluator::dnf(const FormulaPtr& f)
{
    if (auto it = _dnf.find(f.get()); it != _dnf.end())
        return it->second;
    std::vector<FormulaPtr> out;
    if (!has_or(f)) {
        out.push_back(f);
    } else if (f->kind == FormulaKind::Or) {
        for (const auto& c : f->children) {
            const auto& sub = dnf(c);
            out.insert(out.end(), sub.begin(), sub.end());
            if (out.size() > 4096)
                throw BudgetExhausted{"too many disjunctive cases"};
        }
    } else {
        // And, ProbSum, Mix: one branch per combination of child branches.
        std::vector<std::vector<FormulaPtr>> combos{{}};
        for (const auto& c : f->children) {
            const auto& sub = dnf(c);
            std::vector<std::vector<FormulaPtr>> next;
            for (const auto& prefix : combos)
                for (const auto& b : sub) {
                    next.push_back(prefix);
                    next.back().push_back(b);
                }
            combos = std::move(next);
            if (combos.size() > 4096)
                throw BudgetExhausted{"too many disjunctive cases"};
        }
        for (auto& combo : combos) {
            if (f->kind == FormulaKind::And) {
                auto node = std::make_shared<Formula>(*f);
                node->children = std::move(combo);
                out.push_back(node);
            } else if (f->kind == FormulaKind::ProbSum) {
                auto node = std::make_shared<Formula>(*f);
                node->children = std::move(combo);
                out.push_back(node);
            } else {
                out.push_back(fml::mix(std::move(combo)));
            }
        }
    }
    _alive.push_back(f);
    return _dnf.emplace(f.get(), std::move(out)).first->second;
}

bool Evaluator::components_nonempty(const FormulaPtr& branch)
{
    if (branch->kind == FormulaKind::Mix)
        for (const auto& c : branch->children)
            if (!nonempty_exact(c))
                return false;
    if (branch->kind == FormulaKind::Enforce || branch->kind == FormulaKind::Mu || branch->kind == FormulaKind::Nu)
        return true;
    for (const auto& c : branch->children)
        if (!components_nonempty(c))
            return false;
    return true;
}

bool Evaluator::nonempty_exact(const FormulaPtr& f)
{
    if (auto it = _nonempty.find(f.get()); it != _nonempty.end())
        return it->second;
    const std::vector<StateId> all = _g.states().ids();
    bool found = false;
    for (const auto& br : dnf(f)) {
        if (!components_nonempty(br))
            continue;
        LinearProblem lp;
        std::vector<LinExpr> m;
        for (std::size_t i = 0; i < all.size(); ++i)
            m.push_back(LinExpr::var(lp.add_variable("m")));
        add_equal(lp, sum_of(m), LinExpr::of(1));
        Generator gen(lp, all, LeafMode::Restrict, literal_test());
        gen.run(br, m, LinExpr::of(1), false);
        if (lp_feasible(lp)) {
            found = true;
            break;
        }
    }
    _alive.push_back(f);
    _nonempty.emplace(f.get(), found);
    return found;
}

std::optional<bool> Evaluator::nonempty_any(const FormulaPtr& f)
{
    if (!opaque(f))
        return nonempty_exact(f) ? std::optional<bool>(true) : std::nullopt;
    // Combining one witness per component satisfies a sum or mix.
    if (f->kind == FormulaKind::ProbSum || f->kind == FormulaKind::Mix) {
        bool certified = true;
        for (const auto& c : f->children) {
            auto ne = nonempty_any(c);
            if (!ne)
                return std::nullopt;
            certified = certified && *ne;
        }
        return certified;
    }
    if (f->kind == FormulaKind::Or) {
        std::optional<bool> best;
        for (const auto& c : f->children)
            if (auto ne = nonempty_any(c); ne && (!best || *ne))
                best = ne;
        if (best)
            return best;
    }
    for (StateId t : _g.states().ids()) {
        EvalResult r = eval(Distribution::point(t), f);
        if (r.verdict == Verdict::Holds)
            return r.certified;
    }
    return std::nullopt;
}

std::string Evaluator::render_split(const FormulaPtr& node, const std::vector<RootPart>& parts,
                                    const std::vector<StateId>& positions, const std::vector<Rational>& x) const
{
    std::string out = node->kind == FormulaKind::ProbSum ? "split " : "mix ";
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const Rational mu = parts[k].mu.value(x);
        out += k ? " + " : "";
        out += mu.to_string() + "*";
        out += mu.is_zero() ? "{}" : fmt(normalise(parts[k].m, mu, positions, x));
    }
    return out;
}

EvalResult Evaluator::combination(const Distribution& d, const FormulaPtr& node)
{
    const std::vector<FormulaPtr>* branches = nullptr;
    try {
        branches = &dnf(node);
    } catch (const BudgetExhausted& e) {
        return unknown(e.what);
    }
    const std::vector<StateId> positions = d.support();
    std::vector<LinExpr> m;
    for (const auto& [s, p] : d.entries())
        m.push_back(LinExpr::of(p));

    if (!opaque(node)) {
        try {
            for (const auto& br : *branches) {
                if (!components_nonempty(br))
                    continue;
                LinearProblem lp;
                Generator gen(lp, positions, LeafMode::Restrict, literal_test());
                gen.run(br, m, LinExpr::of(1), true);
                if (auto x = lp_feasible(lp))
                    return holds(true, render_split(br, gen.root_parts, positions, *x));
            }
        } catch (const BudgetExhausted& e) {
            return unknown(e.what);
        }
        return fails(true, "no decomposition of " + fmt(d) + " satisfies the components");
    }

    // Over-approximation: modal parts relaxed to true.
    bool relaxed_feasible = false;
    for (const auto& br : *branches) {
        LinearProblem lp;
        Generator gen(lp, positions, LeafMode::Relax, literal_test());
        gen.run(br, m, LinExpr::of(1), false);
        if (lp_feasible(lp)) {
            relaxed_feasible = true;
            break;
        }
    }
    if (!relaxed_feasible)
        return fails(true, "no decomposition of " + fmt(d) + " satisfies the propositional constraints");

    // Candidate: modal parts may only take mass from states that satisfy them
    // as point distributions; the resulting parts are then checked.
    std::map<const Formula*, std::set<StateId>> allowed;
    auto leaf_states = [&](const FormulaPtr& leaf) -> const std::set<StateId>& {
        auto it = allowed.find(leaf.get());
        if (it != allowed.end())
            return it->second;
        std::set<StateId> ok;
        for (StateId t : positions)
            if (eval(Distribution::point(t), leaf).verdict == Verdict::Holds)
                ok.insert(t);
        return allowed.emplace(leaf.get(), std::move(ok)).first->second;
    };
    unsigned bound = 0;
    for (const auto& br : *branches) {
        LinearProblem lp;
        Generator gen(lp, positions, LeafMode::Restrict, literal_test(), leaf_states);
        gen.run(br, m, LinExpr::of(1), true);
        auto x = lp_feasible(lp);
        if (!x)
            continue;
        bool ok = true;
        bool certified = true;
        for (const auto& use : gen.leaves) {
            const Rational mu = use.mu.value(*x);
            if (mu.is_zero())
                continue;
            EvalResult r = eval(normalise(use.m, mu, positions, *x), use.leaf);
            bound = std::max(bound, r.bound_used);
            if (r.verdict != Verdict::Holds) {
                ok = false;
                break;
            }
            certified = certified && r.certified;
        }
        for (std::size_t i = 0; ok && i < gen.mixes.size(); ++i) {
            const auto& use = gen.mixes[i];
            if (use.node_mu.value(*x).is_zero() || !use.comp_mu.value(*x).is_zero())
                continue;
            auto witness = nonempty_any(use.component);
            ok = witness.has_value();
            certified = certified && witness.value_or(false);
        }
        if (ok)
            return holds(certified, render_split(br, gen.root_parts, positions, *x), bound);
    }

    EvalResult grid = combination_grid(d, node);
    grid.bound_used = std::max(grid.bound_used, bound);
    return grid;
}

EvalResult Evaluator::combination_grid(const Distribution& d, const FormulaPtr& node)
{
    const unsigned q = _o.split_denominator;
    const std::size_t parts = node->children.size();
    const bool weighted = node->kind == FormulaKind::ProbSum;
    const auto& entries = d.entries();

    // Per-state shares: compositions of q into `parts` pieces.
    std::vector<std::vector<unsigned>> shares;
    for (const auto& l : grid_lotteries(parts, q)) {
        std::vector<unsigned> c;
        for (const auto& r : l)
            c.push_back(static_cast<unsigned>((r * Rational(static_cast<long>(q))).numerator().get_ui()));
        shares.push_back(std::move(c));
    }

    std::size_t visited = 0;
    bool exhausted = false;
    unsigned bound = 0;
    std::vector<std::size_t> pick(entries.size(), 0);
    std::vector<Rational> mass(parts, Rational(0));
    std::optional<EvalResult> found;

    std::function<void(std::size_t)> search = [&](std::size_t i) {
        if (found || exhausted)
            return;
        if (i == entries.size()) {
            if (++visited > _o.budget) {
                exhausted = true;
                return;
            }
            if (weighted)
                for (std::size_t j = 0; j < parts; ++j)
                    if (mass[j] != node->weights[j])
                        return;
            bool certified = true;
            std::string witness = weighted ? "split " : "mix ";
            for (std::size_t j = 0; j < parts; ++j) {
                witness += j ? " + " : "";
                witness += mass[j].to_string() + "*";
                if (mass[j].is_zero()) {
                    auto ne = nonempty_any(node->children[j]);
                    if (!ne)
                        return;
                    certified = certified && *ne;
                    witness += "{}";
                    continue;
                }
                std::vector<Distribution::Entry> part;
                for (std::size_t s = 0; s < entries.size(); ++s) {
                    const unsigned share = shares[pick[s]][j];
                    if (share)
                        part.emplace_back(entries[s].first, entries[s].second * Rational(static_cast<long>(share),
                                                                                           static_cast<long>(q)) /
                                                                 mass[j]);
                }
                Distribution dj = Distribution::unchecked(std::move(part));
                EvalResult r = eval(dj, node->children[j]);
                bound = std::max(bound, r.bound_used);
                if (r.verdict != Verdict::Holds)
                    return;
                certified = certified && r.certified;
                witness += fmt(dj);
            }
            found = holds(certified, witness);
            return;
        }
        for (std::size_t c = 0; c < shares.size() && !found && !exhausted; ++c) {
            pick[i] = c;
            bool over = false;
            for (std::size_t j = 0; j < parts; ++j) {
                mass[j] += entries[i].second * Rational(static_cast<long>(shares[c][j]), static_cast<long>(q));
                over = over || (weighted && mass[j] > node->weights[j]);
            }
            if (!over)
                search(i + 1);
            for (std::size_t j = 0; j < parts; ++j)
                mass[j] -= entries[i].second * Rational(static_cast<long>(shares[c][j]), static_cast<long>(q));
        }
    };
    search(0);
    if (found) {
        found->bound_used = bound;
        return *found;
    }
    if (exhausted)
        return unknown("split search budget exhausted", bound);
    return unknown("no split found with denominator " + std::to_string(q), bound);
}

EvalResult Evaluator::enforce(const Distribution& d, const FormulaPtr& body)
{
    const std::size_t n1 = _g.num_actions(Player::One);
    const std::size_t n2 = _g.num_actions(Player::Two);
    const std::vector<StateId> support = d.support();

    std::vector<StateId> sens1;
    std::vector<StateId> sens2;
    for (StateId s : support) {
        if (!_g.ignores_player(s, Player::One))
            sens1.push_back(s);
        if (!_g.ignores_player(s, Player::Two))
            sens2.push_back(s);
    }

    // Player-2 vertices: per-state pure responses where the response matters.
    double count = 1;
    for (std::size_t i = 0; i < sens2.size(); ++i)
        count *= static_cast<double>(n2);
    if (count > static_cast<double>(_o.budget))
        return unknown("too many player-2 responses");
    std::vector<std::vector<std::uint32_t>> vertices{{}};
    for (std::size_t i = 0; i < support.size(); ++i) {
        const bool varies = std::find(sens2.begin(), sens2.end(), support[i]) != sens2.end();
        std::vector<std::vector<std::uint32_t>> next;
        for (const auto& v : vertices)
            for (std::uint32_t b = 0; b < (varies ? n2 : 1); ++b) {
                next.push_back(v);
                next.back().push_back(b);
            }
        vertices = std::move(next);
    }

    std::set<StateId> reach;
    for (StateId s : support)
        for (std::uint32_t a = 0; a < n1; ++a)
            for (std::uint32_t b = 0; b < n2; ++b)
                for (StateId t : step_state(_g, s, ActionId{a}, ActionId{b}).support())
                    reach.insert(t);
    const std::vector<StateId> positions(reach.begin(), reach.end());

    const bool convex = convex_safe(*body);
    if (convex) {
        try {
            if (!components_nonempty(body))
                return fails(true, "the body is unsatisfiable");
        } catch (const BudgetExhausted& e) {
            return unknown(e.what);
        }
    }

    // One exact problem over player-1 lotteries at the support states; the
    // body constraint is imposed at every player-2 vertex outcome.
    auto solve = [&](LeafMode mode) -> std::optional<std::vector<ActionLottery>> {
        LinearProblem lp;
        std::map<StateId, std::vector<std::size_t>> y;
        for (StateId s : sens1) {
            std::vector<LinearProblem::Term> simplex;
            for (std::size_t a = 0; a < n1; ++a) {
                y[s].push_back(lp.add_variable("y"));
                simplex.emplace_back(y[s].back(), Rational(1));
            }
            lp.add_constraint(std::move(simplex), LinearProblem::Sense::Eq, Rational(1));
        }
        std::set<std::string> seen;
        for (const auto& v : vertices) {
            std::vector<LinExpr> m(positions.size());
            for (std::size_t k = 0; k < support.size(); ++k) {
                const StateId s = support[k];
                const Rational ds = d(s);
                const ActionId b{v[k]};
                const bool chooses = y.contains(s);
                for (std::uint32_t a = 0; a < (chooses ? n1 : 1); ++a)
                    for (const auto& [t, p] : step_state(_g, s, ActionId{a}, b).entries()) {
                        const auto i = static_cast<std::size_t>(
                            std::lower_bound(positions.begin(), positions.end(), t) - positions.begin());
                        if (chooses)
                            m[i].terms.emplace_back(y[s][a], ds * p);
                        else
                            m[i].constant += ds * p;
                    }
            }
            std::string key;
            for (const auto& e : m)
                key += e.key() + ";";
            if (!seen.insert(key).second)
                continue;
            Generator gen(lp, positions, mode, literal_test());
            gen.run(body, m, LinExpr::of(1), false);
        }
        auto x = lp_feasible(lp);
        if (!x)
            return std::nullopt;
        std::vector<ActionLottery> out;
        for (StateId s : sens1) {
            ActionLottery l;
            for (std::size_t a = 0; a < n1; ++a)
                l.push_back((*x)[y[s][a]]);
            out.push_back(std::move(l));
        }
        return out;
    };

    if (convex) {
        auto pi1 = solve(LeafMode::Restrict);
        if (!pi1)
            return fails(true, "no player-1 mixed action enforces the body against every player-2 response");
        std::string w = "pi1:";
        for (std::size_t i = 0; i < sens1.size(); ++i)
            w += " " + _g.states().name(sens1[i]) + "->" + fmt((*pi1)[i]);
        if (sens1.empty())
            w += " (player 1 has no influence)";
        return holds(true, w);
    }
    if (!solve(LeafMode::Relax))
        return fails(true, "no player-1 mixed action meets the propositional part of the body");
    return enforce_grid(d, body, sens1, vertices);
}

EvalResult Evaluator::enforce_grid(const Distribution& d, const FormulaPtr& body, const std::vector<StateId>& sens1,
                                   const std::vector<std::vector<std::uint32_t>>& vertices)
{
    const std::size_t n1 = _g.num_actions(Player::One);
    const std::size_t n2 = _g.num_actions(Player::Two);
    const std::vector<StateId> support = d.support();
    const auto grid = grid_lotteries(n1, _o.pi1_grid);

    double count = static_cast<double>(vertices.size());
    for (std::size_t i = 0; i < sens1.size(); ++i)
        count *= static_cast<double>(grid.size());
    if (count > static_cast<double>(_o.budget))
        return unknown("player-1 grid search budget exceeded");

    const ActionLottery idle = pure_lottery(n1, ActionId{0});
    std::vector<std::size_t> pick(sens1.size(), 0);
    std::optional<EvalResult> uncertified;
    unsigned bound = 0;
    while (true) {
        std::map<StateId, const ActionLottery*> choice;
        for (std::size_t i = 0; i < sens1.size(); ++i)
            choice[sens1[i]] = &grid[pick[i]];

        std::vector<Distribution> outcomes;
        std::vector<std::string> responses;
        std::set<std::string> seen;
        for (const auto& v : vertices) {
            std::vector<std::pair<Rational, Distribution>> parts;
            std::string response;
            for (std::size_t k = 0; k < support.size(); ++k) {
                const StateId s = support[k];
                auto it = choice.find(s);
                const ActionLottery& l1 = it == choice.end() ? idle : *it->second;
                parts.emplace_back(d(s), step_lotteries(_g, s, l1, pure_lottery(n2, ActionId{v[k]})));
                response += (k ? "," : "") + _g.states().name(s) + "->" +
                            _g.actions(Player::Two).name(ActionId{v[k]});
            }
            Distribution out = combine_dists(parts);
            if (seen.insert(out.key()).second) {
                outcomes.push_back(std::move(out));
                responses.push_back(std::move(response));
            }
        }

        bool all_hold = true;
        bool certified = true;
        std::optional<std::size_t> certified_failure;
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            EvalResult r = eval(outcomes[i], body);
            bound = std::max(bound, r.bound_used);
            if (r.verdict == Verdict::Holds) {
                certified = certified && r.certified;
                continue;
            }
            all_hold = false;
            if (r.verdict == Verdict::Fails && r.certified) {
                certified_failure = i;
                break;
            }
            if (!sens1.empty())
                break;
        }

        std::string strategy = "pi1:";
        for (std::size_t i = 0; i < sens1.size(); ++i)
            strategy += " " + _g.states().name(sens1[i]) + "->" + fmt(grid[pick[i]]);
        if (sens1.empty())
            strategy += " (player 1 has no influence)";

        if (all_hold) {
            // A single outcome leaves player 2 no choice, so vertex coverage is exact.
            const bool exact = certified && outcomes.size() == 1;
            EvalResult r = holds(exact, strategy + "; body holds at " + std::to_string(outcomes.size()) +
                                            " player-2 vertex outcome(s)",
                                 bound);
            if (exact)
                return r;
            if (!uncertified)
                uncertified = r;
        } else if (sens1.empty() && certified_failure) {
            return fails(true,
                         "player-2 response " + responses[*certified_failure] + " leads to " +
                             fmt(outcomes[*certified_failure]) + " where the body fails",
                         bound);
        }

        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == grid.size())
            pick[i++] = 0;
        if (i == pick.size())
            break;
    }
    if (uncertified)
        return *uncertified;
    return unknown("no player-1 lottery on the grid K=" + std::to_string(_o.pi1_grid) + " enforces the body", bound);
}

EvalResult finish(EvalResult r, const EvalOptions& opts)
{
    if (!opts.certify)
        r.certified = false;
    return r;
}

void require_closed(const FormulaPtr& phi)
{
    auto free = free_variables(*phi);
    if (!free.empty())
        throw PreconditionError("cannot evaluate an open formula (free variable " + *free.begin() + ")");
}

} // namespace

EvalResult eval(const GameStructure& g, const Distribution& d, const FormulaPtr& phi, const EvalOptions& opts)
{
    require_closed(phi);
    Evaluator e(g, opts);
    return finish(e.eval(d, phi), opts);
}

EvalResult split_check(const GameStructure& g, const Distribution& d,
                       const std::vector<std::pair<Rational, FormulaPtr>>& parts, const EvalOptions& opts)
{
    FormulaPtr node = fml::sum(parts);
    require_closed(node);
    Evaluator e(g, opts);
    return finish(e.combination(d, node), opts);
}

EvalResult mix_check(const GameStructure& g, const Distribution& d, const std::vector<FormulaPtr>& parts,
                     const EvalOptions& opts)
{
    FormulaPtr node = fml::mix(parts);
    require_closed(node);
    Evaluator e(g, opts);
    return finish(e.combination(d, node), opts);
}

EvalResult enforce_check(const GameStructure& g, const Distribution& d, const FormulaPtr& body,
                         const EvalOptions& opts)
{
    require_closed(body);
    Evaluator e(g, opts);
    return finish(e.enforce(d, body), opts);
}

} // namespace pags
