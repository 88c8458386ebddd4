#include "pags/sim.hpp"

#include <fstream>
#include <sstream>

#include "pags/error.hpp"
#include "pags/lp.hpp"

namespace pags {

QuantStrategy QuantStrategy::grid_of(unsigned k)
{
    if (k == 0)
        throw PreconditionError("grid resolution must be positive");
    QuantStrategy q;
    q.kind = Kind::Grid;
    q.grid = k;
    return q;
}

QuantStrategy QuantStrategy::smt_export(std::filesystem::path dir)
{
    QuantStrategy q;
    q.kind = Kind::SmtExport;
    q.directory = std::move(dir);
    return q;
}

QuantStrategy QuantStrategy::parse(const std::string& text)
{
    if (text == "pure")
        return pure();
    if (text.rfind("grid=", 0) == 0) {
        const std::string k = text.substr(5);
        if (k.empty() || k.find_first_not_of("0123456789") != std::string::npos || k.size() > 6)
            throw PreconditionError("bad grid resolution in '" + text + "'");
        return grid_of(static_cast<unsigned>(std::stoul(k)));
    }
    if (text.rfind("smt=", 0) == 0 && text.size() > 4)
        return smt_export(text.substr(4));
    throw PreconditionError("unknown mode '" + text + "' (expected pure, grid=K or smt=DIR)");
}

std::string QuantStrategy::to_string() const
{
    switch (kind) {
    case Kind::Pure:
        return "pure";
    case Kind::Grid:
        return "grid=" + std::to_string(grid);
    case Kind::SmtExport:
        return "smt=" + directory.string();
    }
    return {};
}

namespace {

void compositions(std::size_t parts, unsigned total, std::vector<unsigned>& prefix,
                  std::vector<std::vector<unsigned>>& out)
{
    if (parts == 1) {
        prefix.push_back(total);
        out.push_back(prefix);
        prefix.pop_back();
        return;
    }
    for (unsigned first = total + 1; first-- > 0;) {
        prefix.push_back(first);
        compositions(parts - 1, total - first, prefix, out);
        prefix.pop_back();
    }
}

} // namespace

std::vector<ActionLottery> grid_lotteries(std::size_t n, unsigned k)
{
    if (n == 0 || k == 0)
        throw PreconditionError("grid_lotteries needs n >= 1 and k >= 1");
    std::vector<std::vector<unsigned>> raw;
    std::vector<unsigned> prefix;
    compositions(n, k, prefix, raw);
    std::vector<ActionLottery> out;
    out.reserve(raw.size());
    for (const auto& c : raw) {
        ActionLottery l;
        for (unsigned share : c)
            l.emplace_back(static_cast<long>(share), static_cast<long>(k));
        out.push_back(std::move(l));
    }
    return out;
}

Relation initial_relation(const GameStructure& g)
{
    Relation r;
    for (StateId s : g.states().ids())
        for (StateId t : g.states().ids())
            if (g.labels(s) == g.labels(t))
                r.insert(s, t);
    return r;
}

std::optional<MixedAction> exists_pi2_check(const GameStructure& g, StateId s, StateId t,
                                            const ActionLottery& pi1_at_s, const Relation& r)
{
    if (g.labels(s) != g.labels(t))
        throw PreconditionError("exists_pi2_check: states " + g.states().name(s) + " and " + g.states().name(t) +
                                " have different labels");
    const std::size_t n1 = g.num_actions(Player::One);
    const std::size_t n2 = g.num_actions(Player::Two);
    if (pi1_at_s.size() != n1 || !is_lottery(pi1_at_s))
        throw PreconditionError("exists_pi2_check: bad player-1 lottery");

    // Successors of s against each pure player-2 action.
    std::vector<Distribution> from_s;
    for (std::uint32_t b = 0; b < n2; ++b)
        from_s.push_back(step_lotteries(g, s, pi1_at_s, pure_lottery(n2, ActionId{b})));

    using Sense = LinearProblem::Sense;
    LinearProblem lp;
    std::vector<std::size_t> x;
    std::vector<LinearProblem::Term> simplex;
    for (std::size_t a = 0; a < n1; ++a) {
        x.push_back(lp.add_variable("x"));
        simplex.emplace_back(x.back(), Rational(1));
    }
    lp.add_constraint(simplex, Sense::Eq, Rational(1));

    for (std::uint32_t b = 0; b < n2; ++b) {
        std::vector<std::size_t> lambda;
        simplex.clear();
        for (std::size_t bp = 0; bp < n2; ++bp) {
            lambda.push_back(lp.add_variable("l"));
            simplex.emplace_back(lambda.back(), Rational(1));
        }
        lp.add_constraint(simplex, Sense::Eq, Rational(1));

        std::set<StateId> rows_used;
        for (const auto& d : from_s)
            for (StateId u : d.support())
                rows_used.insert(u);
        std::set<StateId> cols_used;
        for (std::uint32_t a = 0; a < n1; ++a)
            for (StateId v : step_state(g, t, ActionId{a}, ActionId{b}).support())
                cols_used.insert(v);

        std::map<StateId, std::vector<LinearProblem::Term>> row_terms;
        std::map<StateId, std::vector<LinearProblem::Term>> col_terms;
        for (StateId u : rows_used)
            for (StateId v : cols_used)
                if (r.contains(u, v)) {
                    const std::size_t w = lp.add_variable("w");
                    row_terms[u].emplace_back(w, Rational(1));
                    col_terms[v].emplace_back(w, Rational(1));
                }
        for (StateId v : cols_used) {
            auto terms = col_terms[v];
            for (std::uint32_t a = 0; a < n1; ++a) {
                const Rational p = step_state(g, t, ActionId{a}, ActionId{b})(v);
                if (!p.is_zero())
                    terms.emplace_back(x[a], -p);
            }
            lp.add_constraint(std::move(terms), Sense::Eq, Rational(0));
        }
        for (StateId u : rows_used) {
            auto terms = row_terms[u];
            for (std::size_t bp = 0; bp < n2; ++bp) {
                const Rational p = from_s[bp](u);
                if (!p.is_zero())
                    terms.emplace_back(lambda[bp], -p);
            }
            lp.add_constraint(std::move(terms), Sense::Eq, Rational(0));
        }
    }

    auto sol = lp_feasible(lp);
    if (!sol)
        return std::nullopt;
    ActionLottery answer;
    for (std::size_t a = 0; a < n1; ++a)
        answer.push_back((*sol)[x[a]]);
    return MixedAction::constant(g, Player::One, std::move(answer));
}

namespace {

std::string smt_file_name(const GameStructure& g, StateId s, StateId t)
{
    return g.states().name(s) + "_" + g.states().name(t) + ".smt2";
}

} // namespace

RefineOutcome refine_step(const GameStructure& g, const Relation& r, const QuantStrategy& strat)
{
    RefineOutcome out;
    if (strat.kind == QuantStrategy::Kind::SmtExport) {
        std::filesystem::create_directories(strat.directory);
        for (const auto& [s, t] : r) {
            std::ofstream file(strat.directory / smt_file_name(g, s, t), std::ios::binary);
            if (!file)
                throw Error("cannot write " + (strat.directory / smt_file_name(g, s, t)).string());
            file << export_smt(g, s, t, r);
            out.relation.insert(s, t);
            out.deferred.emplace(s, t);
        }
        return out;
    }

    const unsigned k = strat.kind == QuantStrategy::Kind::Grid ? strat.grid : 1;
    const auto tests = grid_lotteries(g.num_actions(Player::One), k);
    for (const auto& [s, t] : r) {
        std::vector<PairWitness> found;
        bool kept = true;
        for (const auto& pi1 : tests) {
            auto answer = exists_pi2_check(g, s, t, pi1, r);
            if (!answer) {
                kept = false;
                break;
            }
            found.push_back({pi1, answer->at(t)});
        }
        if (kept) {
            out.relation.insert(s, t);
            out.witnesses.emplace(Relation::Pair{s, t}, std::move(found));
        }
    }
    return out;
}

Relation refine_once(const GameStructure& g, const Relation& r, const QuantStrategy& strat)
{
    return refine_step(g, r, strat).relation;
}

SimReport pa_simulation(const GameStructure& g, const QuantStrategy& strat)
{
    SimReport report;
    report.strategy = strat;
    Relation current = initial_relation(g);
    while (true) {
        RefineOutcome next = refine_step(g, current, strat);
        ++report.iterations;
        const bool stable = next.relation == current;
        current = std::move(next.relation);
        if (stable) {
            report.witnesses = std::move(next.witnesses);
            report.deferred = std::move(next.deferred);
            break;
        }
    }
    report.relation = std::move(current);
    return report;
}

Relation a_simulation(const GameStructure& g)
{
    const std::size_t n1 = g.num_actions(Player::One);
    const std::size_t n2 = g.num_actions(Player::Two);
    for (StateId s : g.states().ids())
        for (std::uint32_t a = 0; a < n1; ++a)
            for (std::uint32_t b = 0; b < n2; ++b)
                if (!step_state(g, s, ActionId{a}, ActionId{b}).is_point())
                    throw PreconditionError("model is probabilistic");

    auto succ = [&](StateId s, std::uint32_t a, std::uint32_t b) {
        return step_state(g, s, ActionId{a}, ActionId{b}).entries().front().first;
    };
    Relation current = initial_relation(g);
    while (true) {
        Relation next;
        for (const auto& [s, t] : current) {
            bool all_a = true;
            for (std::uint32_t a = 0; a < n1 && all_a; ++a) {
                bool some_ap = false;
                for (std::uint32_t ap = 0; ap < n1 && !some_ap; ++ap) {
                    bool all_bp = true;
                    for (std::uint32_t bp = 0; bp < n2 && all_bp; ++bp) {
                        bool some_b = false;
                        for (std::uint32_t b = 0; b < n2 && !some_b; ++b)
                            some_b = current.contains(succ(s, a, b), succ(t, ap, bp));
                        all_bp = some_b;
                    }
                    some_ap = all_bp;
                }
                all_a = some_ap;
            }
            if (all_a)
                next.insert(s, t);
        }
        if (next == current)
            return current;
        current = std::move(next);
    }
}

namespace {

std::string smt_rational(const Rational& r)
{
    if (r.sign() < 0)
        return "(- " + smt_rational(-r) + ")";
    if (r.is_integer())
        return r.numerator().get_str();
    return "(/ " + r.numerator().get_str() + " " + r.denominator().get_str() + ")";
}

std::string smt_sum(const std::vector<std::string>& terms)
{
    if (terms.empty())
        return "0";
    if (terms.size() == 1)
        return terms.front();
    std::string out = "(+";
    for (const auto& t : terms)
        out += " " + t;
    return out + ")";
}

std::string smt_scaled(const Rational& c, const std::string& var)
{
    if (c == Rational(1))
        return var;
    return "(* " + smt_rational(c) + " " + var + ")";
}

} // namespace

std::string export_smt(const GameStructure& g, StateId s, StateId t, const Relation& r)
{
    if (g.labels(s) != g.labels(t))
        throw PreconditionError("export_smt: states " + g.states().name(s) + " and " + g.states().name(t) +
                                " have different labels");
    const std::size_t n1 = g.num_actions(Player::One);
    const std::size_t n2 = g.num_actions(Player::Two);
    auto p = [](std::size_t a) { return "p_" + std::to_string(a); };
    auto x = [](std::size_t a) { return "x_" + std::to_string(a); };
    auto l = [](std::size_t b, std::size_t bp) { return "l_" + std::to_string(b) + "_" + std::to_string(bp); };
    auto w = [](std::size_t b, StateId u, StateId v) {
        return "w_" + std::to_string(b) + "_" + std::to_string(u.index) + "_" + std::to_string(v.index);
    };

    std::ostringstream os;
    os << "; step condition for (" << g.states().name(s) << "," << g.states().name(t) << ") in model " << g.name()
       << "\n";
    os << "; p: player-1 lottery at " << g.states().name(s) << ", x: answering lottery at " << g.states().name(t)
       << "\n";
    os << "(set-logic NRA)\n";
    os << "(assert (forall (";
    for (std::size_t a = 0; a < n1; ++a)
        os << (a ? " " : "") << "(" << p(a) << " Real)";
    os << ")\n  (=> (and";
    std::vector<std::string> ps;
    for (std::size_t a = 0; a < n1; ++a) {
        os << " (>= " << p(a) << " 0)";
        ps.push_back(p(a));
    }
    os << " (= " << smt_sum(ps) << " 1))\n";

    os << "    (exists (";
    std::vector<std::string> bound;
    for (std::size_t a = 0; a < n1; ++a)
        bound.push_back(x(a));
    for (std::size_t b = 0; b < n2; ++b) {
        for (std::size_t bp = 0; bp < n2; ++bp)
            bound.push_back(l(b, bp));
        for (const auto& [u, v] : r)
            bound.push_back(w(b, u, v));
    }
    for (std::size_t i = 0; i < bound.size(); ++i)
        os << (i ? " " : "") << "(" << bound[i] << " Real)";
    os << ")\n      (and";
    for (const auto& v : bound)
        os << "\n        (>= " << v << " 0)";
    std::vector<std::string> xs;
    for (std::size_t a = 0; a < n1; ++a)
        xs.push_back(x(a));
    os << "\n        (= " << smt_sum(xs) << " 1)";
    for (std::size_t b = 0; b < n2; ++b) {
        std::vector<std::string> ls;
        for (std::size_t bp = 0; bp < n2; ++bp)
            ls.push_back(l(b, bp));
        os << "\n        (= " << smt_sum(ls) << " 1)";
        // Columns: the answer's outcome against b.
        for (StateId v : g.states().ids()) {
            std::vector<std::string> lhs;
            for (const auto& [u, vv] : r)
                if (vv == v)
                    lhs.push_back(w(b, u, v));
            std::vector<std::string> rhs;
            for (std::uint32_t a = 0; a < n1; ++a) {
                const Rational q = step_state(g, t, ActionId{a}, ActionId{static_cast<std::uint32_t>(b)})(v);
                if (!q.is_zero())
                    rhs.push_back(smt_scaled(q, x(a)));
            }
            if (!lhs.empty() || !rhs.empty())
                os << "\n        (= " << smt_sum(lhs) << " " << smt_sum(rhs) << ")";
        }
        // Rows: a point of the hull of s's outcomes, bilinear in l and p.
        for (StateId u : g.states().ids()) {
            std::vector<std::string> lhs;
            for (const auto& [uu, v] : r)
                if (uu == u)
                    lhs.push_back(w(b, u, v));
            std::vector<std::string> rhs;
            for (std::uint32_t bp = 0; bp < n2; ++bp)
                for (std::uint32_t a = 0; a < n1; ++a) {
                    const Rational q = step_state(g, s, ActionId{a}, ActionId{bp})(u);
                    if (!q.is_zero())
                        rhs.push_back("(* " + smt_rational(q) + " " + l(b, bp) + " " + p(a) + ")");
                }
            if (!lhs.empty() || !rhs.empty())
                os << "\n        (= " << smt_sum(lhs) << " " << smt_sum(rhs) << ")";
        }
    }
    os << ")))))\n(check-sat)\n";
    return os.str();
}

} // namespace pags
