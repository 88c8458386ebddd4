#include <doctest.h>

#include "pags/error.hpp"
#include "pags/logic.hpp"
#include "pags/oracle.hpp"
#include "pags/sim.hpp"
#include "support.hpp"

using namespace pags;
using support::load;
using support::point;

TEST_CASE("brute_lift on the bridge relation")
{
    StateTable names;
    const Relation r = parse_relation(support::read_text(support::fixture("bridge.rel")), names, true);
    const Distribution d = parse_distribution("s1:1/2,s2:1/2", names, true);
    const Distribution th = parse_distribution("t1:1/3,t2:1/3,t3:1/3", names, true);
    CHECK(brute_lift(d, th, r));
    CHECK(brute_lift(d, th, r, 6));
    CHECK(brute_lift(d, th, r, 12));
    CHECK_THROWS_AS(brute_lift(d, th, r, 4), PreconditionError);

    Relation narrow;
    narrow.insert(*names.find("s1"), *names.find("t1"));
    narrow.insert(*names.find("s2"), *names.find("t3"));
    CHECK_FALSE(brute_lift(d, th, narrow));
}

TEST_CASE("brute_lift identity and budget")
{
    const Distribution p = Distribution::point(StateId{0});
    CHECK(brute_lift(p, p, Relation::identity(1)));
    CHECK_FALSE(brute_lift(p, p, Relation{}));

    const Distribution a = Distribution::from_entries({{StateId{0}, Rational(1, 1009)}, {StateId{1}, Rational(1008, 1009)}});
    const Distribution b = Distribution::from_entries({{StateId{0}, Rational(1, 1013)}, {StateId{1}, Rational(1012, 1013)}});
    try {
        brute_lift(a, b, Relation::full(2));
        FAIL("expected the scale guard");
    } catch (const OracleBudgetExceeded& e) {
        CHECK(std::string(e.what()).find("oracle budget exceeded") != std::string::npos);
    }
}

TEST_CASE("property: brute_lift agrees with lift_check")
{
    support::Gen gen(97);
    int feasible = 0;
    for (int i = 0; i < 500; ++i) {
        const unsigned n = gen.between(1, 5);
        const Distribution d = gen.distribution(n, 5, 12);
        const Distribution th = gen.distribution(n, 5, 12);
        const Relation r = gen.relation(n, n, gen.between(20, 80));
        const bool exact = lift_check(d, th, r).has_value();
        CHECK(brute_lift(d, th, r) == exact);
        feasible += exact ? 1 : 0;
    }
    CHECK(feasible > 50);
    CHECK(feasible < 450);
}

TEST_CASE("brute_sim examples")
{
    CHECK(brute_sim(load("rps"), 3) == Relation::identity(3));
    const GameStructure dup = load("dup");
    const Relation r = brute_sim(dup, 2);
    CHECK(r.contains(state_named(dup, "u"), state_named(dup, "u2")));
    CHECK(r.contains(state_named(dup, "u2"), state_named(dup, "u")));
    CHECK_FALSE(r.contains(state_named(dup, "v"), state_named(dup, "u")));
    CHECK_THROWS_AS(brute_sim(dup, 4, 10), OracleBudgetExceeded);
}

TEST_CASE("brute_eval examples")
{
    const GameStructure rps = load("rps");
    const EvalResult lit = brute_eval(rps, point(rps, "s1"), parse_formula("win1"));
    CHECK(lit.verdict == Verdict::Holds);
    CHECK(lit.certified);

    const Distribution half = support::dist(rps, "s1:1/2,s2:1/2");
    const FormulaPtr split = parse_formula("sum{1/2: win1, 1/2: win2}");
    CHECK(brute_eval(rps, half, split).verdict == eval(rps, half, split).verdict);
    const FormulaPtr skew = parse_formula("sum{2/3: win1, 1/3: win2}");
    CHECK(brute_eval(rps, half, skew).verdict != Verdict::Holds);
    CHECK(eval(rps, half, skew).verdict == Verdict::Fails);

    OracleGrids grids;
    grids.pi1 = 3;
    const FormulaPtr mu2 = unfold_fixpoint(parse_formula("mu Z. sum{1/3: win1, 2/3: true} | <1> Z"), 2);
    const EvalResult r = brute_eval(rps, point(rps, "s0"), mu2, grids);
    CHECK(r.verdict == Verdict::Holds);
    CHECK(r.witness.find("1/3") != std::string::npos);

    // Fixpoints are unfolded to the oracle's bound.
    grids.unfold = 2;
    CHECK(brute_eval(rps, point(rps, "s0"), parse_formula("mu Z. sum{1/3: win1, 2/3: true} | <1> Z"), grids).verdict ==
          Verdict::Holds);
}
