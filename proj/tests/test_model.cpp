#include <doctest.h>
#include <functional>

#include "pags/error.hpp"
#include "pags/lp.hpp"
#include "pags/model.hpp"
#include "support.hpp"

using namespace pags;
using support::load;

TEST_CASE("rational parsing and printing")
{
    CHECK(Rational::parse("2/6") == Rational(1, 3));
    CHECK(Rational::parse("2/6").to_string() == "1/3");
    CHECK(Rational::parse("4").to_string() == "4");
    CHECK(Rational(3, -6).to_string() == "-1/2");
    CHECK_THROWS_AS(Rational::parse("0.5"), Error);
    CHECK_THROWS_AS(Rational::parse("1/0"), Error);
    CHECK_THROWS_AS(Rational::parse("x"), Error);
}

TEST_CASE("rps fixture")
{
    const GameStructure g = load("rps");
    CHECK(validate_model(g).empty());
    CHECK(g.num_states() == 3);
    CHECK(g.num_actions(Player::One) == 3);
    CHECK(g.num_actions(Player::Two) == 3);
    const StateId s0 = state_named(g, "s0");
    const StateId s1 = state_named(g, "s1");
    const ActionId r = action_named(g, Player::One, "r");
    const ActionId p = action_named(g, Player::One, "p");
    const ActionId s = action_named(g, Player::Two, "s");

    CHECK(step_state(g, s0, r, s) == Distribution::point(s1));
    CHECK(step_state(g, s1, p, action_named(g, Player::Two, "p")) == Distribution::point(s1));
    CHECK(g.is_absorbing(s1));
    CHECK_FALSE(g.is_absorbing(s0));
    CHECK(g.has_label(s0, prop_named(g, "draw")));
}

TEST_CASE("halfway fixture uses the dummy action")
{
    const GameStructure g = load("halfway");
    const StateId s0 = state_named(g, "s0");
    CHECK(g.actions(Player::Two).name(ActionId{0}) == "*");
    CHECK(format_distribution(step_state(g, s0, ActionId{0}, ActionId{0}), g.states()) == "s0:1/2,s1:1/2");
    CHECK(g.ignores_player(s0, Player::One));
    CHECK(g.ignores_player(s0, Player::Two));
}

TEST_CASE("single absorbing state with no propositions")
{
    const GameStructure g = parse_model("model one\nstates: s0\ninit: s0\nprops:\nactions1: a b\nactions2: c\n"
                                        "absorb s0\n");
    CHECK(validate_model(g).empty());
    for (std::uint32_t a = 0; a < 2; ++a)
        CHECK(step_state(g, StateId{0}, ActionId{a}, ActionId{0}) == Distribution::point(StateId{0}));
    const std::string text = serialize_model(g);
    CHECK(text.find("absorb s0") != std::string::npos);
    CHECK(parse_model(text) == g);
}

TEST_CASE("validation messages")
{
    GameStructure g("bad");
    const StateId s0 = g.add_state("s0");
    const StateId s1 = g.add_state("s1");
    g.set_init(s0);
    const ActionId r = g.add_action(Player::One, "r");
    const ActionId p = g.add_action(Player::One, "p");
    const ActionId s = g.add_action(Player::Two, "s");
    g.set_row(s0, r, s, Distribution::unchecked({{s0, Rational(1, 2)}, {s1, Rational(1, 3)}}));
    g.set_row(s1, r, s, Distribution::point(s1));
    g.set_row(s1, p, s, Distribution::point(s1));
    const auto v = validate_model(g);
    REQUIRE(v.size() == 2);
    CHECK(v[0] == "row (s0,r,s) sums to 5/6");
    CHECK(v[1] == "transition table not total at (s0,p,s)");
    CHECK_THROWS_AS(step_state(g, s0, p, s), ModelError);
}

TEST_CASE("parser errors")
{
    SUBCASE("decimal literal")
    {
        try {
            parse_model("model m\nstates: a\ninit: a\nactions1: x\nactions2: y\ntrans a (x,y): a=0.5 a=0.5\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 6);
        }
    }
    SUBCASE("row sum")
    {
        CHECK_THROWS_AS(parse_model("model m\nstates: a b\ninit: a\nactions1: x\nactions2: y\n"
                                    "trans a (x,y): a=1/2 b=1/3\nabsorb b\n"),
                        ModelError);
    }
    SUBCASE("unknown state")
    {
        CHECK_THROWS_AS(parse_model("model m\nstates: a\ninit: a\nactions1: x\nactions2: y\ntrans a (x,y): c=1\n"),
                        ModelError);
    }
    SUBCASE("missing row")
    {
        CHECK_THROWS_AS(parse_model("model m\nstates: a\ninit: a\nactions1: x z\nactions2: y\ntrans a (x,y): a=1\n"),
                        ModelError);
    }
    SUBCASE("duplicate state")
    {
        CHECK_THROWS_AS(parse_model("model m\nstates: a a\ninit: a\nactions1: x\nactions2: y\nabsorb a\n"),
                        ModelError);
    }
}

TEST_CASE("serialization round-trips on fixtures")
{
    for (const auto& name : support::model_names()) {
        CAPTURE(name);
        const GameStructure g = load(name);
        const std::string once = serialize_model(g);
        CHECK(parse_model(once) == g);
        CHECK(serialize_model(parse_model(once)) == once);
    }
}

TEST_CASE("serialization round-trips on random models")
{
    support::Gen gen(11);
    for (int i = 0; i < 100; ++i) {
        const GameStructure g = gen.model(gen.between(1, 5), gen.between(1, 3), gen.between(1, 3), gen.between(0, 3), 12);
        REQUIRE(validate_model(g).empty());
        const std::string once = serialize_model(g);
        const GameStructure back = parse_model(once);
        CHECK(back == g);
        CHECK(serialize_model(back) == once);
        for (StateId s : g.states().ids())
            for (std::uint32_t a = 0; a < g.num_actions(Player::One); ++a)
                for (std::uint32_t b = 0; b < g.num_actions(Player::Two); ++b)
                    CHECK(step_state(g, s, ActionId{a}, ActionId{b}).total_mass() == Rational(1));
    }
}

TEST_CASE("distribution literals")
{
    const GameStructure g = load("rps");
    const Distribution d = support::dist(g, "s1:1/2,s0:1/2");
    CHECK(format_distribution(d, g.states()) == "s0:1/2,s1:1/2");
    CHECK_THROWS(support::dist(g, "s0:1/2"));
    CHECK_THROWS(support::dist(g, "s9:1"));
}

TEST_CASE("lp feasibility")
{
    using Sense = LinearProblem::Sense;
    {
        LinearProblem lp;
        const auto x = lp.add_variable("x");
        lp.add_constraint({{x, Rational(1)}}, Sense::Eq, Rational(1, 3));
        auto sol = lp_feasible(lp);
        REQUIRE(sol);
        CHECK((*sol)[x] == Rational(1, 3));
    }
    {
        LinearProblem lp;
        const auto x = lp.add_variable("x");
        lp.add_constraint({{x, Rational(1)}}, Sense::Le, Rational(-1));
        CHECK_FALSE(lp_feasible(lp));
    }
    {
        // A free variable with mixed constraints.
        LinearProblem lp;
        const auto x = lp.add_variable("x", std::nullopt);
        const auto y = lp.add_variable("y");
        lp.add_constraint({{x, Rational(1)}, {y, Rational(1)}}, Sense::Eq, Rational(-2));
        lp.add_constraint({{y, Rational(1)}}, Sense::Ge, Rational(1));
        auto sol = lp_feasible(lp);
        REQUIRE(sol);
        CHECK(lp.satisfied_by(*sol));
        CHECK((*sol)[x] <= Rational(-3));
    }
}

TEST_CASE("lp agrees with brute force on random small systems")
{
    using Sense = LinearProblem::Sense;
    support::Gen gen(5);
    for (int iter = 0; iter < 200; ++iter) {
        // Integer points in a box: if one satisfies the system, the LP must be feasible.
        LinearProblem lp;
        const unsigned n = gen.between(1, 3);
        for (unsigned i = 0; i < n; ++i)
            lp.add_variable("v", Rational(0), Rational(3));
        const unsigned m = gen.between(1, 3);
        for (unsigned c = 0; c < m; ++c) {
            std::vector<LinearProblem::Term> terms;
            for (unsigned i = 0; i < n; ++i)
                terms.emplace_back(i, Rational(static_cast<long>(gen.between(0, 4)) - 2));
            lp.add_constraint(std::move(terms), gen.coin() ? Sense::Le : Sense::Ge,
                              Rational(static_cast<long>(gen.between(0, 6)) - 3));
        }
        bool integer_point = false;
        std::vector<Rational> x(n, Rational(0));
        std::function<void(unsigned)> search = [&](unsigned i) {
            if (integer_point)
                return;
            if (i == n) {
                integer_point = lp.satisfied_by(x);
                return;
            }
            for (long v = 0; v <= 3; ++v) {
                x[i] = Rational(v);
                search(i + 1);
            }
        };
        search(0);
        auto sol = lp_feasible(lp);
        if (sol)
            CHECK(lp.satisfied_by(*sol));
        if (integer_point)
            CHECK(sol.has_value());
    }
}
