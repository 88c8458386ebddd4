#include <doctest.h>

#include "pags/error.hpp"
#include "pags/oracle.hpp"
#include "pags/prob.hpp"
#include "support.hpp"

using namespace pags;
using support::load;

namespace {

// Bridge: left states s1 s2, right states t1 t2 t3.
struct Bridge
{
    StateTable names;
    Distribution d, th;
    Relation r;

    Bridge()
    {
        r = parse_relation(support::read_text(support::fixture("bridge.rel")), names, true);
        d = parse_distribution("s1:1/2,s2:1/2", names, true);
        th = parse_distribution("t1:1/3,t2:1/3,t3:1/3", names, true);
    }

    StateId id(const std::string& n) const { return *names.find(n); }
};

Rational sum_weights(const WeightWitness& w)
{
    Rational total;
    for (const auto& [pair, v] : w.weights)
        total += v;
    return total;
}

} // namespace

TEST_CASE("combine_dists")
{
    const StateId s0{0}, s1{1};
    CHECK(combine_dists({{Rational(1, 2), Distribution::point(s0)}, {Rational(1, 2), Distribution::point(s1)}}) ==
          Distribution::from_entries({{s0, Rational(1, 2)}, {s1, Rational(1, 2)}}));
    const Distribution half = Distribution::from_entries({{s0, Rational(1, 2)}, {s1, Rational(1, 2)}});
    CHECK(combine_dists({{Rational(1), half}}) == half);
    CHECK(combine_dists({{Rational(1, 3), Distribution::point(s1)}, {Rational(2, 3), half}}) ==
          Distribution::from_entries({{s0, Rational(1, 3)}, {s1, Rational(2, 3)}}));
    CHECK_THROWS_AS(combine_dists({{Rational(1, 2), half}}), PreconditionError);
    CHECK_THROWS_AS(combine_dists({{Rational(3, 2), half}, {Rational(-1, 2), half}}), PreconditionError);
}

TEST_CASE("combine_mixed_actions")
{
    const GameStructure g = load("rps");
    const auto r = action_named(g, Player::One, "r");
    const auto p = action_named(g, Player::One, "p");
    const MixedAction half = combine_mixed_actions(
        {{Rational(1, 2), MixedAction::pure(g, Player::One, r)}, {Rational(1, 2), MixedAction::pure(g, Player::One, p)}});
    for (StateId s : g.states().ids())
        CHECK(half.at(s) == ActionLottery{Rational(1, 2), Rational(1, 2), Rational(0)});

    const MixedAction u = MixedAction::constant(g, Player::One, uniform_lottery(3));
    CHECK(combine_mixed_actions({{Rational(1), u}}) == u);
    const MixedAction mixed =
        combine_mixed_actions({{Rational(1, 3), u}, {Rational(2, 3), MixedAction::pure(g, Player::One, r)}});
    CHECK(mixed.at(StateId{0}) == ActionLottery{Rational(7, 9), Rational(1, 9), Rational(1, 9)});

    CHECK_THROWS_AS(combine_mixed_actions({{Rational(1, 2), u}, {Rational(1, 2), MixedAction::pure(g, Player::Two, r)}}),
                    PreconditionError);
    CHECK_THROWS_AS(combine_mixed_actions({{Rational(1, 2), u}}), PreconditionError);
}

TEST_CASE("step_mixed_state and step_mixed_dist")
{
    const GameStructure g = load("rps");
    const MixedAction uniform = MixedAction::constant(g, Player::One, uniform_lottery(3));
    const MixedAction r2 = MixedAction::pure(g, Player::Two, action_named(g, Player::Two, "r"));
    const MixedAction s2 = MixedAction::pure(g, Player::Two, action_named(g, Player::Two, "s"));
    const MixedAction r1 = MixedAction::pure(g, Player::One, action_named(g, Player::One, "r"));
    const StateId s0 = state_named(g, "s0");
    const StateId s1 = state_named(g, "s1");

    CHECK(step_mixed_state(g, s0, uniform, r2) == support::dist(g, "s0:1/3,s1:1/3,s2:1/3"));
    CHECK(step_mixed_state(g, s0, r1, s2) == Distribution::point(s1));
    CHECK(step_mixed_state(g, s1, uniform, r2) == Distribution::point(s1));
    CHECK_THROWS_AS(step_mixed_state(g, s0, r2, r1), PreconditionError);

    CHECK(step_mixed_dist(g, Distribution::point(s0), uniform, r2) == step_mixed_state(g, s0, uniform, r2));
    CHECK(step_mixed_dist(g, support::dist(g, "s0:1/3,s1:1/3,s2:1/3"), uniform, r2) ==
          support::dist(g, "s0:1/9,s1:4/9,s2:4/9"));

    const GameStructure f = load("halfway");
    const MixedAction a = MixedAction::pure(f, Player::One, ActionId{0});
    const MixedAction star = MixedAction::pure(f, Player::Two, ActionId{0});
    CHECK(step_mixed_dist(f, support::dist(f, "s0:1/2,s1:1/2"), a, star) == support::dist(f, "s0:1/4,s1:3/4"));
}

TEST_CASE("lift_check on the bridge relation")
{
    Bridge x;
    auto w = lift_check(x.d, x.th, x.r);
    REQUIRE(w);
    CHECK(is_lifting_witness(*w, x.d, x.th, x.r));

    WeightWitness known;
    known.weights[{x.id("s1"), x.id("t1")}] = Rational(1, 3);
    known.weights[{x.id("s1"), x.id("t2")}] = Rational(1, 6);
    known.weights[{x.id("s2"), x.id("t2")}] = Rational(1, 6);
    known.weights[{x.id("s2"), x.id("t3")}] = Rational(1, 3);
    CHECK(is_lifting_witness(known, x.d, x.th, x.r));

    Relation narrow;
    narrow.insert(x.id("s1"), x.id("t1"));
    narrow.insert(x.id("s2"), x.id("t3"));
    CHECK_FALSE(lift_check(x.d, x.th, narrow));
    CHECK_FALSE(is_lifting_witness(known, x.d, x.th, narrow));
}

TEST_CASE("lift_check identity case")
{
    const StateId s0{0};
    auto w = lift_check(Distribution::point(s0), Distribution::point(s0), Relation::identity(1));
    REQUIRE(w);
    CHECK(w->weights.size() == 1);
    CHECK(w->weights.at({s0, s0}) == Rational(1));
}

TEST_CASE("lifting witness checker rejects each broken clause")
{
    Bridge x;
    WeightWitness w = *lift_check(x.d, x.th, x.r);
    SUBCASE("wrong row sum")
    {
        w.weights.begin()->second += Rational(1, 12);
        CHECK_FALSE(is_lifting_witness(w, x.d, x.th, x.r));
    }
    SUBCASE("pair outside the relation")
    {
        WeightWitness v;
        v.weights[{x.id("s1"), x.id("t3")}] = Rational(1, 3);
        v.weights[{x.id("s1"), x.id("t2")}] = Rational(1, 6);
        v.weights[{x.id("s2"), x.id("t2")}] = Rational(1, 6);
        v.weights[{x.id("s2"), x.id("t1")}] = Rational(1, 3);
        CHECK_FALSE(is_lifting_witness(v, x.d, x.th, x.r));
    }
}

TEST_CASE("smyth_check")
{
    const StateId s0{0}, s1{1}, s2{2};
    CHECK(smyth_check({Distribution::point(s0)}, {Distribution::point(s0)}, Relation::identity(3)).holds);

    Bridge x;
    auto fig = smyth_check({x.d}, {x.th}, x.r);
    CHECK(fig.holds);
    REQUIRE(fig.matches[0]);
    CHECK(is_lifting_witness(fig.matches[0]->witness, x.d, x.th, x.r));

    auto res = smyth_check({Distribution::point(s1)}, {Distribution::point(s1), Distribution::point(s2)},
                           Relation::identity(3));
    CHECK_FALSE(res.holds);
    CHECK(res.matches[0].has_value());
    CHECK_FALSE(res.matches[1].has_value());
}

TEST_CASE("split_match on the bridge relation")
{
    Bridge x;
    const auto parts = split_match(x.d, x.th, x.r,
                                   {{Rational(1, 2), Distribution::point(x.id("s1"))},
                                    {Rational(1, 2), Distribution::point(x.id("s2"))}});
    REQUIRE(parts.size() == 2);
    CHECK(lift_check(Distribution::point(x.id("s1")), parts[0].theta, x.r));
    CHECK(lift_check(Distribution::point(x.id("s2")), parts[1].theta, x.r));
    CHECK(combine_dists({{parts[0].weight, parts[0].theta}, {parts[1].weight, parts[1].theta}}) == x.th);

    // With a fixed witness the components are determined.
    WeightWitness known;
    known.weights[{x.id("s1"), x.id("t1")}] = Rational(1, 3);
    known.weights[{x.id("s1"), x.id("t2")}] = Rational(1, 6);
    known.weights[{x.id("s2"), x.id("t2")}] = Rational(1, 6);
    known.weights[{x.id("s2"), x.id("t3")}] = Rational(1, 3);
    const auto fixed = split_match(x.d, x.th, x.r, known,
                                   {{Rational(1, 2), Distribution::point(x.id("s1"))},
                                    {Rational(1, 2), Distribution::point(x.id("s2"))}});
    CHECK(fixed[0].theta == parse_distribution("t1:2/3,t2:1/3", x.names));
    CHECK(fixed[1].theta == parse_distribution("t2:1/3,t3:2/3", x.names));

    const auto whole = split_match(x.d, x.th, x.r, {{Rational(1), x.d}});
    REQUIRE(whole.size() == 1);
    CHECK(whole[0].theta == x.th);

    Relation narrow;
    narrow.insert(x.id("s1"), x.id("t1"));
    CHECK_THROWS_AS(split_match(x.d, x.th, narrow, {{Rational(1), x.d}}), PreconditionError);
    CHECK_THROWS_AS(split_match(x.d, x.th, x.r, {{Rational(1), Distribution::point(x.id("s1"))}}), PreconditionError);
}

TEST_CASE("relation parsing")
{
    const GameStructure g = load("rps");
    StateTable names = g.states();
    const Relation r = parse_relation("s0 s1\n# comment\n\ns1 s1\n", names);
    CHECK(r.size() == 2);
    CHECK(r.contains(StateId{0}, StateId{1}));
    CHECK_THROWS_AS(parse_relation("s0 q9\n", names), ParseError);
    CHECK_THROWS_AS(parse_relation("s0\n", names), ParseError);
    CHECK(format_relation(r, names) == "s0 s1\ns1 s1\n");
}

TEST_CASE("property: lift_check is monotone in the relation")
{
    support::Gen gen(21);
    for (int i = 0; i < 200; ++i) {
        const unsigned n = gen.between(1, 5);
        const Distribution d = gen.distribution(n, 4, 12);
        const Distribution th = gen.distribution(n, 4, 12);
        Relation r = gen.relation(n, n, 40);
        const bool before = lift_check(d, th, r).has_value();
        for (const auto& pair : gen.relation(n, n, 30))
            r.insert(pair.first, pair.second);
        auto after = lift_check(d, th, r);
        if (before)
            CHECK(after.has_value());
        if (after)
            CHECK(is_lifting_witness(*after, d, th, r));
    }
}

TEST_CASE("property: combined witnesses are witnesses")
{
    support::Gen gen(1);
    int checked = 0;
    for (int i = 0; i < 600 && checked < 200; ++i) {
        const unsigned n = gen.between(1, 5);
        const Relation r = gen.relation(n, n, 60);
        const unsigned k = gen.between(1, 3);
        std::vector<std::pair<Distribution, Distribution>> pairs;
        std::vector<WeightWitness> witnesses;
        for (unsigned j = 0; j < k; ++j) {
            const Distribution d = gen.distribution(n, 3, 12);
            const Distribution th = gen.distribution(n, 3, 12);
            if (auto w = lift_check(d, th, r)) {
                pairs.emplace_back(d, th);
                witnesses.push_back(*w);
            }
        }
        if (pairs.empty())
            continue;
        ++checked;
        const auto p = gen.weights(static_cast<unsigned>(pairs.size()), 12);
        std::vector<std::pair<Rational, Distribution>> left, right;
        WeightWitness combined;
        for (std::size_t j = 0; j < pairs.size(); ++j) {
            left.emplace_back(p[j], pairs[j].first);
            right.emplace_back(p[j], pairs[j].second);
            for (const auto& [pair, v] : witnesses[j].weights)
                combined.weights[pair] += p[j] * v;
        }
        const Distribution d = combine_dists(left);
        const Distribution th = combine_dists(right);
        CHECK(is_lifting_witness(combined, d, th, r));
        CHECK(lift_check(d, th, r).has_value());
        CHECK(sum_weights(combined) == Rational(1));
    }
    CHECK(checked == 200);
}

TEST_CASE("property: splits transfer across a lifting in both directions")
{
    support::Gen gen(2);
    int checked = 0;
    for (int i = 0; i < 2000 && checked < 200; ++i) {
        const unsigned n = gen.between(1, 5);
        const Relation r = gen.relation(n, n, 60);
        const unsigned k = gen.between(1, 3);
        std::vector<std::pair<Rational, Distribution>> parts;
        const auto p = gen.weights(k, 6);
        for (unsigned j = 0; j < k; ++j)
            parts.emplace_back(p[j], gen.distribution(n, 3, 6));
        const Distribution d = combine_dists(parts);
        const Distribution th = gen.distribution(n, 4, 12);
        if (!lift_check(d, th, r))
            continue;
        ++checked;
        const auto matched = split_match(d, th, r, parts);
        REQUIRE(matched.size() == parts.size());
        std::vector<std::pair<Rational, Distribution>> recombined;
        for (std::size_t j = 0; j < parts.size(); ++j) {
            CHECK(matched[j].weight == parts[j].first);
            CHECK(is_lifting_witness(matched[j].witness, parts[j].second, matched[j].theta, r));
            CHECK(brute_lift(parts[j].second, matched[j].theta, r));
            recombined.emplace_back(matched[j].weight, matched[j].theta);
        }
        CHECK(combine_dists(recombined) == th);

        // Other side: split th and pull the split back through the inverse relation.
        const auto back = split_match(th, d, r.inverse(), recombined);
        for (std::size_t j = 0; j < back.size(); ++j)
            CHECK(lift_check(back[j].theta, recombined[j].second, r).has_value());
    }
    CHECK(checked == 200);
}

TEST_CASE("property: the step is linear in each mixed action")
{
    support::Gen gen(3);
    for (int i = 0; i < 200; ++i) {
        const GameStructure g = gen.model(gen.between(1, 4), gen.between(1, 3), gen.between(1, 3), 1, 12);
        const StateId s{gen.below(static_cast<unsigned>(g.num_states()))};
        const unsigned k = gen.between(1, 3);
        const auto p = gen.weights(k, 12);
        const MixedAction pi1 = gen.mixed(g, Player::One, 6);
        const MixedAction pi2 = gen.mixed(g, Player::Two, 6);

        std::vector<std::pair<Rational, MixedAction>> sigmas2, sigmas1;
        std::vector<std::pair<Rational, Distribution>> outs2, outs1;
        for (unsigned j = 0; j < k; ++j) {
            sigmas2.emplace_back(p[j], gen.mixed(g, Player::Two, 6));
            sigmas1.emplace_back(p[j], gen.mixed(g, Player::One, 6));
            outs2.emplace_back(p[j], step_mixed_state(g, s, pi1, sigmas2.back().second));
            outs1.emplace_back(p[j], step_mixed_state(g, s, sigmas1.back().second, pi2));
        }
        CHECK(step_mixed_state(g, s, pi1, combine_mixed_actions(sigmas2)) == combine_dists(outs2));
        CHECK(step_mixed_state(g, s, combine_mixed_actions(sigmas1), pi2) == combine_dists(outs1));
    }
}
