#include <doctest.h>
#include <filesystem>
#include <regex>

#include "pags/error.hpp"
#include "pags/oracle.hpp"
#include "pags/sim.hpp"
#include "support.hpp"

using namespace pags;
using support::load;

namespace {

Relation pairs_named(const GameStructure& g, const std::vector<std::pair<std::string, std::string>>& names)
{
    Relation r;
    for (const auto& [s, t] : names)
        r.insert(state_named(g, s), state_named(g, t));
    return r;
}

std::size_t count(const std::string& text, const std::string& needle)
{
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1))
        ++n;
    return n;
}

} // namespace

TEST_CASE("quantifier strategies parse and print")
{
    CHECK(QuantStrategy::parse("pure").kind == QuantStrategy::Kind::Pure);
    CHECK(QuantStrategy::parse("grid=3").grid == 3);
    CHECK(QuantStrategy::parse("grid=3").to_string() == "grid=3");
    CHECK(QuantStrategy::parse("smt=out").directory == std::filesystem::path("out"));
    CHECK_THROWS(QuantStrategy::parse("grid=0"));
    CHECK_THROWS(QuantStrategy::parse("exact"));
}

TEST_CASE("grid lotteries")
{
    CHECK(grid_lotteries(3, 1).size() == 3);
    CHECK(grid_lotteries(3, 2).size() == 6);
    CHECK(grid_lotteries(3, 3).size() == 10);
    CHECK(grid_lotteries(2, 2).front() == ActionLottery{Rational(1), Rational(0)});
    for (const auto& l : grid_lotteries(3, 4))
        CHECK(is_lottery(l));
}

TEST_CASE("initial relation")
{
    CHECK(initial_relation(load("rps")) == Relation::identity(3));
    const GameStructure dup = load("dup");
    const Relation r = initial_relation(dup);
    CHECK(r.contains(state_named(dup, "u"), state_named(dup, "u2")));
    CHECK(r.contains(state_named(dup, "u2"), state_named(dup, "u")));
    CHECK(r.contains(state_named(dup, "u"), state_named(dup, "other")));
    CHECK_FALSE(r.contains(state_named(dup, "u"), state_named(dup, "v")));

    const GameStructure bare = parse_model("model m\nstates: a b\ninit: a\nactions1: x\nactions2: y\nabsorb a\nabsorb b\n");
    CHECK(initial_relation(bare) == Relation::full(2));
}

TEST_CASE("exists_pi2_check")
{
    const GameStructure g = load("rps");
    const StateId s0 = state_named(g, "s0");
    const auto r1 = pure_lottery(3, action_named(g, Player::One, "r"));
    auto w = exists_pi2_check(g, s0, s0, r1, Relation::identity(3));
    REQUIRE(w);
    CHECK(w->owner() == Player::One);
    CHECK(is_lottery(w->at(s0)));
    CHECK_THROWS_AS(exists_pi2_check(g, state_named(g, "s1"), state_named(g, "s2"), r1, initial_relation(g)),
                    PreconditionError);

    // The copy answers with the same lottery.
    const GameStructure dup = load("dup");
    const StateId u = state_named(dup, "u");
    const StateId u2 = state_named(dup, "u2");
    for (const auto& l : grid_lotteries(2, 3)) {
        auto a = exists_pi2_check(dup, u, u2, l, initial_relation(dup));
        REQUIRE(a);
        CHECK(step_lotteries(dup, u2, a->at(u2), pure_lottery(2, ActionId{0})).support().size() >= 1);
    }
}

TEST_CASE("refine_once")
{
    const GameStructure rps = load("rps");
    CHECK(refine_once(rps, Relation::identity(3), QuantStrategy::pure()) == Relation::identity(3));

    const GameStructure asym = load("asym");
    const Relation start = initial_relation(asym);
    const Relation once = refine_once(asym, start, QuantStrategy::pure());
    CHECK_FALSE(once.contains(state_named(asym, "s"), state_named(asym, "t")));
    CHECK(once.contains(state_named(asym, "t"), state_named(asym, "s")));
    CHECK_FALSE(brute_sim(asym, 2).contains(state_named(asym, "s"), state_named(asym, "t")));
}

TEST_CASE("pa_simulation examples")
{
    const GameStructure rps = load("rps");
    const SimReport pure = pa_simulation(rps, QuantStrategy::pure());
    CHECK(pure.relation == Relation::identity(3));
    CHECK(pure.iterations == 1);
    CHECK(pure.strategy.kind == QuantStrategy::Kind::Pure);

    const GameStructure halfway = load("halfway");
    CHECK(pa_simulation(halfway, QuantStrategy::grid_of(2)).relation == Relation::identity(2));

    const GameStructure dup = load("dup");
    const SimReport grid = pa_simulation(dup, QuantStrategy::grid_of(2));
    CHECK(grid.relation == pairs_named(dup, {{"u", "u"}, {"u", "u2"}, {"u", "w"}, {"u2", "u"}, {"u2", "u2"},
                                             {"u2", "w"}, {"w", "u"}, {"w", "u2"}, {"w", "w"}, {"v", "v"},
                                             {"goal", "goal"}, {"other", "other"}}));
    const auto& witnesses = grid.witnesses.at({state_named(dup, "u"), state_named(dup, "u2")});
    CHECK(witnesses.size() == grid_lotteries(2, 2).size());

    // Pure tests cannot see that w's randomisation guarantees goal half the time.
    CHECK(pa_simulation(dup, QuantStrategy::pure()).relation.contains(state_named(dup, "w"), state_named(dup, "other")));
}

TEST_CASE("a_simulation")
{
    const GameStructure one = parse_model("model m\nstates: a\ninit: a\nactions1: x\nactions2: y\nabsorb a\n");
    CHECK(a_simulation(one) == Relation::identity(1));
    CHECK(a_simulation(load("rps")) == Relation::identity(3));
    try {
        a_simulation(load("halfway"));
        FAIL("expected an error");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("model is probabilistic") != std::string::npos);
    }
    const GameStructure asym = load("asym");
    const Relation r = a_simulation(asym);
    CHECK(r.contains(state_named(asym, "t"), state_named(asym, "s")));
    CHECK_FALSE(r.contains(state_named(asym, "s"), state_named(asym, "t")));
}

TEST_CASE("smt export")
{
    const GameStructure rps = load("rps");
    const StateId s0 = state_named(rps, "s0");
    const Relation r = Relation::identity(3);
    const std::string text = export_smt(rps, s0, s0, r);
    CHECK(text.find("(set-logic NRA)") != std::string::npos);
    CHECK(text.find("(forall (") != std::string::npos);
    CHECK(text.find("(check-sat)") != std::string::npos);

    // Existential block: |Act1| + |Act2| * (|Act2| + |r|).
    const std::size_t n1 = 3, n2 = 3;
    const std::string exists = text.substr(text.find("(exists ("));
    const std::string block = exists.substr(0, exists.find('\n'));
    CHECK(count(block, " Real)") == n1 + n2 * (n2 + r.size()));
    const std::string forall = text.substr(text.find("(forall ("));
    CHECK(count(forall.substr(0, forall.find('\n')), " Real)") == n1);

    // Balanced parentheses and no decimals.
    int depth = 0;
    for (char c : text) {
        depth += c == '(' ? 1 : c == ')' ? -1 : 0;
        CHECK(depth >= 0);
    }
    CHECK(depth == 0);
    CHECK_FALSE(std::regex_search(text, std::regex("[0-9]\\.[0-9]")));
}

TEST_CASE("smt strategy defers every pair and writes one file each")
{
    const GameStructure asym = load("asym");
    const auto dir = std::filesystem::temp_directory_path() / "pags_smt_test";
    std::filesystem::remove_all(dir);
    const SimReport report = pa_simulation(asym, QuantStrategy::smt_export(dir));
    CHECK(report.relation == initial_relation(asym));
    CHECK(report.deferred.size() == report.relation.size());
    CHECK(std::filesystem::exists(dir / "s_t.smt2"));
    CHECK(std::filesystem::exists(dir / "t_s.smt2"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("property: refinement is monotone and strategies are ordered")
{
    support::Gen gen(31);
    for (int i = 0; i < 40; ++i) {
        const GameStructure g = gen.model(gen.between(2, 4), gen.between(1, 2), gen.between(1, 2), gen.between(0, 2), 4);
        for (const auto& strat : {QuantStrategy::pure(), QuantStrategy::grid_of(2), QuantStrategy::grid_of(4)}) {
            Relation r = initial_relation(g);
            while (true) {
                const Relation next = refine_once(g, r, strat);
                CHECK(next.subset_of(r));
                if (next == r)
                    break;
                r = next;
            }
            CHECK(Relation::identity(g.num_states()).subset_of(r));
        }
        const Relation pure = pa_simulation(g, QuantStrategy::pure()).relation;
        const Relation g2 = pa_simulation(g, QuantStrategy::grid_of(2)).relation;
        const Relation g4 = pa_simulation(g, QuantStrategy::grid_of(4)).relation;
        CHECK(g4.subset_of(g2));
        CHECK(g2.subset_of(pure));
        const SimReport report = pa_simulation(g, QuantStrategy::grid_of(2));
        CHECK(report.iterations <= static_cast<int>(g.num_states() * g.num_states()) + 1);
    }
}

TEST_CASE("property: the grid oracle never keeps a pair the engine removes")
{
    support::Gen gen(41);
    for (int i = 0; i < 30; ++i) {
        const GameStructure g = gen.model(gen.between(2, 3), gen.between(1, 2), gen.between(1, 2), gen.between(0, 2), 4);
        CHECK(brute_sim(g, 4).subset_of(pa_simulation(g, QuantStrategy::grid_of(4)).relation));
        // At K=1 the oracle's answer and interpolation are pure too, so only inclusion holds.
        CHECK(brute_sim(g, 1).subset_of(pa_simulation(g, QuantStrategy::pure()).relation));
    }
}

TEST_CASE("fixtures: oracle agreement, reflexivity and transitivity")
{
    for (const auto& name : support::model_names()) {
        CAPTURE(name);
        const GameStructure g = load(name);
        const Relation g4 = pa_simulation(g, QuantStrategy::grid_of(4)).relation;
        CHECK(g4 == brute_sim(g, 4));
        CHECK(Relation::identity(g.num_states()).subset_of(g4));
        CHECK(g4.is_transitive());
        CHECK(brute_sim(g, 1).subset_of(pa_simulation(g, QuantStrategy::pure()).relation));
    }
}

TEST_CASE("pure oracle misses answers that need a mixed answer")
{
    // (u,w): x at u yields goal and other with 1/2 each; only w's answer 1/2 x + 1/2 y matches.
    const GameStructure dup = load("dup");
    const StateId w = state_named(dup, "w");
    const StateId u = state_named(dup, "u");
    CHECK(pa_simulation(dup, QuantStrategy::pure()).relation.contains(u, w));
    CHECK_FALSE(brute_sim(dup, 1).contains(u, w));
    CHECK(brute_sim(dup, 2).contains(u, w));
    CHECK(brute_sim(load("rps"), 1) == pa_simulation(load("rps"), QuantStrategy::pure()).relation);
}

TEST_CASE("pure tests over-approximate and can break transitivity")
{
    const GameStructure dup = load("dup");
    const Relation pure = pa_simulation(dup, QuantStrategy::pure()).relation;
    CHECK(pure.contains(state_named(dup, "u"), state_named(dup, "w")));
    CHECK(pure.contains(state_named(dup, "w"), state_named(dup, "other")));
    CHECK_FALSE(pure.contains(state_named(dup, "u"), state_named(dup, "other")));
    CHECK(pa_simulation(dup, QuantStrategy::grid_of(2)).relation.is_transitive());
}
