#pragma once

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pags/distribution.hpp"
#include "pags/formula.hpp"
#include "pags/model.hpp"
#include "pags/prob.hpp"

namespace support {

inline std::string fixture(const std::string& name)
{
    return std::string(PAGS_FIXTURES) + "/" + name;
}

inline std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline pags::GameStructure load(const std::string& name)
{
    return pags::parse_model(read_text(fixture(name + ".pgs")));
}

inline const std::vector<std::string>& model_names()
{
    static const std::vector<std::string> names{"rps", "halfway", "dup", "asym"};
    return names;
}

/// Lines of fixtures/formulas/<name>.fml, skipping blanks and comments.
inline std::vector<std::string> formula_suite(const std::string& name)
{
    std::vector<std::string> out;
    std::istringstream in(read_text(fixture("formulas/" + name + ".fml")));
    for (std::string line; std::getline(in, line);)
        if (!line.empty() && line[0] != '#')
            out.push_back(line);
    return out;
}

inline pags::Distribution dist(const pags::GameStructure& g, const std::string& text)
{
    return pags::parse_distribution(text, g.states());
}

inline pags::Distribution point(const pags::GameStructure& g, const std::string& s)
{
    return pags::Distribution::point(pags::state_named(g, s));
}

/// Seeded generators for property tests.
class Gen
{
public:
    explicit Gen(std::uint64_t seed) : _rng(seed) {}

    unsigned below(unsigned n) { return std::uniform_int_distribution<unsigned>(0, n - 1)(_rng); }
    unsigned between(unsigned lo, unsigned hi) { return lo + below(hi - lo + 1); }
    bool coin(unsigned percent = 50) { return below(100) < percent; }

    /// Positive integer parts summing to `total`, one per slot.
    std::vector<unsigned> composition(unsigned total, unsigned slots)
    {
        std::vector<unsigned> parts(slots, 1);
        for (unsigned i = slots; i < total; ++i)
            ++parts[below(slots)];
        return parts;
    }

    /// Weights with a common denominator of at most `max_den`.
    std::vector<pags::Rational> weights(unsigned count, unsigned max_den)
    {
        const unsigned den = between(std::max(count, 1u), std::max(max_den, count));
        std::vector<pags::Rational> out;
        for (unsigned c : composition(den, count))
            out.emplace_back(static_cast<long>(c), static_cast<long>(den));
        return out;
    }

    /// Distribution over states 0..n-1 with support of at most `max_support`.
    pags::Distribution distribution(unsigned n, unsigned max_support, unsigned max_den)
    {
        std::vector<unsigned> states(n);
        for (unsigned i = 0; i < n; ++i)
            states[i] = i;
        std::shuffle(states.begin(), states.end(), _rng);
        const unsigned k = between(1, std::min(n, max_support));
        const auto w = weights(k, max_den);
        std::vector<pags::Distribution::Entry> entries;
        for (unsigned i = 0; i < k; ++i)
            entries.emplace_back(pags::StateId{states[i]}, w[i]);
        return pags::Distribution::from_entries(std::move(entries));
    }

    pags::Relation relation(unsigned n, unsigned m, unsigned percent)
    {
        pags::Relation r;
        for (unsigned s = 0; s < n; ++s)
            for (unsigned t = 0; t < m; ++t)
                if (coin(percent))
                    r.insert(pags::StateId{s}, pags::StateId{t});
        return r;
    }

    pags::ActionLottery lottery(unsigned n, unsigned max_den)
    {
        std::vector<pags::Rational> l(n, pags::Rational(0));
        const unsigned k = between(1, n);
        const auto w = weights(k, max_den);
        std::vector<unsigned> idx(n);
        for (unsigned i = 0; i < n; ++i)
            idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), _rng);
        for (unsigned i = 0; i < k; ++i)
            l[idx[i]] = w[i];
        return l;
    }

    pags::MixedAction mixed(const pags::GameStructure& g, pags::Player who, unsigned max_den)
    {
        std::vector<pags::ActionLottery> per;
        for (std::size_t s = 0; s < g.num_states(); ++s)
            per.push_back(lottery(static_cast<unsigned>(g.num_actions(who)), max_den));
        return pags::MixedAction(who, std::move(per));
    }

    /// Random valid model. Some states are made absorbing so that fixpoints
    /// and simulations have something to settle on.
    pags::GameStructure model(unsigned n, unsigned n1, unsigned n2, unsigned props, unsigned max_den)
    {
        pags::GameStructure g("random");
        for (unsigned i = 0; i < n; ++i)
            g.add_state("q" + std::to_string(i));
        for (unsigned i = 0; i < props; ++i)
            g.add_prop("p" + std::to_string(i));
        for (unsigned i = 0; i < n1; ++i)
            g.add_action(pags::Player::One, "a" + std::to_string(i));
        for (unsigned i = 0; i < n2; ++i)
            g.add_action(pags::Player::Two, "b" + std::to_string(i));
        g.set_init(pags::StateId{0});
        for (unsigned s = 0; s < n; ++s) {
            for (unsigned p = 0; p < props; ++p)
                if (coin(40))
                    g.add_label(pags::StateId{s}, pags::PropId{p});
            const bool absorbing = s > 0 && coin(30);
            for (unsigned a = 0; a < n1; ++a)
                for (unsigned b = 0; b < n2; ++b)
                    g.set_row(pags::StateId{s}, pags::ActionId{a}, pags::ActionId{b},
                              absorbing ? pags::Distribution::point(pags::StateId{s})
                                        : distribution(n, 2, max_den));
        }
        return g;
    }

    /// Random closed formula over the model's propositions.
    pags::FormulaPtr formula(const pags::GameStructure& g, unsigned depth, bool fixpoints = false)
    {
        namespace f = pags::fml;
        const auto props = g.props().ids();
        auto literal = [&]() -> pags::FormulaPtr {
            if (props.empty())
                return coin() ? f::top() : f::bottom();
            const std::string& name = g.props().name(props[below(static_cast<unsigned>(props.size()))]);
            return coin() ? f::prop(name) : f::neg(name);
        };
        if (depth == 0)
            return coin(85) ? literal() : (coin() ? f::top() : f::bottom());
        switch (below(fixpoints ? 7 : 6)) {
        case 0:
            return f::conj({formula(g, depth - 1), formula(g, depth - 1)});
        case 1:
            return f::disj({formula(g, depth - 1), formula(g, depth - 1)});
        case 2:
            return f::enforce(formula(g, depth - 1));
        case 3: {
            const auto w = weights(2, 4);
            return f::sum({{w[0], formula(g, depth - 1)}, {w[1], formula(g, depth - 1)}});
        }
        case 4:
            return f::mix({formula(g, depth - 1), formula(g, depth - 1)});
        case 5:
            return literal();
        default:
            return f::mu("Z", f::disj({literal(), f::enforce(f::var("Z"))}));
        }
    }

    std::mt19937_64& rng() { return _rng; }

private:
    std::mt19937_64 _rng;
};

} // namespace support
