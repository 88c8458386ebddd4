#include <map>

#include "pags/logic.hpp"
#include "pags/prob.hpp"
#include "pags/sim.hpp"

namespace pags {

namespace {

class CharBuilder
{
public:
    CharBuilder(const GameStructure& g, unsigned k) : _g(g), _grid(grid_lotteries(g.num_actions(Player::One), k)) {}

    FormulaPtr state(StateId s, unsigned n)
    {
        auto key = std::make_pair(s.index, n);
        if (auto it = _states.find(key); it != _states.end())
            return it->second;
        std::vector<FormulaPtr> parts;
        if (!_g.props().ids().empty())
            parts.push_back(labels(s));
        if (n > 0) {
            const std::size_t n2 = _g.num_actions(Player::Two);
            std::set<std::string> seen;
            for (const auto& l1 : _grid) {
                std::vector<FormulaPtr> branches;
                std::string key_text;
                for (std::uint32_t b = 0; b < n2; ++b) {
                    Distribution d = step_lotteries(_g, s, l1, pure_lottery(n2, ActionId{b}));
                    key_text += d.key() + "|";
                    branches.push_back(dist(d, n - 1));
                }
                if (seen.insert(key_text).second)
                    parts.push_back(fml::enforce(fml::mix(std::move(branches))));
            }
        }
        return _states.emplace(key, share(fml::conj(std::move(parts)))).first->second;
    }

    FormulaPtr dist(const Distribution& d, unsigned n)
    {
        auto key = std::make_pair(d.key(), n);
        if (auto it = _dists.find(key); it != _dists.end())
            return it->second;
        std::vector<std::pair<Rational, FormulaPtr>> parts;
        for (const auto& [t, p] : d.entries())
            parts.emplace_back(p, state(t, n));
        return _dists.emplace(key, share(fml::sum(std::move(parts)))).first->second;
    }

private:
    FormulaPtr labels(StateId s)
    {
        std::vector<FormulaPtr> lits;
        for (PropId p : _g.props().ids()) {
            const std::string& name = _g.props().name(p);
            lits.push_back(_g.has_label(s, p) ? fml::prop(name) : fml::neg(name));
        }
        return share(fml::conj(std::move(lits)));
    }

    // Structurally identical subformulas become one node.
    FormulaPtr share(FormulaPtr f)
    {
        auto [it, inserted] = _pool.emplace(to_string(*f), f);
        return it->second;
    }

    const GameStructure& _g;
    std::vector<ActionLottery> _grid;
    std::map<std::pair<std::uint32_t, unsigned>, FormulaPtr> _states;
    std::map<std::pair<std::string, unsigned>, FormulaPtr> _dists;
    std::map<std::string, FormulaPtr> _pool;
};

} // namespace

FormulaPtr char_formula_state(const GameStructure& g, StateId s, unsigned n, unsigned k)
{
    return CharBuilder(g, k).state(s, n);
}

FormulaPtr char_formula_dist(const GameStructure& g, const Distribution& d, unsigned n, unsigned k)
{
    return CharBuilder(g, k).dist(d, n);
}

EvalResult logic_preorder(const GameStructure& g, StateId s, StateId t, unsigned n, unsigned k,
                          const EvalOptions& opts)
{
    return eval(g, Distribution::point(t), char_formula_state(g, s, n, k), opts);
}

} // namespace pags
