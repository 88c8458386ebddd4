#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pags/distribution.hpp"
#include "pags/symbols.hpp"

namespace pags {

enum class Player { One = 1, Two = 2 };

/// Two-player probabilistic concurrent game structure.
///
/// Built incrementally (by the parser or by tests), then checked with
/// `validate_model`. Once valid it is treated as immutable; all engines take
/// it by const reference.
class GameStructure
{
public:
    GameStructure() = default;
    explicit GameStructure(std::string name) : _name(std::move(name)) {}

    // Construction. Each returns nullopt / throws ModelError on duplicates.
    StateId add_state(const std::string& name);
    PropId add_prop(const std::string& name);
    ActionId add_action(Player who, const std::string& name);
    void set_init(StateId s) { _init = s; }
    void add_label(StateId s, PropId p);
    /// Stores a row as given; validity is checked by `validate_model`.
    void set_row(StateId s, ActionId a1, ActionId a2, Distribution row);
    void set_name(std::string name) { _name = std::move(name); }

    [[nodiscard]] const std::string& name() const { return _name; }
    [[nodiscard]] const StateTable& states() const { return _states; }
    [[nodiscard]] const SymbolTable<PropId>& props() const { return _props; }
    [[nodiscard]] const SymbolTable<ActionId>& actions(Player who) const
    {
        return who == Player::One ? _acts1 : _acts2;
    }
    [[nodiscard]] std::size_t num_states() const { return _states.size(); }
    [[nodiscard]] std::size_t num_actions(Player who) const { return actions(who).size(); }
    [[nodiscard]] std::optional<StateId> init() const { return _init; }

    /// Sorted by declaration index.
    [[nodiscard]] const std::vector<PropId>& labels(StateId s) const { return _labels.at(s.index); }
    [[nodiscard]] bool has_label(StateId s, PropId p) const;

    /// Raw table entry, absent if never set.
    [[nodiscard]] const std::optional<Distribution>& row(StateId s, ActionId a1, ActionId a2) const;

    /// True when every row of `s` is the point distribution on `s`.
    [[nodiscard]] bool is_absorbing(StateId s) const;

    /// True when the row at `s` does not depend on the given player's action.
    [[nodiscard]] bool ignores_player(StateId s, Player who) const;

    friend bool operator==(const GameStructure& a, const GameStructure& b);

private:
    [[nodiscard]] std::size_t slot(StateId s, ActionId a1, ActionId a2) const;
    void resize_table();

    std::string _name;
    StateTable _states;
    SymbolTable<PropId> _props;
    SymbolTable<ActionId> _acts1;
    SymbolTable<ActionId> _acts2;
    std::optional<StateId> _init;
    std::vector<std::vector<PropId>> _labels;
    std::vector<std::optional<Distribution>> _table;
    std::array<std::size_t, 3> _table_dims{};
};

/// Parses the `.pgs` text format and validates the result. Throws ParseError
/// for syntax problems and ModelError for semantic ones.
GameStructure parse_model(std::string_view text);

/// Returns one message per violated invariant; empty iff the model is valid.
std::vector<std::string> validate_model(const GameStructure& g);

/// Canonical `.pgs` text. `parse_model(serialize_model(g)) == g`.
std::string serialize_model(const GameStructure& g);

/// The distribution reached from `s` under the joint action. Throws ModelError
/// for identifiers outside the model or a missing row.
const Distribution& step_state(const GameStructure& g, StateId s, ActionId a1, ActionId a2);

/// Convenience lookups that throw ModelError on unknown names.
StateId state_named(const GameStructure& g, std::string_view name);
ActionId action_named(const GameStructure& g, Player who, std::string_view name);
PropId prop_named(const GameStructure& g, std::string_view name);

} // namespace pags
