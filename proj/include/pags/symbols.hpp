#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pags {

/// Strongly typed declaration index. `Tag` keeps states, actions and
/// propositions from being mixed up.
template <typename Tag>
struct Id
{
    std::uint32_t index = 0;

    friend auto operator<=>(const Id&, const Id&) = default;
};

struct StateTag;
struct ActionTag;
struct PropTag;

using StateId = Id<StateTag>;
using ActionId = Id<ActionTag>;
using PropId = Id<PropTag>;

/// Interned names in declaration order.
template <typename IdT>
class SymbolTable
{
public:
    /// Returns nullopt if `name` is already declared.
    std::optional<IdT> declare(std::string name)
    {
        if (_index.contains(name))
            return std::nullopt;
        IdT id{static_cast<std::uint32_t>(_names.size())};
        _index.emplace(name, id);
        _names.push_back(std::move(name));
        return id;
    }

    /// Declares `name` unless present; returns its id either way.
    IdT intern(const std::string& name)
    {
        if (auto id = find(name))
            return *id;
        return *declare(name);
    }

    [[nodiscard]] std::optional<IdT> find(std::string_view name) const
    {
        auto it = _index.find(std::string(name));
        if (it == _index.end())
            return std::nullopt;
        return it->second;
    }

    [[nodiscard]] const std::string& name(IdT id) const { return _names.at(id.index); }
    [[nodiscard]] std::size_t size() const { return _names.size(); }
    [[nodiscard]] bool empty() const { return _names.empty(); }
    [[nodiscard]] const std::vector<std::string>& names() const { return _names; }

    [[nodiscard]] std::vector<IdT> ids() const
    {
        std::vector<IdT> out;
        out.reserve(_names.size());
        for (std::uint32_t i = 0; i < _names.size(); ++i)
            out.push_back(IdT{i});
        return out;
    }

    friend bool operator==(const SymbolTable& a, const SymbolTable& b) { return a._names == b._names; }

private:
    std::vector<std::string> _names;
    std::unordered_map<std::string, IdT> _index;
};

using StateTable = SymbolTable<StateId>;

} // namespace pags

template <typename Tag>
struct std::hash<pags::Id<Tag>>
{
    std::size_t operator()(const pags::Id<Tag>& id) const noexcept { return std::hash<std::uint32_t>{}(id.index); }
};
