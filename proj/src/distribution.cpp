#include "pags/distribution.hpp"

#include <algorithm>
#include <cctype>

#include "pags/error.hpp"

namespace pags {

Distribution Distribution::point(StateId s)
{
    Distribution d;
    d._entries.emplace_back(s, Rational(1));
    return d;
}

Distribution Distribution::unchecked(std::vector<Entry> entries)
{
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.first < b.first; });
    Distribution d;
    for (auto& e : entries) {
        if (!d._entries.empty() && d._entries.back().first == e.first)
            d._entries.back().second += e.second;
        else
            d._entries.push_back(std::move(e));
    }
    return d;
}

Distribution Distribution::from_entries(std::vector<Entry> entries)
{
    std::vector<StateId> seen;
    for (const auto& [s, p] : entries) {
        if (p.sign() <= 0)
            throw PreconditionError("distribution entry for state #" + std::to_string(s.index) + " is not positive");
        seen.push_back(s);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw PreconditionError("distribution lists a state twice");
    Distribution d = unchecked(std::move(entries));
    if (d.total_mass() != Rational(1))
        throw PreconditionError("distribution sums to " + d.total_mass().to_string() + ", not 1");
    return d;
}

Rational Distribution::operator()(StateId s) const
{
    auto it = std::lower_bound(_entries.begin(), _entries.end(), s,
                               [](const Entry& e, StateId id) { return e.first < id; });
    if (it != _entries.end() && it->first == s)
        return it->second;
    return Rational(0);
}

Rational Distribution::total_mass() const
{
    Rational total;
    for (const auto& e : _entries)
        total += e.second;
    return total;
}

bool Distribution::is_valid() const
{
    for (const auto& e : _entries)
        if (e.second.sign() <= 0)
            return false;
    return !_entries.empty() && total_mass() == Rational(1);
}

std::vector<StateId> Distribution::support() const
{
    std::vector<StateId> out;
    out.reserve(_entries.size());
    for (const auto& e : _entries)
        out.push_back(e.first);
    return out;
}

bool Distribution::contains(StateId s) const
{
    return std::binary_search(_entries.begin(), _entries.end(), Entry{s, Rational(0)},
                              [](const Entry& a, const Entry& b) { return a.first < b.first; });
}

std::string Distribution::key() const
{
    std::string k;
    for (const auto& [s, p] : _entries) {
        k += std::to_string(s.index);
        k += ':';
        k += p.to_string();
        k += ',';
    }
    return k;
}

std::string format_distribution(const Distribution& d, const StateTable& names)
{
    std::string out;
    for (const auto& [s, p] : d.entries()) {
        if (!out.empty())
            out += ',';
        out += names.name(s);
        out += ':';
        out += p.to_string();
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

template <typename Resolve>
Distribution parse_with(std::string_view text, Resolve&& resolve)
{
    std::vector<Distribution::Entry> entries;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string_view item = trim(text.substr(pos, comma - pos));
        const std::size_t column = pos + 1;
        const auto colon = item.find(':');
        if (item.empty() || colon == std::string_view::npos)
            throw ParseError("expected name:probability, got '" + std::string(item) + "'", 1, column);
        const std::string name(trim(item.substr(0, colon)));
        Rational p;
        try {
            p = Rational::parse(trim(item.substr(colon + 1)));
        } catch (const Error& e) {
            throw ParseError(e.what(), 1, column);
        }
        entries.emplace_back(resolve(name, column), p);
        pos = comma + 1;
    }
    return Distribution::from_entries(std::move(entries));
}

} // namespace

Distribution parse_distribution(std::string_view text, StateTable& names, bool intern)
{
    return parse_with(text, [&](const std::string& name, std::size_t column) {
        if (intern)
            return names.intern(name);
        auto id = names.find(name);
        if (!id)
            throw ParseError("unknown state '" + name + "'", 1, column);
        return *id;
    });
}

Distribution parse_distribution(std::string_view text, const StateTable& names)
{
    return parse_with(text, [&](const std::string& name, std::size_t column) {
        auto id = names.find(name);
        if (!id)
            throw ParseError("unknown state '" + name + "'", 1, column);
        return *id;
    });
}

} // namespace pags
