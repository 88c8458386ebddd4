#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pags/rational.hpp"
#include "pags/symbols.hpp"

namespace pags {

/// Sparse map from states to probability mass, sorted by state index.
///
/// Distributions built with `from_entries` or `point` satisfy the invariants
/// (every entry positive, exact total mass one). `unchecked` is for data that
/// has not been validated yet, such as raw transition rows; `is_valid` tells the
/// two apart.
class Distribution
{
public:
    using Entry = std::pair<StateId, Rational>;

    Distribution() = default;

    static Distribution point(StateId s);

    /// Throws PreconditionError unless entries are positive, distinct and sum to one.
    static Distribution from_entries(std::vector<Entry> entries);

    /// Sorts by state and merges duplicates; no other checks.
    static Distribution unchecked(std::vector<Entry> entries);

    [[nodiscard]] const std::vector<Entry>& entries() const { return _entries; }
    [[nodiscard]] std::size_t size() const { return _entries.size(); }
    [[nodiscard]] bool empty() const { return _entries.empty(); }

    /// Mass at `s`, zero outside the support.
    [[nodiscard]] Rational operator()(StateId s) const;
    [[nodiscard]] Rational total_mass() const;
    [[nodiscard]] bool is_valid() const;
    [[nodiscard]] bool is_point() const { return _entries.size() == 1; }
    [[nodiscard]] std::vector<StateId> support() const;
    [[nodiscard]] bool contains(StateId s) const;

    /// Canonical text key; equal distributions have equal keys.
    [[nodiscard]] std::string key() const;

    friend bool operator==(const Distribution& a, const Distribution& b) { return a._entries == b._entries; }

private:
    std::vector<Entry> _entries;
};

/// `s0:1/2,s1:1/2` using the given names.
std::string format_distribution(const Distribution& d, const StateTable& names);

/// Parses `name:rat(,name:rat)*`. Unknown names are declared in `names` when
/// `intern` is true, otherwise rejected. The result is validated.
Distribution parse_distribution(std::string_view text, StateTable& names, bool intern = false);
Distribution parse_distribution(std::string_view text, const StateTable& names);

} // namespace pags
