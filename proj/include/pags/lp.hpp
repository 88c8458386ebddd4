#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pags/rational.hpp"

namespace pags {

/// A pure feasibility problem over rational variables with rational bounds and
/// linear constraints. There is no objective.
class LinearProblem
{
public:
    enum class Sense { Le, Eq, Ge };

    struct Variable
    {
        std::string name;
        std::optional<Rational> lower;
        std::optional<Rational> upper;
    };

    using Term = std::pair<std::size_t, Rational>;

    struct Constraint
    {
        std::vector<Term> terms;
        Sense sense = Sense::Eq;
        Rational rhs;
    };

    /// Adds a variable, nonnegative by default.
    std::size_t add_variable(std::string name, std::optional<Rational> lower = Rational(0),
                             std::optional<Rational> upper = std::nullopt);

    /// Duplicate indices in `terms` are summed.
    void add_constraint(std::vector<Term> terms, Sense sense, Rational rhs);

    [[nodiscard]] const std::vector<Variable>& variables() const { return _vars; }
    [[nodiscard]] const std::vector<Constraint>& constraints() const { return _rows; }
    [[nodiscard]] std::size_t num_variables() const { return _vars.size(); }

    /// True iff `x` satisfies every bound and constraint exactly.
    [[nodiscard]] bool satisfied_by(const std::vector<Rational>& x) const;

private:
    std::vector<Variable> _vars;
    std::vector<Constraint> _rows;
};

/// Exact rational feasibility via a two-phase simplex with Bland's
/// lowest-index pivoting. Returns an assignment satisfying every constraint,
/// or nullopt iff none exists. Deterministic for a given problem.
std::optional<std::vector<Rational>> lp_feasible(const LinearProblem& problem);

} // namespace pags
