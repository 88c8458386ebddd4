#include "pags/lp.hpp"

#include <algorithm>
#include <map>

#include "pags/error.hpp"

namespace pags {

std::size_t LinearProblem::add_variable(std::string name, std::optional<Rational> lower, std::optional<Rational> upper)
{
    if (lower && upper && *upper < *lower)
        throw PreconditionError("variable " + name + " has empty bounds");
    _vars.push_back(Variable{std::move(name), std::move(lower), std::move(upper)});
    return _vars.size() - 1;
}

void LinearProblem::add_constraint(std::vector<Term> terms, Sense sense, Rational rhs)
{
    std::map<std::size_t, Rational> merged;
    for (auto& [index, coef] : terms) {
        if (index >= _vars.size())
            throw PreconditionError("constraint refers to unknown variable " + std::to_string(index));
        merged[index] += coef;
    }
    Constraint c;
    c.sense = sense;
    c.rhs = std::move(rhs);
    for (auto& [index, coef] : merged)
        if (!coef.is_zero())
            c.terms.emplace_back(index, std::move(coef));
    _rows.push_back(std::move(c));
}

bool LinearProblem::satisfied_by(const std::vector<Rational>& x) const
{
    if (x.size() != _vars.size())
        return false;
    for (std::size_t j = 0; j < _vars.size(); ++j) {
        if (_vars[j].lower && x[j] < *_vars[j].lower)
            return false;
        if (_vars[j].upper && x[j] > *_vars[j].upper)
            return false;
    }
    for (const Constraint& c : _rows) {
        Rational lhs;
        for (const auto& [index, coef] : c.terms)
            lhs += coef * x[index];
        switch (c.sense) {
        case Sense::Le:
            if (lhs > c.rhs)
                return false;
            break;
        case Sense::Eq:
            if (lhs != c.rhs)
                return false;
            break;
        case Sense::Ge:
            if (lhs < c.rhs)
                return false;
            break;
        }
    }
    return true;
}

namespace {

// Original variable x = offset + sum(coef * y_col) over nonnegative columns y.
struct Substitution
{
    mpq_class offset;
    std::vector<std::pair<std::size_t, mpq_class>> columns;
};

class Tableau
{
public:
    Tableau(std::size_t rows, std::size_t cols) : _rows(rows), _cols(cols), _a(rows * (cols + 1)), _basis(rows) {}

    mpq_class& at(std::size_t r, std::size_t c) { return _a[r * (_cols + 1) + c]; }
    mpq_class& rhs(std::size_t r) { return _a[r * (_cols + 1) + _cols]; }
    std::size_t& basis(std::size_t r) { return _basis[r]; }

    std::vector<mpq_class>& cost() { return _cost; }

    void set_cost(std::vector<mpq_class> c) { _cost = std::move(c); }

    /// Phase-one simplex with Bland's rule. Cost vector has cols + 1 entries,
    /// the last being the negated objective value.
    void minimize()
    {
        for (;;) {
            std::size_t entering = _cols;
            for (std::size_t j = 0; j < _cols; ++j) {
                if (sgn(_cost[j]) < 0) {
                    entering = j;
                    break;
                }
            }
            if (entering == _cols)
                return;

            std::size_t leaving = _rows;
            mpq_class best_ratio;
            for (std::size_t i = 0; i < _rows; ++i) {
                const mpq_class& a = at(i, entering);
                if (sgn(a) <= 0)
                    continue;
                mpq_class ratio = rhs(i) / a;
                if (leaving == _rows || ratio < best_ratio || (ratio == best_ratio && _basis[i] < _basis[leaving])) {
                    leaving = i;
                    best_ratio = ratio;
                }
            }
            // Phase one is bounded below by zero, so an entering column always has a
            // positive entry.
            if (leaving == _rows)
                throw Error("simplex: unbounded phase-one direction");
            pivot(leaving, entering);
        }
    }

    void pivot(std::size_t row, std::size_t col)
    {
        const std::size_t width = _cols + 1;
        mpq_class p = at(row, col);
        std::vector<std::size_t> nonzero;
        for (std::size_t c = 0; c < width; ++c) {
            mpq_class& v = _a[row * width + c];
            if (sgn(v) != 0) {
                v /= p;
                nonzero.push_back(c);
            }
        }
        for (std::size_t r = 0; r < _rows; ++r) {
            if (r == row)
                continue;
            mpq_class factor = at(r, col);
            if (sgn(factor) == 0)
                continue;
            for (std::size_t c : nonzero)
                _a[r * width + c] -= factor * _a[row * width + c];
        }
        mpq_class factor = _cost[col];
        if (sgn(factor) != 0)
            for (std::size_t c : nonzero)
                _cost[c] -= factor * _a[row * width + c];
        _basis[row] = col;
    }

private:
    std::size_t _rows;
    std::size_t _cols;
    std::vector<mpq_class> _a;
    std::vector<std::size_t> _basis;
    std::vector<mpq_class> _cost;
};

} // namespace

std::optional<std::vector<Rational>> lp_feasible(const LinearProblem& problem)
{
    using Sense = LinearProblem::Sense;
    const auto& vars = problem.variables();

    // Shift every variable onto a nonnegative column (or a difference of two).
    std::vector<Substitution> subst(vars.size());
    std::size_t ncols = 0;
    struct Row
    {
        std::vector<std::pair<std::size_t, mpq_class>> terms;
        Sense sense;
        mpq_class rhs;
    };
    std::vector<Row> rows;
    for (std::size_t j = 0; j < vars.size(); ++j) {
        const auto& v = vars[j];
        if (v.lower) {
            subst[j].offset = v.lower->raw();
            subst[j].columns.emplace_back(ncols++, mpq_class(1));
            if (v.upper)
                rows.push_back(Row{{{ncols - 1, mpq_class(1)}}, Sense::Le, mpq_class(v.upper->raw() - v.lower->raw())});
        } else if (v.upper) {
            subst[j].offset = v.upper->raw();
            subst[j].columns.emplace_back(ncols++, mpq_class(-1));
        } else {
            subst[j].columns.emplace_back(ncols++, mpq_class(1));
            subst[j].columns.emplace_back(ncols++, mpq_class(-1));
        }
    }
    for (const auto& c : problem.constraints()) {
        Row row{{}, c.sense, c.rhs.raw()};
        std::map<std::size_t, mpq_class> merged;
        for (const auto& [index, coef] : c.terms) {
            row.rhs -= coef.raw() * subst[index].offset;
            for (const auto& [col, k] : subst[index].columns)
                merged[col] += coef.raw() * k;
        }
        for (auto& [col, k] : merged)
            if (sgn(k) != 0)
                row.terms.emplace_back(col, k);
        if (row.terms.empty()) {
            const int s = sgn(row.rhs);
            const bool ok = (c.sense == Sense::Eq && s == 0) || (c.sense == Sense::Le && s >= 0) ||
                            (c.sense == Sense::Ge && s <= 0);
            if (!ok)
                return std::nullopt;
            continue;
        }
        rows.push_back(std::move(row));
    }

    // Slack columns, then sign normalisation, then artificials where needed.
    std::vector<std::optional<std::size_t>> slack(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].sense != Sense::Eq)
            slack[i] = ncols++;
    std::vector<bool> flip(rows.size());
    std::vector<std::optional<std::size_t>> basic(rows.size());
    const std::size_t first_artificial = ncols;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        flip[i] = sgn(rows[i].rhs) < 0;
        const bool slack_positive = slack[i] && ((rows[i].sense == Sense::Le) != flip[i]);
        if (slack_positive)
            basic[i] = *slack[i];
    }
    std::vector<std::size_t> artificial_of(rows.size(), 0);
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (!basic[i])
            artificial_of[i] = ncols++;

    Tableau t(rows.size(), ncols);
    std::vector<mpq_class> cost(ncols + 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const mpq_class sign = flip[i] ? -1 : 1;
        for (const auto& [col, k] : rows[i].terms)
            t.at(i, col) = sign * k;
        if (slack[i])
            t.at(i, *slack[i]) = sign * (rows[i].sense == Sense::Le ? 1 : -1);
        t.rhs(i) = sign * rows[i].rhs;
        if (basic[i]) {
            t.basis(i) = *basic[i];
        } else {
            t.at(i, artificial_of[i]) = 1;
            t.basis(i) = artificial_of[i];
            // Reduced costs: subtract each artificial row from the unit cost vector.
            for (std::size_t c = 0; c < ncols; ++c)
                if (c < first_artificial)
                    cost[c] -= t.at(i, c);
            cost[ncols] -= t.rhs(i);
        }
    }
    t.set_cost(std::move(cost));
    t.minimize();

    if (sgn(t.cost()[ncols]) != 0)
        return std::nullopt;

    std::vector<mpq_class> y(ncols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        y[t.basis(i)] = t.rhs(i);

    std::vector<Rational> x;
    x.reserve(vars.size());
    for (const auto& s : subst) {
        mpq_class v = s.offset;
        for (const auto& [col, k] : s.columns)
            v += k * y[col];
        x.emplace_back(v);
    }
    return x;
}

} // namespace pags
