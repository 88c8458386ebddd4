#include "pags/rational.hpp"

#include <cctype>
#include <functional>
#include <ostream>
#include <utility>

#include "pags/error.hpp"

namespace pags {

namespace {

bool all_digits(std::string_view s)
{
    if (s.empty())
        return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            return false;
    return true;
}

} // namespace

Rational::Rational(long num, long den)
{
    if (den == 0)
        throw Error("rational with zero denominator");
    _value = mpq_class(num, den);
    _value.canonicalize();
}

Rational::Rational(mpq_class value) : _value(std::move(value))
{
    _value.canonicalize();
}

Rational Rational::parse(std::string_view text)
{
    std::string_view body = text;
    bool negative = false;
    if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
        negative = body.front() == '-';
        body.remove_prefix(1);
    }
    if (body.find('.') != std::string_view::npos)
        throw Error("decimal literal '" + std::string(text) + "' is not allowed; write a fraction n/d");
    const auto slash = body.find('/');
    const std::string_view num = body.substr(0, slash);
    const std::string_view den = slash == std::string_view::npos ? std::string_view("1") : body.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den))
        throw Error("malformed rational '" + std::string(text) + "'");
    mpz_class n(std::string(num), 10);
    mpz_class d(std::string(den), 10);
    if (d == 0)
        throw Error("rational '" + std::string(text) + "' has zero denominator");
    if (negative)
        n = -n;
    return Rational(mpq_class(n, d));
}

Rational& Rational::operator/=(const Rational& o)
{
    if (o.is_zero())
        throw Error("division by zero");
    _value /= o._value;
    return *this;
}

std::string Rational::to_string() const
{
    std::string s = _value.get_num().get_str();
    if (_value.get_den() != 1) {
        s += '/';
        s += _value.get_den().get_str();
    }
    return s;
}

std::size_t Rational::hash() const
{
    // Canonical form makes the string representation a valid hash key.
    return std::hash<std::string>{}(to_string());
}

std::ostream& operator<<(std::ostream& os, const Rational& r)
{
    return os << r.to_string();
}

} // namespace pags
